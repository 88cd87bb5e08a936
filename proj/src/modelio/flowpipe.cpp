#include "json_util.hpp"

namespace setreach
{

using namespace jsonio;

namespace
{

FlowStatus parse_status(const json& j, const std::string& path)
{
    const std::string s = get_string(j, path);
    for (FlowStatus st : {FlowStatus::Completed, FlowStatus::BadReached, FlowStatus::Fixpoint, FlowStatus::Horizon,
             FlowStatus::Incomplete, FlowStatus::Stalled})
        if (to_string(st) == s)
            return st;
    fail(path, "unknown status '" + s + "'");
}

ModelKind parse_kind(const json& j, const std::string& path)
{
    const std::string s = get_string(j, path);
    for (ModelKind k : {ModelKind::LinearDiscrete, ModelKind::LinearContinuous, ModelKind::Hybrid, ModelKind::Nonlinear})
        if (to_string(k) == s)
            return k;
    fail(path, "unknown kind '" + s + "'");
}

// Rows of `normals` are identical to the cached template: share it.
HPolytope share_normals(const HPolytope& p, Template& cache)
{
    if (cache && cache->rows() == p.normals().rows() && cache->cols() == p.normals().cols()
        && (cache->array() == p.normals().array()).all())
        return HPolytope::from_unit_normals(cache, p.offsets());
    cache = std::make_shared<const Matrix>(p.normals());
    return p;
}

} // namespace

bool operator==(const FlowpipeFile& a, const FlowpipeFile& b)
{
    if (a.schema != b.schema || a.kind != b.kind || a.dim != b.dim || a.status != b.status
        || a.status_step != b.status_step || a.over_approx != b.over_approx || a.model_hash != b.model_hash
        || a.config_json != b.config_json || a.tool_version != b.tool_version || a.warnings != b.warnings
        || a.records.size() != b.records.size())
        return false;
    for (std::size_t i = 0; i < a.records.size(); ++i)
    {
        const FlowpipeRecord& x = a.records[i];
        const FlowpipeRecord& y = b.records[i];
        if (x.pipe != y.pipe || x.step != y.step || x.mode != y.mode || x.t_lo != y.t_lo || x.t_hi != y.t_hi
            || dump17(set_json(x.set)) != dump17(set_json(y.set)))
            return false;
    }
    return true;
}

std::string write_flowpipe(const FlowpipeFile& f)
{
    json root;
    root["schema"] = f.schema;
    root["kind"] = to_string(f.kind);
    root["dim"] = f.dim;
    root["status"] = to_string(f.status);
    root["status_step"] = f.status_step;
    root["over_approx"] = f.over_approx;
    root["warnings"] = f.warnings;
    json prov;
    prov["model_hash"] = f.model_hash;
    prov["config"] = f.config_json.empty() ? json::object() : json::parse(f.config_json);
    prov["tool_version"] = f.tool_version;
    root["provenance"] = prov;
    json recs = json::array();
    for (const FlowpipeRecord& r : f.records)
    {
        json jr;
        jr["pipe"] = r.pipe;
        jr["step"] = r.step;
        jr["t"] = json::array({r.t_lo, r.t_hi});
        if (!r.mode.empty())
            jr["mode"] = r.mode;
        jr["set"] = set_json(r.set);
        recs.push_back(std::move(jr));
    }
    root["records"] = std::move(recs);
    return dump17(root);
}

FlowpipeFile read_flowpipe(const std::string& text)
{
    const json root = parse_text(text);
    check_keys(root, "",
        {"schema", "kind", "dim", "status", "status_step", "over_approx", "warnings", "provenance", "records"});
    FlowpipeFile f;
    f.schema = get_string(require(root, "", "schema"), "/schema");
    if (f.schema != kFlowpipeSchema)
        fail("/schema", "unsupported schema '" + f.schema + "' (expected " + kFlowpipeSchema + ")");
    f.kind = parse_kind(require(root, "", "kind"), "/kind");
    f.dim = static_cast<Eigen::Index>(get_count(require(root, "", "dim"), "/dim"));
    f.status = parse_status(require(root, "", "status"), "/status");
    f.status_step = get_count(require(root, "", "status_step"), "/status_step");
    f.over_approx = get_bool(require(root, "", "over_approx"), "/over_approx");
    if (has(root, "warnings"))
    {
        const json& w = root["warnings"];
        if (!w.is_array())
            fail("/warnings", "expected an array of strings");
        for (std::size_t i = 0; i < w.size(); ++i)
            f.warnings.push_back(get_string(w[i], child("/warnings", i)));
    }
    const json& prov = require(root, "", "provenance");
    check_keys(prov, "/provenance", {"model_hash", "config", "tool_version"});
    f.model_hash = get_string(require(prov, "/provenance", "model_hash"), "/provenance/model_hash");
    f.tool_version = get_string(require(prov, "/provenance", "tool_version"), "/provenance/tool_version");
    const json& cfg = require(prov, "/provenance", "config");
    require_object(cfg, "/provenance/config");
    f.config_json = cfg.empty() ? "" : dump17(cfg);

    const json& recs = require(root, "", "records");
    if (!recs.is_array())
        fail("/records", "expected an array");
    Template cache;
    for (std::size_t i = 0; i < recs.size(); ++i)
    {
        const std::string p = child("/records", i);
        const json& jr = recs[i];
        check_keys(jr, p, {"pipe", "step", "t", "mode", "set"});
        FlowpipeRecord r;
        r.pipe = get_count(require(jr, p, "pipe"), child(p, "pipe"));
        r.step = get_count(require(jr, p, "step"), child(p, "step"));
        const Vector t = get_vector(require(jr, p, "t"), child(p, "t"));
        if (t.size() != 2 || t(0) > t(1))
            fail(child(p, "t"), "expected [t_lo, t_hi] with t_lo <= t_hi");
        r.t_lo = t(0);
        r.t_hi = t(1);
        if (has(jr, "mode"))
            r.mode = get_string(jr["mode"], child(p, "mode"));
        r.set = get_set(require(jr, p, "set"), child(p, "set"), true);
        if (const auto* h = std::get_if<HPolytope>(&r.set))
            r.set = share_normals(*h, cache);
        if (dim(r.set) != f.dim)
            fail(child(p, "set"), "set has dimension " + std::to_string(dim(r.set)) + " but /dim is "
                                      + std::to_string(f.dim));
        f.records.push_back(std::move(r));
    }
    return f;
}

std::string set_to_json(const SetRep& s) { return dump17(set_json(s)); }

SetRep set_from_json(const std::string& text) { return get_set(parse_text(text), "", true); }

} // namespace setreach
