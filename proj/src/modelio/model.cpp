#include "json_util.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace setreach
{

using namespace jsonio;

namespace
{

std::string dims(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

template<class E>
E lookup(const json& j, const std::string& path, std::initializer_list<std::pair<const char*, E>> table)
{
    const std::string v = get_string(j, path);
    std::string names;
    for (const auto& [name, e] : table)
    {
        if (v == name)
            return e;
        names += (names.empty() ? "" : ", ") + std::string(name);
    }
    fail(path, "unknown value '" + v + "' (expected one of " + names + ")");
}

// "<what> has dimension <got> but <context>", context naming the other field.
void expect_dim(const std::string& path, const std::string& what, Eigen::Index got, Eigen::Index want,
    const std::string& context)
{
    if (got != want)
        fail(path, what + " has dimension " + std::to_string(got) + " but " + context);
}

std::string n_str(Eigen::Index n) { return std::to_string(n); }

// Reads the config block into cfg and records its canonical form.
void parse_config(const json& root, ModelFile& m, Eigen::Index n)
{
    const std::string path = "/config";
    const json& c = require(root, "", "config");
    check_keys(c, path,
        {"r", "L", "termination", "strategy", "bloat_policy", "template", "max_iterations", "state_bound",
            "jump_depth", "clustering", "prune", "max_entries"});
    HybridConfig& h = m.hybrid_cfg;
    ReachConfig& r = h.reach;
    json canon = json::object();

    if (has(c, "r"))
        r.r = get_number(c["r"], child(path, "r"));
    if (!(r.r > 0.0))
        fail(child(path, "r"), "time step must be positive");
    r.L = get_number(require(c, path, "L"), child(path, "L"));
    if (r.L < 0.0)
        fail(child(path, "L"), "horizon must be nonnegative");
    if (has(c, "termination"))
        r.mode = lookup<Termination>(c["termination"], child(path, "termination"),
            {{"bounded", Termination::Bounded}, {"bad_set", Termination::BadSet}, {"fixpoint", Termination::Fixpoint}});
    if (has(c, "strategy"))
        r.strategy = lookup<Strategy>(c["strategy"], child(path, "strategy"),
            {{"vertices", Strategy::Vertices}, {"facets", Strategy::Facets}, {"lazy", Strategy::Lazy}});
    if (has(c, "bloat_policy"))
        r.bloat_policy = lookup<BloatPolicy>(c["bloat_policy"], child(path, "bloat_policy"),
            {{"small_r", BloatPolicy::SmallR}, {"once_hull", BloatPolicy::OnceHull},
                {"error_ball", BloatPolicy::ErrorBall}});
    canon["template"] = "default";
    if (has(c, "template"))
    {
        const json& t = c["template"];
        const std::string tp = child(path, "template");
        if (t.is_string())
        {
            const std::string name = t.get<std::string>();
            if (name == "axis")
                r.directions = axis_template(n);
            else if (name == "octagonal")
                r.directions = octagonal_template(n);
            else if (name != "default")
                fail(tp, "unknown template '" + name + "' (expected axis, octagonal, default or a list of directions)");
            canon["template"] = name;
        }
        else
        {
            const Matrix D = get_matrix(t, tp);
            expect_dim(tp, "template", D.cols(), n, "the state dimension is " + n_str(n));
            try
            {
                r.directions = make_template(D);
            }
            catch (const std::exception& e)
            {
                fail(tp, e.what());
            }
            canon["template"] = matrix_json(*r.directions);
        }
    }
    if (has(c, "max_iterations"))
        r.max_iterations = get_count(c["max_iterations"], child(path, "max_iterations"));
    if (has(c, "state_bound"))
    {
        r.state_bound = get_number(c["state_bound"], child(path, "state_bound"));
        canon["state_bound"] = *r.state_bound;
    }
    if (has(c, "jump_depth"))
        h.jump_depth = get_count(c["jump_depth"], child(path, "jump_depth"));
    if (has(c, "clustering"))
        h.clustering = lookup<Clustering>(c["clustering"], child(path, "clustering"),
            {{"template_hull", Clustering::TemplateHull}, {"none", Clustering::None}});
    if (has(c, "prune"))
        h.prune = get_bool(c["prune"], child(path, "prune"));
    if (has(c, "max_entries"))
        h.max_entries = get_count(c["max_entries"], child(path, "max_entries"));

    if (has(root, "bad_set"))
    {
        r.bad_set = get_set(root["bad_set"], "/bad_set");
        expect_dim("/bad_set", "bad_set", setreach::dim(*r.bad_set), n, "the state dimension is " + n_str(n));
    }
    else if (r.mode == Termination::BadSet)
        fail("/bad_set", "termination bad_set needs a bad_set");

    canon["r"] = r.r;
    canon["L"] = r.L;
    canon["termination"] = to_string(r.mode);
    canon["strategy"] = to_string(r.strategy);
    canon["bloat_policy"] = to_string(r.bloat_policy);
    canon["max_iterations"] = r.max_iterations;
    canon["jump_depth"] = h.jump_depth;
    canon["clustering"] = h.clustering == Clustering::TemplateHull ? "template_hull" : "none";
    canon["prune"] = h.prune;
    canon["max_entries"] = h.max_entries;
    m.config_json = dump17(canon);
}

void parse_linear(const json& root, ModelFile& m)
{
    LinearSystem& s = m.linear;
    s.time_kind = m.kind == ModelKind::LinearDiscrete ? TimeKind::Discrete : TimeKind::Continuous;
    s.A = get_matrix(require(root, "", "A"), "/A");
    if (s.A.rows() != s.A.cols())
        fail("/A", "A must be square, got " + dims(s.A));
    const auto n = s.A.rows();
    if (has(root, "B") != has(root, "V"))
        fail(has(root, "B") ? "/V" : "/B", "B and V must be given together");
    if (has(root, "B"))
    {
        s.B = get_matrix(root["B"], "/B");
        if (s.B->rows() != n)
            fail("/B", "B is " + dims(*s.B) + " but A is " + dims(s.A));
        s.V = get_set(root["V"], "/V");
        expect_dim("/V", "V", setreach::dim(*s.V), s.B->cols(), "B is " + dims(*s.B));
    }
    if (has(root, "c"))
    {
        s.c = get_vector(root["c"], "/c");
        expect_dim("/c", "c", s.c->size(), n, "A is " + dims(s.A));
    }
    s.X0 = get_set(require(root, "", "X0"), "/X0");
    expect_dim("/X0", "X0", setreach::dim(s.X0), n, "A is " + dims(s.A));
    parse_config(root, m, n);
}

void parse_hybrid(const json& root, ModelFile& m)
{
    HybridAutomaton& H = m.hybrid;
    H.time_kind = TimeKind::Continuous;
    if (has(root, "time"))
        H.time_kind = lookup<TimeKind>(root["time"], "/time",
            {{"continuous", TimeKind::Continuous}, {"discrete", TimeKind::Discrete}});
    const json& modes = require(root, "", "modes");
    if (!modes.is_array() || modes.empty())
        fail("/modes", "expected a non-empty array of modes");
    Eigen::Index n = -1;
    for (std::size_t i = 0; i < modes.size(); ++i)
    {
        const std::string p = child("/modes", i);
        const json& jm = modes[i];
        check_keys(jm, p, {"name", "A", "B", "V", "c", "invariant"});
        Mode mode{get_string(require(jm, p, "name"), child(p, "name")), {}, HPolytope(Matrix(0, 1), Vector(0))};
        for (const auto& other : H.modes)
            if (other.name == mode.name)
                fail(child(p, "name"), "duplicate mode name '" + mode.name + "'");
        mode.dynamics.A = get_matrix(require(jm, p, "A"), child(p, "A"));
        if (mode.dynamics.A.rows() != mode.dynamics.A.cols())
            fail(child(p, "A"), "A must be square, got " + dims(mode.dynamics.A));
        if (n < 0)
            n = mode.dynamics.A.rows();
        if (mode.dynamics.A.rows() != n)
            fail(child(p, "A"), "A is " + dims(mode.dynamics.A) + " but /modes/0/A is " + n_str(n) + "x" + n_str(n));
        if (has(jm, "B") != has(jm, "V"))
            fail(child(p, has(jm, "B") ? "V" : "B"), "B and V must be given together");
        if (has(jm, "B"))
        {
            mode.dynamics.B = get_matrix(jm["B"], child(p, "B"));
            if (mode.dynamics.B->rows() != n)
                fail(child(p, "B"), "B is " + dims(*mode.dynamics.B) + " but A is " + dims(mode.dynamics.A));
            mode.dynamics.V = get_set(jm["V"], child(p, "V"));
            expect_dim(child(p, "V"), "V", setreach::dim(*mode.dynamics.V), mode.dynamics.B->cols(),
                "B is " + dims(*mode.dynamics.B));
        }
        if (has(jm, "c"))
        {
            mode.dynamics.c = get_vector(jm["c"], child(p, "c"));
            expect_dim(child(p, "c"), "c", mode.dynamics.c->size(), n, "A is " + dims(mode.dynamics.A));
        }
        mode.invariant = HPolytope(Matrix(0, n), Vector(0));
        if (has(jm, "invariant"))
        {
            mode.invariant = get_polyhedron(jm["invariant"], child(p, "invariant"));
            expect_dim(child(p, "invariant"), "invariant", mode.invariant.dim(), n, "A is " + dims(mode.dynamics.A));
        }
        H.modes.push_back(std::move(mode));
    }
    auto mode_of = [&](const json& j, const std::string& p) {
        const std::string name = get_string(j, p);
        for (std::size_t i = 0; i < H.modes.size(); ++i)
            if (H.modes[i].name == name)
                return i;
        fail(p, "no mode named '" + name + "'");
    };
    if (has(root, "transitions"))
    {
        const json& ts = root["transitions"];
        if (!ts.is_array())
            fail("/transitions", "expected an array");
        for (std::size_t i = 0; i < ts.size(); ++i)
        {
            const std::string p = child("/transitions", i);
            const json& jt = ts[i];
            check_keys(jt, p, {"source", "target", "guard", "reset"});
            const std::size_t source = mode_of(require(jt, p, "source"), child(p, "source"));
            const std::size_t target = mode_of(require(jt, p, "target"), child(p, "target"));
            Transition t{source, target, get_polyhedron(require(jt, p, "guard"), child(p, "guard")), std::nullopt};
            expect_dim(child(p, "guard"), "guard", t.guard.dim(), n, "the modes have dimension " + n_str(n));
            if (has(jt, "reset"))
            {
                const std::string rp = child(p, "reset");
                check_keys(jt["reset"], rp, {"M", "c"});
                Reset rs;
                rs.M = get_matrix(require(jt["reset"], rp, "M"), child(rp, "M"));
                if (rs.M.rows() != n || rs.M.cols() != n)
                    fail(child(rp, "M"), "reset map is " + dims(rs.M) + " but modes have dimension " + std::to_string(n));
                rs.c = has(jt["reset"], "c") ? get_vector(jt["reset"]["c"], child(rp, "c")) : Vector(Vector::Zero(n));
                expect_dim(child(rp, "c"), "reset offset", rs.c.size(), n, "M is " + dims(rs.M));
                t.reset = std::move(rs);
            }
            H.transitions.push_back(std::move(t));
        }
    }
    H.initial_mode = mode_of(require(root, "", "initial_mode"), "/initial_mode");
    H.initial = get_set(require(root, "", "X0"), "/X0");
    expect_dim("/X0", "X0", setreach::dim(H.initial), n, "/modes/0/A is " + n_str(n) + "x" + n_str(n));
    parse_config(root, m, n);
}

void parse_nonlinear(const json& root, ModelFile& m)
{
    NonlinearModel nl;
    const json& vars = require(root, "", "variables");
    if (!vars.is_array() || vars.empty())
        fail("/variables", "expected a non-empty array of names");
    for (std::size_t i = 0; i < vars.size(); ++i)
    {
        const std::string name = get_string(vars[i], child("/variables", i));
        if (name.empty() || std::find(nl.variables.begin(), nl.variables.end(), name) != nl.variables.end())
            fail(child("/variables", i), "variable names must be non-empty and distinct");
        nl.variables.push_back(name);
    }
    const auto n = static_cast<Eigen::Index>(nl.variables.size());
    const json& f = require(root, "", "f");
    if (!f.is_array())
        fail("/f", "expected an array of expressions");
    expect_dim("/f", "f", static_cast<Eigen::Index>(f.size()), n, "variables has " + n_str(n) + " names");
    for (std::size_t i = 0; i < f.size(); ++i)
    {
        const std::string p = child("/f", i);
        nl.sources.push_back(get_string(f[i], p));
        try
        {
            nl.f.push_back(parse_expression(nl.sources.back(), nl.variables));
        }
        catch (const ExprError& e)
        {
            fail(p, e.what());
        }
    }
    if (has(root, "hessian_bound"))
    {
        const json& h = root["hessian_bound"];
        if (h.is_string())
            nl.hessian = lookup<HessianSource>(h, "/hessian_bound",
                {{"interval", HessianSource::Interval}, {"sampled", HessianSource::Sampled}});
        else
        {
            nl.hessian = HessianSource::Given;
            nl.hessian_bound = get_vector(h, "/hessian_bound");
            expect_dim("/hessian_bound", "hessian_bound", nl.hessian_bound.size(), n, "variables has " + n_str(n) + " names");
            if ((nl.hessian_bound.array() < 0.0).any())
                fail("/hessian_bound", "bounds must be nonnegative");
        }
    }
    nl.X0 = get_set(require(root, "", "X0"), "/X0");
    expect_dim("/X0", "X0", setreach::dim(nl.X0), n, "variables has " + n_str(n) + " names");

    if (has(root, "hybridization"))
    {
        const std::string p = "/hybridization";
        const json& hz = root["hybridization"];
        check_keys(hz, p,
            {"method", "margin_factor", "min_margin", "lookahead_steps", "max_stalls", "recenter", "region", "cells",
                "max_cells", "guard_thickness", "samples_per_axis", "safety_factor"});
        if (has(hz, "method"))
            nl.method = lookup<HybridizationMethod>(hz["method"], child(p, "method"),
                {{"dynamic", HybridizationMethod::Dynamic}, {"static", HybridizationMethod::Static}});
        DynamicConfig& d = nl.dynamic;
        if (has(hz, "margin_factor"))
            d.margin_factor = get_number(hz["margin_factor"], child(p, "margin_factor"));
        if (d.margin_factor < 1.0)
            fail(child(p, "margin_factor"), "margin factor must be at least 1");
        if (has(hz, "min_margin"))
            d.min_margin = get_number(hz["min_margin"], child(p, "min_margin"));
        if (!(d.min_margin > 0.0))
            fail(child(p, "min_margin"), "min margin must be positive");
        if (has(hz, "lookahead_steps"))
            d.lookahead_steps = get_count(hz["lookahead_steps"], child(p, "lookahead_steps"));
        if (has(hz, "max_stalls"))
            d.max_stalls = get_count(hz["max_stalls"], child(p, "max_stalls"));
        if (has(hz, "recenter"))
            d.recenter = get_bool(hz["recenter"], child(p, "recenter"));
        LinearizeOptions lo;
        if (has(hz, "samples_per_axis"))
            lo.samples_per_axis = static_cast<int>(get_count(hz["samples_per_axis"], child(p, "samples_per_axis")));
        if (has(hz, "safety_factor"))
            lo.safety_factor = get_number(hz["safety_factor"], child(p, "safety_factor"));
        d.linearize = lo;
        nl.static_opts.linearize = lo;
        if (has(hz, "max_cells"))
            nl.static_opts.max_cells = get_count(hz["max_cells"], child(p, "max_cells"));
        if (has(hz, "guard_thickness"))
            nl.static_opts.guard_thickness = get_number(hz["guard_thickness"], child(p, "guard_thickness"));
        if (has(hz, "region"))
        {
            const SetRep reg = get_set(hz["region"], child(p, "region"));
            const Box* b = std::get_if<Box>(&reg);
            if (!b)
                fail(child(p, "region"), "region must be a box");
            expect_dim(child(p, "region"), "region", b->dim(), n, "variables has " + n_str(n) + " names");
            nl.region = *b;
        }
        if (has(hz, "cells"))
        {
            const json& cj = hz["cells"];
            if (!cj.is_array())
                fail(child(p, "cells"), "expected an array of cell counts");
            for (std::size_t i = 0; i < cj.size(); ++i)
            {
                nl.cells.push_back(get_count(cj[i], child(child(p, "cells"), i)));
                if (nl.cells.back() == 0)
                    fail(child(child(p, "cells"), i), "cell count must be at least 1");
            }
            expect_dim(child(p, "cells"), "cells", static_cast<Eigen::Index>(nl.cells.size()), n,
                "variables has " + n_str(n) + " names");
        }
        if (nl.method == HybridizationMethod::Static && (!nl.region || nl.cells.empty()))
            fail(p, "static hybridization needs region and cells");
    }
    m.nonlinear = std::move(nl);
    parse_config(root, m, n);
    if (m.reach().mode == Termination::Fixpoint)
        fail("/config/termination", "fixpoint termination is not available for nonlinear models");
}

} // namespace

std::string to_string(ModelKind k)
{
    switch (k)
    {
        case ModelKind::LinearDiscrete: return "linear-discrete";
        case ModelKind::LinearContinuous: return "linear-continuous";
        case ModelKind::Hybrid: return "hybrid";
        case ModelKind::Nonlinear: return "nonlinear";
    }
    return "?";
}

NonlinearSystem NonlinearModel::system() const { return make_nonlinear_system(f, hessian, hessian_bound); }

Eigen::Index ModelFile::dim() const
{
    switch (kind)
    {
        case ModelKind::Hybrid: return hybrid.dim();
        case ModelKind::Nonlinear: return nonlinear ? static_cast<Eigen::Index>(nonlinear->variables.size()) : 0;
        default: return linear.dim();
    }
}

ModelFile parse_model(const std::string& text)
{
    const json root = parse_text(text);
    require_object(root, "");
    ModelFile m;
    m.schema = get_string(require(root, "", "schema"), "/schema");
    if (m.schema != kModelSchema)
        fail("/schema", "unsupported schema '" + m.schema + "' (expected " + kModelSchema + ")");
    m.kind = lookup<ModelKind>(require(root, "", "kind"), "/kind",
        {{"linear-discrete", ModelKind::LinearDiscrete}, {"linear-continuous", ModelKind::LinearContinuous},
            {"hybrid", ModelKind::Hybrid}, {"nonlinear", ModelKind::Nonlinear}});
    switch (m.kind)
    {
        case ModelKind::LinearDiscrete:
        case ModelKind::LinearContinuous:
            check_keys(root, "", {"schema", "kind", "name", "A", "B", "V", "c", "X0", "config", "bad_set"});
            break;
        case ModelKind::Hybrid:
            check_keys(root, "",
                {"schema", "kind", "name", "time", "modes", "transitions", "initial_mode", "X0", "config", "bad_set"});
            break;
        case ModelKind::Nonlinear:
            check_keys(root, "",
                {"schema", "kind", "name", "variables", "f", "hessian_bound", "X0", "hybridization", "config",
                    "bad_set"});
            break;
    }
    if (has(root, "name"))
        m.name = get_string(root["name"], "/name");

    try
    {
        switch (m.kind)
        {
            case ModelKind::LinearDiscrete:
            case ModelKind::LinearContinuous:
                parse_linear(root, m);
                m.linear.validate();
                break;
            case ModelKind::Hybrid:
                parse_hybrid(root, m);
                m.hybrid.validate();
                break;
            case ModelKind::Nonlinear: parse_nonlinear(root, m); break;
        }
        m.hybrid_cfg.reach.validate();
        if (m.kind == ModelKind::Hybrid && m.reach().mode == Termination::Fixpoint)
            fail("/config/termination", "fixpoint termination is not available for hybrid models");
    }
    catch (const ModelError&)
    {
        throw;
    }
    catch (const std::exception& e)
    {
        fail("/", e.what());
    }
    return m;
}

ModelFile load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ModelError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace setreach
