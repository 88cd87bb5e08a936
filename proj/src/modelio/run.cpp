#include "json_util.hpp"

#include <sstream>

namespace setreach
{

namespace
{

void add_segments(FlowpipeFile& out, const Flowpipe& pipe, std::size_t index, const std::string& mode)
{
    for (const Segment& s : pipe.segments)
        out.records.push_back({index, s.step, s.t_lo, s.t_hi, mode, s.set});
}

void add_hybrid(FlowpipeFile& out, RunResult& res, const HybridFlowpipe& hp, const HybridAutomaton& H)
{
    for (std::size_t p = 0; p < hp.pipes.size(); ++p)
    {
        if (hp.status == FlowStatus::BadReached && p == hp.bad_pipe)
        {
            for (std::size_t i = 0; i < hp.pipes[p].pipe.segments.size(); ++i)
                if (hp.pipes[p].pipe.segments[i].step == hp.bad_step)
                {
                    res.bad_hit = true;
                    res.bad_record = out.records.size() + i;
                    break;
                }
        }
        add_segments(out, hp.pipes[p].pipe, p, H.modes[hp.pipes[p].mode].name);
    }
    out.status = hp.status;
    out.status_step = hp.status == FlowStatus::BadReached ? hp.bad_step : 0;
    out.over_approx = hp.over_approx;
    out.warnings = hp.warnings;
    res.depth_exhausted = hp.depth_exhausted;
}

} // namespace

RunResult run_model(const ModelFile& m, const std::string& model_text, bool check_bad_set)
{
    RunResult res;
    FlowpipeFile& out = res.flowpipe;
    out.kind = m.kind;
    out.dim = m.dim();
    out.model_hash = fnv1a_hex(model_text);
    out.config_json = m.config_json;

    HybridConfig hc = m.hybrid_cfg;
    if (check_bad_set)
    {
        if (!hc.reach.bad_set)
            throw ModelError("/bad_set", "the model has no bad_set to check");
        hc.reach.mode = Termination::BadSet;
    }

    switch (m.kind)
    {
        case ModelKind::LinearDiscrete:
        case ModelKind::LinearContinuous:
        {
            const Flowpipe fp = reach(m.linear, hc.reach);
            add_segments(out, fp, 0, "");
            out.status = fp.status;
            out.status_step = fp.status_step;
            out.over_approx = fp.over_approx;
            if (fp.status == FlowStatus::BadReached)
                for (std::size_t i = 0; i < fp.segments.size(); ++i)
                    if (fp.segments[i].step == fp.status_step)
                    {
                        res.bad_hit = true;
                        res.bad_record = i;
                        break;
                    }
            break;
        }
        case ModelKind::Hybrid:
        {
            const HybridFlowpipe hp = hybrid_reach(m.hybrid, hc);
            add_hybrid(out, res, hp, m.hybrid);
            break;
        }
        case ModelKind::Nonlinear:
        {
            const NonlinearModel& nl = *m.nonlinear;
            const NonlinearSystem sys = nl.system();
            if (nl.method == HybridizationMethod::Static)
            {
                HybridAutomaton H = static_hybridize(sys, *nl.region, nl.cells, nl.static_opts);
                const HybridFlowpipe hp = static_hybrid_reach(H, nl.X0, hc);
                add_hybrid(out, res, hp, H);
                if (nl.hessian == HessianSource::Sampled)
                    out.warnings.push_back("linearization errors were sampled; the flowpipe is not a proven enclosure");
            }
            else
            {
                DynamicConfig dc = nl.dynamic;
                dc.reach = hc.reach;
                dc.reach.mode = Termination::Bounded;
                const DynamicResult dr = dynamic_hybridize_reach(sys, nl.X0, dc);
                add_segments(out, dr.pipe, 0, "");
                out.status = dr.pipe.status;
                out.status_step = dr.pipe.status_step;
                out.over_approx = dr.pipe.over_approx;
                if (!dr.rigorous)
                    out.warnings.push_back("linearization errors were sampled; the flowpipe is not a proven enclosure");
                if (hc.reach.mode == Termination::BadSet)
                {
                    for (std::size_t i = 0; i < out.records.size(); ++i)
                        if (!is_empty(intersect(out.records[i].set, *hc.reach.bad_set)))
                        {
                            res.bad_hit = true;
                            res.bad_record = i;
                            out.status = FlowStatus::BadReached;
                            out.status_step = out.records[i].step;
                            out.records.resize(i + 1);
                            break;
                        }
                }
            }
            break;
        }
    }
    return res;
}

CheckResult check_model(const ModelFile& m, const std::string& model_text)
{
    CheckResult c;
    c.run = run_model(m, model_text, true);
    const FlowpipeFile& f = c.run.flowpipe;
    std::ostringstream msg;
    if (c.run.bad_hit)
    {
        const FlowpipeRecord& r = f.records[c.run.bad_record];
        c.verdict = Verdict::Unknown;
        msg << "UNKNOWN-UNSAFE: bad set met at step " << r.step << ", t in [" << r.t_lo << ", " << r.t_hi << "]";
        if (!r.mode.empty())
            msg << ", mode " << r.mode;
    }
    else if (f.status == FlowStatus::Incomplete || f.status == FlowStatus::Stalled)
    {
        c.verdict = Verdict::Unknown;
        msg << "UNKNOWN: analysis ended with status " << to_string(f.status) << " before the horizon";
    }
    else if (c.run.depth_exhausted)
    {
        c.verdict = Verdict::Unknown;
        msg << "UNKNOWN: jump_depth cut off jumps inside the horizon";
    }
    else
    {
        c.verdict = Verdict::Safe;
        msg << "SAFE: bad set not met over the horizon (" << f.records.size() << " segments)";
    }
    c.message = msg.str();
    return c;
}

} // namespace setreach
