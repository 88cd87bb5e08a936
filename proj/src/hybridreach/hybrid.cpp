#include "setreach/hybridreach.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace setreach
{

namespace
{

LinearSystem mode_system(const Mode& m, const SetRep& X0, TimeKind kind)
{
    LinearSystem sys;
    sys.A = m.dynamics.A;
    sys.B = m.dynamics.B;
    sys.V = m.dynamics.V;
    sys.c = m.dynamics.c;
    sys.X0 = X0;
    sys.time_kind = kind;
    return sys;
}

} // namespace

void HybridAutomaton::validate() const
{
    if (modes.empty())
        throw std::invalid_argument("hybrid automaton has no modes");
    const auto n = dim();
    for (const auto& m : modes)
    {
        const std::string where = "mode '" + m.name + "': ";
        if (m.dynamics.A.rows() != n || m.dynamics.A.cols() != n)
            throw DimensionError(where + "A is not " + std::to_string(n) + "x" + std::to_string(n));
        if (m.dynamics.B.has_value() != m.dynamics.V.has_value())
            throw std::invalid_argument(where + "B and V must be given together");
        if (m.dynamics.B && (m.dynamics.B->rows() != n || setreach::dim(*m.dynamics.V) != m.dynamics.B->cols()))
            throw DimensionError(where + "B / V dimensions are inconsistent");
        if (m.dynamics.c && m.dynamics.c->size() != n)
            throw DimensionError(where + "c has wrong dimension");
        if (m.invariant.dim() != n)
            throw DimensionError(where + "invariant has dimension " + std::to_string(m.invariant.dim()));
    }
    for (std::size_t i = 0; i < transitions.size(); ++i)
    {
        const auto& t = transitions[i];
        const std::string where = "transition " + std::to_string(i) + ": ";
        if (t.source >= modes.size() || t.target >= modes.size())
            throw std::invalid_argument(where + "unknown mode");
        if (t.guard.dim() != n)
            throw DimensionError(where + "guard has dimension " + std::to_string(t.guard.dim()));
        if (t.reset && (t.reset->M.rows() != n || t.reset->M.cols() != n || t.reset->c.size() != n))
            throw DimensionError(where + "reset has wrong dimensions");
    }
    if (initial_mode >= modes.size())
        throw std::invalid_argument("initial mode index out of range");
    if (setreach::dim(initial) != n)
        throw DimensionError("initial set has dimension " + std::to_string(setreach::dim(initial)) + ", modes have "
                             + std::to_string(n));
}

std::size_t HybridAutomaton::mode_index(const std::string& name) const
{
    for (std::size_t i = 0; i < modes.size(); ++i)
        if (modes[i].name == name)
            return i;
    throw std::out_of_range("no mode named '" + name + "'");
}

ModeReachResult mode_reach(const HybridAutomaton& H, std::size_t mode, const SetRep& entry, const ReachConfig& cfg)
{
    const Mode& m = H.modes.at(mode);
    const LinearSystem sys = mode_system(m, entry, H.time_kind);
    sys.validate();
    cfg.validate();
    const Template T = cfg.directions ? cfg.directions : default_template(sys.dim());

    ModeReachResult out;
    Recurrence rec = make_recurrence(sys, cfg);
    StepEngine engine(rec.A, rec.start, rec.U, cfg.strategy, T);
    const std::size_t N = horizon_steps(sys, cfg);
    for (std::size_t k = 0;; ++k)
    {
        SetRep clipped = intersect(engine.current(), m.invariant);
        if (is_empty(clipped))
            break;
        const auto [lo, hi] = segment_interval(H.time_kind, cfg, k);
        out.pipe.segments.push_back({k, lo, hi, clipped});
        for (std::size_t t = 0; t < H.transitions.size(); ++t)
        {
            if (H.transitions[t].source != mode)
                continue;
            SetRep hit = intersect(clipped, H.transitions[t].guard);
            if (!is_empty(hit))
                out.hits.push_back({t, k, std::move(hit)});
        }
        if (cfg.mode == Termination::BadSet && !is_empty(intersect(clipped, *cfg.bad_set)))
        {
            out.pipe.status = FlowStatus::BadReached;
            out.pipe.status_step = k;
            break;
        }
        if (k >= N)
            break;
        engine.advance();
    }
    out.pipe.over_approx = rec.over_approx || engine.over_approx();
    return out;
}

SetRep cluster_hits(std::span<const SetRep> segments, const HPolytope& guard, const Template& directions,
    const HPolytope* invariant)
{
    const auto n = guard.dim();
    if (!directions || directions->rows() == 0)
        throw GeometryError("cluster_hits: empty template");
    std::optional<Vector> offsets;
    for (const auto& s : segments)
    {
        const SetRep hit = intersect(s, guard);
        if (is_empty(hit))
            continue;
        const Vector v = support_values(hit, *directions);
        offsets = offsets ? Vector(offsets->cwiseMax(v)) : v;
    }
    if (!offsets)
        return EmptySet{n};
    SetRep out = intersect(HPolytope::from_unit_normals(directions, *offsets), guard);
    if (invariant)
        out = intersect(out, *invariant);
    return out;
}

SetRep apply_reset(const Transition& t, const SetRep& s, bool* over_approx)
{
    if (!t.reset || std::holds_alternative<EmptySet>(s))
        return s;
    return translate(linear_map(t.reset->M, s, over_approx), t.reset->c);
}

SetRep guard_cross(std::span<const SetRep> segments, const Transition& t, const Template& directions)
{
    return apply_reset(t, cluster_hits(segments, t.guard, directions));
}

HybridFlowpipe hybrid_reach(const HybridAutomaton& H, const HybridConfig& cfg)
{
    H.validate();
    cfg.reach.validate();
    if (cfg.reach.mode == Termination::Fixpoint)
        throw std::invalid_argument("fixpoint termination is not available for hybrid automata");
    const auto n = H.dim();
    const Template T = cfg.reach.directions ? cfg.reach.directions : default_template(n);
    if (T->cols() != n)
        throw DimensionError("template dimension differs from the automaton");

    struct Item
    {
        std::size_t mode;
        SetRep entry;
        double lo, hi;
        std::size_t depth;
        std::optional<std::size_t> parent;
    };

    HybridFlowpipe out;
    std::deque<Item> queue;
    std::vector<std::vector<SetRep>> entries_by_mode(H.modes.size());

    // Clip an entry set to the invariant of its mode, warning on violations.
    auto admit = [&](std::size_t mode, const SetRep& s, const std::string& what) -> std::optional<SetRep> {
        const HPolytope& inv = H.modes[mode].invariant;
        if (contains_set(inv, s))
            return s;
        out.warnings.push_back(what + " is not inside the invariant of mode '" + H.modes[mode].name + "'; clipped");
        SetRep clipped = intersect(s, inv);
        if (is_empty(clipped))
        {
            out.warnings.push_back(what + " misses the invariant of mode '" + H.modes[mode].name + "' entirely");
            return std::nullopt;
        }
        return clipped;
    };

    if (auto init = admit(H.initial_mode, H.initial, "initial set"))
    {
        entries_by_mode[H.initial_mode].push_back(*init);
        queue.push_back({H.initial_mode, *init, 0.0, 0.0, 0, std::nullopt});
    }

    const double L = cfg.reach.L;
    while (!queue.empty())
    {
        Item item = std::move(queue.front());
        queue.pop_front();
        const std::size_t index = out.pipes.size();

        ReachConfig local = cfg.reach;
        local.L = std::max(0.0, L - item.lo);
        ModeReachResult res = mode_reach(H, item.mode, item.entry, local);
        for (auto& seg : res.pipe.segments)
        {
            seg.t_lo += item.lo;
            seg.t_hi += item.hi;
        }
        out.over_approx = out.over_approx || res.pipe.over_approx;
        const FlowStatus pipe_status = res.pipe.status;
        const std::size_t pipe_step = res.pipe.status_step;
        out.pipes.push_back({item.mode, item.depth, item.lo, item.hi, item.parent, std::move(res.pipe)});
        const auto& segments = out.pipes.back().pipe.segments;

        if (pipe_status == FlowStatus::BadReached)
        {
            out.status = FlowStatus::BadReached;
            out.bad_pipe = index;
            out.bad_step = pipe_step;
            return out;
        }

        // Group hits by transition into runs of consecutive steps.
        std::stable_sort(res.hits.begin(), res.hits.end(),
            [](const GuardHit& a, const GuardHit& b) { return a.transition < b.transition; });
        std::size_t i = 0;
        while (i < res.hits.size())
        {
            std::size_t j = i + 1;
            if (cfg.clustering == Clustering::TemplateHull)
                while (j < res.hits.size() && res.hits[j].transition == res.hits[i].transition
                       && res.hits[j].step == res.hits[j - 1].step + 1)
                    ++j;
            const Transition& tr = H.transitions[res.hits[i].transition];
            std::vector<SetRep> sets;
            for (std::size_t h = i; h < j; ++h)
                sets.push_back(res.hits[h].set);

            JumpRecord rec;
            rec.from = index;
            rec.transition = res.hits[i].transition;
            rec.first_step = res.hits[i].step;
            rec.last_step = res.hits[j - 1].step;
            rec.t_lo = segments[rec.first_step].t_lo;
            rec.t_hi = segments[rec.last_step].t_hi;
            rec.set = cfg.clustering == Clustering::TemplateHull
                          ? cluster_hits(sets, tr.guard, T, &H.modes[item.mode].invariant)
                          : sets.front();
            i = j;

            const bool live = rec.t_lo <= L && !std::holds_alternative<EmptySet>(rec.set);
            if (live && item.depth >= cfg.jump_depth && !out.depth_exhausted)
            {
                out.depth_exhausted = true;
                out.warnings.push_back("jump depth " + std::to_string(cfg.jump_depth)
                                       + " reached before the horizon; later jumps are not explored");
            }
            if (live && item.depth < cfg.jump_depth)
            {
                const SetRep entry = apply_reset(tr, rec.set, &out.over_approx);
                const std::string what = "entry via transition " + std::to_string(rec.transition);
                if (auto admitted = admit(tr.target, entry, what))
                {
                    auto& seen = entries_by_mode[tr.target];
                    const bool pruned = cfg.prune && !seen.empty() && contains_set(std::span<const SetRep>(seen), *admitted);
                    if (!pruned)
                    {
                        if (out.pipes.size() + queue.size() >= cfg.max_entries)
                        {
                            out.jumps.push_back(std::move(rec));
                            out.status = FlowStatus::Incomplete;
                            out.warnings.push_back("worklist bound of " + std::to_string(cfg.max_entries)
                                                   + " entries exceeded");
                            return out;
                        }
                        rec.to = out.pipes.size() + queue.size();
                        seen.push_back(*admitted);
                        queue.push_back({tr.target, *admitted, rec.t_lo, rec.t_hi, item.depth + 1, out.jumps.size()});
                    }
                }
            }
            out.jumps.push_back(std::move(rec));
        }
    }
    if (cfg.reach.mode == Termination::BadSet)
        out.status = FlowStatus::Horizon;
    return out;
}

} // namespace setreach
