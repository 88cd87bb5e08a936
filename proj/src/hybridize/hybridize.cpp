#include "setreach/hybridize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace setreach
{

namespace
{

Vector eval_f(const NonlinearSystem& sys, const Vector& x)
{
    Vector y = sys.f(x);
    if (y.size() != sys.n || !y.allFinite())
        throw std::runtime_error("nonlinear system: f failed to evaluate to a finite vector of size "
                                 + std::to_string(sys.n));
    return y;
}

Matrix eval_jacobian(const NonlinearSystem& sys, const Vector& x, double rel_step)
{
    if (!sys.jacobian)
        return finite_difference_jacobian(sys, x, rel_step);
    Matrix J = sys.jacobian(x);
    if (J.rows() != sys.n || J.cols() != sys.n || !J.allFinite())
        throw std::runtime_error("nonlinear system: jacobian failed to evaluate to a finite "
                                 + std::to_string(sys.n) + "x" + std::to_string(sys.n) + " matrix");
    return J;
}

// Grid points of the box, at most ~20000 of them.
std::vector<Vector> sample_grid(const Box& box, int per_axis)
{
    const Eigen::Index n = box.dim();
    int m = std::max(per_axis, 2);
    while (m > 2 && std::pow(static_cast<double>(m), static_cast<double>(n)) > 20000.0)
        --m;
    std::vector<Vector> pts;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;)
    {
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const double s = static_cast<double>(idx[static_cast<std::size_t>(i)]) / (m - 1);
            x(i) = box.lo()(i) + s * (box.hi()(i) - box.lo()(i));
        }
        pts.push_back(std::move(x));
        Eigen::Index i = 0;
        while (i < n && ++idx[static_cast<std::size_t>(i)] == m)
            idx[static_cast<std::size_t>(i++)] = 0;
        if (i == n)
            break;
    }
    pts.push_back(box.center());
    return pts;
}

bool is_zero_box(const SetRep& s)
{
    const Box* b = std::get_if<Box>(&s);
    return b && b->lo().isZero(0.0) && b->hi().isZero(0.0);
}

Eigen::Index total_cells(const std::vector<std::size_t>& cells, std::size_t cap)
{
    std::size_t total = 1;
    for (std::size_t c : cells)
    {
        if (c == 0)
            throw std::invalid_argument("static_hybridize: every axis needs at least one cell");
        if (total > cap / c)
            throw std::length_error("static_hybridize: grid exceeds the cap of " + std::to_string(cap) + " cells");
        total *= c;
    }
    if (total > cap)
        throw std::length_error("static_hybridize: grid of " + std::to_string(total) + " cells exceeds the cap of "
                                + std::to_string(cap));
    return static_cast<Eigen::Index>(total);
}

// Multi-index of cell `id`, axis 0 varying fastest.
std::vector<std::size_t> unravel(std::size_t id, const std::vector<std::size_t>& cells)
{
    std::vector<std::size_t> out(cells.size());
    for (std::size_t d = 0; d < cells.size(); ++d)
    {
        out[d] = id % cells[d];
        id /= cells[d];
    }
    return out;
}

Box cell_box(const Box& region, const std::vector<std::size_t>& cells, const std::vector<std::size_t>& idx)
{
    const auto n = region.dim();
    Vector lo(n), hi(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const auto d = static_cast<std::size_t>(i);
        const double w = (region.hi()(i) - region.lo()(i)) / static_cast<double>(cells[d]);
        lo(i) = region.lo()(i) + w * static_cast<double>(idx[d]);
        hi(i) = idx[d] + 1 == cells[d] ? region.hi()(i) : region.lo()(i) + w * static_cast<double>(idx[d] + 1);
    }
    return Box(lo, hi);
}

void check_region(const Box& region, const std::vector<std::size_t>& cells)
{
    if (static_cast<Eigen::Index>(cells.size()) != region.dim())
        throw DimensionError("static_hybridize: grid has " + std::to_string(cells.size()) + " axes, region has "
                             + std::to_string(region.dim()));
}

double inf_norm(const SetRep& s)
{
    const Box b = bounding_box(s);
    return std::max(b.lo().cwiseAbs().maxCoeff(), b.hi().cwiseAbs().maxCoeff());
}

int status_rank(FlowStatus s)
{
    switch (s)
    {
        case FlowStatus::BadReached: return 3;
        case FlowStatus::Incomplete: return 2;
        case FlowStatus::Horizon: return 1;
        default: return 0;
    }
}

} // namespace

void NonlinearSystem::validate() const
{
    if (n <= 0)
        throw std::invalid_argument("nonlinear system: dimension must be positive");
    if (!f)
        throw std::invalid_argument("nonlinear system: missing f");
}

Matrix finite_difference_jacobian(const NonlinearSystem& sys, const Vector& x, double rel_step)
{
    Matrix J(sys.n, sys.n);
    for (Eigen::Index j = 0; j < sys.n; ++j)
    {
        const double h = rel_step * std::max(1.0, std::abs(x(j)));
        Vector xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        J.col(j) = (eval_f(sys, xp) - eval_f(sys, xm)) / (xp(j) - xm(j));
    }
    return J;
}

LinearizationDomain linearize(const NonlinearSystem& sys, const Box& domain, const LinearizeOptions& opt)
{
    sys.validate();
    if (domain.dim() != sys.n)
        throw DimensionError("linearize: domain has dimension " + std::to_string(domain.dim()) + ", system has "
                             + std::to_string(sys.n));
    const Vector c = domain.center();
    LinearizationDomain out{domain, eval_jacobian(sys, c, opt.fd_step), Vector(), EmptySet{}, false};
    out.b = eval_f(sys, c) - out.A * c;

    if (sys.hessian_bound)
    {
        const Vector M = sys.hessian_bound(domain);
        if (M.size() != sys.n || !M.allFinite() || (M.array() < 0.0).any())
            throw std::runtime_error("linearize: hessian bound must be a finite nonnegative vector of size "
                                     + std::to_string(sys.n));
        const double h2 = domain.radius().squaredNorm();
        const Vector rad = 0.5 * h2 * M;
        out.V = Box(-rad, rad);
        out.rigorous = sys.jacobian != nullptr;
        return out;
    }

    Vector emin = Vector::Zero(sys.n), emax = Vector::Zero(sys.n);
    for (const Vector& x : sample_grid(domain, opt.samples_per_axis))
    {
        const Vector e = eval_f(sys, x) - (out.A * x + out.b);
        emin = emin.cwiseMin(e);
        emax = emax.cwiseMax(e);
    }
    const Vector mid = 0.5 * (emin + emax);
    const Vector rad = 0.5 * opt.safety_factor * (emax - emin);
    out.V = Box(mid - rad, mid + rad);
    return out;
}

std::ptrdiff_t locate_cell(const Box& region, const std::vector<std::size_t>& cells, const Vector& x)
{
    check_region(region, cells);
    std::ptrdiff_t id = 0, stride = 1;
    for (Eigen::Index i = 0; i < region.dim(); ++i)
    {
        const auto d = static_cast<std::size_t>(i);
        if (!(x(i) >= region.lo()(i) && x(i) <= region.hi()(i)))
            return -1;
        const double w = (region.hi()(i) - region.lo()(i)) / static_cast<double>(cells[d]);
        auto k = w > 0.0 ? static_cast<std::size_t>((x(i) - region.lo()(i)) / w) : 0;
        k = std::min(k, cells[d] - 1);
        id += static_cast<std::ptrdiff_t>(k) * stride;
        stride *= static_cast<std::ptrdiff_t>(cells[d]);
    }
    return id;
}

HybridAutomaton static_hybridize(const NonlinearSystem& sys, const Box& region, const std::vector<std::size_t>& cells,
    const StaticHybridOptions& opt)
{
    sys.validate();
    check_region(region, cells);
    if (region.dim() != sys.n)
        throw DimensionError("static_hybridize: region has dimension " + std::to_string(region.dim())
                             + ", system has " + std::to_string(sys.n));
    const Eigen::Index count = total_cells(cells, opt.max_cells);

    HybridAutomaton H;
    H.time_kind = TimeKind::Continuous;
    H.initial = EmptySet{sys.n};
    std::vector<Box> boxes;
    for (Eigen::Index id = 0; id < count; ++id)
    {
        const auto idx = unravel(static_cast<std::size_t>(id), cells);
        Box box = cell_box(region, cells, idx);
        LinearizationDomain lin = linearize(sys, box, opt.linearize);
        Dynamics dyn{lin.A, std::nullopt, std::nullopt, lin.b};
        if (!is_zero_box(lin.V))
        {
            dyn.B = Matrix::Identity(sys.n, sys.n);
            dyn.V = lin.V;
        }
        std::string name = "cell";
        for (std::size_t k : idx)
            name += "_" + std::to_string(k);
        H.modes.push_back({std::move(name), std::move(dyn), to_hpolytope(box)});
        boxes.push_back(std::move(box));
    }

    std::size_t stride = 1;
    for (std::size_t d = 0; d < cells.size(); ++d)
    {
        const auto i = static_cast<Eigen::Index>(d);
        for (std::size_t id = 0; id < static_cast<std::size_t>(count); ++id)
        {
            if (unravel(id, cells)[d] + 1 == cells[d])
                continue;
            const std::size_t nb = id + stride;
            const double face = boxes[id].hi()(i);
            Vector lo = boxes[id].lo(), hi = boxes[id].hi();
            lo(i) = face - opt.guard_thickness;
            hi(i) = face + opt.guard_thickness;
            const HPolytope guard = to_hpolytope(Box(lo, hi));
            H.transitions.push_back({id, nb, guard, std::nullopt});
            H.transitions.push_back({nb, id, guard, std::nullopt});
        }
        stride *= cells[d];
    }
    return H;
}

HybridFlowpipe static_hybrid_reach(const HybridAutomaton& H, const SetRep& X0, const HybridConfig& cfg)
{
    HybridFlowpipe out;
    bool any = false;
    for (std::size_t m = 0; m < H.modes.size(); ++m)
    {
        const SetRep start = intersect(X0, H.modes[m].invariant);
        if (is_empty(start))
            continue;
        HybridAutomaton Hm = H;
        Hm.initial_mode = m;
        Hm.initial = start;
        HybridFlowpipe part = hybrid_reach(Hm, cfg);

        const std::size_t pipe_off = out.pipes.size(), jump_off = out.jumps.size();
        for (auto& p : part.pipes)
        {
            if (p.parent)
                *p.parent += jump_off;
            out.pipes.push_back(std::move(p));
        }
        for (auto& j : part.jumps)
        {
            j.from += pipe_off;
            if (j.to)
                *j.to += pipe_off;
            out.jumps.push_back(std::move(j));
        }
        out.over_approx = out.over_approx || part.over_approx;
        out.depth_exhausted = out.depth_exhausted || part.depth_exhausted;
        out.warnings.insert(out.warnings.end(), part.warnings.begin(), part.warnings.end());
        if (!any || status_rank(part.status) > status_rank(out.status))
        {
            out.status = part.status;
            out.bad_pipe = part.bad_pipe + pipe_off;
            out.bad_step = part.bad_step;
        }
        any = true;
        if (part.status == FlowStatus::BadReached)
            break;
    }
    if (!any)
        throw std::invalid_argument("static_hybrid_reach: initial set misses every cell");
    return out;
}

DynamicResult dynamic_hybridize_reach(const NonlinearSystem& sys, const SetRep& X0, const DynamicConfig& cfg)
{
    sys.validate();
    cfg.reach.validate();
    if (dim(X0) != sys.n)
        throw DimensionError("dynamic_hybridize_reach: initial set has dimension " + std::to_string(dim(X0))
                             + ", system has " + std::to_string(sys.n));
    if (cfg.reach.mode != Termination::Bounded)
        throw std::invalid_argument("dynamic_hybridize_reach: only bounded termination is supported");
    if (!(cfg.margin_factor >= 1.0) || !(cfg.min_margin > 0.0))
        throw std::invalid_argument("dynamic_hybridize_reach: margin factor must be >= 1 and min margin positive");

    const Template T = cfg.reach.directions ? cfg.reach.directions : default_template(sys.n);
    LinearSystem probe;
    probe.A = Matrix::Zero(sys.n, sys.n);
    probe.X0 = X0;
    probe.time_kind = TimeKind::Continuous;
    const std::size_t N = horizon_steps(probe, cfg.reach);
    // Error-ball segments cover the interval ending at their step, so the
    // restart set's own segment is already emitted.
    const bool point_start = cfg.reach.bloat_policy == BloatPolicy::ErrorBall;

    DynamicResult res;
    res.pipe.over_approx = true;
    SetRep S = X0;
    std::size_t g = 0;      // global step of S
    std::size_t emit_from = 0;
    std::size_t stalls = 0;
    double scale = 1.0;

    while (true)
    {
        const Box bb = bounding_box(S);
        double margin = std::max(0.5 * (cfg.margin_factor - 1.0) * (bb.hi() - bb.lo()).norm(), cfg.min_margin);
        if (cfg.lookahead_steps > 0)
            margin = std::max(margin, static_cast<double>(cfg.lookahead_steps) * cfg.reach.r
                                          * eval_f(sys, bb.center()).cwiseAbs().maxCoeff());
        margin *= scale;
        const Box domain((bb.lo().array() - margin).matrix(), (bb.hi().array() + margin).matrix());
        res.domains.push_back(domain);

        const LinearizationDomain lin = linearize(sys, domain, cfg.linearize);
        res.rigorous = res.rigorous && lin.rigorous;
        // With y = x - origin the affine part becomes A y + (A origin + b).
        const Vector origin = cfg.recenter ? domain.center() : Vector(Vector::Zero(sys.n));
        LinearSystem ls;
        ls.A = lin.A;
        ls.X0 = cfg.recenter ? translate(S, -origin) : S;
        ls.time_kind = TimeKind::Continuous;
        const Vector offset = lin.A * origin + lin.b;
        if (!offset.isZero(0.0))
            ls.c = offset;
        if (!is_zero_box(lin.V))
        {
            ls.B = Matrix::Identity(sys.n, sys.n);
            ls.V = lin.V;
        }
        const SetRep local_domain = cfg.recenter ? translate(SetRep(domain), -origin) : SetRep(domain);
        auto to_global = [&](SetRep P) { return cfg.recenter ? translate(P, origin) : P; };
        ReachConfig local = cfg.reach;
        local.L = static_cast<double>(N - g) * cfg.reach.r;
        // Only segments inside the domain are kept, so it bounds the state.
        if (point_start && !local.state_bound)
            local.state_bound = inf_norm(local_domain);

        const Recurrence rec = make_recurrence(ls, local);
        StepEngine engine(rec.A, rec.start, rec.U, cfg.reach.strategy, T);
        // Sets at the sample instants only; the next domain starts from one.
        ReachConfig sample_cfg = local;
        sample_cfg.bloat_policy = BloatPolicy::SmallR;
        const Recurrence srec = make_recurrence(ls, sample_cfg);
        StepEngine sampler(srec.A, srec.start, srec.U, cfg.reach.strategy, T);
        std::vector<SetRep> kept;
        SetRep restart = S;
        bool finished = false;
        for (std::size_t j = 0;; ++j)
        {
            SetRep P = engine.current();
            if (!contains_set(local_domain, P))
                break;
            kept.push_back(to_global(std::move(P)));
            restart = to_global(sampler.current());
            if (g + j == N)
            {
                finished = true;
                break;
            }
            engine.advance();
            sampler.advance();
        }

        auto emit = [&](std::size_t upto) {
            for (std::size_t j = emit_from; j < upto; ++j)
            {
                const auto [lo, hi] = segment_interval(TimeKind::Continuous, cfg.reach, g + j);
                res.pipe.segments.push_back({g + j, lo, hi, kept[j]});
            }
        };
        if (finished)
        {
            emit(kept.size());
            res.pipe.status = FlowStatus::Completed;
            res.pipe.status_step = N;
            return res;
        }
        // The segment that left the domain is dropped; the sample-time set of
        // the last one kept seeds the next domain.
        if (kept.size() < 2)
        {
            if (++stalls > cfg.max_stalls)
            {
                res.pipe.status = FlowStatus::Stalled;
                res.pipe.status_step = g;
                return res;
            }
            scale *= 2.0;
            continue;
        }
        const std::size_t m = kept.size() - 1;
        emit(point_start ? m + 1 : m);
        S = restart;
        g += m;
        emit_from = point_start ? 1 : 0;
        stalls = 0;
        scale = 1.0;
    }
}

} // namespace setreach
