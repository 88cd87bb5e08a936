#include "detail.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace setreach
{

StepEngine::StepEngine(const Matrix& A, const SetRep& start, std::optional<SetRep> U, Strategy strategy,
    Template directions)
    : A_(A), U_(std::move(U)), strategy_(strategy), directions_(std::move(directions))
{
    const auto n = A_.rows();
    if (!directions_)
        directions_ = default_template(n);
    switch (strategy_)
    {
        case Strategy::Lazy: lazy_.emplace(start, A_, U_, directions_); break;
        case Strategy::Vertices:
            if (n > kExactConversionDim)
                throw std::invalid_argument("vertices strategy needs dimension <= 3, got " + std::to_string(n));
            exact_ = reduce_vertices(to_vpolytope(start, &over_approx_));
            if (U_)
                U_ = reduce_vertices(to_vpolytope(*U_, &over_approx_));
            break;
        case Strategy::Facets:
        {
            exact_ = to_hpolytope(start, &over_approx_);
            Eigen::FullPivLU<Matrix> lu(A_);
            if (lu.isInvertible())
                Ainv_ = lu.inverse();
            break;
        }
    }
}

SetRep StepEngine::current() const
{
    if (lazy_)
        return concretize(*lazy_, directions_);
    return exact_;
}

double StepEngine::support(const Vector& d) const
{
    if (lazy_)
        return lazy_->support(d);
    return support_value(exact_, d);
}

void StepEngine::advance()
{
    switch (strategy_)
    {
        case Strategy::Lazy: lazy_->advance(); break;
        case Strategy::Vertices:
        {
            const auto& P = std::get<VPolytope>(exact_);
            const auto n = A_.rows();
            if (U_)
                exact_ = step_input_vertices(P, std::get<VPolytope>(*U_), A_, Matrix::Identity(n, n));
            else
                exact_ = reduce_vertices(VPolytope(Matrix(A_ * P.vertices())));
            break;
        }
        case Strategy::Facets:
        {
            const auto& P = std::get<HPolytope>(exact_);
            if (Ainv_)
                exact_ = detail::push_facets(P, U_, *Ainv_);
            else
            {
                over_approx_ = true;
                exact_ = detail::template_step(P, U_, A_, directions_);
            }
            if (!std::get<HPolytope>(exact_).offsets().allFinite())
                throw GeometryError("facet iteration overflow at step " + std::to_string(k_ + 1));
            break;
        }
    }
    ++k_;
}

std::size_t horizon_steps(const LinearSystem& sys, const ReachConfig& cfg)
{
    if (sys.time_kind == TimeKind::Discrete)
        return static_cast<std::size_t>(std::ceil(cfg.L - 1e-9));
    const double q = cfg.L / cfg.r;
    return static_cast<std::size_t>(std::max(0.0, std::ceil(q - 1e-9 * std::max(1.0, q))));
}

namespace detail
{

std::size_t iteration_limit(const LinearSystem& sys, const ReachConfig& cfg)
{
    const std::size_t N = horizon_steps(sys, cfg);
    if (cfg.mode != Termination::Fixpoint)
        return N;
    if (cfg.max_iterations > 0)
        return cfg.max_iterations;
    return N > 0 ? 10 * N : 10000;
}

} // namespace detail

namespace
{

// Containment slack is already relative above magnitude 1; below it, scale
// kSetTolerance down with the largest coordinate magnitude of P.
double fixpoint_tolerance(const SetRep& P)
{
    if (is_empty(P))
        return kSetTolerance;
    const Box b = bounding_box(P);
    return kSetTolerance * std::min(1.0, std::max(b.lo().cwiseAbs().maxCoeff(), b.hi().cwiseAbs().maxCoeff()));
}

} // namespace

Recurrence make_recurrence(const LinearSystem& sys, const ReachConfig& cfg)
{
    Recurrence rec;
    if (sys.time_kind == TimeKind::Discrete)
    {
        rec.A = sys.A;
        rec.start = sys.X0;
        rec.U = input_set(sys, &rec.over_approx);
        return rec;
    }
    Discretization disc = discretize_continuous(sys, cfg);
    rec.over_approx = disc.over_approx;
    rec.A = std::move(disc.A);
    rec.start = std::move(disc.omega0);
    rec.U = std::move(disc.W);
    if (disc.error_radius > 0.0)
        rec.U = rec.U ? minkowski_sum(*rec.U, disc.E) : disc.E;
    return rec;
}

std::pair<double, double> segment_interval(TimeKind kind, const ReachConfig& cfg, std::size_t k)
{
    const double kd = static_cast<double>(k);
    if (kind == TimeKind::Discrete)
        return {kd, kd};
    switch (cfg.bloat_policy)
    {
        case BloatPolicy::OnceHull: return {kd * cfg.r, (kd + 1.0) * cfg.r};
        case BloatPolicy::ErrorBall: return k == 0 ? std::pair{0.0, 0.0} : std::pair{(kd - 1.0) * cfg.r, kd * cfg.r};
        case BloatPolicy::SmallR: break;
    }
    return {kd * cfg.r, kd * cfg.r};
}

Flowpipe reach(const LinearSystem& sys, const ReachConfig& cfg)
{
    sys.validate();
    cfg.validate();
    const auto n = sys.dim();
    const Template T = cfg.directions ? cfg.directions : default_template(n);
    if (T->cols() != n)
        throw DimensionError("template has dimension " + std::to_string(T->cols()) + ", system has "
                             + std::to_string(n));
    if (cfg.bad_set && dim(*cfg.bad_set) != n)
        throw DimensionError("bad set has dimension " + std::to_string(dim(*cfg.bad_set)) + ", system has "
                             + std::to_string(n));

    Flowpipe fp;
    Recurrence rec = make_recurrence(sys, cfg);
    fp.over_approx = rec.over_approx;

    StepEngine engine(rec.A, rec.start, rec.U, cfg.strategy, T);
    const std::size_t limit = detail::iteration_limit(sys, cfg);
    std::vector<SetRep> seen;
    for (std::size_t k = 0;; ++k)
    {
        SetRep P = engine.current();
        const auto [lo, hi] = segment_interval(sys.time_kind, cfg, k);
        fp.segments.push_back({k, lo, hi, P});

        if (cfg.mode == Termination::BadSet && !is_empty(intersect(P, *cfg.bad_set)))
        {
            fp.status = FlowStatus::BadReached;
            fp.status_step = k;
            break;
        }
        if (cfg.mode == Termination::Fixpoint)
        {
            // Slack relative to the set's magnitude: an absolute one would
            // declare any set contracted below it a fixpoint.
            if (k > 0 && contains_set(std::span<const SetRep>(seen), P, fixpoint_tolerance(P)))
            {
                fp.status = FlowStatus::Fixpoint;
                fp.status_step = k;
                break;
            }
            seen.push_back(P);
        }
        if (k == limit)
        {
            fp.status = cfg.mode == Termination::Bounded ? FlowStatus::Completed : FlowStatus::Horizon;
            fp.status_step = k;
            break;
        }
        engine.advance();
    }
    fp.over_approx = fp.over_approx || engine.over_approx();
    return fp;
}

} // namespace setreach
