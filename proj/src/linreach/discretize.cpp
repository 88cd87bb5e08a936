#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace setreach
{

namespace detail
{

double exp_remainder(double x)
{
    if (std::abs(x) >= 0.1)
        return std::expm1(x) - x;
    double term = x * x / 2.0;
    double sum = 0.0;
    for (int i = 3; i < 40 && term != 0.0; ++i)
    {
        sum += term;
        term *= x / i;
    }
    return sum;
}

double inf_norm_bound(const SetRep& s)
{
    const Box b = bounding_box(s);
    return std::max(b.lo().cwiseAbs().maxCoeff(), b.hi().cwiseAbs().maxCoeff());
}

} // namespace detail

Discretization discretize_continuous(const LinearSystem& sys, const ReachConfig& cfg)
{
    if (sys.time_kind != TimeKind::Continuous)
        throw std::invalid_argument("discretize_continuous: system is discrete-time");
    if (!(cfg.r > 0.0) || !std::isfinite(cfg.r))
        throw std::invalid_argument("discretize_continuous: r must be positive");
    const auto n = sys.dim();
    const double r = cfg.r;

    Discretization out;
    out.A = mat_exp(sys.A, r);

    // Taylor remainder bounds in the infinity norm.
    const double a = norm_inf(sys.A);
    const double rem = detail::exp_remainder(a * r);
    const double gamma = std::exp(a * r);

    const std::optional<SetRep> U = input_set(sys, &out.over_approx);
    const double R_V = U ? detail::inf_norm_bound(*U) : 0.0;
    const double beta = a > 0.0 ? rem / a * R_V : 0.0;
    std::optional<SetRep> rU;
    if (U)
    {
        rU = linear_map(r * Matrix::Identity(n, n), *U);
        out.W = beta > 0.0 ? bloat(*rU, beta) : *rU;
    }

    out.E = singleton(Vector::Zero(n));
    switch (cfg.bloat_policy)
    {
        case BloatPolicy::SmallR: out.omega0 = sys.X0; break;
        case BloatPolicy::OnceHull:
        {
            const double alpha = rem * detail::inf_norm_bound(sys.X0);
            SetRep far = linear_map(out.A, sys.X0);
            if (rU)
                far = minkowski_sum(far, *rU, &out.over_approx);
            const Template T = cfg.directions ? cfg.directions : default_template(n);
            SetRep hull = convex_hull_union(sys.X0, far, T, &out.over_approx);
            if (alpha + beta > 0.0)
                hull = bloat(hull, alpha + beta);
            if (auto box = as_box(hull))
                hull = *box;
            out.omega0 = std::move(hull);
            break;
        }
        case BloatPolicy::ErrorBall:
        {
            out.omega0 = sys.X0;
            double R_X = 0.0;
            if (cfg.state_bound)
            {
                if (!(*cfg.state_bound >= 0.0))
                    throw std::invalid_argument("state_bound must be nonnegative");
                R_X = *cfg.state_bound;
            }
            else
            {
                // Sample-time sets without E contain every true sampled state.
                LazyReachSet probe(sys.X0, out.A, out.W, axis_template(n));
                const std::size_t steps = detail::iteration_limit(sys, cfg);
                for (std::size_t k = 0;; ++k)
                {
                    R_X = std::max(R_X, probe.tracked_support().maxCoeff());
                    if (k == steps)
                        break;
                    probe.advance();
                }
            }
            // Distance from any state in one period to the next sample.
            const double eps = r * (a * (gamma * R_X + r * gamma * R_V) + R_V);
            out.error_radius = eps;
            if (eps > 0.0)
                out.E = Box(Vector::Constant(n, -eps), Vector::Constant(n, eps));
            break;
        }
    }
    return out;
}

} // namespace setreach
