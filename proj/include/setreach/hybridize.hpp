#ifndef SETREACH_HYBRIDIZE_HPP_
#define SETREACH_HYBRIDIZE_HPP_

#include "setreach/hybridreach.hpp"

#include <functional>
#include <vector>

namespace setreach
{

/**
 * dx/dt = f(x).
 *
 * `jacobian` may be empty (central finite differences are used then).
 * `hessian_bound`, when given, returns for each component i a bound M_i on
 * the spectral norm of the Hessian of f_i over the box; without it the
 * linearization error is estimated by sampling and flagged non-rigorous.
 */
struct NonlinearSystem
{
    Eigen::Index n = 0;
    std::function<Vector(const Vector&)> f;
    std::function<Matrix(const Vector&)> jacobian;
    std::function<Vector(const Box&)> hessian_bound;

    void validate() const;
};

struct LinearizeOptions
{
    int samples_per_axis = 21;   // grid for the sampled error estimate
    double safety_factor = 1.5;  // inflation of the sampled estimate
    double fd_step = 1e-6;       // relative finite-difference step
};

/// f(x) in A x + b + V for every x in the domain.
struct LinearizationDomain
{
    Box domain;
    Matrix A;
    Vector b;
    SetRep V = EmptySet{};
    bool rigorous = false;
};

Matrix finite_difference_jacobian(const NonlinearSystem& sys, const Vector& x, double rel_step = 1e-6);

LinearizationDomain linearize(const NonlinearSystem& sys, const Box& domain, const LinearizeOptions& opt = {});

struct StaticHybridOptions
{
    std::size_t max_cells = 4096;
    double guard_thickness = 1e-9; // faces are thickened to slabs of this half-width
    LinearizeOptions linearize;
};

/**
 * One mode per grid cell of `region` with the cell linearization as
 * dynamics and the cell as invariant; a transition in each direction across
 * every shared face. The initial mode/set are left for the caller.
 */
HybridAutomaton static_hybridize(const NonlinearSystem& sys, const Box& region, const std::vector<std::size_t>& cells,
    const StaticHybridOptions& opt = {});

/// Cell index (row-major over the grid) containing x, or -1 outside the region.
std::ptrdiff_t locate_cell(const Box& region, const std::vector<std::size_t>& cells, const Vector& x);

/// Runs hybrid_reach from X0 clipped to each cell it meets and merges the results.
HybridFlowpipe static_hybrid_reach(const HybridAutomaton& H, const SetRep& X0, const HybridConfig& cfg);

struct DynamicConfig
{
    ReachConfig reach;
    double margin_factor = 1.5;    // domain diagonal ~ this times the set's: margin (factor - 1)/2 * diagonal per side
    double min_margin = 1e-3;      // floor on the margin for point-like sets
    std::size_t lookahead_steps = 4; // margin also covers this many steps at the speed f(center); 0 disables
    bool recenter = true;          // run each domain in coordinates centered on it (smaller bloating)
    std::size_t max_stalls = 6;    // consecutive rebuilds without progress before giving up
    LinearizeOptions linearize;
};

struct DynamicResult
{
    Flowpipe pipe;
    std::vector<Box> domains; // one per rebuild, in order
    bool rigorous = true;     // false when some error box was only sampled
};

/**
 * Reachability through domains built around the current set. The flowpipe
 * advances in one domain until a segment leaves it; that step is undone
 * and a new domain is built around the last segment kept. Repeated
 * failures to advance double the margin and end with status stalled.
 */
DynamicResult dynamic_hybridize_reach(const NonlinearSystem& sys, const SetRep& X0, const DynamicConfig& cfg);

} // namespace setreach

#endif
