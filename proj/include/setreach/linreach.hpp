#ifndef SETREACH_LINREACH_HPP_
#define SETREACH_LINREACH_HPP_

#include "setreach/setgeom.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace setreach
{

enum class TimeKind
{
    Discrete,
    Continuous
};

/**
 * x' = A x + B v + c (discrete) or dx/dt = A x + B v + c (continuous),
 * v ranging over V. B and V are either both present or both absent; the
 * drift c is optional.
 */
struct LinearSystem
{
    Matrix A;
    std::optional<Matrix> B;
    std::optional<SetRep> V;
    std::optional<Vector> c;
    SetRep X0 = EmptySet{};
    TimeKind time_kind = TimeKind::Discrete;

    Eigen::Index dim() const { return A.rows(); }

    /// Throws DimensionError / GeometryError on inconsistent data.
    void validate() const;
};

/// The set of B v + c over v in V, or nullopt for an autonomous system.
std::optional<SetRep> input_set(const LinearSystem& sys, bool* over_approx = nullptr);

enum class Strategy
{
    Vertices,
    Facets,
    Lazy
};

enum class BloatPolicy
{
    SmallR,
    OnceHull,
    ErrorBall
};

enum class Termination
{
    Bounded,
    BadSet,
    Fixpoint
};

struct ReachConfig
{
    double r = 0.01;
    double L = 0.0; // steps (discrete) or duration (continuous)
    Termination mode = Termination::Bounded;
    std::optional<SetRep> bad_set;
    Strategy strategy = Strategy::Lazy;
    Template directions; // null: default_template(n)
    BloatPolicy bloat_policy = BloatPolicy::OnceHull;
    std::size_t max_iterations = 0; // fixpoint guard; 0 picks 10 L, or 10000 when L = 0
    std::optional<double> state_bound; // R_X for error_ball; estimated when absent

    /// Throws std::invalid_argument for r <= 0, L < 0 or a missing bad set.
    void validate() const;
};

std::string to_string(Strategy s);
std::string to_string(BloatPolicy p);
std::string to_string(Termination t);

struct Segment
{
    std::size_t step = 0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    SetRep set = EmptySet{};
};

enum class FlowStatus
{
    Completed,
    BadReached,
    Fixpoint,
    Horizon,
    Incomplete,
    Stalled
};

std::string to_string(FlowStatus s);

struct Flowpipe
{
    std::vector<Segment> segments;
    FlowStatus status = FlowStatus::Completed;
    std::size_t status_step = 0; // step of bad_reached / fixpoint
    bool over_approx = false;    // some step had to be template-approximated
};

/**
 * P_k = A^k X0 + sum_{i<k} A^i U, kept symbolic.
 *
 * Support queries along the tracked directions cost one support evaluation
 * of X0 per direction: the rows (A^T)^k d are carried along and the input
 * contributions are accumulated as the set advances. Other directions are
 * answered by replaying the k-step sum.
 */
class LazyReachSet
{
    public:
        LazyReachSet(SetRep X0, Matrix A, std::optional<SetRep> U, Template tracked);

        std::size_t k() const { return k_; }
        Eigen::Index dim() const { return A_->rows(); }
        const Template& tracked() const { return tracked_; }
        const Matrix& A() const { return *A_; }

        double support(const Vector& d) const;
        /// Support values along the tracked directions.
        Vector tracked_support() const;

        /// Advances one step in place.
        void advance();

    private:
        std::shared_ptr<const SetRep> X0_;
        std::shared_ptr<const Matrix> A_;
        std::shared_ptr<const SetRep> U_;
        Template tracked_;
        std::size_t k_ = 0;
        Matrix R_;     // rows (A^T)^k d for the tracked directions
        Vector accum_; // sum_{i<k} rho_U((A^T)^i d)
};

/// Copy advanced by one step; the argument is left untouched.
LazyReachSet lazy_advance(const LazyReachSet& S);

/// Template hull of the lazy set. Never fed back into the recurrence.
HPolytope concretize(const LazyReachSet& S, const Template& directions);

SetRep step_autonomous(const SetRep& P, const Matrix& A);

/// Exact A P + B V by pairwise vertex sums, reduced to extreme points.
VPolytope step_input_vertices(const VPolytope& P, const VPolytope& V, const Matrix& A, const Matrix& B);
/// Same, but with the unreduced candidate list.
VPolytope step_input_vertex_candidates(const VPolytope& P, const VPolytope& V, const Matrix& A, const Matrix& B);

/**
 * Over-approximates A P + B V by mapping the facets of P and pushing each
 * outward by the support of B V in its new normal direction. A singular A
 * falls back to `fallback` (default template when null) and sets
 * *over_approx.
 */
HPolytope step_input_facets(const HPolytope& P, const SetRep& V, const Matrix& A, const Matrix& B,
    const Template& fallback = nullptr, bool* over_approx = nullptr);

/**
 * Continuous dynamics sampled with period r.
 *
 * The sampled recurrence is P_{k+1} = A P_k + W (+ E). W covers the input
 * integrated over one period and is absent for autonomous systems.
 * With once_hull, P_k covers the time interval [k r, (k+1) r].
 * With error_ball and small_r, P_0 = X0; under error_ball the set
 * P_k (k >= 1) covers [(k-1) r, k r], and under small_r only the sample
 * time k r is covered.
 */
struct Discretization
{
    Matrix A;
    SetRep omega0 = EmptySet{};
    SetRep E = EmptySet{};
    std::optional<SetRep> W;
    double error_radius = 0.0;
    bool over_approx = false;
};

Discretization discretize_continuous(const LinearSystem& sys, const ReachConfig& cfg);

/// Exact sampled input gain: integral of e^{A s} over [0, r].
Matrix input_gain(const Matrix& A, double r);

/**
 * One strategy-specific flowpipe recurrence P_{k+1} = A P_k + U.
 *
 * Used by reach() and by the hybrid engine; exposes the current step as a
 * concrete set and answers support queries.
 */
class StepEngine
{
    public:
        StepEngine(const Matrix& A, const SetRep& start, std::optional<SetRep> U, Strategy strategy,
            Template directions);

        std::size_t k() const { return k_; }
        /// Current P_k: VPolytope (vertices), HPolytope (facets, lazy).
        SetRep current() const;
        double support(const Vector& d) const;
        void advance();
        bool over_approx() const { return over_approx_; }

    private:
        Matrix A_;
        std::optional<SetRep> U_;
        Strategy strategy_;
        Template directions_;
        std::size_t k_ = 0;
        bool over_approx_ = false;
        std::optional<LazyReachSet> lazy_;
        SetRep exact_ = EmptySet{};
        std::optional<Matrix> Ainv_; // facets, when A is invertible
};

/// Number of recurrence steps for the horizon: L (discrete) or ceil(L / r).
std::size_t horizon_steps(const LinearSystem& sys, const ReachConfig& cfg);

/// The sampled recurrence P_{k+1} = A P_k + U that reach() iterates.
struct Recurrence
{
    Matrix A;
    SetRep start = EmptySet{};
    std::optional<SetRep> U;
    bool over_approx = false;
};

Recurrence make_recurrence(const LinearSystem& sys, const ReachConfig& cfg);

/// Time covered by step k: {k} for discrete systems, else per bloat policy.
std::pair<double, double> segment_interval(TimeKind kind, const ReachConfig& cfg, std::size_t k);

Flowpipe reach(const LinearSystem& sys, const ReachConfig& cfg);

struct SimTrace
{
    std::vector<Vector> zeta; // inputs, one per step
    std::vector<Vector> xi;   // states, zeta.size() + 1 entries
};

/**
 * Trajectory of the (sampled) system from x0 under the input sequence.
 * Continuous systems hold each input constant over a period r.
 * Throws std::invalid_argument when some zeta_k is outside V.
 */
SimTrace simulate(const LinearSystem& sys, const Vector& x0, const std::vector<Vector>& zeta, double r = 0.0);

} // namespace setreach

#endif
