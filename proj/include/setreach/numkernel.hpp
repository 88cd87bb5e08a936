#ifndef SETREACH_NUMKERNEL_HPP_
#define SETREACH_NUMKERNEL_HPP_

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace setreach
{

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raised whenever operand shapes do not agree.
class DimensionError : public std::invalid_argument
{
    public:
        explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Absolute feasibility / optimality tolerance used by the kernel.
inline constexpr double kLpTolerance = 1e-9;

/// Matrix exponential e^{A r} by scaling and squaring with diagonal Pade
/// approximants (degrees 3, 5, 7, 9, 13). Returns the exact identity when
/// r == 0.
Matrix mat_exp(const Matrix& A, double r);

/// Dense matrix-vector product with shape checking.
Vector mat_apply(const Matrix& A, const Vector& x);

/// Infinity-induced matrix norm (max absolute row sum).
double norm_inf(const Matrix& A);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

/**
 * maximize c.x subject to A x <= b, x free.
 */
struct LpProblem
{
    Vector objective;
    Matrix constraints;
    Vector bounds;
};

enum class LpStatus
{
    Optimal,
    Infeasible,
    Unbounded
};

struct LpResult
{
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Vector argmax;

    bool optimal() const { return status == LpStatus::Optimal; }
};

/// Dense two-phase simplex with Bland's rule. When the optimum is not
/// unique the lexicographically smallest optimal point is returned.
LpResult lp_max(const LpProblem& prob);

/// Feasibility only: true iff {x : A x <= b} is nonempty.
bool lp_feasible(const Matrix& A, const Vector& b);

} // namespace setreach

#endif
