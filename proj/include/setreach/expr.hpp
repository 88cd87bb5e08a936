#ifndef SETREACH_EXPR_HPP_
#define SETREACH_EXPR_HPP_

#include "setreach/hybridize.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace setreach
{

/**
 * Arithmetic expression trees over named variables: numbers, + - * /,
 * ^ with a constant exponent, unary minus, sin, cos, exp and the constant pi.
 */
struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

enum class ExprOp
{
    Const,
    Var,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow, // b is always a Const
    Sin,
    Cos,
    Exp
};

struct ExprNode
{
    ExprOp op = ExprOp::Const;
    double value = 0.0; // Const
    int var = -1;       // Var
    Expr a, b;
};

/// Parse failure at a 0-based character offset.
class ExprError : public std::runtime_error
{
    public:
        ExprError(std::size_t offset, const std::string& what)
            : std::runtime_error("column " + std::to_string(offset + 1) + ": " + what), offset_(offset)
        {
        }
        std::size_t offset() const { return offset_; }

    private:
        std::size_t offset_;
};

Expr parse_expression(std::string_view text, const std::vector<std::string>& variables);

Expr constant(double v);
Expr variable(int index);

double evaluate(const Expr& e, const Vector& x);

/// d e / d x_var, with constant folding.
Expr differentiate(const Expr& e, int var);

/// Parseable text form; variables are printed by name.
std::string to_string(const Expr& e, const std::vector<std::string>& variables);

struct Interval
{
    double lo = 0.0;
    double hi = 0.0;
    double mag() const;
};

/// Enclosure of the range of e over the box, rounded outward.
/// Throws std::domain_error when a division by an interval containing 0 occurs.
Interval evaluate_interval(const Expr& e, const Box& box);

enum class HessianSource
{
    Interval, // interval bounds on symbolic second derivatives
    Sampled,  // no bound: linearize falls back to sampling
    Given     // constants supplied by the caller
};

/**
 * dx/dt = f(x) with f_i given by exprs[i]. The Jacobian is symbolic; the
 * Hessian bound per component is the Frobenius norm of the interval
 * magnitudes of the second derivatives, or the given constants.
 */
NonlinearSystem make_nonlinear_system(const std::vector<Expr>& exprs, HessianSource source,
    const Vector& given_bound = Vector());

} // namespace setreach

#endif
