#include "setreach/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace setreach
{

namespace
{

Expr node(ExprOp op, Expr a, Expr b = nullptr)
{
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

bool is_const(const Expr& e, double v) { return e->op == ExprOp::Const && e->value == v; }
bool is_const(const Expr& e) { return e->op == ExprOp::Const; }

// Builders with constant folding.
Expr add(Expr a, Expr b)
{
    if (is_const(a) && is_const(b))
        return constant(a->value + b->value);
    if (is_const(a, 0.0))
        return b;
    if (is_const(b, 0.0))
        return a;
    return node(ExprOp::Add, std::move(a), std::move(b));
}

Expr neg(Expr a)
{
    if (is_const(a))
        return constant(-a->value);
    if (a->op == ExprOp::Neg)
        return a->a;
    return node(ExprOp::Neg, std::move(a));
}

Expr sub(Expr a, Expr b)
{
    if (is_const(a) && is_const(b))
        return constant(a->value - b->value);
    if (is_const(b, 0.0))
        return a;
    if (is_const(a, 0.0))
        return neg(std::move(b));
    return node(ExprOp::Sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b)
{
    if (is_const(a) && is_const(b))
        return constant(a->value * b->value);
    if (is_const(a, 0.0) || is_const(b, 0.0))
        return constant(0.0);
    if (is_const(a, 1.0))
        return b;
    if (is_const(b, 1.0))
        return a;
    return node(ExprOp::Mul, std::move(a), std::move(b));
}

Expr div(Expr a, Expr b)
{
    if (is_const(a) && is_const(b) && b->value != 0.0)
        return constant(a->value / b->value);
    if (is_const(a, 0.0))
        return constant(0.0);
    if (is_const(b, 1.0))
        return a;
    return node(ExprOp::Div, std::move(a), std::move(b));
}

Expr pow(Expr a, double p)
{
    if (p == 0.0)
        return constant(1.0);
    if (p == 1.0)
        return a;
    if (is_const(a))
        return constant(std::pow(a->value, p));
    return node(ExprOp::Pow, std::move(a), constant(p));
}

Expr call(ExprOp op, Expr a)
{
    if (is_const(a))
    {
        const double v = a->value;
        return constant(op == ExprOp::Sin ? std::sin(v) : op == ExprOp::Cos ? std::cos(v) : std::exp(v));
    }
    return node(op, std::move(a));
}

class Parser
{
    public:
        Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

        Expr parse()
        {
            Expr e = expr();
            skip();
            if (pos_ < s_.size())
                throw ExprError(pos_, std::string("unexpected '") + s_[pos_] + "'");
            return e;
        }

    private:
        void skip()
        {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
        }

        bool accept(char c)
        {
            skip();
            if (pos_ < s_.size() && s_[pos_] == c)
            {
                ++pos_;
                return true;
            }
            return false;
        }

        Expr expr()
        {
            Expr e = term();
            for (;;)
            {
                if (accept('+'))
                    e = add(e, term());
                else if (accept('-'))
                    e = sub(e, term());
                else
                    return e;
            }
        }

        Expr term()
        {
            Expr e = unary();
            for (;;)
            {
                if (accept('*'))
                    e = mul(e, unary());
                else if (accept('/'))
                    e = div(e, unary());
                else
                    return e;
            }
        }

        Expr unary()
        {
            if (accept('-'))
                return neg(unary());
            if (accept('+'))
                return unary();
            return power();
        }

        Expr power()
        {
            Expr base = primary();
            skip();
            const std::size_t at = pos_;
            if (!accept('^'))
                return base;
            Expr ex = unary();
            if (!is_const(ex))
                throw ExprError(at, "exponent must be a constant");
            if (!std::isfinite(ex->value))
                throw ExprError(at, "exponent is not finite");
            return pow(base, ex->value);
        }

        Expr primary()
        {
            skip();
            if (pos_ >= s_.size())
                throw ExprError(pos_, "unexpected end of expression");
            const char c = s_[pos_];
            if (c == '(')
            {
                ++pos_;
                Expr e = expr();
                if (!accept(')'))
                    throw ExprError(pos_, "expected ')'");
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
                return identifier();
            throw ExprError(pos_, std::string("unexpected '") + c + "'");
        }

        Expr number()
        {
            const std::size_t start = pos_;
            double v = 0.0;
            const char* first = s_.data() + pos_;
            const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
            if (ec != std::errc() || ptr == first)
                throw ExprError(start, "malformed number");
            pos_ += static_cast<std::size_t>(ptr - first);
            return constant(v);
        }

        Expr identifier()
        {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            const std::string name(s_.substr(start, pos_ - start));
            skip();
            if (pos_ < s_.size() && s_[pos_] == '(')
            {
                ExprOp op;
                if (name == "sin")
                    op = ExprOp::Sin;
                else if (name == "cos")
                    op = ExprOp::Cos;
                else if (name == "exp")
                    op = ExprOp::Exp;
                else
                    throw ExprError(start, "unknown function '" + name + "'");
                ++pos_;
                Expr arg = expr();
                if (!accept(')'))
                    throw ExprError(pos_, "expected ')'");
                return call(op, arg);
            }
            const auto it = std::find(vars_.begin(), vars_.end(), name);
            if (it != vars_.end())
                return variable(static_cast<int>(it - vars_.begin()));
            if (name == "pi")
                return constant(std::numbers::pi);
            throw ExprError(start, "unknown variable '" + name + "'");
        }

        std::string_view s_;
        const std::vector<std::string>& vars_;
        std::size_t pos_ = 0;
};

double down(double v) { return std::nextafter(v, -std::numeric_limits<double>::infinity()); }
double up(double v) { return std::nextafter(v, std::numeric_limits<double>::infinity()); }

Interval widen(double lo, double hi) { return {down(lo), up(hi)}; }

Interval imul(const Interval& a, const Interval& b)
{
    const double p[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return widen(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
}

Interval ipow(const Interval& a, double p)
{
    const double r = std::round(p);
    if (r == p && std::abs(r) < 1e9)
    {
        const long k = static_cast<long>(r);
        if (k < 0)
        {
            if (a.lo <= 0.0 && a.hi >= 0.0)
                throw std::domain_error("negative power of an interval containing zero");
        }
        const double x = std::pow(a.lo, p), y = std::pow(a.hi, p);
        if (k % 2 == 0 && a.lo < 0.0 && a.hi > 0.0)
            return k > 0 ? widen(0.0, std::max(x, y)) : widen(std::min(x, y), std::max(x, y));
        return widen(std::min(x, y), std::max(x, y));
    }
    if (a.lo < 0.0)
        throw std::domain_error("fractional power of an interval with negative values");
    if (p < 0.0 && a.lo == 0.0)
        throw std::domain_error("negative power of an interval containing zero");
    const double x = std::pow(a.lo, p), y = std::pow(a.hi, p);
    return widen(std::min(x, y), std::max(x, y));
}

// Range of sin over [lo, hi], using the extrema at pi/2 + k pi.
Interval isin(const Interval& a, double shift)
{
    if (a.hi - a.lo >= 2.0 * std::numbers::pi)
        return {-1.0, 1.0};
    double lo = std::min(std::sin(a.lo + shift), std::sin(a.hi + shift));
    double hi = std::max(std::sin(a.lo + shift), std::sin(a.hi + shift));
    const double half = std::numbers::pi / 2.0;
    for (double k = std::ceil((a.lo + shift - half) / std::numbers::pi);
         k * std::numbers::pi + half <= a.hi + shift; k += 1.0)
    {
        if (std::fmod(std::abs(k), 2.0) == 0.0)
            hi = 1.0;
        else
            lo = -1.0;
    }
    const Interval w = widen(lo, hi);
    return {std::max(w.lo, -1.0), std::min(w.hi, 1.0)};
}

void print(std::ostream& os, const Expr& e, const std::vector<std::string>& vars)
{
    switch (e->op)
    {
        case ExprOp::Const:
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", e->value);
            if (e->value < 0.0)
                os << '(' << buf << ')';
            else
                os << buf;
            return;
        }
        case ExprOp::Var:
            os << (e->var < static_cast<int>(vars.size()) ? vars[static_cast<std::size_t>(e->var)]
                                                           : "x" + std::to_string(e->var));
            return;
        case ExprOp::Neg: os << "(-"; print(os, e->a, vars); os << ')'; return;
        case ExprOp::Sin: os << "sin("; print(os, e->a, vars); os << ')'; return;
        case ExprOp::Cos: os << "cos("; print(os, e->a, vars); os << ')'; return;
        case ExprOp::Exp: os << "exp("; print(os, e->a, vars); os << ')'; return;
        default: break;
    }
    const char* sym = e->op == ExprOp::Add ? " + " : e->op == ExprOp::Sub ? " - " : e->op == ExprOp::Mul ? " * "
                    : e->op == ExprOp::Div ? " / " : "^";
    os << '(';
    print(os, e->a, vars);
    os << sym;
    print(os, e->b, vars);
    os << ')';
}

} // namespace

Expr constant(double v)
{
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Const;
    n->value = v;
    return n;
}

Expr variable(int index)
{
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Var;
    n->var = index;
    return n;
}

Expr parse_expression(std::string_view text, const std::vector<std::string>& variables)
{
    return Parser(text, variables).parse();
}

double evaluate(const Expr& e, const Vector& x)
{
    switch (e->op)
    {
        case ExprOp::Const: return e->value;
        case ExprOp::Var: return x(e->var);
        case ExprOp::Add: return evaluate(e->a, x) + evaluate(e->b, x);
        case ExprOp::Sub: return evaluate(e->a, x) - evaluate(e->b, x);
        case ExprOp::Mul: return evaluate(e->a, x) * evaluate(e->b, x);
        case ExprOp::Div: return evaluate(e->a, x) / evaluate(e->b, x);
        case ExprOp::Neg: return -evaluate(e->a, x);
        case ExprOp::Pow: return std::pow(evaluate(e->a, x), e->b->value);
        case ExprOp::Sin: return std::sin(evaluate(e->a, x));
        case ExprOp::Cos: return std::cos(evaluate(e->a, x));
        case ExprOp::Exp: return std::exp(evaluate(e->a, x));
    }
    return 0.0;
}

Expr differentiate(const Expr& e, int var)
{
    switch (e->op)
    {
        case ExprOp::Const: return constant(0.0);
        case ExprOp::Var: return constant(e->var == var ? 1.0 : 0.0);
        case ExprOp::Add: return add(differentiate(e->a, var), differentiate(e->b, var));
        case ExprOp::Sub: return sub(differentiate(e->a, var), differentiate(e->b, var));
        case ExprOp::Mul:
            return add(mul(differentiate(e->a, var), e->b), mul(e->a, differentiate(e->b, var)));
        case ExprOp::Div:
            return div(sub(mul(differentiate(e->a, var), e->b), mul(e->a, differentiate(e->b, var))),
                pow(e->b, 2.0));
        case ExprOp::Neg: return neg(differentiate(e->a, var));
        case ExprOp::Pow:
        {
            const double p = e->b->value;
            return mul(mul(constant(p), pow(e->a, p - 1.0)), differentiate(e->a, var));
        }
        case ExprOp::Sin: return mul(call(ExprOp::Cos, e->a), differentiate(e->a, var));
        case ExprOp::Cos: return neg(mul(call(ExprOp::Sin, e->a), differentiate(e->a, var)));
        case ExprOp::Exp: return mul(e, differentiate(e->a, var));
    }
    return constant(0.0);
}

std::string to_string(const Expr& e, const std::vector<std::string>& variables)
{
    std::ostringstream os;
    print(os, e, variables);
    return os.str();
}

double Interval::mag() const { return std::max(std::abs(lo), std::abs(hi)); }

Interval evaluate_interval(const Expr& e, const Box& box)
{
    switch (e->op)
    {
        case ExprOp::Const: return {e->value, e->value};
        case ExprOp::Var: return {box.lo()(e->var), box.hi()(e->var)};
        case ExprOp::Add:
        {
            const Interval a = evaluate_interval(e->a, box), b = evaluate_interval(e->b, box);
            return widen(a.lo + b.lo, a.hi + b.hi);
        }
        case ExprOp::Sub:
        {
            const Interval a = evaluate_interval(e->a, box), b = evaluate_interval(e->b, box);
            return widen(a.lo - b.hi, a.hi - b.lo);
        }
        case ExprOp::Mul: return imul(evaluate_interval(e->a, box), evaluate_interval(e->b, box));
        case ExprOp::Div:
        {
            const Interval b = evaluate_interval(e->b, box);
            if (b.lo <= 0.0 && b.hi >= 0.0)
                throw std::domain_error("division by an interval containing zero");
            return imul(evaluate_interval(e->a, box), widen(1.0 / b.hi, 1.0 / b.lo));
        }
        case ExprOp::Neg:
        {
            const Interval a = evaluate_interval(e->a, box);
            return {-a.hi, -a.lo};
        }
        case ExprOp::Pow: return ipow(evaluate_interval(e->a, box), e->b->value);
        case ExprOp::Sin: return isin(evaluate_interval(e->a, box), 0.0);
        case ExprOp::Cos: return isin(evaluate_interval(e->a, box), std::numbers::pi / 2.0);
        case ExprOp::Exp:
        {
            const Interval a = evaluate_interval(e->a, box);
            return widen(std::exp(a.lo), std::exp(a.hi));
        }
    }
    return {0.0, 0.0};
}

NonlinearSystem make_nonlinear_system(const std::vector<Expr>& exprs, HessianSource source, const Vector& given_bound)
{
    const auto n = static_cast<Eigen::Index>(exprs.size());
    // jac[i][j] = d f_i / d x_j, hess[i][j][k] for k <= j.
    std::vector<std::vector<Expr>> jac(exprs.size());
    std::vector<std::vector<std::vector<Expr>>> hess(exprs.size());
    for (std::size_t i = 0; i < exprs.size(); ++i)
        for (int j = 0; j < n; ++j)
        {
            jac[i].push_back(differentiate(exprs[i], j));
            if (source == HessianSource::Interval)
            {
                hess[i].emplace_back();
                for (int k = 0; k <= j; ++k)
                    hess[i].back().push_back(differentiate(jac[i].back(), k));
            }
        }

    NonlinearSystem sys;
    sys.n = n;
    sys.f = [exprs, n](const Vector& x) {
        Vector y(n);
        for (Eigen::Index i = 0; i < n; ++i)
            y(i) = evaluate(exprs[static_cast<std::size_t>(i)], x);
        return y;
    };
    sys.jacobian = [jac, n](const Vector& x) {
        Matrix J(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                J(i, j) = evaluate(jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], x);
        return J;
    };
    if (source == HessianSource::Given)
    {
        if (given_bound.size() != n)
            throw DimensionError("hessian bound has " + std::to_string(given_bound.size()) + " entries, system has "
                                 + std::to_string(n));
        sys.hessian_bound = [given_bound](const Box&) { return given_bound; };
    }
    else if (source == HessianSource::Interval)
    {
        sys.hessian_bound = [hess, n](const Box& box) {
            Vector M(n);
            for (Eigen::Index i = 0; i < n; ++i)
            {
                double sq = 0.0;
                const auto& h = hess[static_cast<std::size_t>(i)];
                for (std::size_t j = 0; j < h.size(); ++j)
                    for (std::size_t k = 0; k <= j; ++k)
                    {
                        const double m = evaluate_interval(h[j][k], box).mag();
                        sq += (j == k ? 1.0 : 2.0) * m * m;
                    }
                // Slack for the unrounded sum of squares.
                M(i) = sq > 0.0 ? up(std::sqrt(sq) * (1.0 + 1e-14)) : 0.0;
            }
            return M;
        };
    }
    return sys;
}

} // namespace setreach
