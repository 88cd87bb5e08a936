#include "setreach/expr.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace setreach;

namespace
{

const std::vector<std::string> kXY{"x", "y"};

Vector xy(double x, double y) { return (Vector(2) << x, y).finished(); }

double eval(const std::string& text, double x, double y) { return evaluate(parse_expression(text, kXY), xy(x, y)); }

} // namespace

TEST(ExprParse, Precedence)
{
    EXPECT_DOUBLE_EQ(eval("2 + 3*x^2", 2, 0), 14.0);
    EXPECT_DOUBLE_EQ(eval("-x^2", 3, 0), -9.0);
    EXPECT_DOUBLE_EQ(eval("2^3^2", 0, 0), 512.0);
    EXPECT_DOUBLE_EQ(eval("x - y - 1", 5, 2), 2.0);
    EXPECT_DOUBLE_EQ(eval("x / y / 2", 8, 2), 2.0);
    EXPECT_DOUBLE_EQ(eval("(1 - x^2)*y - x", 1.5, 2.0), (1 - 2.25) * 2.0 - 1.5);
}

TEST(ExprParse, Functions)
{
    EXPECT_DOUBLE_EQ(eval("sin(x) + cos(y)", 0.3, 0.7), std::sin(0.3) + std::cos(0.7));
    EXPECT_DOUBLE_EQ(eval("exp(-x)", 1.25, 0), std::exp(-1.25));
    EXPECT_DOUBLE_EQ(eval("pi", 0, 0), M_PI);
    EXPECT_DOUBLE_EQ(eval("1.5e-1*x", 2, 0), 0.3);
}

TEST(ExprParse, ErrorsCarryColumn)
{
    try
    {
        parse_expression("x + z", kXY);
        FAIL();
    }
    catch (const ExprError& e)
    {
        EXPECT_EQ(e.offset(), 4u);
    }
    EXPECT_THROW(parse_expression("x +", kXY), ExprError);
    EXPECT_THROW(parse_expression("(x", kXY), ExprError);
    EXPECT_THROW(parse_expression("x^y", kXY), ExprError);
    EXPECT_THROW(parse_expression("tan(x)", kXY), ExprError);
    EXPECT_THROW(parse_expression("", kXY), ExprError);
}

TEST(ExprDerivative, MatchesFiniteDifferences)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const char* text : {"(1 - x^2)*y - x", "sin(x*y) + exp(-y^2)", "x^3 / (2 + cos(y))", "-x^0.5 + y"})
    {
        const Expr e = parse_expression(text, kXY);
        for (int var = 0; var < 2; ++var)
        {
            const Expr d = differentiate(e, var);
            for (int i = 0; i < 20; ++i)
            {
                Vector p = xy(std::abs(u(rng)) + 0.1, u(rng));
                const double h = 1e-6;
                Vector a = p, b = p;
                a(var) += h;
                b(var) -= h;
                const double fd = (evaluate(e, a) - evaluate(e, b)) / (2 * h);
                EXPECT_NEAR(evaluate(d, p), fd, 1e-6 * (1 + std::abs(fd))) << text << " d/d" << kXY[var];
            }
        }
    }
}

TEST(ExprPrint, ReparsesToSameFunction)
{
    for (const char* text : {"-x^3", "(1 - x^2)*y - x", "sin(x)/(1 + y^2)", "x - (y - 1)", "2^-1*x"})
    {
        const Expr e = parse_expression(text, kXY);
        const Expr back = parse_expression(to_string(e, kXY), kXY);
        for (double x : {-0.7, 0.2, 1.3})
            EXPECT_DOUBLE_EQ(evaluate(back, xy(x, 0.4)), evaluate(e, xy(x, 0.4))) << text;
    }
}

TEST(ExprInterval, EnclosesSampledRange)
{
    std::mt19937_64 rng(5);
    const Box box(xy(-0.5, 0.5), xy(1.0, 2.0));
    for (const char* text : {"(1 - x^2)*y - x", "sin(3*x) * exp(y)", "x^2 - x", "y / (1 + x^2)"})
    {
        const Expr e = parse_expression(text, kXY);
        const Interval I = evaluate_interval(e, box);
        std::uniform_real_distribution<double> ux(-0.5, 1.0), uy(0.5, 2.0);
        for (int i = 0; i < 500; ++i)
        {
            const double v = evaluate(e, xy(ux(rng), uy(rng)));
            EXPECT_LE(I.lo, v) << text;
            EXPECT_GE(I.hi, v) << text;
        }
    }
}

TEST(ExprInterval, DivisionThroughZeroThrows)
{
    const Box box(xy(-1, -1), xy(1, 1));
    EXPECT_THROW(evaluate_interval(parse_expression("1 / x", kXY), box), std::domain_error);
}

TEST(ExprSystem, JacobianAndHessianBound)
{
    std::vector<Expr> f{parse_expression("y", kXY), parse_expression("(1 - x^2)*y - x", kXY)};
    const NonlinearSystem sys = make_nonlinear_system(f, HessianSource::Interval);
    EXPECT_EQ(sys.n, 2);
    const Vector p = xy(0.4, -0.3);
    EXPECT_TRUE(sys.jacobian(p).isApprox(finite_difference_jacobian(sys, p), 1e-6));

    // Hessian of f_2 is [[-2y, -2x], [-2x, 0]]; its spectral norm is below the bound.
    const Box box(xy(-1, -2), xy(1, 2));
    const Vector M = sys.hessian_bound(box);
    EXPECT_EQ(M(0), 0.0);
    double worst = 0.0;
    for (double x : {-1.0, 0.0, 1.0})
        for (double y : {-2.0, 0.0, 2.0})
        {
            Matrix H(2, 2);
            H << -2 * y, -2 * x, -2 * x, 0;
            worst = std::max(worst, H.operatorNorm());
        }
    EXPECT_GE(M(1), worst);

    const NonlinearSystem sampled = make_nonlinear_system(f, HessianSource::Sampled);
    EXPECT_FALSE(sampled.hessian_bound);
    const NonlinearSystem given = make_nonlinear_system(f, HessianSource::Given, xy(0, 7));
    EXPECT_EQ(given.hessian_bound(box)(1), 7.0);
}
