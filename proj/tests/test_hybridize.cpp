#include "setreach/hybridize.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace setreach;

namespace
{

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

Box box1(double lo, double hi) { return Box(vec({lo}), vec({hi})); }

double max_abs(const Box& b, Eigen::Index i) { return std::max(std::abs(b.lo()(i)), std::abs(b.hi()(i))); }

NonlinearSystem square()
{
    NonlinearSystem s;
    s.n = 1;
    s.f = [](const Vector& x) { return Vector(x.array().square()); };
    s.jacobian = [](const Vector& x) { return Matrix(Matrix::Constant(1, 1, 2.0 * x(0))); };
    s.hessian_bound = [](const Box&) { return vec({2.0}); };
    return s;
}

NonlinearSystem neg_cube()
{
    NonlinearSystem s;
    s.n = 1;
    s.f = [](const Vector& x) { return Vector(-x.array().cube()); };
    s.jacobian = [](const Vector& x) { return Matrix(Matrix::Constant(1, 1, -3.0 * x(0) * x(0))); };
    s.hessian_bound = [](const Box& b) { return vec({6.0 * max_abs(b, 0)}); };
    return s;
}

constexpr double kMu = 1.0;

NonlinearSystem van_der_pol()
{
    NonlinearSystem s;
    s.n = 2;
    s.f = [](const Vector& x) { return vec({x(1), kMu * (1.0 - x(0) * x(0)) * x(1) - x(0)}); };
    s.jacobian = [](const Vector& x) {
        Matrix J(2, 2);
        J << 0.0, 1.0, -2.0 * kMu * x(0) * x(1) - 1.0, kMu * (1.0 - x(0) * x(0));
        return J;
    };
    s.hessian_bound = [](const Box& b) {
        const double a = 2.0 * kMu * max_abs(b, 1), c = 2.0 * kMu * max_abs(b, 0);
        return vec({0.0, std::sqrt(a * a + 2.0 * c * c)});
    };
    return s;
}

NonlinearSystem linear(const Matrix& A)
{
    NonlinearSystem s;
    s.n = A.rows();
    s.f = [A](const Vector& x) { return Vector(A * x); };
    s.jacobian = [A](const Vector&) { return A; };
    s.hessian_bound = [n = A.rows()](const Box&) { return Vector(Vector::Zero(n)); };
    return s;
}

// Segments sorted by start time for "x at time t lies in some segment" lookups.
class Cover
{
    public:
        void add(const Segment& s)
        {
            segs_.push_back(s);
            width_ = std::max(width_, s.t_hi - s.t_lo);
        }
        void finish()
        {
            std::sort(segs_.begin(), segs_.end(), [](const Segment& a, const Segment& b) { return a.t_lo < b.t_lo; });
        }
        bool contains(double t, const Vector& x, double tol) const
        {
            auto it = std::upper_bound(segs_.begin(), segs_.end(), t + 1e-12,
                [](double v, const Segment& s) { return v < s.t_lo; });
            while (it != segs_.begin())
            {
                --it;
                if (it->t_lo < t - width_ - 1e-12)
                    break;
                if (t <= it->t_hi + 1e-12 && member(it->set, x, tol))
                    return true;
            }
            return false;
        }
        std::size_t size() const { return segs_.size(); }

    private:
        std::vector<Segment> segs_;
        double width_ = 0.0;
};

Cover cover(const Flowpipe& fp)
{
    Cover c;
    for (const auto& s : fp.segments)
        c.add(s);
    c.finish();
    return c;
}

Cover cover(const HybridFlowpipe& fp)
{
    Cover c;
    for (const auto& p : fp.pipes)
        for (const auto& s : p.pipe.segments)
            c.add(s);
    c.finish();
    return c;
}

// Checks 100 trajectories from random points of X0 at every r/10 up to L.
void expect_trajectories_covered(const NonlinearSystem& sys, const Box& X0, const Cover& c, double r, double L)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int samples = static_cast<int>(std::lround(L / r)) * 10;
    int misses = 0;
    for (int run = 0; run < 100; ++run)
    {
        Vector x0(sys.n);
        for (Eigen::Index i = 0; i < sys.n; ++i)
            x0(i) = X0.lo()(i) + (run < 2 ? run : unit(rng)) * (X0.hi()(i) - X0.lo()(i));
        const auto trace = oracle::rk4_trace(sys.f, x0, r / 10.0, samples, 10);
        for (int j = 0; j <= samples; ++j)
            if (!c.contains(j * r / 10.0, trace[static_cast<std::size_t>(j)], 1e-6))
                ++misses;
    }
    EXPECT_EQ(misses, 0);
}

} // namespace

TEST(Linearize, SquareOnUnitInterval)
{
    const auto lin = linearize(square(), box1(0.0, 1.0));
    EXPECT_NEAR(lin.A(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(lin.b(0), -0.25, 1e-15);
    EXPECT_TRUE(lin.rigorous);
    const Box V = std::get<Box>(lin.V);
    EXPECT_NEAR(V.hi()(0), 0.25, 1e-15);
    EXPECT_NEAR(V.lo()(0), -0.25, 1e-15);
    // Dense sampling of the error (x - 0.5)^2.
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i <= 10000; ++i)
    {
        const double x = i / 10000.0;
        const double e = x * x - (lin.A(0, 0) * x + lin.b(0));
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    EXPECT_NEAR(lo, 0.0, 1e-12);
    EXPECT_NEAR(hi, 0.25, 1e-12);
    EXPECT_LE(V.lo()(0), lo);
    EXPECT_GE(V.hi()(0), hi);
}

TEST(Linearize, SineNearZero)
{
    NonlinearSystem s;
    s.n = 1;
    s.f = [](const Vector& x) { return vec({std::sin(x(0))}); };
    s.jacobian = [](const Vector& x) { return Matrix(Matrix::Constant(1, 1, std::cos(x(0)))); };
    s.hessian_bound = [](const Box&) { return vec({1.0}); };
    const auto lin = linearize(s, box1(-0.1, 0.1));
    EXPECT_DOUBLE_EQ(lin.A(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(lin.b(0), 0.0);
    const double rad = std::get<Box>(lin.V).hi()(0);
    EXPECT_LE(rad, 0.005 + 1e-15);
    double worst = 0.0;
    for (int i = 0; i <= 10000; ++i)
    {
        const double x = -0.1 + 0.2 * i / 10000.0;
        worst = std::max(worst, std::abs(std::sin(x) - x));
    }
    EXPECT_NEAR(worst, 1.6658e-4, 1e-7);
    EXPECT_LE(worst, rad);
}

TEST(Linearize, LinearIsExact)
{
    Matrix A(2, 2);
    A << -1.0, 2.0, 0.5, -3.0;
    const auto lin = linearize(linear(A), Box(vec({-1.0, 2.0}), vec({3.0, 5.0})));
    EXPECT_EQ(lin.A, A);
    EXPECT_TRUE(lin.b.isZero(0.0));
    const Box V = std::get<Box>(lin.V);
    EXPECT_TRUE(V.lo().isZero(0.0));
    EXPECT_TRUE(V.hi().isZero(0.0));
}

TEST(Linearize, FiniteDifferenceJacobian)
{
    NonlinearSystem s = van_der_pol();
    const Vector x = vec({1.3, -0.7});
    const Matrix J = finite_difference_jacobian(s, x);
    EXPECT_LT((J - s.jacobian(x)).cwiseAbs().maxCoeff(), 1e-8);
    s.jacobian = nullptr;
    const auto lin = linearize(s, Box(vec({1.0, -1.0}), vec({1.6, -0.4})));
    EXPECT_FALSE(lin.rigorous);
}

TEST(Linearize, SampledFallbackIsFlaggedAndCoversSamples)
{
    NonlinearSystem s = van_der_pol();
    s.hessian_bound = nullptr;
    const Box dom(vec({0.5, 1.0}), vec({1.5, 2.0}));
    const auto lin = linearize(s, dom);
    EXPECT_FALSE(lin.rigorous);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i)
    {
        const Vector x = sample_point(SetRep(dom), rng);
        EXPECT_TRUE(member(lin.V, s.f(x) - lin.A * x - lin.b, 1e-12));
    }
}

TEST(Linearize, RigorousBoundCoversSamples)
{
    const NonlinearSystem s = van_der_pol();
    const Box dom(vec({-0.3, 1.8}), vec({0.4, 2.4}));
    const auto lin = linearize(s, dom);
    EXPECT_TRUE(lin.rigorous);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 2000; ++i)
    {
        const Vector x = sample_point(SetRep(dom), rng);
        EXPECT_TRUE(member(lin.V, s.f(x) - lin.A * x - lin.b, 0.0));
    }
}

TEST(Linearize, HalvingDomainQuartersBound)
{
    for (const auto& sys : {square(), neg_cube()})
    {
        const Box big = box1(0.2, 1.0), small = box1(0.4, 0.8);
        const double r_big = std::get<Box>(linearize(sys, big).V).hi()(0);
        const double r_small = std::get<Box>(linearize(sys, small).V).hi()(0);
        EXPECT_LE(r_small, 0.25 * r_big * (1.0 + 1e-12));
    }
    const NonlinearSystem v = van_der_pol();
    const Box big(vec({-1.0, -1.0}), vec({1.0, 1.0})), small(vec({-0.5, -0.5}), vec({0.5, 0.5}));
    const Box vb = std::get<Box>(linearize(v, big).V), vs = std::get<Box>(linearize(v, small).V);
    EXPECT_LE(vs.hi()(1), 0.25 * vb.hi()(1) * (1.0 + 1e-12));
}

TEST(Linearize, Errors)
{
    NonlinearSystem bad = square();
    bad.f = [](const Vector& x) { return vec({std::log(x(0) - 2.0)}); };
    EXPECT_THROW(linearize(bad, box1(0.0, 1.0)), std::runtime_error);
    EXPECT_THROW(linearize(square(), Box(vec({0.0, 0.0}), vec({1.0, 1.0}))), DimensionError);
    NonlinearSystem none;
    EXPECT_THROW(linearize(none, box1(0.0, 1.0)), std::invalid_argument);
}

TEST(StaticHybridize, SquareTwoCells)
{
    const HybridAutomaton H = static_hybridize(square(), box1(0.0, 1.0), {2});
    ASSERT_EQ(H.modes.size(), 2u);
    ASSERT_EQ(H.transitions.size(), 2u);
    EXPECT_EQ(H.transitions[0].source, H.transitions[1].target);
    EXPECT_EQ(H.transitions[0].target, H.transitions[1].source);
    for (const auto& t : H.transitions)
    {
        const Box g = bounding_box(SetRep(t.guard));
        EXPECT_NEAR(g.lo()(0), 0.5, 1e-8);
        EXPECT_NEAR(g.hi()(0), 0.5, 1e-8);
    }
    // Cell [0, 0.5]: center 0.25, slope 0.5, offset -1/16.
    EXPECT_DOUBLE_EQ(H.modes[0].dynamics.A(0, 0), 0.5);
    EXPECT_DOUBLE_EQ((*H.modes[0].dynamics.c)(0), -0.0625);
    EXPECT_NO_THROW(H.validate());
}

TEST(StaticHybridize, GridStructure2D)
{
    const HybridAutomaton H = static_hybridize(van_der_pol(), Box(vec({-1.0, -1.0}), vec({2.0, 1.0})), {3, 2});
    EXPECT_EQ(H.modes.size(), 6u);
    // 2 * (horizontal faces 2*2 + vertical faces 3*1).
    EXPECT_EQ(H.transitions.size(), 14u);
    EXPECT_EQ(H.modes[4].name, "cell_1_1");
    EXPECT_EQ(locate_cell(Box(vec({-1.0, -1.0}), vec({2.0, 1.0})), {3, 2}, vec({0.5, 0.5})), 4);
    EXPECT_EQ(locate_cell(Box(vec({-1.0, -1.0}), vec({2.0, 1.0})), {3, 2}, vec({5.0, 0.5})), -1);
    const Box inv = bounding_box(SetRep(H.modes[4].invariant));
    EXPECT_NEAR(inv.lo()(0), 0.0, 1e-12);
    EXPECT_NEAR(inv.hi()(0), 1.0, 1e-12);
    EXPECT_NEAR(inv.lo()(1), 0.0, 1e-12);
    EXPECT_NEAR(inv.hi()(1), 1.0, 1e-12);
}

TEST(StaticHybridize, CapRefusal)
{
    StaticHybridOptions opt;
    opt.max_cells = 100;
    const Box region(Vector::Zero(3), Vector::Ones(3));
    NonlinearSystem s = linear(-Matrix::Identity(3, 3));
    EXPECT_THROW(static_hybridize(s, region, {5, 5, 5}, opt), std::length_error);
    EXPECT_NO_THROW(static_hybridize(s, region, {4, 5, 5}, opt));
    EXPECT_THROW(static_hybridize(s, region, {0, 5, 5}, opt), std::invalid_argument);
}

TEST(StaticHybridize, LinearModesHaveNoError)
{
    Matrix A(2, 2);
    A << 0.0, 1.0, -1.0, -0.2;
    const HybridAutomaton H = static_hybridize(linear(A), Box(vec({-1.0, -1.0}), vec({1.0, 1.0})), {2, 2});
    for (const auto& m : H.modes)
    {
        EXPECT_FALSE(m.dynamics.V.has_value());
        EXPECT_EQ(m.dynamics.A, A);
    }
}

TEST(StaticHybridize, LinearMatchesLinreach)
{
    // Whole flowpipe stays in one cell of a 1-cell grid.
    Matrix A(2, 2);
    A << -0.5, 1.0, -1.0, -0.5;
    const Box X0(vec({0.4, -0.1}), vec({0.6, 0.1}));
    HybridAutomaton H = static_hybridize(linear(A), Box(vec({-2.0, -2.0}), vec({2.0, 2.0})), {1, 1});
    HybridConfig cfg;
    cfg.reach.r = 0.05;
    cfg.reach.L = 2.0;
    const HybridFlowpipe hf = static_hybrid_reach(H, SetRep(X0), cfg);
    ASSERT_EQ(hf.pipes.size(), 1u);

    LinearSystem ls;
    ls.A = A;
    ls.X0 = X0;
    ls.time_kind = TimeKind::Continuous;
    const Flowpipe fp = reach(ls, cfg.reach);
    const auto& segs = hf.pipes[0].pipe.segments;
    ASSERT_EQ(segs.size(), fp.segments.size());
    const Matrix D = *default_template(2);
    for (std::size_t k = 0; k < segs.size(); ++k)
        EXPECT_LT((support_values(segs[k].set, D) - support_values(fp.segments[k].set, D)).cwiseAbs().maxCoeff(),
            1e-9);
}

TEST(StaticHybridize, NegCubeContainsTrajectories)
{
    const Box region = box1(0.3, 0.7);
    const HybridAutomaton H = static_hybridize(neg_cube(), region, {8});
    HybridConfig cfg;
    cfg.reach.r = 0.01;
    cfg.reach.L = 1.0;
    cfg.prune = true;
    cfg.jump_depth = 20;
    const Box X0 = box1(0.5, 0.6);
    const HybridFlowpipe hf = static_hybrid_reach(H, SetRep(X0), cfg);
    EXPECT_NE(hf.status, FlowStatus::Incomplete);
    expect_trajectories_covered(neg_cube(), X0, cover(hf), cfg.reach.r, cfg.reach.L);
}

TEST(DynamicHybridize, NegCubeContainsTrajectoriesAndExactSolution)
{
    DynamicConfig cfg;
    cfg.reach.r = 0.01;
    cfg.reach.L = 1.0;
    const Box X0 = box1(0.5, 0.6);
    const DynamicResult res = dynamic_hybridize_reach(neg_cube(), SetRep(X0), cfg);
    ASSERT_EQ(res.pipe.status, FlowStatus::Completed);
    EXPECT_TRUE(res.rigorous);
    const Cover c = cover(res.pipe);
    expect_trajectories_covered(neg_cube(), X0, c, cfg.reach.r, cfg.reach.L);
    // Closed form x(t) = x0 / sqrt(1 + 2 x0^2 t).
    for (double x0 : {0.5, 0.55, 0.6})
    {
        const double x1 = x0 / std::sqrt(1.0 + 2.0 * x0 * x0);
        EXPECT_TRUE(c.contains(1.0, vec({x1}), 0.0)) << x0;
    }
    const auto& last = res.pipe.segments.back();
    EXPECT_EQ(last.step, 100u);
    EXPECT_GE(bounding_box(last.set).hi()(0), 0.6 / std::sqrt(1.72));
}

TEST(DynamicHybridize, ErrorBallPolicy)
{
    DynamicConfig cfg;
    cfg.reach.r = 0.01;
    cfg.reach.L = 1.0;
    cfg.reach.bloat_policy = BloatPolicy::ErrorBall;
    const Box X0 = box1(0.5, 0.6);
    const DynamicResult res = dynamic_hybridize_reach(neg_cube(), SetRep(X0), cfg);
    ASSERT_EQ(res.pipe.status, FlowStatus::Completed);
    for (std::size_t k = 0; k < res.pipe.segments.size(); ++k)
        EXPECT_EQ(res.pipe.segments[k].step, k);
    expect_trajectories_covered(neg_cube(), X0, cover(res.pipe), cfg.reach.r, cfg.reach.L);
}

TEST(DynamicHybridize, VanDerPolContainsTrajectories)
{
    DynamicConfig cfg;
    cfg.reach.r = 0.01;
    cfg.reach.L = 1.0;
    const Box X0(vec({1.0, 2.0}), vec({1.05, 2.05}));
    const DynamicResult res = dynamic_hybridize_reach(van_der_pol(), SetRep(X0), cfg);
    ASSERT_EQ(res.pipe.status, FlowStatus::Completed);
    EXPECT_EQ(res.pipe.segments.size(), 101u);
    expect_trajectories_covered(van_der_pol(), X0, cover(res.pipe), cfg.reach.r, cfg.reach.L);
}

TEST(DynamicHybridize, SegmentsStayInTheirDomains)
{
    DynamicConfig cfg;
    cfg.reach.r = 0.01;
    cfg.reach.L = 1.0;
    const Box X0(vec({1.0, 2.0}), vec({1.05, 2.05}));
    const DynamicResult res = dynamic_hybridize_reach(van_der_pol(), SetRep(X0), cfg);
    ASSERT_FALSE(res.domains.empty());
    EXPECT_TRUE(contains_set(SetRep(res.domains.front()), SetRep(X0)));
    for (const auto& s : res.pipe.segments)
    {
        bool inside = false;
        for (const auto& d : res.domains)
            inside = inside || contains_set(SetRep(d), s.set);
        EXPECT_TRUE(inside) << s.step;
    }
    // Each rebuild starts from a set inside the new domain: consecutive
    // domains share the restart set, so they overlap.
    for (std::size_t i = 1; i < res.domains.size(); ++i)
        EXPECT_FALSE(is_empty(intersect(SetRep(res.domains[i - 1]), SetRep(res.domains[i]))));
}

TEST(DynamicHybridize, LinearMatchesLinreach)
{
    Matrix A(2, 2);
    A << -0.5, 1.0, -1.0, -0.5;
    const Box X0(vec({-1.0, -1.0}), vec({1.0, 1.0}));
    DynamicConfig cfg;
    cfg.reach.r = 0.05;
    cfg.reach.L = 2.0;
    const DynamicResult res = dynamic_hybridize_reach(linear(A), SetRep(X0), cfg);
    ASSERT_EQ(res.pipe.status, FlowStatus::Completed);
    EXPECT_EQ(res.domains.size(), 1u);

    LinearSystem ls;
    ls.A = A;
    ls.X0 = X0;
    ls.time_kind = TimeKind::Continuous;
    const Flowpipe fp = reach(ls, cfg.reach);
    ASSERT_EQ(res.pipe.segments.size(), fp.segments.size());
    std::mt19937_64 rng(11);
    for (std::size_t k = 0; k < fp.segments.size(); ++k)
    {
        EXPECT_EQ(res.pipe.segments[k].t_lo, fp.segments[k].t_lo);
        EXPECT_EQ(res.pipe.segments[k].t_hi, fp.segments[k].t_hi);
        for (int i = 0; i < 20; ++i)
        {
            const Vector d = oracle::random_vector(rng, 2).normalized();
            EXPECT_NEAR(support_value(res.pipe.segments[k].set, d), support_value(fp.segments[k].set, d), 1e-9);
        }
    }
}

TEST(DynamicHybridize, StallsWhenNothingFits)
{
    NonlinearSystem fast;
    fast.n = 1;
    fast.f = [](const Vector&) { return vec({1e9}); };
    fast.jacobian = [](const Vector&) { return Matrix(Matrix::Zero(1, 1)); };
    fast.hessian_bound = [](const Box&) { return vec({0.0}); };
    DynamicConfig cfg;
    cfg.reach.r = 0.1;
    cfg.reach.L = 1.0;
    cfg.max_stalls = 3;
    cfg.lookahead_steps = 0;
    const DynamicResult res = dynamic_hybridize_reach(fast, SetRep(box1(0.0, 0.0)), cfg);
    EXPECT_EQ(res.pipe.status, FlowStatus::Stalled);
    EXPECT_EQ(res.domains.size(), 4u);
    EXPECT_TRUE(res.pipe.segments.empty());
}

TEST(DynamicHybridize, RejectsBadInput)
{
    DynamicConfig cfg;
    cfg.reach.L = 1.0;
    EXPECT_THROW(dynamic_hybridize_reach(neg_cube(), SetRep(Box(Vector::Zero(2), Vector::Ones(2))), cfg),
        DimensionError);
    cfg.reach.mode = Termination::Fixpoint;
    EXPECT_THROW(dynamic_hybridize_reach(neg_cube(), SetRep(box1(0.5, 0.6)), cfg), std::invalid_argument);
}
