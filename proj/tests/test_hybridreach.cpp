#include "setreach/hybridreach.hpp"
#include "thermostat.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace setreach;

namespace
{

Vector v1(double x) { return Vector::Constant(1, x); }
Box interval(double lo, double hi) { return Box(v1(lo), v1(hi)); }

double lo_of(const SetRep& s) { return -support_value(s, v1(-1)); }
double hi_of(const SetRep& s) { return support_value(s, v1(1)); }

HPolytope whole_space(Eigen::Index n) { return HPolytope(Matrix::Zero(0, n), Vector::Zero(0)); }

// Single heating mode, dx/dt = 30 - x.
HybridAutomaton heating(const HPolytope& invariant)
{
    HybridAutomaton H;
    H.modes.push_back({"heat", {-Matrix::Ones(1, 1), std::nullopt, std::nullopt, v1(30)}, invariant});
    H.initial = interval(19, 20);
    return H;
}

ReachConfig continuous_cfg(double L)
{
    ReachConfig cfg;
    cfg.r = 0.01;
    cfg.L = L;
    cfg.directions = axis_template(1);
    return cfg;
}

} // namespace

TEST(ModeReach, WholeSpaceNoGuardsIsPlainReach)
{
    HybridAutomaton H = heating(whole_space(1));
    const ReachConfig cfg = continuous_cfg(0.5);
    const ModeReachResult res = mode_reach(H, 0, H.initial, cfg);

    LinearSystem sys;
    sys.A = H.modes[0].dynamics.A;
    sys.c = v1(30);
    sys.X0 = H.initial;
    sys.time_kind = TimeKind::Continuous;
    const Flowpipe ref = reach(sys, cfg);
    ASSERT_EQ(res.pipe.segments.size(), ref.segments.size());
    for (std::size_t k = 0; k < ref.segments.size(); ++k)
    {
        EXPECT_NEAR(lo_of(res.pipe.segments[k].set), lo_of(ref.segments[k].set), 1e-9);
        EXPECT_NEAR(hi_of(res.pipe.segments[k].set), hi_of(ref.segments[k].set), 1e-9);
    }
    EXPECT_TRUE(res.hits.empty());
}

TEST(ModeReach, InvariantTruncatesHeating)
{
    const HybridAutomaton H = heating(thermostat::upper(22));
    const ModeReachResult res = mode_reach(H, 0, H.initial, continuous_cfg(2.0));

    // Lower edge of the true set at sample times.
    const double decay = std::exp(-0.01);
    std::size_t first_above = 0;
    for (double x = 19.0; x <= 22.0; x = decay * x + 30.0 * (1.0 - decay))
        ++first_above;
    const auto K = res.pipe.segments.size();
    EXPECT_LE(K, first_above + 1);
    EXPECT_GE(K, first_above - 1);
    EXPECT_LT(K, 201u);
    for (const auto& seg : res.pipe.segments)
        EXPECT_LE(hi_of(seg.set), 22.0 + 1e-9);
}

TEST(ModeReach, GuardHitsWhereUpperBoundCrosses)
{
    HybridAutomaton H = heating(whole_space(1));
    H.transitions.push_back({0, 0, thermostat::lower(22), std::nullopt});
    const ModeReachResult res = mode_reach(H, 0, H.initial, continuous_cfg(1.0));
    std::vector<std::size_t> expected;
    for (const auto& seg : res.pipe.segments)
        if (hi_of(seg.set) >= 22.0)
            expected.push_back(seg.step);
    std::vector<std::size_t> got;
    for (const auto& h : res.hits)
        got.push_back(h.step);
    EXPECT_EQ(got, expected);
    ASSERT_FALSE(got.empty());
    // the upper edge starts at 20 and follows 30 - 10 e^{-t}, so the first hit is near t = ln(10/8)
    EXPECT_NEAR(static_cast<double>(got.front()) * 0.01, std::log(10.0 / 8.0), 0.02);
}

TEST(GuardCross, SingleSegment)
{
    const Transition t{0, 0, thermostat::lower(22), std::nullopt};
    const std::vector<SetRep> segs{interval(21, 23)};
    const SetRep out = guard_cross(segs, t, axis_template(1));
    EXPECT_NEAR(lo_of(out), 22.0, 1e-12);
    EXPECT_NEAR(hi_of(out), 23.0, 1e-12);
}

TEST(GuardCross, ClusterTwoSegments)
{
    const Transition t{0, 0, thermostat::lower(22), std::nullopt};
    const std::vector<SetRep> segs{interval(21.5, 22.5), interval(22.3, 23.5)};
    const SetRep out = guard_cross(segs, t, axis_template(1));
    EXPECT_NEAR(lo_of(out), 22.0, 1e-12);
    EXPECT_NEAR(hi_of(out), 23.5, 1e-12);
}

TEST(GuardCross, ResetShift)
{
    const Transition t{0, 0, thermostat::lower(22), Reset{Matrix::Identity(1, 1), v1(-5)}};
    const std::vector<SetRep> segs{interval(22, 23)};
    const SetRep out = guard_cross(segs, t, axis_template(1));
    EXPECT_NEAR(lo_of(out), 17.0, 1e-12);
    EXPECT_NEAR(hi_of(out), 18.0, 1e-12);
}

TEST(GuardCross, NoHitIsEmpty)
{
    const Transition t{0, 0, thermostat::lower(22), std::nullopt};
    const std::vector<SetRep> segs{interval(1, 2)};
    EXPECT_TRUE(std::holds_alternative<EmptySet>(guard_cross(segs, t, axis_template(1))));
}

TEST(HybridReach, OneModeEqualsLinreach)
{
    const HybridAutomaton H = heating(whole_space(1));
    HybridConfig cfg;
    cfg.reach = continuous_cfg(0.3);
    const HybridFlowpipe fp = hybrid_reach(H, cfg);
    ASSERT_EQ(fp.pipes.size(), 1u);
    const ModeReachResult direct = mode_reach(H, 0, H.initial, cfg.reach);
    ASSERT_EQ(fp.pipes[0].pipe.segments.size(), direct.pipe.segments.size());
    EXPECT_EQ(fp.status, FlowStatus::Completed);
}

TEST(HybridReach, DepthZeroOnlyInitialMode)
{
    const HybridAutomaton H = thermostat::make();
    HybridConfig cfg;
    cfg.reach = continuous_cfg(3.0);
    cfg.jump_depth = 0;
    const HybridFlowpipe fp = hybrid_reach(H, cfg);
    ASSERT_EQ(fp.pipes.size(), 1u);
    EXPECT_EQ(fp.pipes[0].mode, 0u);
    ASSERT_FALSE(fp.jumps.empty());
    EXPECT_FALSE(fp.jumps.front().to.has_value());
}

TEST(HybridReach, ThermostatStaysInBand)
{
    const HybridAutomaton H = thermostat::make();
    HybridConfig cfg;
    cfg.reach = continuous_cfg(3.0);
    cfg.jump_depth = 20;
    const HybridFlowpipe fp = hybrid_reach(H, cfg);
    EXPECT_EQ(fp.status, FlowStatus::Completed);
    EXPECT_GT(fp.pipes.size(), 4u);
    for (const auto& mp : fp.pipes)
        for (const auto& seg : mp.pipe.segments)
        {
            EXPECT_GE(lo_of(seg.set), 17.0);
            EXPECT_LE(hi_of(seg.set), 23.0);
        }
}

TEST(HybridReach, SimulatedRunsAreCovered)
{
    for (const auto& params : {thermostat::Params{}, thermostat::Params{30, 10, 22, 18, 21, 19, 19, 20}})
    {
        const HybridAutomaton H = thermostat::make(params);
        HybridConfig cfg;
        cfg.reach = continuous_cfg(2.0);
        cfg.jump_depth = 20;
        const HybridFlowpipe fp = hybrid_reach(H, cfg);
        const thermostat::Index index(fp);
        std::mt19937_64 rng(7);
        for (int i = 0; i < 300; ++i)
            for (const auto& s : thermostat::run(params, cfg.reach.L, rng, i % 3))
                ASSERT_TRUE(index.contains(s.mode, s.t, s.x)) << "mode " << s.mode << " t " << s.t << " x " << s.x;
    }
}

TEST(HybridReach, JumpSetsInsideGuardAndInvariant)
{
    const thermostat::Params band{30, 10, 22, 18, 21, 19, 19, 20};
    const HybridAutomaton H = thermostat::make(band);
    HybridConfig cfg;
    cfg.reach = continuous_cfg(2.0);
    const HybridFlowpipe fp = hybrid_reach(H, cfg);
    ASSERT_FALSE(fp.jumps.empty());
    for (const auto& j : fp.jumps)
    {
        const Transition& t = H.transitions[j.transition];
        EXPECT_TRUE(contains_set(t.guard, j.set));
        EXPECT_TRUE(contains_set(H.modes[t.source].invariant, j.set));
    }
}

TEST(HybridReach, Deterministic)
{
    const HybridAutomaton H = thermostat::make({30, 10, 22, 18, 21, 19, 19, 20});
    HybridConfig cfg;
    cfg.reach = continuous_cfg(1.5);
    const HybridFlowpipe a = hybrid_reach(H, cfg);
    const HybridFlowpipe b = hybrid_reach(H, cfg);
    ASSERT_EQ(a.jumps.size(), b.jumps.size());
    for (std::size_t i = 0; i < a.jumps.size(); ++i)
    {
        EXPECT_EQ(a.jumps[i].from, b.jumps[i].from);
        EXPECT_EQ(a.jumps[i].to, b.jumps[i].to);
        EXPECT_EQ(a.jumps[i].first_step, b.jumps[i].first_step);
        EXPECT_EQ(a.jumps[i].last_step, b.jumps[i].last_step);
        EXPECT_EQ(support_values(a.jumps[i].set, *axis_template(1)), support_values(b.jumps[i].set, *axis_template(1)));
    }
}

TEST(HybridReach, DeeperExplorationOnlyAdds)
{
    const HybridAutomaton H = thermostat::make({30, 10, 22, 18, 21, 19, 19, 20});
    HybridConfig cfg;
    cfg.reach = continuous_cfg(1.5);
    std::vector<HybridFlowpipe> runs;
    for (std::size_t d = 0; d < 4; ++d)
    {
        cfg.jump_depth = d;
        runs.push_back(hybrid_reach(H, cfg));
    }
    for (std::size_t d = 0; d + 1 < runs.size(); ++d)
    {
        ASSERT_LE(runs[d].pipes.size(), runs[d + 1].pipes.size());
        for (std::size_t p = 0; p < runs[d].pipes.size(); ++p)
        {
            const auto& small = runs[d].pipes[p].pipe.segments;
            const auto& big = runs[d + 1].pipes[p].pipe.segments;
            ASSERT_EQ(small.size(), big.size());
            for (std::size_t k = 0; k < small.size(); ++k)
                EXPECT_TRUE(contains_set(big[k].set, small[k].set));
        }
    }
}

TEST(HybridReach, WorklistBoundGivesIncomplete)
{
    const HybridAutomaton H = thermostat::make();
    HybridConfig cfg;
    cfg.reach = continuous_cfg(3.0);
    cfg.jump_depth = 50;
    cfg.max_entries = 2;
    const HybridFlowpipe fp = hybrid_reach(H, cfg);
    EXPECT_EQ(fp.status, FlowStatus::Incomplete);
    EXPECT_EQ(fp.pipes.size(), 2u);
}

TEST(HybridReach, UnclusteredBranchesPerStep)
{
    const HybridAutomaton H = thermostat::make({30, 10, 22, 18, 21, 19, 19, 20});
    HybridConfig cfg;
    cfg.reach = continuous_cfg(0.6);
    cfg.jump_depth = 1;
    const HybridFlowpipe clustered = hybrid_reach(H, cfg);
    cfg.clustering = Clustering::None;
    const HybridFlowpipe branching = hybrid_reach(H, cfg);
    EXPECT_EQ(clustered.pipes.size(), 2u);
    EXPECT_GT(branching.pipes.size(), 10u);
}

TEST(HybridReach, BadSetStopsExploration)
{
    const HybridAutomaton H = thermostat::make();
    HybridConfig cfg;
    cfg.reach = continuous_cfg(3.0);
    cfg.reach.mode = Termination::BadSet;
    cfg.reach.bad_set = interval(17.9, 18.0);
    const HybridFlowpipe fp = hybrid_reach(H, cfg);
    EXPECT_EQ(fp.status, FlowStatus::BadReached);
    EXPECT_EQ(fp.pipes[fp.bad_pipe].mode, 1u);

    cfg.reach.bad_set = interval(25, 26);
    EXPECT_EQ(hybrid_reach(H, cfg).status, FlowStatus::Horizon);
}

TEST(HybridReach, InitialOutsideInvariantIsClippedWithWarning)
{
    HybridAutomaton H = thermostat::make();
    H.initial = interval(21, 23);
    HybridConfig cfg;
    cfg.reach = continuous_cfg(0.1);
    cfg.jump_depth = 0;
    const HybridFlowpipe fp = hybrid_reach(H, cfg);
    ASSERT_FALSE(fp.warnings.empty());
    EXPECT_LE(hi_of(fp.pipes[0].pipe.segments[0].set), 22.0 + 1e-9);
}

TEST(HybridReach, ValidationErrors)
{
    HybridAutomaton H = thermostat::make();
    H.transitions[0].target = 7;
    HybridConfig cfg;
    cfg.reach = continuous_cfg(1.0);
    EXPECT_THROW(hybrid_reach(H, cfg), std::invalid_argument);
    H = thermostat::make();
    H.initial = Box(Vector::Zero(2), Vector::Ones(2));
    EXPECT_THROW(hybrid_reach(H, cfg), DimensionError);
    H = thermostat::make();
    cfg.reach.mode = Termination::Fixpoint;
    EXPECT_THROW(hybrid_reach(H, cfg), std::invalid_argument);
    EXPECT_EQ(thermostat::make().mode_index("cool"), 1u);
    EXPECT_THROW(thermostat::make().mode_index("off"), std::out_of_range);
}
