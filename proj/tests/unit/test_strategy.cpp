#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "bootperc/chain.hpp"
#include "bootperc/experiments.hpp"
#include "bootperc/strategy.hpp"

using namespace bootperc;

namespace {

Observation obs(std::int64_t t, std::int64_t f1, std::int64_t f2) {
  return {t, {0, 0}, {f1, f2}};
}

}  // namespace

TEST(MaxStrategy, PrefersLargerFrontierTiesToOne) {
  SelectionState s;
  const Strategy m = Strategy::max();
  EXPECT_EQ(m.select(obs(1, 5, 3), s), Community::one);
  EXPECT_EQ(m.select(obs(1, 2, 2), s), Community::one);
  EXPECT_EQ(m.select(obs(1, 0, 4), s), Community::two);
  EXPECT_EQ(m.name(), "max");
}

TEST(RoundRobin, AlternatesWhenFeasible) {
  SelectionState s;
  const Strategy rr = Strategy::roundrobin();
  EXPECT_EQ(rr.select(obs(1, 1, 1), s), Community::one);
  EXPECT_EQ(rr.select(obs(2, 1, 1), s), Community::two);
  EXPECT_EQ(rr.select(obs(2, 1, 0), s), Community::one);
  EXPECT_EQ(rr.select(obs(3, 0, 1), s), Community::two);
}

TEST(SampledCurve, RejectsBadInput) {
  EXPECT_THROW(SampledCurve({0, 1, 0.5}, {0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(SampledCurve({0, 1, 2}, {0, 1, 0.5}), std::invalid_argument);
  EXPECT_THROW(SampledCurve({0.1, 1}, {0, 1}), std::invalid_argument);
  EXPECT_THROW(SampledCurve({0, 1}, {0, 1}, -1.0), std::invalid_argument);
}

TEST(SampledCurve, GeneralisedInverseTakesInfimum) {
  const SampledCurve c({0, 1, 2, 3}, {0, 0, 1, 1}, 2.0);
  EXPECT_EQ(c.inverse(0.0), 0.0);
  EXPECT_DOUBLE_EQ(c.inverse(0.5), 1.5);
  EXPECT_DOUBLE_EQ(c.inverse(1.0), 2.0);  // plateau at height 1 starts at x = 2
  EXPECT_DOUBLE_EQ(c.inverse(2.0), 3.5);  // on the extension
  EXPECT_DOUBLE_EQ(c(3.5), 2.0);
  EXPECT_DOUBLE_EQ(c(0.5), 0.0);
  const SampledCurve bounded({0, 1}, {0, 1});
  EXPECT_TRUE(std::isinf(bounded.inverse(1.5)));
  EXPECT_THROW(bounded(2.0), std::domain_error);
}

TEST(Schedule, AxisSegmentUsesOnlyCommunityOne) {
  const SampledCurve c({0, 1}, {0, 0});
  const DeterministicSchedule s = build_schedule(ScheduleScale{10, 10, 1000, 1000}, c);
  ASSERT_EQ(s.horizon(), 10);
  for (std::int64_t t = 0; t <= 10; ++t) {
    EXPECT_EQ(s.w(Community::one, t), t);
    EXPECT_EQ(s.w(Community::two, t), 0);
  }
}

TEST(Schedule, DiagonalAlternates) {
  const SampledCurve c({0, 1}, {0, 1});
  const DeterministicSchedule s = build_schedule(ScheduleScale{10, 10, 1000, 1000}, c);
  ASSERT_EQ(s.horizon(), 20);
  for (std::int64_t t = 0; t <= 20; ++t) {
    EXPECT_LE(std::abs(s.w(Community::one, t) - s.w(Community::two, t)), 1);
    // simultaneous jumps: community one first
    EXPECT_EQ(s.w(Community::one, t), (t + 1) / 2);
  }
}

TEST(Schedule, UnitIncrementsAndSumOnRealCurves) {
  for (const auto& a : {AsymptoticParams::make(1, 1, 0.6, 2, 0.56, 0.1),
                        AsymptoticParams::make(2, 1.5, 0.4, 3, 0.6, 0.3),
                        AsymptoticParams::make(1, 1, 0.6, 2, 0.6, 0.4)}) {
    for (bool ext : {false, true}) {
      const SampledCurve c = trajectory_curve(a, ext);
      const DeterministicSchedule s = build_schedule(ScheduleScale{73.5, 41.2, 5000, 3000}, c);
      ASSERT_GT(s.horizon(), 0);
      for (std::int64_t t = 1; t <= s.horizon(); ++t) {
        const auto d1 = s.w(Community::one, t) - s.w(Community::one, t - 1);
        const auto d2 = s.w(Community::two, t) - s.w(Community::two, t - 1);
        ASSERT_EQ(s.w(Community::one, t) + s.w(Community::two, t), t);
        ASSERT_TRUE((d1 == 1 && d2 == 0) || (d1 == 0 && d2 == 1));
      }
      if (ext) {
        EXPECT_EQ(s.horizon(), 8000);  // saturates both communities
      }
    }
  }
}

TEST(Schedule, Deterministic) {
  const auto a = AsymptoticParams::make(1.3, 0.8, 0.5, 2, 0.4, 0.3);
  const DeterministicSchedule s1 = build_schedule(ScheduleScale{100, 80, 10000, 9000}, trajectory_curve(a, true));
  const DeterministicSchedule s2 = build_schedule(ScheduleScale{100, 80, 10000, 9000}, trajectory_curve(a, true));
  EXPECT_EQ(s1.w1(), s2.w1());
  EXPECT_EQ(s1.w2(), s2.w2());
}

TEST(TrajectoryCurve, StartsFlatThenFollowsZeta) {
  const auto a = AsymptoticParams::make(2, 1.5, 0.4, 2, 0.7, 0.2);
  const SampledCurve c = trajectory_curve(a, false);
  const CurveEndpoints e = curve_endpoints(a, chi(a));
  EXPECT_EQ(c(0.5 * e.x1_start), 0.0);
  EXPECT_NEAR(c.x1_end(), e.x1_end, 1e-12);
  const double mid = 0.5 * (e.x1_start + e.x1_end);
  EXPECT_NEAR(c(mid), zeta_curve(a, chi(a), mid), 1e-5);
  const double slope = default_extension_slope(c);
  EXPECT_GE(slope, 0.1);
  EXPECT_LE(slope, 10.0);
  EXPECT_THROW(trajectory_curve(AsymptoticParams::make(1, 1, 0.6, 2, 1.2, 0.1), true), std::domain_error);
}

TEST(Hybrid, InfeasibleAtFirstStep) {
  // schedule asks for community one first, but community one has no seeds
  const DeterministicSchedule s = build_schedule(ScheduleScale{10, 10, 100, 100}, SampledCurve({0, 1}, {0, 1}));
  const Strategy h = Strategy::hybrid(s);
  SelectionState st;
  Observation o{1, {0, 0}, {0, 3}};
  EXPECT_EQ(h.select(o, st), Community::two);
  ASSERT_TRUE(st.t_prime.has_value());
  EXPECT_EQ(*st.t_prime, 1);
  EXPECT_FALSE(st.on_schedule);
}

TEST(Hybrid, FollowsScheduleUntilTPrime) {
  FiniteMapping f;
  f.n1 = 20000;
  f.gamma = 0.6;
  for (const auto& [a1, a2] : std::vector<std::pair<double, double>>{{0.2, 0.2}, {0.56, 0.1}, {0.3, 0.05}}) {
    const ModelParams m = map_to_model(f, a1, a2);
    const Strategy h = hybrid_for_model(m);
    const DeterministicSchedule& s = *h.schedule();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      ChainOptions opt;
      opt.rng_seed = seed;
      opt.trajectory_stride = 1;
      const RunRecord rec = run_chain_lazy(m, h, opt);
      ASSERT_TRUE(rec.t_prime.has_value());
      EXPECT_LE(*rec.t_prime, rec.stop_time);
      for (const Snapshot& sn : rec.trajectory) {
        if (sn.t >= *rec.t_prime) break;
        ASSERT_EQ(sn.U1, s.w(Community::one, sn.t));
        ASSERT_EQ(sn.U2, s.w(Community::two, sn.t));
      }
    }
  }
}

TEST(Hybrid, SameFinalSizeAsMax) {
  FiniteMapping f;
  f.n1 = 3000;
  f.g1 = 30;
  const ModelParams m = map_to_model(f, 0.5, 0.3);
  const Strategy h = hybrid_for_model(m);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SbmGraph g = generate_graph(m, seed);
    const SeedSet s = sample_seeds(m, seed);
    const auto rh = run_chain(g, s, m.r, h, {seed, 0});
    EXPECT_EQ(rh.final_active, run_chain(g, s, m.r, Strategy::max(), {seed, 0}).final_active);
    EXPECT_LE(*rh.t_prime, rh.stop_time);
  }
}

TEST(Hybrid, SwappedOrientationMapsBack) {
  FiniteMapping f;
  f.n1 = 20000;
  f.nu = 2.0;
  f.gamma = 0.5;
  const ModelParams m = map_to_model(f, 0.1, 0.4);
  ASSERT_TRUE(asymptotic_from_model(m).swapped);
  const Strategy h = hybrid_for_model(m);
  const DeterministicSchedule& s = *h.schedule();
  // with alpha2 > alpha1 the schedule starts in community two
  EXPECT_EQ(s.w(Community::two, 1), 1);
  ChainOptions opt;
  opt.trajectory_stride = 1;
  const RunRecord rec = run_chain_lazy(m, h, opt);
  for (const Snapshot& sn : rec.trajectory) {
    if (sn.t >= *rec.t_prime) break;
    ASSERT_EQ(sn.U1, s.w(Community::one, sn.t));
    ASSERT_EQ(sn.U2, s.w(Community::two, sn.t));
  }
}

TEST(StrategyByName, KnownAndUnknown) {
  EXPECT_EQ(strategy_from_name("max").name(), "max");
  EXPECT_EQ(strategy_from_name("roundrobin").name(), "roundrobin");
  EXPECT_THROW(strategy_from_name("hybrid"), std::invalid_argument);
  EXPECT_THROW(strategy_from_name("greedy"), std::invalid_argument);
}
