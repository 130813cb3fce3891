#include <cmath>

#include <gtest/gtest.h>

#include "risnet/planner.hpp"

using namespace risnet;

namespace {

InvestmentState state(double bs_km2, double ris_per_ring, const SystemParams& p) {
  InvestmentState s;
  s.lambda_bs = per_m2(bs_km2);
  s.lambda_ris = lambda_ris_for_count(ris_per_ring, p);
  return s;
}

// Stub rate surface: BS gain shrinks with density, RIS gain shrinks with RIS count.
RateSensitivity stub(const SystemParams& q) {
  RateSensitivity r;
  double nb = per_km2(q.lambda_bs), nr = q.lambda_ris * q.ring_area();
  r.tau = std::log1p(nb) + 0.1 * std::log1p(nr);
  r.gains.d_tau_d_lambda_bs = 1e7 / (1.0 + nb);
  // per-RIS gain 1.1e5 / (1 + RIS per ring), independent of the BS density
  r.gains.d_tau_d_lambda_ris = 1.1e5 * q.lambda_bs * q.ring_area() / (1.0 + nr);
  return r;
}

}  // namespace

TEST(Planner, CostModelValidation) {
  EXPECT_NO_THROW(CostModel::from_ratio(10.0, per_m2(2.0)));
  EXPECT_THROW(CostModel::from_ratio(0.5, per_m2(2.0)), DomainError);
  EXPECT_THROW(CostModel::from_totals(10.0, 0.0, per_m2(2.0)), DomainError);
  EXPECT_THROW(CostModel::from_ratio(10.0, 0.0), DomainError);
  auto c = CostModel::from_totals(30.0, 3.0, per_m2(2.0));
  EXPECT_DOUBLE_EQ(c.cost_ratio_j(), 10.0);
}

TEST(Planner, DecisionRuleAndTie) {
  SystemParams p = reconstructed_defaults();
  ClusterRing ring(p);
  auto s = state(5.0, 2.0, p);
  CostModel c = CostModel::from_ratio(10.0, per_m2(2.0));
  double thr = 1.0 * (10.0 + s.lambda_ris * ring.area);
  EXPECT_EQ(decide(thr, 1.0, s, c, ring).decision, Decision::BS);  // tie goes to BS
  EXPECT_EQ(decide(thr * (1 - 1e-12), 1.0, s, c, ring).decision, Decision::RIS);
  EXPECT_NEAR(decide(0.0, 1.0, s, c, ring).threshold, 12.0, 1e-12);
  EXPECT_TRUE(decide(-1.0, 0.0, s, c, ring).stagnant);
  EXPECT_FALSE(decide(-1.0, 1e-9, s, c, ring).stagnant);
  EXPECT_THROW(decide(NAN, 1.0, s, c, ring), DomainError);
}

TEST(Planner, DecisionIsInvariantToCostScale) {
  SystemParams p = reconstructed_defaults();
  ClusterRing ring(p);
  auto s = state(5.0, 2.0, p);
  auto a = CostModel::from_totals(10.0, 1.0, per_m2(2.0));
  auto b = CostModel::from_totals(1e4, 1e3, per_m2(2.0));
  for (double e_bs : {5.0, 11.0, 12.0, 13.0, 50.0})
    EXPECT_EQ(decide(e_bs, 1.0, s, a, ring).decision, decide(e_bs, 1.0, s, b, ring).decision);
}

TEST(Planner, BudgetIdentityAndIncrements) {
  SystemParams p = reconstructed_defaults();
  ClusterRing ring(p);
  CostModel c = CostModel::from_ratio(10.0, per_m2(2.0));
  auto s = state(4.0, 3.0, p);
  for (Decision d : {Decision::BS, Decision::RIS}) {
    auto inc = round_increment(s, d, c, ring);
    double spend = inc.d_lambda_bs * (c.c_bs_total + c.c_ris_total * ring.area * s.lambda_ris) +
                   inc.d_lambda_ris * c.c_ris_total * s.lambda_bs * ring.area;
    EXPECT_NEAR(spend, c.round_budget(), 1e-15 * c.round_budget());
    EXPECT_DOUBLE_EQ(inc.spend, c.round_budget());
  }
  // a RIS round buys J * budget RISs per km^2 when C_RIS is the unit
  auto inc = round_increment(s, Decision::RIS, c, ring);
  EXPECT_NEAR(per_km2(inc.d_lambda_ris * s.lambda_bs * ring.area), 20.0, 1e-9);
  // a BS round with no RIS yet buys exactly the budget in BSs
  auto empty = state(4.0, 0.0, p);
  EXPECT_NEAR(per_km2(round_increment(empty, Decision::BS, c, ring).d_lambda_bs), 2.0, 1e-12);
  auto next = apply_round(s, Decision::RIS, c, ring);
  EXPECT_EQ(next.round, 1);
  EXPECT_DOUBLE_EQ(next.lambda_bs, s.lambda_bs);
}

TEST(Planner, GainConventions) {
  SystemParams p = reconstructed_defaults();
  ClusterRing ring(p);
  auto s = state(10.0, 5.0, p);
  GainPair g{3.0, 7.0};
  auto a = expected_gains(g, s, ring, RisGainConvention::PerRisCount);
  auto b = expected_gains(g, s, ring, RisGainConvention::RingScaled);
  double na = s.lambda_bs * ring.area;
  EXPECT_DOUBLE_EQ(a.e_bs, 3.0);
  EXPECT_NEAR(a.e_ris, 7.0 / na, 1e-15);
  EXPECT_NEAR(b.e_ris, 7.0 * na, 1e-15);
}

TEST(Planner, StubTrajectoryAndDeterminism) {
  SystemParams p = reconstructed_defaults();
  PlannerOptions opt;
  opt.n_rounds = 6;
  CostModel c = CostModel::from_ratio(10.0, per_m2(2.0));
  auto start = state(1.0, 0.0, p);
  auto t1 = run_trajectory(start, c, p, opt, stub);
  auto t2 = run_trajectory(start, c, p, opt, stub);
  ASSERT_EQ(t1.size(), 7u);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    EXPECT_EQ(t1[i].lambda_bs, t2[i].lambda_bs);
    EXPECT_EQ(t1[i].lambda_ris, t2[i].lambda_ris);
    EXPECT_EQ(t1[i].round, static_cast<int>(i));
  }
  EXPECT_EQ(t1.back().status, "final");
  EXPECT_FALSE(t1.back().decision.has_value());
  for (std::size_t i = 0; i + 1 < t1.size(); ++i) {
    ASSERT_TRUE(t1[i].decision.has_value());
    EXPECT_DOUBLE_EQ(t1[i].spend, c.round_budget());
  }
  // BS while 1e7/(1+n_BS) >= 1.1e5 J: four BS rounds from 1/km^2 at J = 10
  EXPECT_EQ(first_ris_round(t1), 4);
  // RIS becomes attractive earlier when BSs are dearer
  auto dear = run_trajectory(start, CostModel::from_ratio(40.0, per_m2(2.0)), p, opt, stub);
  EXPECT_EQ(first_ris_round(dear), 1);
}

TEST(Planner, StagnationPolicies) {
  SystemParams p = reconstructed_defaults();
  CostModel c = CostModel::from_ratio(10.0, per_m2(2.0));
  auto flat = [](const SystemParams&) { return RateSensitivity{}; };
  PlannerOptions opt;
  opt.n_rounds = 3;
  auto t = run_trajectory(state(1.0, 0.0, p), c, p, opt, flat);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].status, "stagnant");
  opt.stagnation = StagnationPolicy::ForceRis;
  t = run_trajectory(state(1.0, 0.0, p), c, p, opt, flat);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(*t[0].decision, Decision::RIS);
  EXPECT_EQ(t[0].status, "stagnant-forced");
  opt.n_rounds = -1;
  EXPECT_THROW(run_trajectory(state(1.0, 0.0, p), c, p, opt, flat), DomainError);
}

TEST(Planner, ZeroRoundsReportsInitialState) {
  SystemParams p = reconstructed_defaults();
  PlannerOptions opt;
  opt.n_rounds = 0;
  auto t = run_trajectory(state(1.0, 0.0, p), CostModel{}, p, opt, stub);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].status, "final");
  EXPECT_GT(t[0].e_bs, 0.0);
}
