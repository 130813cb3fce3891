#include <cmath>

#include <gtest/gtest.h>

#include "risnet/coverage.hpp"

using namespace risnet;

// Reference values below come from an independent route,
// E ln(1 + X/Y) = ∫ (1 - L_X(z)) L_Y(z) e^{-z σ²} dz / z, by adaptive quadrature.

TEST(Coverage, NoiseOnlyClosedForm) {
  SystemParams p = reconstructed_defaults();
  p.lambda_bs = 0.0;
  p.lambda_ris = 0.0;
  for (double r : {50.0, 200.0, 800.0})
    for (double t : {0.1, 1.0, 10.0}) {
      double want = std::exp(-t * p.noise_power / (p.p0 * pathloss(r, p)));
      EXPECT_NEAR(coverage_probability(t, r, p), want, 1e-6) << r << " " << t;
    }
}

TEST(Coverage, NoRisAgainstReference) {
  SystemParams p = reconstructed_defaults();
  p.lambda_ris = 0.0;
  EXPECT_NEAR(coverage_probability(1.0, 60.0, p), 0.9116466385415177, 1e-6);
}

TEST(Coverage, ThresholdZeroAndMonotone) {
  SystemParams p = reconstructed_defaults();
  EXPECT_NEAR(coverage_probability(0.0, 80.0, p), 1.0, 1e-7);
  double prev = 1.0;
  for (double t : {0.1, 0.5, 1.0, 3.0, 10.0, 30.0}) {
    double c = coverage_probability(t, 80.0, p);
    EXPECT_LE(c, prev + 1e-7);
    EXPECT_GE(c, 0.0);
    prev = c;
  }
  EXPECT_THROW(coverage_probability(-1.0, 80.0, p), DomainError);
}

TEST(Coverage, RisHelpsCoverage) {
  SystemParams p = reconstructed_defaults();
  SystemParams q = p;
  q.lambda_ris = 0.0;
  EXPECT_GT(coverage_probability(3.0, 120.0, p), coverage_probability(3.0, 120.0, q));
}

TEST(Coverage, BPlusIsDeterministicAndAtZeroIsOne) {
  SystemParams p = reconstructed_defaults();
  double s = evaluation_point(100.0, p);
  double a = b_upsilon_plus(s, 2.0, 100.0, p), b = b_upsilon_plus(s, 2.0, 100.0, p);
  EXPECT_EQ(a, b);
  EXPECT_DOUBLE_EQ(b_upsilon_plus(0.0, 2.0, 100.0, p), 1.0);
}

TEST(Coverage, ChebyshevRingMatchesDirectEvaluation) {
  SystemParams p = reconstructed_defaults();
  QuadratureConfig cfg;
  double r = 90.0, s = evaluation_point(r, p);
  PointEngine fast(p, r, s, cfg, DerivativeMode::Throughput);
  PointEngine slow(p, r, s, cfg, DerivativeMode::Throughput);
  slow.set_interpolate_ring(false);
  for (double t : {0.3, 2.0, 20.0}) {
    auto a = fast.b_plus(t), b = slow.b_plus(t);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-9) << "component " << i << " T=" << t;
  }
  EXPECT_GT(fast.ring_cells(), 0u);
}

TEST(Coverage, RateAtDistanceAgainstReference) {
  SystemParams p = reconstructed_defaults();
  EXPECT_NEAR(ergodic_rate_at(50.0, p).value, 3.4994398673865867, 1e-6);
  EXPECT_NEAR(ergodic_rate_at(100.0, p).value, 1.6397142220494758, 1e-6);
  EXPECT_NEAR(ergodic_rate_at(300.0, p).value, 0.2344195948689219, 1e-6);
  SystemParams q = p;
  q.lambda_ris = 0.0;
  EXPECT_NEAR(ergodic_rate_at(60.0, q).value, 2.927332642434117, 1e-6);
}

TEST(Coverage, CoverageHoleRateAgainstReference) {
  SystemParams p = reconstructed_defaults();
  p.scenario = Scenario::CoverageHole;
  p.penalty_k = 2.0;
  auto g = scenario_geometry(12345.0, p);  // the argument is ignored in a hole
  EXPECT_NEAR(g.r, 80.0, 1e-9);
  EXPECT_NEAR(ergodic_rate_at(0.0, p).value, 1.6614801353418798, 1e-6);
}

TEST(Coverage, TypicalRateConventions) {
  SystemParams p = reconstructed_defaults();
  auto lit = ergodic_rate_typical(p, {}, GuardConvention::Literal);
  auto cond = ergodic_rate_typical(p, {}, GuardConvention::Conditional);
  double mass = std::exp(-std::numbers::pi * p.lambda_bs * p.r_guard * p.r_guard);
  EXPECT_NEAR(lit.value, cond.value * mass, 1e-12);
  EXPECT_NEAR(lit.value, 0.9909404562, 2e-6);
  SystemParams h = p;
  h.scenario = Scenario::CoverageHole;
  EXPECT_THROW(ergodic_rate_typical(h), DomainError);
}

TEST(Coverage, RateIntegralDivergesWithoutDecay) {
  QuadratureConfig cfg;
  auto flat = [](double) { Triple t; t[0] = 1.0; return t; };
  EXPECT_THROW(rate_integral(flat, cfg), DivergenceError);
}

TEST(Coverage, ZeroBsDensityWithRisIsRejected) {
  SystemParams p = reconstructed_defaults();
  p.lambda_bs = 0.0;
  EXPECT_THROW(coverage_probability(1.0, 60.0, p), DomainError);
}
