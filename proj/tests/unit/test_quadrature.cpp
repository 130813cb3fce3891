#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "risnet/quadrature.hpp"

using namespace risnet;

TEST(Quadrature, FiniteKnownIntegrals) {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  auto r = integrate_finite([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, cfg);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  // integrable endpoint singularity
  r = integrate_finite([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, cfg);
  EXPECT_NEAR(r.value, 2.0, 1e-9);
  EXPECT_THROW(integrate_finite([](double x) { return x; }, 1.0, 0.0, cfg), DomainError);
}

TEST(Quadrature, SemiInfinite) {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  auto r = integrate_semi_infinite([](double x) { return std::exp(-x); }, 0.0, cfg);
  EXPECT_NEAR(r.value, 1.0, 1e-10);
  r = integrate_semi_infinite([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, cfg);
  EXPECT_NEAR(r.value, std::numbers::pi / 2, 1e-9);
}

TEST(Quadrature, SemiInfiniteDivergence) {
  QuadratureConfig cfg;
  cfg.max_subdivisions = 60;
  EXPECT_THROW(integrate_semi_infinite([](double x) { return 1.0 / (1.0 + x); }, 0.0, cfg), DivergenceError);
}

TEST(Quadrature, VectorIntegrandSharesPartition) {
  auto f = [](double x) {
    VecN<3> v;
    v[0] = 1.0;
    v[1] = x;
    v[2] = x * x;
    return v;
  };
  auto r = integrate_partition<VecN<3>>(f, std::vector<double>{0.0, 0.5, 2.0}, 1e-14, 1e-13, 100);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value[0], 2.0, 1e-13);
  EXPECT_NEAR(r.value[1], 2.0, 1e-13);
  EXPECT_NEAR(r.value[2], 8.0 / 3.0, 1e-13);
}

TEST(Quadrature, PrincipalValueOfSymmetrizedIntegrand) {
  // PV ∫_{-1}^{1} e^x / x dx = 2 Shi(1); symmetrized: (e^u - e^{-u})/u on (0, 1]
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  auto r = principal_value_symmetric([](double u) { return 2.0 * std::sinh(u) / u; }, cfg, 1.0);
  EXPECT_NEAR(r.value, 2.0 * 1.0572508753757285, 1e-11);
}

TEST(Quadrature, PrincipalValueRejectsNonRemovableSingularity) {
  QuadratureConfig cfg;
  EXPECT_THROW(principal_value_symmetric([](double u) { return 1.0 / u; }, cfg, 1.0), SingularityError);
}

TEST(Quadrature, GaussLegendreExactForPolynomials) {
  auto g = gauss_legendre(10);
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    s += g.w[i] * std::pow(g.x[i], 18);
    w += g.w[i];
  }
  EXPECT_NEAR(w, 2.0, 1e-14);
  EXPECT_NEAR(s, 2.0 / 19.0, 1e-14);
}

TEST(Quadrature, TruncationPointAndValidation) {
  QuadratureConfig cfg;
  double u = truncation_point(4.0, 2.0, cfg);
  EXPECT_NEAR(std::exp(-2.0 * std::sqrt(u / cfg.tail_safety)), cfg.abs_tol, 1e-20);
  EXPECT_THROW(truncation_point(2.0, 1.0, cfg), DomainError);
  QuadratureConfig bad;
  bad.rel_tol = 0.0;
  EXPECT_THROW(validate(bad), DomainError);
  auto t = cfg.tightened(10.0);
  EXPECT_DOUBLE_EQ(t.rel_tol, cfg.rel_tol / 10.0);
  EXPECT_DOUBLE_EQ(t.abs_tol, cfg.abs_tol / 10.0);
}

TEST(Quadrature, CentralDifference) {
  EXPECT_NEAR(central_difference([](double x) { return std::exp(x); }, 0.0, 1e-4), 1.0, 1e-8);
}
