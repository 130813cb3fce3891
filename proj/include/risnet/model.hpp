#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "risnet/errors.hpp"

namespace risnet {

enum class Scenario { ThroughputEnhancement, CoverageHole };

struct SystemParams {
  double lambda_bs = 10e-6;         // BS per m^2
  double lambda_ris = 0.0;          // RIS per m^2 of ring
  double r_in = 20.0;
  double r_out = 30.0;
  double r_guard = 50.0;
  double p0 = 1.0;                  // W
  double noise_power = 1e-13;       // W
  double alpha = 4.0;
  double beta = 2.99792458e8 / (4.0 * std::numbers::pi * 28e9);
  double carrier_hz = 28e9;
  double m_elements = 600;
  double zeta_mean = 0.0;
  double zeta_var = 0.0;
  double penalty_k = 1.0;           // linear, >= 1
  double c_hole = 0.253;
  Scenario scenario = Scenario::ThroughputEnhancement;

  double ring_area() const {
    return std::numbers::pi * (r_out * r_out - r_in * r_in);
  }
  // beam mean / variance after summing M elements
  double beam_mean() const { return m_elements * zeta_mean; }
  double beam_var() const { return m_elements * zeta_var; }
};

struct ClusterRing {
  double r_in, r_out, area;
  ClusterRing(double in, double out)
      : r_in(in), r_out(out), area(std::numbers::pi * (out * out - in * in)) {
    if (!(in >= 0.0 && in < out))
      throw DomainError("ClusterRing: need 0 <= r_in < r_out");
  }
  explicit ClusterRing(const SystemParams& p) : ClusterRing(p.r_in, p.r_out) {}
};

inline void validate(const SystemParams& p) {
  auto fail = [](const std::string& m) { throw DomainError("SystemParams: " + m); };
  if (!(p.alpha > 2.0)) fail("alpha must be > 2");
  if (!(p.lambda_bs >= 0.0) || !(p.lambda_ris >= 0.0)) fail("densities must be >= 0");
  if (!(p.r_in >= 0.0) || !(p.r_in < p.r_out)) fail("need 0 <= r_in < r_out");
  if (!(p.r_guard >= 0.0)) fail("r_guard must be >= 0");
  if (!(p.p0 >= 0.0) || !(p.noise_power >= 0.0)) fail("powers must be >= 0");
  if (!(p.beta > 0.0)) fail("beta must be > 0");
  if (!(p.m_elements >= 1.0)) fail("m_elements must be >= 1");
  if (!(p.zeta_mean >= 0.0)) fail("zeta_mean must be >= 0");
  if (!(p.zeta_var > 0.0)) fail("zeta_var must be > 0");
  if (!(p.penalty_k >= 1.0)) fail("penalty_k must be >= 1");
  if (!(p.c_hole >= 0.0)) fail("c_hole must be >= 0");
}

inline double beta_from_carrier(double carrier_hz) {
  if (!(carrier_hz > 0.0)) throw DomainError("carrier frequency must be > 0");
  return 2.99792458e8 / (4.0 * std::numbers::pi * carrier_hz);
}

// g(d) = beta (d+1)^-alpha
inline double pathloss(double d, const SystemParams& p) {
  return p.beta * std::pow(d + 1.0, -p.alpha);
}

inline double pathloss_derivative(double d, const SystemParams& p) {
  return -p.alpha * p.beta * std::pow(d + 1.0, -p.alpha - 1.0);
}

inline double reflected_distance(double r, double y, double psi) {
  double q = r * r + y * y - 2.0 * r * y * std::cos(psi);
  return std::sqrt(q > 0.0 ? q : 0.0);
}

// BS -> RIS at distance y, RIS -> UE at the law-of-cosines distance
inline double reflected_pathloss(double r, double y, double psi, const SystemParams& p) {
  return pathloss(y, p) * pathloss(reflected_distance(r, y, psi), p);
}

// dG/dr at fixed (y, psi)
inline double reflected_pathloss_dr(double r, double y, double psi, const SystemParams& p) {
  double d = reflected_distance(r, y, psi);
  if (d == 0.0) return 0.0;
  return pathloss(y, p) * pathloss_derivative(d, p) * (r - y * std::cos(psi)) / d;
}

struct HoleDistance {
  double r_h;
  double dr_h_dlambda;
};

inline HoleDistance hole_distance(double lambda_bs, double c_hole) {
  if (!(lambda_bs > 0.0)) throw DomainError("hole_distance: lambda_bs must be > 0");
  return {c_hole / std::sqrt(lambda_bs), -c_hole / (2.0 * std::pow(lambda_bs, 1.5))};
}

// E|rho| for a unit-power Rician magnitude with K-factor k
inline double rician_magnitude_mean(double k) {
  if (k < 0.0) throw DomainError("Rician K-factor must be >= 0");
  if (std::isinf(k)) return 1.0;
  if (k > 500.0) {
    // asymptotic: sqrt(1 - 1/(2(K+1)) ...) keeps clear of Bessel overflow
    double s2 = 1.0 / (2.0 * (k + 1.0));
    double nu = std::sqrt(k / (k + 1.0));
    return nu * (1.0 + s2 / (2.0 * nu * nu) + s2 * s2 / (8.0 * std::pow(nu, 4)));
  }
  double h = k / 2.0;
  // exp(-h) I_n(h) formed directly to stay finite for moderate k
  double laguerre = std::exp(-h) * ((1.0 + k) * std::cyl_bessel_i(0.0, h) +
                                    k * std::cyl_bessel_i(1.0, h));
  return std::sqrt(std::numbers::pi / (4.0 * (k + 1.0))) * laguerre;
}

struct ZetaMoments {
  double mean;
  double var;
};

// |zeta| = |rho1||rho2| with independent unit-power Rician hops
inline ZetaMoments rician_product_moments(double k1, double k2) {
  if (k1 < 0.0 || k2 < 0.0) throw DomainError("Rician K-factor must be >= 0");
  double e = rician_magnitude_mean(k1) * rician_magnitude_mean(k2);
  double v = 1.0 - e * e;
  if (v < 0.0) v = 0.0;
  return {e, v};
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double per_km2(double per_m2) { return per_m2 * 1e6; }
inline double per_m2(double per_km2_value) { return per_km2_value * 1e-6; }

// lambda_ris giving a mean of n RIS per cluster ring
inline double lambda_ris_for_count(double n, const SystemParams& p) {
  return n / p.ring_area();
}

inline constexpr double kDefaultRicianK = 10.0;

// Default deployment. f_c = 28 GHz and Rician K = 10 per hop are assumed
// values, not measured ones.
inline SystemParams reconstructed_defaults() {
  SystemParams p;
  p.lambda_bs = per_m2(10.0);
  p.r_in = 20.0;
  p.r_out = 30.0;
  p.r_guard = 50.0;
  p.p0 = dbm_to_watt(30.0);
  p.noise_power = dbm_to_watt(-100.0);
  p.alpha = 4.0;
  p.carrier_hz = 28e9;
  p.beta = beta_from_carrier(p.carrier_hz);
  p.m_elements = 600;
  auto z = rician_product_moments(kDefaultRicianK, kDefaultRicianK);
  p.zeta_mean = z.mean;
  p.zeta_var = z.var;
  p.penalty_k = 1.0;
  p.c_hole = 80.0 * std::sqrt(1e-5);
  p.lambda_ris = lambda_ris_for_count(5.0, p);
  return p;
}

} // namespace risnet
