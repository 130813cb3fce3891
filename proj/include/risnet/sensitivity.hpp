#pragma once

#include <cmath>
#include <complex>

#include "risnet/coverage.hpp"
#include "risnet/errors.hpp"
#include "risnet/laplace.hpp"
#include "risnet/model.hpp"
#include "risnet/quadrature.hpp"

namespace risnet {

enum class Density { BS, RIS };

// rate per (BS/m^2) and rate per (RIS/m^2 of ring)
struct GainPair {
  double d_tau_d_lambda_bs = 0.0;
  double d_tau_d_lambda_ris = 0.0;
};

// Which branch of the PV integrand a transform derivative belongs to.
// Shifted (z = s - iu, or z = s) moves with f_s(r_H); Axis (z = -iu) does not.
enum class Branch { Shifted, Axis };

namespace detail {

inline DerivativeMode mode_for(const SystemParams& p) {
  return p.scenario == Scenario::CoverageHole ? DerivativeMode::CoverageHole : DerivativeMode::Throughput;
}

// undo the Triple scalings
inline double unscale(const SystemParams& p, double v, Density wrt) {
  return wrt == Density::BS ? v / lambda_reference(p) : v * p.ring_area();
}

inline cplx unscale(const SystemParams& p, cplx v, Density wrt) {
  return wrt == Density::BS ? v / lambda_reference(p) : v * p.ring_area();
}

}  // namespace detail

// ∂B_Υ(z)/∂λ_BS. Throughput: B_Υ(z) D_BS(zT). Coverage hole: r_H and s = f_s(r_H)
// both depend on λ_BS, so serve_dist is replaced by r_H and the channels follow
// the branch (Shifted: r_H and s; Axis: r_H only) unless overridden.
inline cplx d_b_upsilon_d_lambda_bs(cplx z, double threshold, double serve_dist, const SystemParams& p,
                                   Branch branch = Branch::Shifted, HoleChannels ch = {},
                                   const QuadratureConfig& cfg = {}) {
  auto g = scenario_geometry(serve_dist, p);
  auto b = roc_bounds(threshold, g.r, g.r, p);
  if (!(z.real() < b.s_b) || (threshold > 0.0 && !(z.real() > b.s_a)))
    throw OutsideRocError("d_b_upsilon_d_lambda_bs: argument outside region of convergence", b.s_a, b.s_b);
  if (!(p.lambda_bs > 0.0)) throw DomainError("d_b_upsilon_d_lambda_bs: lambda_bs must be > 0");
  PointEngine eng(p, g.r, g.s, cfg, detail::mode_for(p), ch);
  auto t = eng.transform_at(z, threshold, branch == Branch::Shifted);
  return detail::unscale(p, t.v[1], Density::BS);
}

// ∂B_Υ(z)/∂λ_RIS = B_Υ(z) D_RIS(z); the same in both scenarios
inline cplx d_b_upsilon_d_lambda_ris(cplx z, double threshold, double serve_dist, const SystemParams& p,
                                    const QuadratureConfig& cfg = {}) {
  auto g = scenario_geometry(serve_dist, p);
  auto b = roc_bounds(threshold, g.r, g.r, p);
  if (!(z.real() < b.s_b) || (threshold > 0.0 && !(z.real() > b.s_a)))
    throw OutsideRocError("d_b_upsilon_d_lambda_ris: argument outside region of convergence", b.s_a, b.s_b);
  PointEngine eng(p, g.r, g.s, cfg, DerivativeMode::Throughput);
  auto t = eng.transform_at(z, threshold, true);
  return detail::unscale(p, t.v[2], Density::RIS);
}

// ∂B_{Υ+}(s)/∂λ. In the coverage-hole scenario s and serve_dist are taken from
// r_H and f_s(r_H), since both move with λ_BS; the arguments are then ignored.
inline double d_b_upsilon_plus_d_lambda(double s, double threshold, double serve_dist, const SystemParams& p,
                                        Density wrt, const QuadratureConfig& cfg = {}, HoleChannels ch = {}) {
  double r = serve_dist;
  if (p.scenario == Scenario::CoverageHole) {
    auto g = scenario_geometry(serve_dist, p);
    r = g.r;
    s = g.s;
  }
  if (s == 0.0) return 0.0;
  auto b = roc_bounds(threshold, r, r, p);
  if (!(s > b.s_a && s < b.s_b))
    throw OutsideRocError("d_b_upsilon_plus_d_lambda: s outside region of convergence", b.s_a, b.s_b);
  PointEngine eng(p, r, s, cfg, detail::mode_for(p), ch);
  auto t = eng.b_plus(threshold);
  return detail::unscale(p, wrt == Density::BS ? t[1] : t[2], wrt);
}

// τ with both density derivatives in one nested quadrature.
// Throughput: typical UE over r ∈ [R_c, ∞). Coverage hole: τ at r_H, no r-average.
struct RateSensitivity {
  double tau = 0.0;
  GainPair gains;
  double est_error = 0.0;
};

inline RateSensitivity rate_sensitivity(const SystemParams& p, const QuadratureConfig& cfg = {},
                                        GuardConvention conv = GuardConvention::Literal, HoleChannels ch = {}) {
  validate(p);
  if (!(p.lambda_bs > 0.0)) throw DomainError("rate_sensitivity: lambda_bs must be > 0");
  QuadResult<Triple> q;
  if (p.scenario == Scenario::CoverageHole)
    q = rate_at_triple(0.0, p, cfg, DerivativeMode::CoverageHole, ch);
  else
    q = rate_typical_triple(p, cfg, DerivativeMode::Throughput, conv);
  RateSensitivity out;
  out.tau = q.value[0];
  out.gains.d_tau_d_lambda_bs = detail::unscale(p, q.value[1], Density::BS);
  out.gains.d_tau_d_lambda_ris = detail::unscale(p, q.value[2], Density::RIS);
  out.est_error = q.error;
  if (!std::isfinite(out.gains.d_tau_d_lambda_bs) || !std::isfinite(out.gains.d_tau_d_lambda_ris))
    throw QuadratureFailure("rate_sensitivity: non-finite derivative", out.tau, q.error);
  return out;
}

inline double d_tau(const SystemParams& p, Density wrt, const QuadratureConfig& cfg = {},
                    GuardConvention conv = GuardConvention::Literal) {
  auto r = rate_sensitivity(p, cfg, conv);
  return wrt == Density::BS ? r.gains.d_tau_d_lambda_bs : r.gains.d_tau_d_lambda_ris;
}

// The scenario's rate: typical UE (throughput) or τ(r_H) (coverage hole).
inline double scenario_rate(const SystemParams& p, const QuadratureConfig& cfg = {},
                            GuardConvention conv = GuardConvention::Literal) {
  if (p.scenario == Scenario::CoverageHole) return ergodic_rate_at(0.0, p, cfg).value;
  return ergodic_rate_typical(p, cfg, conv).value;
}

// Finite-difference reference: central with step rel_step·λ; when λ is 0 (or the
// backward point would be negative) a second-order forward difference is used.
template <class RateFn>
double fd_derivative(const SystemParams& p, Density wrt, RateFn&& rate, double rel_step = 1e-3) {
  double lam = wrt == Density::BS ? p.lambda_bs : p.lambda_ris;
  double ref = lam > 0.0 ? lam : (wrt == Density::BS ? 1e-6 : lambda_ris_for_count(1.0, p));
  double h = rel_step * ref;
  auto at = [&](double v) {
    SystemParams q = p;
    (wrt == Density::BS ? q.lambda_bs : q.lambda_ris) = v;
    return rate(q);
  };
  if (lam - h >= 0.0 && lam > 0.0) return (at(lam + h) - at(lam - h)) / (2.0 * h);
  return (-3.0 * at(lam) + 4.0 * at(lam + h) - at(lam + 2.0 * h)) / (2.0 * h);
}

inline double fd_d_tau(const SystemParams& p, Density wrt, const QuadratureConfig& cfg = {},
                       double rel_step = 1e-3, GuardConvention conv = GuardConvention::Literal) {
  return fd_derivative(p, wrt, [&](const SystemParams& q) { return scenario_rate(q, cfg, conv); }, rel_step);
}

}  // namespace risnet
