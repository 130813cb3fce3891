#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "risnet/errors.hpp"
#include "risnet/laplace.hpp"
#include "risnet/model.hpp"
#include "risnet/quadrature.hpp"

namespace risnet {

// Which density derivatives ride along with B_{Υ+}.
enum class DerivativeMode { None, Throughput, CoverageHole };

// Coverage-hole derivative channels: r_H moves the interference boundary and
// the ring geometry, s = f_s(r_H) moves the evaluation point.
struct HoleChannels {
  bool r_h = true;
  bool s = true;
};

// Outer integrals use cfg; the PV integral is 100x tighter, transforms tighter still.
struct EngineTolerances {
  QuadratureConfig outer;
  double pv_abs, pv_rel;
  double transform_rel;
  double ring_tol;
  int max_subdivisions;

  explicit EngineTolerances(const QuadratureConfig& c)
      : outer(c),
        pv_abs(c.abs_tol * 1e-2),
        pv_rel(c.rel_tol * 1e-2),
        transform_rel(std::max(c.rel_tol * 1e-4, 1e-13)),
        ring_tol(std::max(c.abs_tol * 1e-3, 1e-14)),
        max_subdivisions(c.max_subdivisions) {}
};

// [0] value, [1] lambda_ref * d/d lambda_BS, [2] (1/A) * d/d lambda_RIS.
// The scalings keep all three O(1) so one adaptive partition suits them.
using Triple = VecN<3>;

inline double lambda_reference(const SystemParams& p) {
  return p.lambda_bs > 0.0 ? p.lambda_bs : 1e-6;
}

struct ComplexTriple {
  std::array<cplx, 3> v{};
  Triple imag() const { Triple t; for (int i = 0; i < 3; ++i) t[i] = v[i].imag(); return t; }
  Triple real() const { Triple t; for (int i = 0; i < 3; ++i) t[i] = v[i].real(); return t; }
};

// Piecewise Chebyshev interpolant of the ring exponents along xi = ln(u/s).
// Cells are unit intervals of xi; each is filled on first use.
class RingInterpolant {
 public:
  static constexpr int kNodes = 20;

  // with_derivatives = false skips the dr, dz interpolants
  template <class Eval>
  const std::array<RingExponent, 2> eval(double xi, Eval&& direct, bool with_derivatives) {
    double k = std::floor(xi);
    auto it = cells_.find(k);
    if (it == cells_.end()) it = cells_.emplace(k, build(k, direct)).first;
    double x = 2.0 * (xi - k) - 1.0;
    std::array<RingExponent, 2> out;
    for (int b = 0; b < 2; ++b) {
      out[b].d = clenshaw(it->second[b][0], x);
      if (!with_derivatives) continue;
      out[b].dr = clenshaw(it->second[b][1], x);
      out[b].dz = clenshaw(it->second[b][2], x);
    }
    return out;
  }
  std::size_t cells() const { return cells_.size(); }

 private:
  using Coeffs = std::array<cplx, kNodes>;
  using Cell = std::array<std::array<Coeffs, 3>, 2>;

  static cplx clenshaw(const Coeffs& c, double x) {
    cplx b1(0.0, 0.0), b2(0.0, 0.0);
    for (int j = kNodes - 1; j >= 1; --j) {
      cplx t = 2.0 * x * b1 - b2 + c[j];
      b2 = b1;
      b1 = t;
    }
    return x * b1 - b2 + c[0];
  }

  template <class Eval>
  static Cell build(double k, Eval& direct) {
    std::array<std::array<RingExponent, 2>, kNodes> vals;
    std::array<double, kNodes> theta;
    for (int j = 0; j < kNodes; ++j) {
      theta[j] = std::numbers::pi * (j + 0.5) / kNodes;
      vals[j] = direct(k + 0.5 * (std::cos(theta[j]) + 1.0));
    }
    Cell cell{};
    for (int b = 0; b < 2; ++b)
      for (int m = 0; m < kNodes; ++m) {
        cplx a0(0.0, 0.0), a1(0.0, 0.0), a2(0.0, 0.0);
        for (int j = 0; j < kNodes; ++j) {
          double w = std::cos(m * theta[j]);
          a0 += vals[j][b].d * w;
          a1 += vals[j][b].dr * w;
          a2 += vals[j][b].dz * w;
        }
        double f = (m == 0 ? 1.0 : 2.0) / kNodes;
        cell[b][0][m] = a0 * f;
        cell[b][1][m] = a1 * f;
        cell[b][2][m] = a2 * f;
      }
    return cell;
  }

  std::unordered_map<double, Cell> cells_;
};

// B_{Υ+}(s) and its density derivatives for one serving distance.
// The reflected-signal exponent does not depend on the threshold, so it is
// interpolated once per distance along the PV variable and reused for every T.
class PointEngine {
 public:
  PointEngine(const SystemParams& p, double serve_dist, double s, const QuadratureConfig& cfg,
              DerivativeMode mode = DerivativeMode::None, HoleChannels ch = {})
      : p_(p), r_(serve_dist), s_(s), tol_(cfg), mode_(mode), ch_(ch),
        kernel_(p, serve_dist, tol_.ring_tol) {
    validate(p);
    validate(cfg);
    auto b = roc_bounds(1.0, serve_dist, serve_dist, p);
    if (!(s < b.s_b))
      throw OutsideRocError("evaluation point beyond the reflected-beam bound", b.s_a, b.s_b);
    if (p.lambda_bs == 0.0 && p.lambda_ris > 0.0)
      throw DomainError("lambda_bs = 0 with RIS present: the transform has no decaying envelope");
    if (mode == DerivativeMode::CoverageHole) {
      drh_ = hole_distance(p.lambda_bs, p.c_hole).dr_h_dlambda;
      double g = pathloss(serve_dist, p);
      dfs_ = -(p.penalty_k / (p.p0 * g * g)) * pathloss_derivative(serve_dist, p) * drh_;
    }
    lref_ = lambda_reference(p);
    inv_area_ = 1.0 / p.ring_area();
    ring_s_ = ring_at(cplx(s_, 0.0));
    // real points θ <= s for the bound B+(s) <= B_Υ(θ); the ring part is T-free
    double theta_max = std::isfinite(b.s_b) ? 0.95 * b.s_b : std::numeric_limits<double>::infinity();
    for (double f : {1.0, 0.5, 0.25, 0.125}) {
      double th = f * s_;
      if (th >= theta_max) continue;
      double d_ris = f == 1.0 ? ring_s_.d.real() : ring_at(cplx(th, 0.0)).d.real();
      bound_points_.push_back({th, d_ris});
    }
    if (bound_points_.empty() && theta_max > 0.0) {
      double th = 0.5 * theta_max;
      bound_points_.push_back({th, ring_at(cplx(th, 0.0)).d.real()});
    }
  }

  double s() const { return s_; }
  double distance() const { return r_; }
  const SystemParams& params() const { return p_; }
  std::size_t ring_cells() const { return ring_.cells(); }
  long evaluations() const { return evals_; }
  double last_pv_error() const { return last_pv_error_; }
  bool last_pv_converged() const { return last_pv_converged_; }
  void set_interpolate_ring(bool on) { interpolate_ = on; }

  // B_Υ(z) with scaled density derivatives; s_channel marks z moving with s.
  ComplexTriple transform(cplx z, double threshold, const RingExponent& ring, bool s_channel) const {
    const bool hole = mode_ == DerivativeMode::CoverageHole;
    const bool need_dz = hole && s_channel && ch_.s;
    InterferenceExponent ebs;
    if (p_.lambda_bs > 0.0 && threshold > 0.0) ebs = kernel_.d_bs(z, threshold, need_dz);
    cplx e = p_.lambda_bs * ebs.d + p_.lambda_ris * ring.d - z * threshold * p_.noise_power;
    cplx b = std::exp(e);
    ComplexTriple out;
    out.v[0] = b;
    if (mode_ == DerivativeMode::None) return out;
    cplx dl = ebs.d;
    if (hole) {
      if (ch_.r_h) {
        cplx cg = z * threshold * p_.p0 * pathloss(r_, p_);
        dl += p_.lambda_bs * 2.0 * std::numbers::pi * r_ * cg / (1.0 + cg) * drh_;
        dl += p_.lambda_ris * ring.dr * drh_;
      }
      if (need_dz) {
        dl += p_.lambda_bs * ebs.dc * dfs_;
        dl += p_.lambda_ris * ring.dz * dfs_;
        dl -= threshold * p_.noise_power * dfs_;
      }
    }
    out.v[1] = b * dl * lref_;
    out.v[2] = b * ring.d * inv_area_;
    return out;
  }

  ComplexTriple transform_at(cplx z, double threshold, bool s_channel) const {
    return transform(z, threshold, ring_at(z), s_channel);
  }

  RingExponent ring_at(cplx z) const {
    if (!ring_needed()) return {};
    return kernel_.d_ris(z, mode_ == DerivativeMode::CoverageHole);
  }

  // (1/π) ∫_0^∞ Im[B(s-iu) - B(-iu)] du/u + (1 + B(s))/2, with derivatives
  Triple b_plus(double threshold) {
    Triple out;
    if (threshold == 0.0) {  // Υ = -S_R <= 0
      out[0] = 1.0;
      return out;
    }
    if (p_.lambda_bs == 0.0) {
      // no interferers and no RIS: Υ = Tσ² is a point mass
      out[0] = std::exp(-s_ * threshold * p_.noise_power);
      return out;
    }
    Triple cst = transform(cplx(s_, 0.0), threshold, ring_s_, true).real();
    if (p_.lambda_ris == 0.0 && mode_ == DerivativeMode::None) {
      out[0] = cst[0];  // Υ >= 0 without RIS, so B+(s) = B_Υ(s)
      return out;
    }
    // min(1, e^{-sΥ}) <= e^{-θΥ} for 0 <= θ <= s. When even one more RIS per ring
    // leaves the bound below the PV accuracy, every component is negligible.
    double extra = mode_ == DerivativeMode::None ? 0.0 : inv_area_;
    double bound = upper_bound(threshold, p_.lambda_ris);
    if (upper_bound(threshold, p_.lambda_ris + extra) < 1e-2 * tol_.pv_abs) return out;

    const double a = p_.alpha;
    const double shape = std::numbers::pi * (std::numbers::pi / a) / std::sin(std::numbers::pi / a);
    double decay = p_.lambda_bs * shape * std::pow(s_ * threshold * p_.p0 * p_.beta, 2.0 / a);
    QuadratureConfig tc = tol_.outer;
    tc.abs_tol = tol_.pv_abs * std::exp(-std::numbers::pi * p_.lambda_bs * (r_ + 1.0) * (r_ + 1.0));
    double nu_max = truncation_point(a, decay, tc);
    double xi_hi = std::log(nu_max);
    double xi_lo = xi_hi + std::log(tol_.outer.pv_epsilon_floor);

    auto integrand = [&](double xi) -> Triple {
      ++evals_;
      auto rings = ring_pair(xi);
      double u = s_ * std::exp(xi);
      Triple up = transform(cplx(s_, -u), threshold, rings[0], true).imag();
      Triple down = transform(cplx(0.0, -u), threshold, rings[1], false).imag();
      return up - down;
    };
    auto q = integrate_log_lattice<Triple>(integrand, xi_lo, xi_hi, 2.0, tol_.pv_abs, tol_.pv_rel,
                                           tol_.max_subdivisions);
    last_pv_error_ = q.error;
    last_pv_converged_ = q.converged;
    // below xi_lo the integrand is linear in u, so its integral equals its value there
    Triple pv = (q.value + integrand(xi_lo)) * (1.0 / std::numbers::pi);
    out[0] = std::min(pv[0] + 0.5 * (1.0 + cst[0]), bound);
    if (mode_ != DerivativeMode::None) {
      out[1] = pv[1] + 0.5 * cst[1];
      out[2] = pv[2] + 0.5 * cst[2];
    }
    if (p_.lambda_ris == 0.0) {
      // exact without RIS, and B+ = B_Υ(s) for every λ_BS, so its derivative too
      out[0] = cst[0];
      out[1] = cst[1];
    }
    return out;
  }

  // min over the cached θ of the real transform B_Υ(θ) at RIS density lambda_ris
  double upper_bound(double threshold, double lambda_ris) const {
    double best = 1.0;
    for (const auto& bp : bound_points_) {
      double e = lambda_ris * bp.d_ris - bp.theta * threshold * p_.noise_power;
      if (p_.lambda_bs > 0.0) e += p_.lambda_bs * kernel_.d_bs(cplx(bp.theta, 0.0), threshold, false).d.real();
      best = std::min(best, std::exp(e));
    }
    return best;
  }

 private:
  bool ring_needed() const { return p_.lambda_ris > 0.0 || mode_ != DerivativeMode::None; }

  // ring exponents at z = s - iu and z = -iu, u = s e^xi
  std::array<RingExponent, 2> ring_pair(double xi) {
    if (!ring_needed()) return {};
    auto direct = [&](double x) {
      double u = s_ * std::exp(x);
      return std::array<RingExponent, 2>{ring_at(cplx(s_, -u)), ring_at(cplx(0.0, -u))};
    };
    if (!interpolate_) return direct(xi);
    return ring_.eval(xi, direct, mode_ == DerivativeMode::CoverageHole);
  }

  SystemParams p_;
  double r_, s_;
  EngineTolerances tol_;
  DerivativeMode mode_;
  HoleChannels ch_;
  TransformKernel kernel_;
  double drh_ = 0.0, dfs_ = 0.0, lref_ = 1.0, inv_area_ = 1.0;
  RingExponent ring_s_;
  struct BoundPoint {
    double theta, d_ris;
  };
  std::vector<BoundPoint> bound_points_;
  RingInterpolant ring_;
  bool interpolate_ = true;
  long evals_ = 0;
  double last_pv_error_ = 0.0;
  bool last_pv_converged_ = true;
};

// Serving distance and evaluation point for the configured scenario.
struct EvaluationGeometry {
  double r;
  double s;
};

inline EvaluationGeometry scenario_geometry(double serve_dist, const SystemParams& p) {
  double r = serve_dist;
  if (p.scenario == Scenario::CoverageHole) r = hole_distance(p.lambda_bs, p.c_hole).r_h;
  return {r, evaluation_point(r, p)};
}

inline double b_upsilon_plus(double s, double threshold, double serve_dist, const SystemParams& p,
                             const QuadratureConfig& cfg = {}) {
  if (s == 0.0) return 1.0;
  auto b = roc_bounds(threshold, serve_dist, serve_dist, p);
  if (!(s > b.s_a && s < b.s_b))
    throw OutsideRocError("b_upsilon_plus: s outside region of convergence", b.s_a, b.s_b);
  PointEngine eng(p, serve_dist, s, cfg);
  return eng.b_plus(threshold)[0];
}

inline double clamp_probability(double x) { return std::clamp(x, 0.0, 1.0); }

// P_c(T | r); in a coverage hole r is replaced by r_H and the direct link carries K.
inline double coverage_probability(double threshold, double serve_dist, const SystemParams& p,
                                   const QuadratureConfig& cfg = {}) {
  if (!(threshold >= 0.0)) throw DomainError("coverage_probability: threshold must be >= 0");
  auto g = scenario_geometry(serve_dist, p);
  if (!(g.r > 0.0)) throw DomainError("coverage_probability: serving distance must be > 0");
  if (threshold > 0.0) {
    auto b = roc_bounds(threshold, g.r, g.r, p);
    if (!(g.s > b.s_a && g.s < b.s_b))
      throw OutsideRocError("coverage_probability: evaluation point outside ROC", b.s_a, b.s_b);
  }
  PointEngine eng(p, g.r, g.s, cfg);
  return clamp_probability(eng.b_plus(threshold)[0]);
}

struct RateResult {
  double value = 0.0;
  double est_error = 0.0;
};

// ∫_0^∞ P(t) dt/(1+t) in t = e^η. `pc` returns a Triple; component 0 is clamped
// to [0,1]. The upper end is found by stepping until the integrand has died out;
// an integrand that never does is reported as divergent.
template <class F>
QuadResult<Triple> rate_integral(F&& pc, const QuadratureConfig& cfg) {
  const double eta_lo = -20.0, step = 2.0, eta_cap = 80.0;
  auto f = [&](double eta) -> Triple {
    double t = std::exp(eta);
    Triple v = pc(t);
    v[0] = clamp_probability(v[0]);
    return v * (t / (1.0 + t));
  };
  // B+ itself is only resolved to ~abs_tol/100, so a tighter floor never triggers
  double floor = cfg.abs_tol;
  double eta_hi = 0.0;
  int quiet = 0;
  while (true) {
    eta_hi += step;
    if (eta_hi > eta_cap) throw DivergenceError("rate integral: coverage does not decay in the threshold");
    quiet = magnitude(f(eta_hi)) < floor ? quiet + 1 : 0;
    if (quiet >= 2) break;
  }
  std::vector<double> breaks{eta_lo, -8.0};
  for (double e = -2.0; e < eta_hi; e += 2.0 * step) breaks.push_back(e);
  breaks.push_back(eta_hi);
  auto q = integrate_partition<Triple>(f, breaks, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions);
  // below eta_lo: P ≈ P(0) and ∫ e^η/(1+e^η) = ln(1 + e^{eta_lo})
  Triple head = pc(std::exp(eta_lo));
  head[0] = clamp_probability(head[0]);
  q.value += head * std::log1p(std::exp(eta_lo));
  if (!q.converged)
    throw QuadratureFailure("rate integral: no convergence", q.value[0], q.error);
  return q;
}

// τ(r) together with its scaled density derivatives.
inline QuadResult<Triple> rate_at_triple(double serve_dist, const SystemParams& p, const QuadratureConfig& cfg,
                                         DerivativeMode mode, HoleChannels ch = {}) {
  auto g = scenario_geometry(serve_dist, p);
  PointEngine eng(p, g.r, g.s, cfg, mode, ch);
  return rate_integral([&](double t) { return eng.b_plus(t); }, cfg);
}

// τ(r) = ∫ P_c(t|r)/(1+t) dt; coverage-hole scenario evaluates at r_H with K.
inline RateResult ergodic_rate_at(double serve_dist, const SystemParams& p, const QuadratureConfig& cfg = {}) {
  auto q = rate_at_triple(serve_dist, p, cfg, DerivativeMode::None);
  return {q.value[0], q.error};
}

enum class GuardConvention { Literal, Conditional };

// Typical-UE rate over r ∈ [R_c, ∞) against 2πλ r e^{-πλr²}, in ρ = r √(πλ)
// (the density is entire in ρ, unlike in r² which puts a branch point next to R_c).
// Components as Triple; [1] is lambda_BS * dτ/dλ_BS including the density term.
inline QuadResult<Triple> rate_typical_triple(const SystemParams& p, const QuadratureConfig& cfg, DerivativeMode mode,
                                              GuardConvention conv = GuardConvention::Literal) {
  validate(p);
  if (p.scenario != Scenario::ThroughputEnhancement)
    throw DomainError("typical-UE rate is defined for the throughput scenario");
  if (!(p.lambda_bs > 0.0)) throw DomainError("typical-UE rate needs lambda_bs > 0");
  const double pl = std::numbers::pi * p.lambda_bs;
  const double rho_c = p.r_guard * std::sqrt(pl);
  const double rc2 = p.r_guard * p.r_guard;
  // inner integrals 100x tighter than this one
  QuadratureConfig inner = cfg.tightened(100.0);
  auto f = [&](double rho) -> Triple {
    double r = rho / std::sqrt(pl);
    double w = 2.0 * rho * std::exp(rho_c * rho_c - rho * rho);
    if (w == 0.0) return Triple{};
    // only w * (error of τ(r)) reaches this integral, so the far tail can be loose
    QuadratureConfig in = inner;
    double reach = w * std::max(1.0, rho * rho);
    if (reach < 1.0) in.abs_tol = std::min(1e-3, inner.abs_tol / reach);
    Triple tr = rate_at_triple(r, p, in, mode).value;
    Triple out = tr;
    if (mode != DerivativeMode::None) out[1] = tr[1] + tr[0] * (1.0 - rho * rho);
    // 2ρ e^{-(ρ² - ρ_c²)}, i.e. already divided by the guard mass
    return out * w;
  };
  double rho_hi = std::sqrt(rho_c * rho_c + std::log(1.0 / cfg.abs_tol) + 5.0);
  std::vector<double> breaks{rho_c};
  for (double b : {rho_c + 0.6, rho_c + 1.6}) if (b < rho_hi) breaks.push_back(b);
  breaks.push_back(rho_hi);
  auto q = integrate_partition<Triple>(f, breaks, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions);
  if (!q.converged)
    throw QuadratureFailure("typical-UE rate: no convergence", q.value[0], q.error);
  double scale = conv == GuardConvention::Literal ? std::exp(-pl * rc2) : 1.0;
  q.value *= scale;
  q.error *= scale;
  if (conv == GuardConvention::Conditional && mode != DerivativeMode::None)
    q.value[1] += q.value[0] * pl * rc2;  // derivative of the 1/e^{-πλR_c²} normalisation
  return q;
}

inline RateResult ergodic_rate_typical(const SystemParams& p, const QuadratureConfig& cfg = {},
                                       GuardConvention conv = GuardConvention::Literal) {
  auto q = rate_typical_triple(p, cfg, DerivativeMode::None, conv);
  return {q.value[0], q.error};
}

} // namespace risnet
