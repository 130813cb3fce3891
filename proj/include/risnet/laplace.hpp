#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "risnet/errors.hpp"
#include "risnet/model.hpp"
#include "risnet/quadrature.hpp"

namespace risnet {

using cplx = std::complex<double>;

inline cplx lt_direct_fading(cplx z) {
  if (z == cplx(-1.0, 0.0)) throw PoleError("lt_direct_fading: pole at z = -1");
  return 1.0 / (1.0 + z);
}

// Gaussian-beam power X^2, X ~ N(mean_beam, var_beam); returns L(s) and dL/ds
struct BeamTransform {
  double mean2;  // (M E|zeta|)^2
  double var;    // M V|zeta|

  BeamTransform(double m, double zeta_mean, double zeta_var)
      : mean2(std::pow(m * zeta_mean, 2)), var(m * zeta_var) {}
  explicit BeamTransform(const SystemParams& p) : BeamTransform(p.m_elements, p.zeta_mean, p.zeta_var) {}

  double roc_lower() const { return -1.0 / (2.0 * var); }

  cplx value(cplx s) const {
    cplx d = 1.0 + 2.0 * var * s;
    return std::exp(-s * mean2 / d) / std::sqrt(d);
  }
  // L'(s) = -L (m^2 + v d) / d^2
  cplx derivative(cplx s, cplx l) const {
    cplx d = 1.0 + 2.0 * var * s;
    return -l * (mean2 + var * d) / (d * d);
  }
};

inline cplx lt_beam_power(cplx s, double m, double zeta_mean, double zeta_var) {
  BeamTransform bt(m, zeta_mean, zeta_var);
  if (!(s.real() > bt.roc_lower()))
    throw OutsideRocError("lt_beam_power: Re(s) outside region of convergence", bt.roc_lower(),
                          std::numeric_limits<double>::infinity());
  return bt.value(s);
}

// -2π ∫_{w0}^∞ (w-1) c/(w^α + c) dw with c = zTP0β and w0 = r_lower + 1,
// plus the derivative in c when asked.
struct InterferenceExponent {
  cplx d{0.0, 0.0};
  cplx dc{0.0, 0.0};
};

namespace detail {

// alpha = 4 in closed form. Small |c|/w0^4 uses the power series in c w^-4;
// otherwise partial fractions of 1/(1+x^4) along the ray w = c^{1/4} x.
inline InterferenceExponent interference_exponent_alpha4(cplx c, double w0, bool with_derivative) {
  InterferenceExponent out;
  const double twopi = 2.0 * std::numbers::pi;
  double w04 = w0 * w0 * w0 * w0;
  if (std::abs(c) < 0.5 * w04) {
    // ∫ (w-1) Σ (-1)^n c^{n+1} w^{-4(n+1)} dw
    cplx sum(0.0, 0.0), dsum(0.0, 0.0);
    cplx cn(1.0, 0.0);  // c^n
    cplx a = c / w04;
    double w2 = w0 * w0;
    for (int n = 0; n < 200; ++n) {
      double k = 4.0 * (n + 1);
      double term = w2 / (k - 2.0) - w0 / (k - 1.0);
      double sign = (n % 2 == 0) ? 1.0 : -1.0;
      cplx t = sign * cn * term;  // times c / w0^{4n+4} below
      sum += t;
      dsum += t * (n + 1.0);
      cn *= a;
      if (std::abs(cn) * w2 < 1e-18 * std::abs(sum)) break;
    }
    out.d = -twopi * sum * (c / w04);
    if (with_derivative) out.dc = -twopi * dsum / w04;
    return out;
  }
  static const cplx roots[4] = {std::polar(1.0, std::numbers::pi / 4), std::polar(1.0, 3 * std::numbers::pi / 4),
                                std::polar(1.0, -3 * std::numbers::pi / 4), std::polar(1.0, -std::numbers::pi / 4)};
  cplx b = std::pow(c, 0.25);
  cplx x0 = w0 / b;
  cplx ia(0.0, 0.0), ib(0.0, 0.0);  // ∫_{x0}^∞ x/(1+x^4), ∫_{x0}^∞ 1/(1+x^4)
  for (const cplx& xk : roots) {
    cplx lg = std::log(1.0 - xk / x0);
    ia -= lg / (4.0 * xk * xk);
    ib += xk / 4.0 * lg;
  }
  out.d = -twopi * (b * b * ia - b * ib);
  if (with_derivative) {
    cplx q = 1.0 + x0 * x0 * x0 * x0;
    cplx d_first = 2.0 * b * ia + w0 * x0 / q;
    cplx d_second = ib + x0 / q;
    out.dc = -twopi * (d_first - d_second) * (b / (4.0 * c));
  }
  return out;
}

} // namespace detail

inline InterferenceExponent interference_exponent(cplx c, double w0, double alpha, double rel_tol,
                                                  bool with_derivative, bool closed_form = true) {
  InterferenceExponent out;
  if (c == cplx(0.0, 0.0)) {
    if (with_derivative) {
      double a = alpha;
      out.dc = -2.0 * std::numbers::pi *
               (std::pow(w0, 2.0 - a) / (a - 2.0) - std::pow(w0, 1.0 - a) / (a - 1.0));
    }
    return out;
  }
  double w0a = std::pow(w0, alpha);
  if (std::abs(c.imag()) <= 1e-14 * std::abs(c) && c.real() <= -w0a * (1.0 - 1e-12))
    throw OutsideRocError("interference exponent: pole on the integration range",
                          std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN());
  if (closed_form && alpha == 4.0) return detail::interference_exponent_alpha4(c, w0, with_derivative);
  double theta_star = std::max(0.0, std::log(std::abs(c)) / alpha - std::log(w0));
  double theta_max = theta_star + std::max(11.5 / alpha, 1.0) + 1.0;
  double lw0 = std::log(w0);
  auto integrand = [&](double th) -> VecN<4> {
    double lw = lw0 + th;
    double w = std::exp(lw);
    double wa = std::exp(alpha * lw);
    cplx den = wa + c;
    double jac = (w - 1.0) * w;
    cplx f = c / den * jac;
    VecN<4> r;
    r[0] = f.real();
    r[1] = f.imag();
    if (with_derivative) {
      // scaled by c so both components share one magnitude
      cplx fd = c * wa / (den * den) * jac;
      r[2] = fd.real();
      r[3] = fd.imag();
    }
    return r;
  };
  auto q = integrate_log_lattice<VecN<4>>(integrand, 0.0, theta_max, 1.0, 0.0, rel_tol, 200);
  if (!q.converged)
    throw QuadratureFailure("interference exponent: no convergence", q.value[0], q.error);
  // analytic tail beyond W from the first two terms of c/(w^α + c) = c w^-α (1 - c w^-α + ...)
  double W = w0 * std::exp(theta_max);
  double a = alpha;
  double t1 = std::pow(W, 2.0 - a) / (a - 2.0) - std::pow(W, 1.0 - a) / (a - 1.0);
  double t2 = std::pow(W, 2.0 - 2.0 * a) / (2.0 * a - 2.0) - std::pow(W, 1.0 - 2.0 * a) / (2.0 * a - 1.0);
  cplx tail = c * t1 - c * c * t2;
  cplx tail_dc = t1 - 2.0 * c * t2;
  out.d = -2.0 * std::numbers::pi * (cplx(q.value[0], q.value[1]) + tail);
  if (with_derivative) out.dc = -2.0 * std::numbers::pi * (cplx(q.value[2], q.value[3]) / c + tail_dc);
  return out;
}

// D_BS(s T) with interference from [r_min, ∞)
inline cplx exponent_D_BS(cplx s, double threshold, double r_min, const SystemParams& p,
                          double rel_tol = 1e-11) {
  cplx c = s * threshold * p.p0 * p.beta;
  if (c == cplx(0.0, 0.0)) return {0.0, 0.0};
  return interference_exponent(c, r_min + 1.0, p.alpha, rel_tol, false).d;
}

// Largest G on the ring; for fixed y the closest approach is psi = 0.
inline double ring_gain_max(double r, const SystemParams& p) {
  auto f = [&](double y) { return pathloss(y, p) * pathloss(std::abs(r - y), p); };
  const int n = 200;
  double best_y = p.r_in, best = f(p.r_in);
  for (int i = 1; i <= n; ++i) {
    double y = p.r_in + (p.r_out - p.r_in) * i / n;
    double v = f(y);
    if (v > best) { best = v; best_y = y; }
  }
  double h = (p.r_out - p.r_in) / n;
  double lo = std::max(p.r_in, best_y - h), hi = std::min(p.r_out, best_y + h);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    if (f(a) > f(b)) hi = b; else lo = a;
  }
  return std::max(best, f(0.5 * (lo + hi)));
}

// Tensor rule on the ring: Gauss-Legendre in y, periodic trapezoid in psi.
struct RingGrid {
  std::vector<double> weight;  // includes the polar y factor and the psi symmetry
  std::vector<double> gain;    // G(r, y, psi)
  std::vector<double> gain_dr; // dG/dr
  double area = 0.0;
  double gain_max = 0.0;

  RingGrid() = default;
  RingGrid(double r, const SystemParams& p, double tol) {
    tol = std::clamp(tol, 1e-15, 1e-3);
    double mid = 0.5 * (p.r_in + p.r_out), half = 0.5 * (p.r_out - p.r_in);
    // Bernstein ellipse through the nearest singularity (y = r) sets the GL order
    double t = std::abs(r - mid) / half;
    int ny = 60;
    if (t > 1.0) {
      double rho = t + std::sqrt(t * t - 1.0);
      ny = static_cast<int>(std::ceil(std::log(1.0 / tol) / (2.0 * std::log(rho)))) + 4;
    }
    ny = std::clamp(ny, 8, 200);
    // analyticity strip in psi: acosh((r^2+y^2)/(2ry)) at the y closest to r
    double yc = std::clamp(r, p.r_in, p.r_out);
    double npsi = 4096;
    if (r > 0.0) {
      double arg = (r * r + yc * yc) / (2.0 * r * yc);
      double delta = arg > 1.0 ? std::acosh(arg) : 0.0;
      if (delta > 0.0) npsi = std::ceil(std::log(100.0 / tol) / (0.8 * delta));
    } else {
      npsi = 4;
    }
    int nfull = std::clamp(static_cast<int>(npsi), 16, 4096);
    nfull += nfull % 2;
    auto gl = gauss_legendre(ny);
    int nh = nfull / 2;
    weight.reserve(ny * (nh + 1));
    for (int i = 0; i < ny; ++i) {
      double y = mid + half * gl.x[i];
      double wy = half * gl.w[i] * y;
      for (int j = 0; j <= nh; ++j) {
        double psi = 2.0 * std::numbers::pi * j / nfull;
        double wpsi = 2.0 * std::numbers::pi / nfull * ((j == 0 || j == nh) ? 1.0 : 2.0);
        weight.push_back(wy * wpsi);
        gain.push_back(reflected_pathloss(r, y, psi, p));
        gain_dr.push_back(reflected_pathloss_dr(r, y, psi, p));
      }
    }
    area = p.ring_area();
    gain_max = ring_gain_max(r, p);
  }
  std::size_t size() const { return weight.size(); }
};

struct RingExponent {
  cplx d{0.0, 0.0};   // D_RIS(z)
  cplx dr{0.0, 0.0};  // ∂D_RIS/∂r at fixed z
  cplx dz{0.0, 0.0};  // ∂D_RIS/∂z
};

// D_RIS(z) = -∫∫ y (1 - L_R(-z P0 G)) dy dpsi
inline RingExponent ring_exponent(cplx z, const RingGrid& ring, const BeamTransform& bt, double p0,
                                  bool with_derivatives) {
  RingExponent out;
  if (z.real() * 2.0 * bt.var * p0 * ring.gain_max >= 1.0)
    throw OutsideRocError("D_RIS: reflected-beam transform outside its region of convergence",
                          std::numeric_limits<double>::quiet_NaN(), 1.0 / (2.0 * bt.var * p0 * ring.gain_max));
  cplx acc(0.0, 0.0), accr(0.0, 0.0), accz(0.0, 0.0);
  for (std::size_t i = 0; i < ring.size(); ++i) {
    cplx x = -z * (p0 * ring.gain[i]);
    cplx l = bt.value(x);
    acc += ring.weight[i] * (1.0 - l);
    if (with_derivatives) {
      cplx dl = bt.derivative(x, l) * ring.weight[i];
      accr += dl * (-z * p0 * ring.gain_dr[i]);
      accz += dl * (-p0 * ring.gain[i]);
    }
  }
  out.d = -acc;
  out.dr = accr;
  out.dz = accz;
  return out;
}

inline cplx exponent_D_RIS(cplx s, double serve_dist, const SystemParams& p, double tol = 1e-10) {
  if (s == cplx(0.0, 0.0)) return {0.0, 0.0};
  RingGrid ring(serve_dist, p, tol);
  return ring_exponent(s, ring, BeamTransform(p), p.p0, false).d;
}

struct RocBounds {
  double s_a;
  double s_b;
};

// s_a from the interference pole, s_b from the reflected-beam constraint at G_max
inline RocBounds roc_bounds(double threshold, double r_lower, double serve_dist, const SystemParams& p) {
  double inf = std::numeric_limits<double>::infinity();
  double sa = -inf, sb = inf;
  if (threshold > 0.0 && p.lambda_bs > 0.0 && p.p0 > 0.0)
    sa = -1.0 / (threshold * p.p0 * pathloss(r_lower, p));
  if (p.lambda_ris > 0.0 && p.p0 > 0.0)
    sb = 1.0 / (2.0 * p.beam_var() * p.p0 * ring_gain_max(serve_dist, p));
  return {sa, sb};
}

// Coverage evaluation point: 1/(P0 g(r)) or, in a coverage hole, K/(P0 g(r_H)).
inline double evaluation_point(double serve_dist, const SystemParams& p) {
  double k = p.scenario == Scenario::CoverageHole ? p.penalty_k : 1.0;
  return k / (p.p0 * pathloss(serve_dist, p));
}

inline RocBounds probe_roc(double threshold, double serve_dist, const SystemParams& p) {
  auto b = roc_bounds(threshold, serve_dist, serve_dist, p);
  double s = evaluation_point(serve_dist, p);
  if (!(b.s_a < 0.0 && 0.0 < b.s_b) || !(s > b.s_a && s < b.s_b))
    throw OutsideRocError("probe_roc: evaluation point outside (s_a, s_b)", b.s_a, b.s_b);
  return b;
}

// Precomputed per-distance state for repeated transform evaluations.
class TransformKernel {
 public:
  TransformKernel(const SystemParams& p, double serve_dist, double tol)
      : p_(p), r_(serve_dist), tol_(tol), beam_(p), ring_(serve_dist, p, tol) {}

  const SystemParams& params() const { return p_; }
  double distance() const { return r_; }
  const RingGrid& ring() const { return ring_; }
  const BeamTransform& beam() const { return beam_; }
  double tolerance() const { return tol_; }

  InterferenceExponent d_bs(cplx z, double threshold, bool with_derivative) const {
    cplx c = z * threshold * p_.p0 * p_.beta;
    if (threshold == 0.0 || p_.lambda_bs == 0.0) return {};
    auto e = interference_exponent(c, r_ + 1.0, p_.alpha, std::max(tol_ * 1e-1, 1e-13), with_derivative);
    e.dc *= threshold * p_.p0 * p_.beta;  // now d/dz
    return e;
  }

  RingExponent d_ris(cplx z, bool with_derivatives) const {
    return ring_exponent(z, ring_, beam_, p_.p0, with_derivatives);
  }

  cplx b_upsilon(cplx z, double threshold) const {
    cplx e = -z * threshold * p_.noise_power;
    if (p_.lambda_bs > 0.0) e += p_.lambda_bs * d_bs(z, threshold, false).d;
    if (p_.lambda_ris > 0.0) e += p_.lambda_ris * d_ris(z, false).d;
    return std::exp(e);
  }

 private:
  SystemParams p_;
  double r_;
  double tol_;
  BeamTransform beam_;
  RingGrid ring_;
};

inline cplx b_upsilon(cplx s, double threshold, double serve_dist, const SystemParams& p,
                      double tol = 1e-10) {
  auto b = roc_bounds(threshold, serve_dist, serve_dist, p);
  if (!(s.real() < b.s_b))
    throw OutsideRocError("b_upsilon: s outside region of convergence", b.s_a, b.s_b);
  if (s == cplx(0.0, 0.0)) return {1.0, 0.0};
  TransformKernel k(p, serve_dist, tol);
  return k.b_upsilon(s, threshold);
}

} // namespace risnet
