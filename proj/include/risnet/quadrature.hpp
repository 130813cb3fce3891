#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "risnet/errors.hpp"

namespace risnet {

struct QuadratureConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  int max_subdivisions = 400;
  double pv_epsilon_floor = 1e-12;
  double tail_safety = 1.5;

  QuadratureConfig tightened(double factor) const {
    QuadratureConfig c = *this;
    c.rel_tol /= factor;
    c.abs_tol /= factor;
    return c;
  }
};

inline void validate(const QuadratureConfig& c) {
  if (!(c.rel_tol > 0.0) || !(c.abs_tol > 0.0))
    throw DomainError("QuadratureConfig: tolerances must be > 0");
  if (c.max_subdivisions < 1) throw DomainError("QuadratureConfig: max_subdivisions must be >= 1");
  if (!(c.tail_safety >= 1.0)) throw DomainError("QuadratureConfig: tail_safety must be >= 1");
  if (!(c.pv_epsilon_floor > 0.0)) throw DomainError("QuadratureConfig: pv_epsilon_floor must be > 0");
}

// small fixed-size vector so several integrands share one adaptive partition
template <std::size_t N>
struct VecN {
  std::array<double, N> v{};
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  VecN& operator+=(const VecN& o) { for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i]; return *this; }
  VecN& operator-=(const VecN& o) { for (std::size_t i = 0; i < N; ++i) v[i] -= o.v[i]; return *this; }
  VecN& operator*=(double s) { for (auto& x : v) x *= s; return *this; }
  friend VecN operator+(VecN a, const VecN& b) { return a += b; }
  friend VecN operator-(VecN a, const VecN& b) { return a -= b; }
  friend VecN operator*(VecN a, double s) { return a *= s; }
  friend VecN operator*(double s, VecN a) { return a *= s; }
};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& z) { return std::abs(z); }
template <std::size_t N>
double magnitude(const VecN<N>& x) {
  double m = 0.0;
  for (double e : x.v) m = std::max(m, std::abs(e));
  return m;
}

inline bool all_finite(double x) { return std::isfinite(x); }
inline bool all_finite(const std::complex<double>& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}
template <std::size_t N>
bool all_finite(const VecN<N>& x) {
  for (double e : x.v) if (!std::isfinite(e)) return false;
  return true;
}

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21)
inline constexpr std::array<double, 11> xgk21 = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> wgk21 = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208067413702, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> wg10 = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
};

// one GK21 panel with the QUADPACK error heuristic applied to magnitudes
template <class T, class F>
Segment<T> gk21(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  std::array<T, 21> fv;
  fv[10] = f(c);
  for (int j = 0; j < 10; ++j) {
    double dx = h * xgk21[j];
    fv[j] = f(c - dx);
    fv[20 - j] = f(c + dx);
  }
  T resk = fv[10] * wgk21[10];
  T resg{};
  double resabs = magnitude(fv[10]) * wgk21[10];
  for (int j = 0; j < 10; ++j) {
    T pair = fv[j] + fv[20 - j];
    resk += pair * wgk21[j];
    resabs += wgk21[j] * (magnitude(fv[j]) + magnitude(fv[20 - j]));
    if (j % 2 == 1) resg += pair * wg10[j / 2];
  }
  T mean = resk * 0.5;
  double resasc = wgk21[10] * magnitude(fv[10] - mean);
  for (int j = 0; j < 10; ++j)
    resasc += wgk21[j] * (magnitude(fv[j] - mean) + magnitude(fv[20 - j] - mean));
  double ah = std::abs(h);
  resasc *= ah;
  resabs *= ah;
  double err = magnitude((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(eps * 50.0 * resabs, err);
  if (!all_finite(resk)) err = std::numeric_limits<double>::infinity();
  return {a, b, resk * h, err};
}

} // namespace detail

// Adaptive global-subdivision GK21 over an initial partition; never throws.
template <class T, class F>
QuadResult<T> integrate_partition(F&& f, const std::vector<double>& breaks, double abs_tol,
                                  double rel_tol, int max_subdivisions) {
  using Seg = detail::Segment<T>;
  QuadResult<T> out;
  std::vector<Seg> heap;
  auto cmp = [](const Seg& x, const Seg& y) { return x.error < y.error; };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    heap.push_back(detail::gk21<T>(f, breaks[i], breaks[i + 1]));
    out.evaluations += 21;
  }
  std::make_heap(heap.begin(), heap.end(), cmp);
  auto totals = [&](T& v, double& e) {
    v = T{};
    e = 0.0;
    for (const auto& s : heap) { v += s.value; e += s.error; }
  };
  T value;
  double err;
  totals(value, err);
  int splits = 0;
  while (!heap.empty()) {
    double tol = std::max(abs_tol, rel_tol * magnitude(value));
    if (err <= tol) break;
    if (splits >= max_subdivisions) { out.converged = false; break; }
    std::pop_heap(heap.begin(), heap.end(), cmp);
    Seg worst = heap.back();
    heap.pop_back();
    double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) { out.converged = false; heap.push_back(worst); break; }
    Seg l = detail::gk21<T>(f, worst.a, mid);
    Seg r = detail::gk21<T>(f, mid, worst.b);
    out.evaluations += 42;
    heap.push_back(l);
    std::push_heap(heap.begin(), heap.end(), cmp);
    heap.push_back(r);
    std::push_heap(heap.begin(), heap.end(), cmp);
    ++splits;
    // re-sum rather than update in place so roundoff never drifts
    totals(value, err);
  }
  out.value = value;
  out.error = err;
  if (!all_finite(value)) out.converged = false;
  return out;
}

template <class T, class F>
QuadResult<T> integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol,
                                 int max_subdivisions) {
  return integrate_partition<T>(f, std::vector<double>{a, b}, abs_tol, rel_tol, max_subdivisions);
}

template <class F>
QuadResult<double> integrate_finite(F&& f, double a, double b, const QuadratureConfig& cfg) {
  if (!(a < b)) throw DomainError("integrate_finite: need a < b");
  auto r = integrate_adaptive<double>(f, a, b, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions);
  if (!r.converged)
    throw QuadratureFailure("integrate_finite: no convergence", r.value, r.error);
  return r;
}

// x = a + t/(1-t) maps [a, inf) onto [0, 1)
template <class T, class F>
QuadResult<T> integrate_semi_infinite_t(F&& f, double a, double abs_tol, double rel_tol,
                                        int max_subdivisions) {
  auto g = [&](double t) -> T {
    double om = 1.0 - t;
    return f(a + t / om) * (1.0 / (om * om));
  };
  return integrate_adaptive<T>(g, 0.0, 1.0, abs_tol, rel_tol, max_subdivisions);
}

// Contributions of [a+2^k, a+2^(k+1)] that refuse to shrink mean divergence.
template <class F>
bool looks_divergent(F& f, double a, const QuadratureConfig& cfg) {
  double prev = 0.0;
  int stalls = 0;
  for (int k = 0; k < 40; ++k) {
    double lo = a + std::ldexp(1.0, k), hi = a + std::ldexp(1.0, k + 1);
    auto seg = integrate_adaptive<double>(f, lo, hi, cfg.abs_tol, cfg.rel_tol, 50);
    double m = std::abs(seg.value);
    if (k > 0) stalls = (m > 0.5 * prev && m > cfg.abs_tol) ? stalls + 1 : 0;
    if (stalls >= 8) return true;
    prev = m;
  }
  return false;
}

template <class F>
QuadResult<double> integrate_semi_infinite(F&& f, double a, const QuadratureConfig& cfg) {
  auto r = integrate_semi_infinite_t<double>(f, a, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions);
  if (r.converged) return r;
  if (looks_divergent(f, a, cfg)) throw DivergenceError("integrate_semi_infinite: integral diverges");
  throw QuadratureFailure("integrate_semi_infinite: no convergence", r.value, r.error);
}

// e^{-decay_scale u^{2/alpha}} < abs_tol, stretched by tail_safety
inline double truncation_point(double alpha, double decay_scale, const QuadratureConfig& cfg) {
  if (!(alpha > 2.0)) throw DomainError("truncation_point: alpha must be > 2");
  if (!(decay_scale > 0.0)) throw DomainError("truncation_point: decay_scale must be > 0");
  return std::pow(std::log(1.0 / cfg.abs_tol) / decay_scale, alpha / 2.0) * cfg.tail_safety;
}

// Integrand given in xi = ln u, i.e. returns h(e^xi) e^xi; panels of width `lattice`
// are anchored at multiples of `lattice` so repeated calls reuse node positions.
template <class T, class F>
QuadResult<T> integrate_log_lattice(F&& g, double xi_lo, double xi_hi, double lattice,
                                    double abs_tol, double rel_tol, int max_subdivisions) {
  std::vector<double> breaks{xi_lo};
  for (double k = std::floor(xi_lo / lattice) + 1.0; k * lattice < xi_hi; k += 1.0)
    breaks.push_back(k * lattice);
  breaks.push_back(xi_hi);
  return integrate_partition<T>(g, breaks, abs_tol, rel_tol, max_subdivisions);
}

// Checks that h settles to a finite value as u -> 0+.
template <class F>
double removable_limit(F& h, double eps, double abs_tol) {
  double h1 = h(eps), h2 = h(0.5 * eps), h3 = h(0.25 * eps);
  if (!std::isfinite(h1) || !std::isfinite(h2) || !std::isfinite(h3))
    throw SingularityError("principal value: integrand not finite near 0");
  double d12 = std::abs(h1 - h2), d23 = std::abs(h2 - h3);
  double slack = 1e-6 * (1.0 + std::abs(h3)) + abs_tol / eps;
  if (d23 > 0.75 * d12 + slack)
    throw SingularityError("principal value: symmetrized integrand has no finite limit at 0");
  return h3;
}

// ∫_0^{u_max} h(u) du for a symmetrized PV integrand with a removable singularity at 0.
template <class F>
QuadResult<double> principal_value_symmetric(F&& h, const QuadratureConfig& cfg, double u_max) {
  if (!(u_max > 0.0)) throw DomainError("principal_value_symmetric: u_max must be > 0");
  double eps = cfg.pv_epsilon_floor * u_max;
  double h0 = removable_limit(h, eps, cfg.abs_tol);
  auto g = [&](double xi) {
    double u = std::exp(xi);
    return h(u) * u;
  };
  auto r = integrate_log_lattice<double>(g, std::log(eps), std::log(u_max), 1.0, cfg.abs_tol,
                                         cfg.rel_tol, cfg.max_subdivisions);
  r.value += h0 * eps;
  r.evaluations += 3;
  if (!r.converged)
    throw QuadratureFailure("principal_value_symmetric: no convergence", r.value, r.error);
  return r;
}

template <class F>
double central_difference(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

struct GaussRule {
  std::vector<double> x, w;
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n
inline GaussRule gauss_legendre(int n) {
  GaussRule g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    g.x[i] = -z;
    g.x[n - 1 - i] = z;
    g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return g;
}

} // namespace risnet
