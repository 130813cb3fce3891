#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>
#include <vector>

#include "risnet/coverage.hpp"
#include "risnet/errors.hpp"
#include "risnet/model.hpp"

namespace risnet::mc {

struct Point2 {
  double x = 0.0, y = 0.0;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// UE sits at the origin.
struct NetworkSample {
  std::vector<Point2> bs_points;
  std::vector<std::vector<Point2>> ris_points;  // per BS, on its ring
  std::size_t serving_index = 0;
  std::uint64_t seed = 0;
  // non-serving rings already thinned to this fraction (overlap sampling)
  double ris_thinning = 1.0;
};

// ConditionedR: serving BS at distance r, no BS closer.
// TypicalWithGuard: serving BS is the nearest of a PPP; r < R_c falls in the guard zone.
// CoverageHole: ConditionedR at r_H with the direct link attenuated by K.
enum class UeMode { ConditionedR, TypicalWithGuard, CoverageHole };

struct UePlacement {
  UeMode mode = UeMode::ConditionedR;
  double r = 50.0;  // used by ConditionedR only
};

enum class BeamModel { Gaussian, ExactRician };

// Cross-cluster reflections: neglected, or each non-associated RIS hits the UE
// with probability p. The beamwidth is recorded only.
struct InterferenceMode {
  bool overlap = false;
  double p = 0.0;
  double beamwidth_deg = 3.6;

  static InterferenceMode neglect() { return {}; }
  static InterferenceMode with_overlap(double p, double beamwidth_deg = 3.6) { return {true, p, beamwidth_deg}; }
};

struct Settings {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 1;
  double window_radius = 0.0;  // 0 sizes the window per draw from the serving distance
  double window_scale = 1.0;   // multiplies the automatic window
  int threads = 1;
  BeamModel beam = BeamModel::Gaussian;
  double rician_k = kDefaultRicianK;  // per hop, ExactRician only
  GuardConvention guard = GuardConvention::Literal;
  InterferenceMode interference{};
};

struct SinrSample {
  double signal_direct = 0.0;
  double signal_reflected = 0.0;
  double interference = 0.0;
  double sinr = 0.0;
  double serve_dist = 0.0;
  bool in_guard = false;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

inline double serving_distance(const UePlacement& ue, const SystemParams& p) {
  if (ue.mode == UeMode::CoverageHole) return hole_distance(p.lambda_bs, p.c_hole).r_h;
  return ue.r;
}

// Smallest window whose truncated mean interference is below `frac` of the
// in-window part beyond r_min.
inline double window_radius_for(const SystemParams& p, double r_min, double frac = 1e-3) {
  double a = p.alpha;
  auto tail = [&](double x) {  // ∫_x^∞ (w-1) w^-a dw with w = d+1
    double w = x + 1.0;
    return std::pow(w, 2.0 - a) / (a - 2.0) - std::pow(w, 1.0 - a) / (a - 1.0);
  };
  double r0 = std::max(r_min, 1.0);
  double big = tail(r0);
  double R = 2.0 * r0;
  while (tail(R) > frac * (big - tail(R))) R *= 1.25;
  return R;
}

namespace detail {

using Rng = std::mt19937_64;

inline Point2 uniform_in_annulus(Rng& rng, double r_in, double r_out) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double rad = std::sqrt(r_in * r_in + (r_out * r_out - r_in * r_in) * u(rng));
  double th = 2.0 * std::numbers::pi * u(rng);
  return {rad * std::cos(th), rad * std::sin(th)};
}

inline void add_ring(Rng& rng, const SystemParams& p, Point2 centre, std::vector<Point2>& out,
                     double keep = 1.0) {
  double mean = p.lambda_ris * p.ring_area() * keep;
  out.clear();
  if (!(mean > 0.0)) return;
  std::poisson_distribution<long> count(mean);
  long n = count(rng);
  for (long k = 0; k < n; ++k) {
    Point2 q = uniform_in_annulus(rng, p.r_in, p.r_out);
    out.push_back({centre.x + q.x, centre.y + q.y});
  }
}

// |ρ| of one unit-power Rician hop
inline double rician_amplitude(Rng& rng, double k) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5 / (k + 1.0)));
  double los = std::sqrt(k / (k + 1.0));
  return std::hypot(los + n(rng), n(rng));
}

}  // namespace detail

// Reflected-beam amplitude X: Normal(M E|ζ|, sqrt(M V|ζ|)), or the exact sum of
// M per-element products of Rician magnitudes.
inline double sample_beam_amplitude(detail::Rng& rng, const SystemParams& p, BeamModel model,
                                    double rician_k = kDefaultRicianK) {
  if (model == BeamModel::Gaussian) {
    std::normal_distribution<double> n(p.beam_mean(), std::sqrt(p.beam_var()));
    return n(rng);
  }
  double x = 0.0;
  auto m = static_cast<long>(std::llround(p.m_elements));
  for (long i = 0; i < m; ++i) x += detail::rician_amplitude(rng, rician_k) * detail::rician_amplitude(rng, rician_k);
  return x;
}

struct WindowRule {
  double fixed = 0.0;  // > 0: fixed radius
  double scale = 1.0;  // otherwise scale * window_radius_for(serving distance)
  double radius(const SystemParams& p, double r) const {
    return fixed > 0.0 ? fixed : scale * window_radius_for(p, r);
  }
};

// Draws the BSs and RIS rings around a UE at the origin. The serving BS comes
// first: at r (conditioned modes) or at the nearest-neighbour distance of the
// PPP (typical mode); the other BSs form a PPP on the annulus [r, window], which
// is the exact conditional law. Typical-mode draws inside the guard zone stop
// after the serving BS. `ris_keep` thins the non-serving rings.
inline NetworkSample sample_network(const SystemParams& p, const UePlacement& ue, const WindowRule& window,
                                    detail::Rng& rng, double ris_keep = 1.0) {
  validate(p);
  NetworkSample net;
  net.ris_thinning = ris_keep;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r;
  if (ue.mode == UeMode::TypicalWithGuard) {
    if (!(p.lambda_bs > 0.0)) return net;
    std::exponential_distribution<double> e(1.0);
    r = std::sqrt(e(rng) / (std::numbers::pi * p.lambda_bs));
  } else {
    r = serving_distance(ue, p);
    if (!(r > 0.0)) throw DomainError("sample_network: serving distance must be > 0");
  }
  double outer = window.radius(p, r);
  if (r > outer) return net;  // fixed window with no BS inside
  double th = 2.0 * std::numbers::pi * u(rng);
  net.bs_points.push_back({r * std::cos(th), r * std::sin(th)});
  net.serving_index = 0;
  net.ris_points.resize(1);
  detail::add_ring(rng, p, net.bs_points[0], net.ris_points[0]);
  if (ue.mode == UeMode::TypicalWithGuard && r < p.r_guard) return net;
  double area = std::numbers::pi * (outer * outer - r * r);
  if (p.lambda_bs > 0.0 && area > 0.0) {
    std::poisson_distribution<long> count(p.lambda_bs * area);
    long n = count(rng);
    for (long k = 0; k < n; ++k) net.bs_points.push_back(detail::uniform_in_annulus(rng, r, outer));
  }
  net.ris_points.resize(net.bs_points.size());
  if (ris_keep > 0.0)
    for (std::size_t i = 1; i < net.bs_points.size(); ++i)
      detail::add_ring(rng, p, net.bs_points[i], net.ris_points[i], ris_keep);
  return net;
}

inline NetworkSample sample_network(const SystemParams& p, const UePlacement& ue, double window_radius,
                                    std::uint64_t seed) {
  detail::Rng rng(seed);
  auto net = sample_network(p, ue, WindowRule{window_radius, 1.0}, rng);
  net.seed = seed;
  return net;
}

// One fading realisation of the SINR at the origin.
inline SinrSample realize_sinr(const NetworkSample& net, const SystemParams& p, const UePlacement& ue,
                               const Settings& s, detail::Rng& rng) {
  SinrSample out;
  if (net.bs_points.empty()) {
    out.in_guard = ue.mode == UeMode::TypicalWithGuard;
    return out;
  }
  std::exponential_distribution<double> rayleigh(1.0);
  double hit_p = 0.0;
  if (s.interference.overlap && net.ris_thinning > 0.0)
    hit_p = std::min(1.0, s.interference.p / net.ris_thinning);
  std::bernoulli_distribution hit(hit_p);
  const Point2 ue_pos{};
  const Point2 serving = net.bs_points[net.serving_index];
  out.serve_dist = norm(serving);
  out.in_guard = ue.mode == UeMode::TypicalWithGuard && out.serve_dist < p.r_guard;
  double direct = rayleigh(rng) * p.p0 * pathloss(out.serve_dist, p);
  if (ue.mode == UeMode::CoverageHole) direct /= p.penalty_k;
  out.signal_direct = direct;
  auto reflected_power = [&](Point2 bs, Point2 ris) {
    double x = sample_beam_amplitude(rng, p, s.beam, s.rician_k);
    return x * x * p.p0 * pathloss(dist(bs, ris), p) * pathloss(dist(ris, ue_pos), p);
  };
  for (const auto& q : net.ris_points[net.serving_index]) out.signal_reflected += reflected_power(serving, q);
  for (std::size_t i = 0; i < net.bs_points.size(); ++i) {
    if (i == net.serving_index) continue;
    out.interference += rayleigh(rng) * p.p0 * pathloss(norm(net.bs_points[i]), p);
    if (s.interference.overlap && i < net.ris_points.size())
      for (const auto& q : net.ris_points[i])
        if (hit(rng)) out.interference += reflected_power(net.bs_points[i], q);
  }
  double den = out.interference + p.noise_power;
  double num = out.signal_direct + out.signal_reflected;
  out.sinr = den > 0.0 ? num / den : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return out;
}

namespace detail {

struct Moments {
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  void add(double x) { sum += x; sumsq += x * x; ++n; }
};

inline constexpr std::size_t kChunk = 4096;

inline std::uint64_t chunk_seed(std::uint64_t seed, std::size_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  std::uint32_t v[2];
  seq.generate(v, v + 2);
  return (static_cast<std::uint64_t>(v[0]) << 32) | v[1];
}

// Samples are split into fixed chunks with their own seed streams, so results do
// not depend on the thread count. score(sample) returns false to drop a draw.
template <class Score>
Estimate run(const SystemParams& p, const UePlacement& ue, const Settings& s, Score&& score,
             std::ostream* dump = nullptr) {
  validate(p);
  if (s.n_samples < 1) throw DomainError("Monte Carlo: n_samples must be >= 1");
  if (s.interference.overlap && !(s.interference.p >= 0.0 && s.interference.p <= 1.0))
    throw DomainError("Monte Carlo: overlap probability must lie in [0, 1]");
  WindowRule window{s.window_radius, s.window_scale};
  // with overlap, only the RISs that hit are drawn: thinning by p is exact
  double keep = s.interference.overlap ? s.interference.p : 0.0;
  std::size_t chunks = (s.n_samples + kChunk - 1) / kChunk;
  std::vector<Moments> acc(chunks);
  auto work = [&](std::size_t c) {
    std::uint64_t cs = chunk_seed(s.seed, c);
    Rng rng(cs);
    std::size_t lo = c * kChunk, hi = std::min(s.n_samples, lo + kChunk);
    for (std::size_t i = lo; i < hi; ++i) {
      auto net = sample_network(p, ue, window, rng, keep);
      auto smp = realize_sinr(net, p, ue, s, rng);
      double v;
      if (!score(smp, v)) continue;
      acc[c].add(v);
      if (dump)
        *dump << "{\"sample\":" << i << ",\"seed\":" << cs << ",\"sinr\":" << smp.sinr << ",\"direct\":"
              << smp.signal_direct << ",\"reflected\":" << smp.signal_reflected << ",\"interference\":"
              << smp.interference << ",\"r\":" << smp.serve_dist << "}\n";
    }
  };
  int threads = dump ? 1 : std::max(1, s.threads);
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) work(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < chunks;) work(c);
      });
    for (auto& th : pool) th.join();
  }
  Moments tot;
  for (const auto& m : acc) { tot.sum += m.sum; tot.sumsq += m.sumsq; tot.n += m.n; }
  Estimate e;
  e.n = tot.n;
  if (tot.n == 0) return e;
  e.value = tot.sum / tot.n;
  double var = tot.n > 1 ? (tot.sumsq - tot.n * e.value * e.value) / (tot.n - 1) : 0.0;
  e.std_error = tot.n > 1 ? std::sqrt(std::max(var, 0.0) / tot.n) : std::numeric_limits<double>::infinity();
  return e;
}

inline bool guard_score(const SinrSample& smp, const Settings& s, double in_value, double& v) {
  if (smp.in_guard) {
    if (s.guard == GuardConvention::Conditional) return false;
    v = 0.0;  // guard-zone users count with zero rate / no coverage
    return true;
  }
  v = in_value;
  return true;
}

}  // namespace detail

// Fraction of draws with SINR >= T.
inline Estimate estimate_coverage(const SystemParams& p, double threshold, const UePlacement& ue, const Settings& s,
                                  std::ostream* dump = nullptr) {
  if (!(threshold >= 0.0)) throw DomainError("estimate_coverage: threshold must be >= 0");
  return detail::run(p, ue, s, [&](const SinrSample& smp, double& v) {
    return detail::guard_score(smp, s, smp.sinr >= threshold ? 1.0 : 0.0, v);
  }, dump);
}

inline Estimate estimate_coverage(const SystemParams& p, double threshold, double serve_dist, std::size_t n,
                                  std::uint64_t seed) {
  Settings s;
  s.n_samples = n;
  s.seed = seed;
  UeMode mode = p.scenario == Scenario::CoverageHole ? UeMode::CoverageHole : UeMode::ConditionedR;
  return estimate_coverage(p, threshold, {mode, serve_dist}, s);
}

// Sample mean of ln(1 + SINR).
inline Estimate estimate_rate(const SystemParams& p, const UePlacement& ue, const Settings& s,
                              std::ostream* dump = nullptr) {
  return detail::run(p, ue, s, [&](const SinrSample& smp, double& v) {
    return detail::guard_score(smp, s, std::log1p(smp.sinr), v);
  }, dump);
}

}  // namespace risnet::mc
