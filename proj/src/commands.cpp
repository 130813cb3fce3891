#include "commands.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

namespace risnet::app {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, n) on up to `threads` workers; results are stored
// by index so output order never depends on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  int t = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int k = 0; k < t; ++k)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
    });
  for (auto& th : pool) th.join();
}

std::vector<double> ris_grid(const ScenarioConfig& c) {
  if (!c.sweep.ris_per_ring.empty()) return c.sweep.ris_per_ring;
  return {c.system.lambda_ris * c.system.ring_area()};
}

std::vector<double> penalty_grid(const ScenarioConfig& c) {
  if (!c.sweep.penalty_k_db.empty()) return c.sweep.penalty_k_db;
  return {10.0 * std::log10(c.system.penalty_k)};
}

SystemParams at_point(const ScenarioConfig& c, double lambda_bs_per_km2, double ris_per_ring) {
  SystemParams p = c.system;
  p.lambda_bs = per_m2(lambda_bs_per_km2);
  p.lambda_ris = lambda_ris_for_count(ris_per_ring, p);
  return p;
}

// Density grid × RIS grid, flattened in row order.
struct GridPoint {
  double lambda_bs_per_km2, ris_per_ring, penalty_db;
};

std::vector<GridPoint> density_grid(const ScenarioConfig& c, bool with_penalty) {
  std::vector<GridPoint> g;
  auto ks = with_penalty ? penalty_grid(c) : std::vector<double>{10.0 * std::log10(c.system.penalty_k)};
  for (double k : ks)
    for (double n : ris_grid(c))
      for (double l : c.sweep.lambda_bs_per_km2) g.push_back({l, n, k});
  return g;
}

std::string error_status(const std::exception& e) { return std::string("error: ") + e.what(); }

mc::Settings mc_settings(const ScenarioConfig& c, int threads) {
  mc::Settings s;
  s.n_samples = c.mc.n_samples;
  s.seed = c.mc.seed;
  s.window_radius = c.mc.window_radius;
  s.threads = std::max(threads, c.mc.threads);
  s.beam = c.mc.beam;
  s.guard = c.guard;
  if (c.mc.overlap_p > 0.0) s.interference = mc::InterferenceMode::with_overlap(c.mc.overlap_p, c.mc.beamwidth_deg);
  return s;
}

mc::UePlacement rate_placement(const SystemParams& p) {
  if (p.scenario == Scenario::CoverageHole) return {mc::UeMode::CoverageHole, 0.0};
  return {mc::UeMode::TypicalWithGuard, 0.0};
}

mc::UePlacement coverage_placement(const SystemParams& p, double r) {
  if (p.scenario == Scenario::CoverageHole) return {mc::UeMode::CoverageHole, 0.0};
  return {mc::UeMode::ConditionedR, r};
}

double analytic_rate(const SystemParams& p, const ScenarioConfig& c) {
  return scenario_rate(p, c.quadrature, c.guard);
}

}  // namespace

CommandResult cmd_coverage(const ScenarioConfig& c, const RunOptions& o) {
  CommandResult res;
  Table t;
  t.columns = {"threshold", "threshold_db", "distance_m", "serve_dist_m", "coverage", "status"};
  struct Cell {
    double r = kNaN, pc = kNaN;
    std::string status = "ok";
  };
  const auto& ts = c.sweep.thresholds;
  const auto& ds = c.sweep.distances_m;
  std::vector<Cell> cells(ts.size() * ds.size());
  parallel_for(cells.size(), o.threads, [&](std::size_t i) {
    double thr = ts[i % ts.size()], d = ds[i / ts.size()];
    try {
      auto g = scenario_geometry(d, c.system);
      cells[i].r = g.r;
      if (thr > 0.0) {
        // ROC pre-check so the row reports the bounds
        auto b = roc_bounds(thr, g.r, g.r, c.system);
        if (!(g.s > b.s_a && g.s < b.s_b))
          throw OutsideRocError("evaluation point outside (" + fmt(b.s_a) + ", " + fmt(b.s_b) + ")", b.s_a, b.s_b);
      }
      cells[i].pc = coverage_probability(thr, d, c.system, c.quadrature);
    } catch (const std::exception& e) {
      cells[i].status = error_status(e);
    }
  });
  for (std::size_t i = 0; i < cells.size(); ++i) {
    double thr = ts[i % ts.size()], d = ds[i / ts.size()];
    if (cells[i].status != "ok") ++res.failures;
    t.add({fmt(thr), fmt(thr > 0.0 ? 10.0 * std::log10(thr) : -std::numeric_limits<double>::infinity()), fmt(d),
           fmt(cells[i].r), fmt(cells[i].pc), cells[i].status});
  }
  res.table = std::move(t);
  return res;
}

CommandResult cmd_rate(const ScenarioConfig& c, const RunOptions& o) {
  CommandResult res;
  Table t;
  t.columns = {"lambda_bs_per_km2", "ris_per_ring", "lambda_ris_per_m2", "scenario", "rate_nats", "est_error",
               "status"};
  auto grid = density_grid(c, c.system.scenario == Scenario::CoverageHole);
  struct Cell {
    double tau = kNaN, err = kNaN;
    std::string status = "ok";
  };
  std::vector<Cell> cells(grid.size());
  parallel_for(grid.size(), o.threads, [&](std::size_t i) {
    try {
      auto p = at_point(c, grid[i].lambda_bs_per_km2, grid[i].ris_per_ring);
      p.penalty_k = db_to_linear(grid[i].penalty_db);
      RateResult r = p.scenario == Scenario::CoverageHole ? ergodic_rate_at(0.0, p, c.quadrature)
                                                          : ergodic_rate_typical(p, c.quadrature, c.guard);
      cells[i].tau = r.value;
      cells[i].err = r.est_error;
    } catch (const std::exception& e) {
      cells[i].status = error_status(e);
    }
  });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (cells[i].status != "ok") ++res.failures;
    auto p = at_point(c, grid[i].lambda_bs_per_km2, grid[i].ris_per_ring);
    t.add({fmt(grid[i].lambda_bs_per_km2), fmt(grid[i].ris_per_ring), fmt(p.lambda_ris), to_string(p.scenario),
           fmt(cells[i].tau), fmt(cells[i].err), cells[i].status});
  }
  res.table = std::move(t);
  return res;
}

CommandResult cmd_sensitivity(const ScenarioConfig& c, const RunOptions& o) {
  CommandResult res;
  Table t;
  bool fd = o.fd_check || c.fd_check;
  t.columns = {"lambda_bs_per_km2", "ris_per_ring", "penalty_k_db", "scenario", "rate_nats",
               "d_tau_d_lambda_bs", "d_tau_d_lambda_ris", "e_bs", "e_ris", "gain_ratio"};
  if (fd)
    for (const char* k : {"fd_d_tau_d_lambda_bs", "fd_d_tau_d_lambda_ris", "fd_rel_err_bs", "fd_rel_err_ris"})
      t.columns.push_back(k);
  t.columns.push_back("status");
  auto grid = density_grid(c, c.system.scenario == Scenario::CoverageHole);
  struct Cell {
    RateSensitivity s;
    ExpectedGains e{kNaN, kNaN};
    double fd_bs = kNaN, fd_ris = kNaN;
    std::string status = "ok";
  };
  std::vector<Cell> cells(grid.size());
  parallel_for(grid.size(), o.threads, [&](std::size_t i) {
    try {
      auto p = at_point(c, grid[i].lambda_bs_per_km2, grid[i].ris_per_ring);
      p.penalty_k = db_to_linear(grid[i].penalty_db);
      cells[i].s = rate_sensitivity(p, c.quadrature, c.guard);
      InvestmentState st;
      st.lambda_bs = p.lambda_bs;
      st.lambda_ris = p.lambda_ris;
      cells[i].e = expected_gains(cells[i].s.gains, st, ClusterRing(p), c.plan.ris_gain);
      if (fd) {
        cells[i].fd_bs = fd_d_tau(p, Density::BS, c.quadrature, 1e-3, c.guard);
        cells[i].fd_ris = fd_d_tau(p, Density::RIS, c.quadrature, 1e-3, c.guard);
      }
    } catch (const std::exception& e) {
      cells[i].status = error_status(e);
      cells[i].s.tau = kNaN;
      cells[i].s.gains = {kNaN, kNaN};
    }
  });
  auto rel = [](double a, double f) { return std::abs(a - f) / std::max(std::abs(a), 1e-300); };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& x = cells[i];
    if (x.status != "ok") ++res.failures;
    std::vector<std::string> row = {fmt(grid[i].lambda_bs_per_km2), fmt(grid[i].ris_per_ring),
                                    fmt(grid[i].penalty_db),         to_string(c.system.scenario),
                                    fmt(x.s.tau),                    fmt(x.s.gains.d_tau_d_lambda_bs),
                                    fmt(x.s.gains.d_tau_d_lambda_ris), fmt(x.e.e_bs),
                                    fmt(x.e.e_ris),                  fmt(x.e.e_bs / x.e.e_ris)};
    if (fd) {
      row.push_back(fmt(x.fd_bs));
      row.push_back(fmt(x.fd_ris));
      row.push_back(fmt(rel(x.s.gains.d_tau_d_lambda_bs, x.fd_bs)));
      row.push_back(fmt(rel(x.s.gains.d_tau_d_lambda_ris, x.fd_ris)));
    }
    row.push_back(x.status);
    t.add(std::move(row));
  }
  res.table = std::move(t);
  return res;
}

CommandResult cmd_plan(const ScenarioConfig& c, const RunOptions&) {
  CommandResult res;
  Table t;
  t.columns = {"round", "decision", "lambda_bs_per_km2", "lambda_ris_per_m2", "ris_per_km2", "rate_nats",
               "e_bs", "e_ris", "threshold", "spend", "budget", "status"};
  InvestmentState init;
  init.lambda_bs = per_m2(c.plan.initial_lambda_bs_per_km2);
  init.lambda_ris = lambda_ris_for_count(c.plan.initial_ris_per_ring, c.system);
  PlannerOptions opt;
  opt.n_rounds = c.plan.n_rounds;
  opt.stagnation = c.plan.stagnation;
  opt.ris_gain = c.plan.ris_gain;
  opt.quadrature = c.quadrature;
  std::vector<RoundRecord> traj;
  std::string failure;
  try {
    traj = run_trajectory(init, c.cost, c.system, opt, [&](const SystemParams& q) {
      return rate_sensitivity(q, c.quadrature, c.guard);
    });
  } catch (const std::exception& e) {
    failure = error_status(e);
  }
  double area = c.system.ring_area();
  for (const auto& r : traj)
    t.add({fmt(static_cast<long>(r.round)), r.decision ? to_string(*r.decision) : "", fmt(per_km2(r.lambda_bs)),
           fmt(r.lambda_ris), fmt(per_km2(r.lambda_bs * area * r.lambda_ris)), fmt(r.tau), fmt(r.e_bs), fmt(r.e_ris),
           fmt(r.threshold), fmt(r.spend), fmt(c.cost.round_budget()), r.status});
  if (!failure.empty()) {
    ++res.failures;
    t.add({fmt(static_cast<long>(traj.size())), "", "", "", "", "", "", "", "", "", "", failure});
  }
  res.table = std::move(t);
  return res;
}

CommandResult cmd_simulate(const ScenarioConfig& c, const RunOptions& o) {
  CommandResult res;
  Table t;
  t.columns = {"lambda_bs_per_km2", "ris_per_ring", "penalty_k_db", "scenario", "threshold", "distance_m",
               "coverage", "coverage_stderr", "rate_nats", "rate_stderr", "n_samples", "status"};
  auto grid = density_grid(c, c.system.scenario == Scenario::CoverageHole);
  auto s = mc_settings(c, o.threads);
  for (const auto& g : grid) {
    auto p = at_point(c, g.lambda_bs_per_km2, g.ris_per_ring);
    p.penalty_k = db_to_linear(g.penalty_db);
    std::string status = "ok";
    mc::Estimate cov{kNaN, kNaN, 0}, rate{kNaN, kNaN, 0};
    try {
      cov = mc::estimate_coverage(p, c.validate.threshold, coverage_placement(p, c.validate.distance_m), s);
      rate = mc::estimate_rate(p, rate_placement(p), s);
    } catch (const std::exception& e) {
      status = error_status(e);
      ++res.failures;
    }
    t.add({fmt(g.lambda_bs_per_km2), fmt(g.ris_per_ring), fmt(g.penalty_db), to_string(p.scenario),
           fmt(c.validate.threshold), fmt(c.validate.distance_m), fmt(cov.value), fmt(cov.std_error),
           fmt(rate.value), fmt(rate.std_error), fmt(static_cast<long>(rate.n)), status});
  }
  res.table = std::move(t);
  return res;
}

CommandResult cmd_validate(const ScenarioConfig& c, const RunOptions& o) {
  CommandResult res;
  json records = json::array();
  auto grid = density_grid(c, c.system.scenario == Scenario::CoverageHole);
  auto s = mc_settings(c, o.threads);
  bool all_pass = true;
  for (const auto& g : grid) {
    auto p = at_point(c, g.lambda_bs_per_km2, g.ris_per_ring);
    p.penalty_k = db_to_linear(g.penalty_db);
    json point = {{"lambda_bs_per_km2", g.lambda_bs_per_km2},
                  {"ris_per_ring", g.ris_per_ring},
                  {"penalty_k_db", g.penalty_db},
                  {"scenario", to_string(p.scenario)}};
    auto record = [&](const char* quantity, json extra, auto&& analytic_fn, auto&& mc_fn, auto&& pass_fn) {
      json pt = point;
      pt["quantity"] = quantity;
      pt.update(extra);
      json r = {{"point", pt}};
      try {
        double a = analytic_fn();
        mc::Estimate m = mc_fn();
        double delta = a - m.value;
        bool pass = pass_fn(a, m.value);
        r.update({{"analytic", a}, {"mc", m.value}, {"stderr", m.std_error}, {"delta", delta}, {"pass", pass}});
        if (!pass) all_pass = false;
      } catch (const std::exception& e) {
        r.update({{"analytic", nullptr}, {"mc", nullptr}, {"stderr", nullptr}, {"delta", nullptr}, {"pass", false},
                  {"error", e.what()}});
        ++res.failures;
        all_pass = false;
      }
      records.push_back(r);
    };
    double r_cov = c.validate.distance_m;
    record(
        "coverage", json{{"threshold", c.validate.threshold}, {"distance_m", r_cov}},
        [&] { return coverage_probability(c.validate.threshold, r_cov, p, c.quadrature); },
        [&] { return mc::estimate_coverage(p, c.validate.threshold, coverage_placement(p, r_cov), s); },
        [&](double a, double m) { return std::abs(a - m) <= c.validate.coverage_tol; });
    record(
        "rate", json::object(), [&] { return analytic_rate(p, c); },
        [&] { return mc::estimate_rate(p, rate_placement(p), s); },
        [&](double a, double m) { return std::abs(a - m) <= c.validate.rate_rel_tol * std::abs(m); });
  }
  res.report = json{{"records", records},
                    {"seed", c.mc.seed},
                    {"n_samples", c.mc.n_samples},
                    {"coverage_tol", c.validate.coverage_tol},
                    {"rate_rel_tol", c.validate.rate_rel_tol},
                    {"pass", all_pass}};
  return res;
}

}  // namespace risnet::app
