#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "risnet/coverage.hpp"
#include "risnet/errors.hpp"
#include "risnet/model.hpp"
#include "risnet/sensitivity.hpp"

namespace risnet {

// Per-node total costs (CAPEX + OPEX). Only the ratio J matters for decisions;
// when J is given alone the RIS cost is the unit.
struct CostModel {
  double c_bs_total = 10.0;
  double c_ris_total = 1.0;
  double budget_bs_per_round = per_m2(2.0);  // BS/m^2 worth of budget per round

  double cost_ratio_j() const { return c_bs_total / c_ris_total; }
  double round_budget() const { return budget_bs_per_round * c_bs_total; }

  static CostModel from_totals(double c_bs, double c_ris, double budget_bs_per_round) {
    CostModel c{c_bs, c_ris, budget_bs_per_round};
    validate(c);
    return c;
  }
  static CostModel from_ratio(double j, double budget_bs_per_round) {
    return from_totals(j, 1.0, budget_bs_per_round);
  }
  static void validate(const CostModel& c) {
    if (!(c.c_ris_total > 0.0)) throw DomainError("CostModel: RIS cost must be > 0");
    if (!(c.c_bs_total > c.c_ris_total)) throw DomainError("CostModel: BS cost must exceed RIS cost");
    if (!(c.budget_bs_per_round > 0.0)) throw DomainError("CostModel: budget per round must be > 0");
  }
};

enum class Decision { BS, RIS };

inline const char* to_string(Decision d) { return d == Decision::BS ? "BS" : "RIS"; }

struct RoundRecord {
  int round = 0;
  std::optional<Decision> decision;  // empty for the initial state and terminal rows
  double lambda_bs = 0.0;
  double lambda_ris = 0.0;
  double tau = 0.0;
  double e_bs = 0.0;
  double e_ris = 0.0;
  double threshold = 0.0;  // E_RIS (J + λ_RIS 𝒜), compared against E_BS
  double spend = 0.0;      // budget consumed by the decision
  std::string status = "ok";
};

struct InvestmentState {
  double lambda_bs = per_m2(1.0);
  double lambda_ris = 0.0;
  int round = 0;
  std::vector<RoundRecord> history;
};

// How the λ_RIS derivative becomes a per-RIS gain.
//  PerRisCount: ∂τ/∂λ_RIS / (λ_BS 𝒜), the gain per RIS per m^2 of area, which
//    is the quantity priced by C̄_RIS in the decision threshold.
//  RingScaled: λ_BS 𝒜 ∂τ/∂λ_RIS, the gain of scaling every ring at once.
enum class RisGainConvention { PerRisCount, RingScaled };

struct ExpectedGains {
  double e_bs = 0.0;
  double e_ris = 0.0;
};

inline ExpectedGains expected_gains(const GainPair& g, const InvestmentState& s, const ClusterRing& ring,
                                    RisGainConvention conv = RisGainConvention::PerRisCount) {
  double na = s.lambda_bs * ring.area;
  ExpectedGains e;
  e.e_bs = g.d_tau_d_lambda_bs;
  if (conv == RisGainConvention::RingScaled) {
    e.e_ris = na * g.d_tau_d_lambda_ris;
  } else {
    if (!(na > 0.0)) throw DomainError("expected_gains: lambda_bs must be > 0");
    e.e_ris = g.d_tau_d_lambda_ris / na;
  }
  return e;
}

inline SystemParams params_at(const InvestmentState& s, SystemParams p) {
  p.lambda_bs = s.lambda_bs;
  p.lambda_ris = s.lambda_ris;
  return p;
}

inline ExpectedGains expected_gains(const InvestmentState& s, const SystemParams& p, const QuadratureConfig& cfg = {},
                                    RisGainConvention conv = RisGainConvention::PerRisCount) {
  auto q = params_at(s, p);
  return expected_gains(rate_sensitivity(q, cfg).gains, s, ClusterRing(q), conv);
}

struct DecisionResult {
  Decision decision = Decision::BS;
  bool stagnant = false;   // neither investment has a positive return
  double threshold = 0.0;  // E_RIS (J + λ_RIS 𝒜)
};

// BS iff E_BS >= E_RIS (J + λ_RIS 𝒜); the product form is total when E_RIS = 0.
inline DecisionResult decide(double e_bs, double e_ris, const InvestmentState& s, const CostModel& cost,
                             const ClusterRing& ring) {
  if (!std::isfinite(e_bs) || !std::isfinite(e_ris)) throw DomainError("decide: gains must be finite");
  DecisionResult r;
  r.threshold = e_ris * (cost.cost_ratio_j() + s.lambda_ris * ring.area);
  r.decision = e_bs >= r.threshold ? Decision::BS : Decision::RIS;
  r.stagnant = e_bs <= 0.0 && e_ris <= 0.0;
  return r;
}

struct RoundSpend {
  double d_lambda_bs = 0.0;
  double d_lambda_ris = 0.0;
  double spend = 0.0;
};

// Both branches consume the same budget B = budget · C̄_BS.
// BS: new BSs arrive with their rings at the current λ_RIS, Δλ (C̄_BS + C̄_RIS 𝒜 λ_RIS) = B.
// RIS: Δλ_RIS C̄_RIS λ_BS 𝒜 = B.
inline RoundSpend round_increment(const InvestmentState& s, Decision d, const CostModel& cost,
                                  const ClusterRing& ring) {
  RoundSpend out;
  double b = cost.round_budget();
  if (d == Decision::BS) {
    double unit = cost.c_bs_total + cost.c_ris_total * ring.area * s.lambda_ris;
    out.d_lambda_bs = b / unit;
    out.spend = out.d_lambda_bs * unit;
  } else {
    double unit = cost.c_ris_total * s.lambda_bs * ring.area;
    if (!(unit > 0.0)) throw DomainError("apply_round: RIS round needs lambda_bs > 0");
    out.d_lambda_ris = b / unit;
    out.spend = out.d_lambda_ris * unit;
  }
  return out;
}

inline InvestmentState apply_round(const InvestmentState& s, Decision d, const CostModel& cost,
                                   const ClusterRing& ring) {
  auto inc = round_increment(s, d, cost, ring);
  InvestmentState n = s;
  n.lambda_bs += inc.d_lambda_bs;
  n.lambda_ris += inc.d_lambda_ris;
  n.round = s.round + 1;
  return n;
}

enum class StagnationPolicy { Stop, ForceRis, ForceBs };

struct PlannerOptions {
  int n_rounds = 10;
  StagnationPolicy stagnation = StagnationPolicy::Stop;
  RisGainConvention ris_gain = RisGainConvention::PerRisCount;
  QuadratureConfig quadrature{};
};

// Rate and both density derivatives at a state; injectable for tests.
using SensitivityFn = std::function<RateSensitivity(const SystemParams&)>;

// Greedy investment loop: one record per evaluated state. Row k holds the state after k
// rounds, its rate and gains, and the decision taken from it (if any).
inline std::vector<RoundRecord> run_trajectory(const InvestmentState& initial, const CostModel& cost,
                                               const SystemParams& p, const PlannerOptions& opt,
                                               SensitivityFn sens = {}) {
  if (opt.n_rounds < 0) throw DomainError("run_trajectory: n_rounds must be >= 0");
  CostModel::validate(cost);
  if (!sens) sens = [&](const SystemParams& q) { return rate_sensitivity(q, opt.quadrature); };
  ClusterRing ring(p);
  std::vector<RoundRecord> out;
  InvestmentState s = initial;
  for (int k = 0;; ++k) {
    auto q = params_at(s, p);
    RoundRecord rec;
    rec.round = s.round;
    rec.lambda_bs = s.lambda_bs;
    rec.lambda_ris = s.lambda_ris;
    auto rs = sens(q);
    rec.tau = rs.tau;
    auto e = expected_gains(rs.gains, s, ring, opt.ris_gain);
    rec.e_bs = e.e_bs;
    rec.e_ris = e.e_ris;
    auto d = decide(e.e_bs, e.e_ris, s, cost, ring);
    rec.threshold = d.threshold;
    if (k == opt.n_rounds) {
      rec.status = "final";
      out.push_back(rec);
      break;
    }
    Decision choice = d.decision;
    if (d.stagnant) {
      if (opt.stagnation == StagnationPolicy::Stop) {
        rec.status = "stagnant";
        out.push_back(rec);
        break;
      }
      choice = opt.stagnation == StagnationPolicy::ForceRis ? Decision::RIS : Decision::BS;
      rec.status = "stagnant-forced";
    }
    rec.decision = choice;
    rec.spend = round_increment(s, choice, cost, ring).spend;
    out.push_back(rec);
    s.history.push_back(rec);
    s = apply_round(s, choice, cost, ring);
  }
  return out;
}

// First round whose decision is RIS, or -1 if none.
inline int first_ris_round(const std::vector<RoundRecord>& t) {
  for (const auto& r : t)
    if (r.decision && *r.decision == Decision::RIS) return r.round;
  return -1;
}

}  // namespace risnet
