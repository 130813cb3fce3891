#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace risnet::app {

using nlohmann::json;

namespace {

// keys starting with '_' are free-form annotations
bool is_comment(const std::string& k) { return !k.empty() && k[0] == '_'; }

// Reads one section, remembering which keys were consumed so leftovers can be
// reported as unknown fields.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  double num(const std::string& k) {
    seen_.insert(k);
    const json& v = j_.at(k);
    if (!v.is_number()) throw ConfigError(where(k) + ": expected a number");
    return v.get<double>();
  }
  std::optional<double> opt(const std::string& k) {
    if (!has(k)) return std::nullopt;
    return num(k);
  }
  long integer(const std::string& k) {
    seen_.insert(k);
    const json& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigError(where(k) + ": expected an integer");
    return v.get<long>();
  }
  std::string str(const std::string& k) {
    seen_.insert(k);
    const json& v = j_.at(k);
    if (!v.is_string()) throw ConfigError(where(k) + ": expected a string");
    return v.get<std::string>();
  }
  bool boolean(const std::string& k) {
    seen_.insert(k);
    const json& v = j_.at(k);
    if (!v.is_boolean()) throw ConfigError(where(k) + ": expected true or false");
    return v.get<bool>();
  }
  std::vector<double> list(const std::string& k) {
    seen_.insert(k);
    const json& v = j_.at(k);
    if (!v.is_array()) throw ConfigError(where(k) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(where(k) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  // at most one of the given spellings
  std::optional<std::string> pick(std::initializer_list<const char*> keys) {
    std::optional<std::string> found;
    for (const char* k : keys) {
      if (!has(k)) continue;
      if (found) throw ConfigError(name_ + ": give only one of '" + *found + "' and '" + k + "'");
      found = k;
    }
    return found;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()) && !is_comment(it.key())) throw ConfigError(where(it.key()) + ": unknown field");
  }
  std::string where(const std::string& k) const { return name_ + "." + k; }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <class E>
E enum_value(Section& s, const std::string& key, std::initializer_list<std::pair<const char*, E>> opts, E dflt) {
  if (!s.has(key)) return dflt;
  std::string v = s.str(key);
  std::string names;
  for (const auto& [n, e] : opts) {
    if (v == n) return e;
    names += names.empty() ? n : std::string(", ") + n;
  }
  throw ConfigError(s.where(key) + ": '" + v + "' is not one of " + names);
}

void parse_system(Section s, SystemParams& p) {
  if (auto k = s.pick({"lambda_bs_per_km2", "lambda_bs_per_m2"}))
    p.lambda_bs = *k == "lambda_bs_per_km2" ? per_m2(s.num(*k)) : s.num(*k);
  if (auto v = s.opt("r_in_m")) p.r_in = *v;
  if (auto v = s.opt("r_out_m")) p.r_out = *v;
  if (auto v = s.opt("guard_radius_m")) p.r_guard = *v;
  if (auto k = s.pick({"p0_dbm", "p0_w"})) p.p0 = *k == "p0_dbm" ? dbm_to_watt(s.num(*k)) : s.num(*k);
  if (auto k = s.pick({"noise_dbm", "noise_w"}))
    p.noise_power = *k == "noise_dbm" ? dbm_to_watt(s.num(*k)) : s.num(*k);
  if (auto v = s.opt("alpha")) p.alpha = *v;
  if (auto k = s.pick({"carrier_ghz", "carrier_hz"})) {
    p.carrier_hz = *k == "carrier_ghz" ? s.num(*k) * 1e9 : s.num(*k);
    p.beta = beta_from_carrier(p.carrier_hz);
  }
  if (auto v = s.opt("beta")) p.beta = *v;  // explicit override of the carrier-derived value
  if (auto v = s.opt("elements")) p.m_elements = *v;
  bool has_k = s.has("rician_k");
  bool has_moments = s.has("zeta_mean") || s.has("zeta_var");
  if (has_k && has_moments) throw ConfigError("system: give either rician_k or zeta_mean/zeta_var");
  if (has_k) {
    auto z = rician_product_moments(s.num("rician_k"), s.num("rician_k"));
    p.zeta_mean = z.mean;
    p.zeta_var = z.var;
  }
  if (has_moments) {
    p.zeta_mean = s.num("zeta_mean");
    p.zeta_var = s.num("zeta_var");
  }
  if (auto k = s.pick({"penalty_k_db", "penalty_k"}))
    p.penalty_k = *k == "penalty_k_db" ? db_to_linear(s.num(*k)) : s.num(*k);
  if (auto v = s.opt("c_hole")) p.c_hole = *v;
  p.scenario = enum_value(s, "scenario",
                          {{"throughput", Scenario::ThroughputEnhancement}, {"coverage_hole", Scenario::CoverageHole}},
                          p.scenario);
  // RIS density last: per-ring counts depend on the ring geometry above
  if (auto k = s.pick({"ris_per_ring", "lambda_ris_per_m2"}))
    p.lambda_ris = *k == "ris_per_ring" ? lambda_ris_for_count(s.num(*k), p) : s.num(*k);
  s.finish();
  try {
    validate(p);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
}

void parse_cost(Section s, CostModel& c) {
  bool totals = s.has("c_bs_total") || s.has("c_ris_total");
  if (totals && s.has("cost_ratio_j")) throw ConfigError("cost: give either cost_ratio_j or the two totals");
  if (totals) {
    c.c_bs_total = s.num("c_bs_total");
    c.c_ris_total = s.num("c_ris_total");
  } else if (s.has("cost_ratio_j")) {
    c.c_bs_total = s.num("cost_ratio_j");
    c.c_ris_total = 1.0;
  }
  if (auto k = s.pick({"budget_bs_per_km2", "budget_bs_per_m2"}))
    c.budget_bs_per_round = *k == "budget_bs_per_km2" ? per_m2(s.num(*k)) : s.num(*k);
  s.finish();
  try {
    CostModel::validate(c);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("cost: ") + e.what());
  }
}

void parse_quadrature(Section s, QuadratureConfig& q) {
  if (auto v = s.opt("rel_tol")) q.rel_tol = *v;
  if (auto v = s.opt("abs_tol")) q.abs_tol = *v;
  if (s.has("max_subdivisions")) q.max_subdivisions = static_cast<int>(s.integer("max_subdivisions"));
  if (auto v = s.opt("pv_epsilon_floor")) q.pv_epsilon_floor = *v;
  if (auto v = s.opt("tail_safety")) q.tail_safety = *v;
  s.finish();
  try {
    validate(q);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("quadrature: ") + e.what());
  }
}

void parse_mc(Section s, McConfig& m) {
  if (s.has("n_samples")) {
    long n = s.integer("n_samples");
    if (n < 1) throw ConfigError("mc.n_samples: must be >= 1");
    m.n_samples = static_cast<std::size_t>(n);
  }
  if (s.has("seed")) m.seed = static_cast<std::uint64_t>(s.integer("seed"));
  if (auto v = s.opt("window_radius_m")) m.window_radius = *v;
  if (s.has("threads")) m.threads = static_cast<int>(s.integer("threads"));
  if (auto v = s.opt("overlap_p")) {
    if (!(*v >= 0.0 && *v <= 1.0)) throw ConfigError("mc.overlap_p: must lie in [0, 1]");
    m.overlap_p = *v;
  }
  if (auto v = s.opt("beamwidth_deg")) m.beamwidth_deg = *v;
  m.beam = enum_value(s, "beam_model", {{"gaussian", mc::BeamModel::Gaussian}, {"exact", mc::BeamModel::ExactRician}},
                      m.beam);
  s.finish();
}

void parse_sweep(Section s, Sweep& w) {
  if (s.has("lambda_bs_per_km2")) w.lambda_bs_per_km2 = s.list("lambda_bs_per_km2");
  if (s.has("ris_per_ring")) w.ris_per_ring = s.list("ris_per_ring");
  if (auto k = s.pick({"thresholds", "thresholds_db"})) {
    w.thresholds = s.list(*k);
    if (*k == "thresholds_db")
      for (auto& t : w.thresholds) t = db_to_linear(t);
  }
  if (s.has("distances_m")) w.distances_m = s.list("distances_m");
  if (s.has("penalty_k_db")) w.penalty_k_db = s.list("penalty_k_db");
  s.finish();
}

void parse_plan(Section s, PlanConfig& pl) {
  if (s.has("n_rounds")) {
    long n = s.integer("n_rounds");
    if (n < 0) throw ConfigError("plan.n_rounds: must be >= 0");
    pl.n_rounds = static_cast<int>(n);
  }
  if (auto v = s.opt("initial_lambda_bs_per_km2")) pl.initial_lambda_bs_per_km2 = *v;
  if (auto v = s.opt("initial_ris_per_ring")) pl.initial_ris_per_ring = *v;
  pl.stagnation = enum_value(s, "stagnation",
                             {{"stop", StagnationPolicy::Stop},
                              {"force_ris", StagnationPolicy::ForceRis},
                              {"force_bs", StagnationPolicy::ForceBs}},
                             pl.stagnation);
  pl.ris_gain = enum_value(s, "ris_gain_convention",
                           {{"per_ris_count", RisGainConvention::PerRisCount},
                            {"ring_scaled", RisGainConvention::RingScaled}},
                           pl.ris_gain);
  s.finish();
}

void parse_validate(Section s, ValidateConfig& v) {
  if (auto x = s.opt("threshold")) v.threshold = *x;
  if (auto x = s.opt("distance_m")) v.distance_m = *x;
  if (auto x = s.opt("coverage_tol")) v.coverage_tol = *x;
  if (auto x = s.opt("rate_rel_tol")) v.rate_rel_tol = *x;
  s.finish();
}

}  // namespace

std::string to_string(Scenario s) {
  return s == Scenario::CoverageHole ? "coverage_hole" : "throughput";
}

std::string to_string(GuardConvention g) {
  return g == GuardConvention::Conditional ? "conditional" : "literal";
}

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig c;
  Section top(j, "config");
  auto sub = [&](const char* k) -> const json& {
    static const json empty = json::object();
    return top.has(k) ? j.at(k) : empty;
  };
  // consume the section names so finish() only flags unknown top-level keys
  for (const char* k : {"system", "cost", "quadrature", "mc", "sweep", "plan", "validate"})
    if (top.has(k) && !j.at(k).is_object()) throw ConfigError(std::string(k) + ": expected an object");
  parse_system(Section(sub("system"), "system"), c.system);
  parse_cost(Section(sub("cost"), "cost"), c.cost);
  parse_quadrature(Section(sub("quadrature"), "quadrature"), c.quadrature);
  parse_mc(Section(sub("mc"), "mc"), c.mc);
  parse_sweep(Section(sub("sweep"), "sweep"), c.sweep);
  parse_plan(Section(sub("plan"), "plan"), c.plan);
  parse_validate(Section(sub("validate"), "validate"), c.validate);
  c.guard = enum_value(top, "guard_convention",
                       {{"literal", GuardConvention::Literal}, {"conditional", GuardConvention::Conditional}},
                       c.guard);
  if (top.has("fd_check")) c.fd_check = top.boolean("fd_check");
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::set<std::string> known = {"system", "cost",     "quadrature", "mc",      "sweep",
                                                "plan",   "validate", "guard_convention", "fd_check"};
    if (!known.count(it.key()) && !is_comment(it.key())) throw ConfigError("config." + it.key() + ": unknown field");
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte offset; turn it into a line number
    std::ifstream again(path);
    std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const ScenarioConfig& c) {
  const auto& p = c.system;
  json sys = {{"lambda_bs_per_m2", p.lambda_bs},
              {"lambda_ris_per_m2", p.lambda_ris},
              {"r_in_m", p.r_in},
              {"r_out_m", p.r_out},
              {"guard_radius_m", p.r_guard},
              {"p0_w", p.p0},
              {"noise_w", p.noise_power},
              {"alpha", p.alpha},
              {"carrier_hz", p.carrier_hz},
              {"beta", p.beta},
              {"elements", p.m_elements},
              {"zeta_mean", p.zeta_mean},
              {"zeta_var", p.zeta_var},
              {"penalty_k", p.penalty_k},
              {"c_hole", p.c_hole},
              {"scenario", to_string(p.scenario)}};
  json cost = {{"c_bs_total", c.cost.c_bs_total},
               {"c_ris_total", c.cost.c_ris_total},
               {"budget_bs_per_m2", c.cost.budget_bs_per_round}};
  json quad = {{"rel_tol", c.quadrature.rel_tol},
               {"abs_tol", c.quadrature.abs_tol},
               {"max_subdivisions", c.quadrature.max_subdivisions},
               {"pv_epsilon_floor", c.quadrature.pv_epsilon_floor},
               {"tail_safety", c.quadrature.tail_safety}};
  json mcj = {{"n_samples", c.mc.n_samples},
              {"seed", c.mc.seed},
              {"window_radius_m", c.mc.window_radius},
              {"threads", c.mc.threads},
              {"overlap_p", c.mc.overlap_p},
              {"beamwidth_deg", c.mc.beamwidth_deg},
              {"beam_model", c.mc.beam == mc::BeamModel::Gaussian ? "gaussian" : "exact"}};
  json sweep = {{"lambda_bs_per_km2", c.sweep.lambda_bs_per_km2},
                {"ris_per_ring", c.sweep.ris_per_ring},
                {"thresholds", c.sweep.thresholds},
                {"distances_m", c.sweep.distances_m},
                {"penalty_k_db", c.sweep.penalty_k_db}};
  const char* stag = c.plan.stagnation == StagnationPolicy::Stop       ? "stop"
                     : c.plan.stagnation == StagnationPolicy::ForceRis ? "force_ris"
                                                                       : "force_bs";
  json plan = {{"n_rounds", c.plan.n_rounds},
               {"initial_lambda_bs_per_km2", c.plan.initial_lambda_bs_per_km2},
               {"initial_ris_per_ring", c.plan.initial_ris_per_ring},
               {"stagnation", stag},
               {"ris_gain_convention",
                c.plan.ris_gain == RisGainConvention::PerRisCount ? "per_ris_count" : "ring_scaled"}};
  json val = {{"threshold", c.validate.threshold},
              {"distance_m", c.validate.distance_m},
              {"coverage_tol", c.validate.coverage_tol},
              {"rate_rel_tol", c.validate.rate_rel_tol}};
  return {{"system", sys},     {"cost", cost},   {"quadrature", quad},
          {"mc", mcj},         {"sweep", sweep}, {"plan", plan},
          {"validate", val},   {"guard_convention", to_string(c.guard)},
          {"fd_check", c.fd_check}};
}

}  // namespace risnet::app
