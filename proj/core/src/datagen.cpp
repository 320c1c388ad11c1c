#include "claimnet/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "claimnet/errors.hpp"
#include "claimnet/random.hpp"
#include "claimnet/survival.hpp"

namespace claimnet {

using nlohmann::json;

namespace {

constexpr double kDaysPerYear = 365.25;

void validate(const GeneratorConfig& c) {
  if (c.records == 0) throw Error("generator: record count must be positive");
  if (!(c.baseline.rate > 0.0) || !(c.baseline.shape > 0.0)) {
    throw Error("generator: baseline rate and shape must be positive");
  }
  if (!(c.censoring.history_weeks > 0.0)) throw Error("generator: history_weeks must be positive");
  for (const auto& gv : c.variables) {
    if (gv.levels.empty()) throw Error("generator: variable " + std::string(to_string(gv.variable)) + " has no levels");
    double total = 0.0;
    for (const auto& l : gv.levels) {
      if (!(l.probability >= 0.0)) throw Error("generator: negative probability");
      total += l.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error("generator: probabilities of " + std::string(to_string(gv.variable)) + " sum to " +
                  std::to_string(total));
    }
  }
  if (const auto f = c.censoring.recent_censor_fraction; f && !(*f >= 0.0 && *f < 1.0)) {
    throw Error("generator: recent censor fraction must lie in [0, 1)");
  }
}

std::size_t pick(const std::vector<GeneratorLevel>& levels, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    acc += levels[k].probability;
    if (u < acc) return k;
  }
  return levels.size() - 1;
}

std::string numeric_token(Variable v, const GeneratorLevel& level, double u) {
  if (v == Variable::AGE) {
    const auto lo = static_cast<long>(std::ceil(level.low));
    const auto hi = static_cast<long>(std::floor(level.high));
    return std::to_string(lo + static_cast<long>(u * static_cast<double>(hi - lo + 1)));
  }
  return std::to_string(static_cast<long>(std::round(level.low + u * (level.high - level.low))));
}

std::vector<GeneratorLevel> coded_levels(const std::vector<std::string>& codes, const std::vector<double>& effects) {
  std::vector<GeneratorLevel> out;
  const double p = 1.0 / static_cast<double>(codes.size());
  for (std::size_t k = 0; k < codes.size(); ++k) out.push_back({codes[k], p, effects.empty() ? 0.0 : effects[k]});
  return out;
}

std::vector<double> spread(std::size_t n, double lo, double hi) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = n == 1 ? 0.0 : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

GeneratorVariable age_variable(const std::array<double, 4>& effects) {
  return {Variable::AGE,
          {{"18-30", 0.25, effects[0], 18, 30},
           {"31-38", 0.25, effects[1], 31, 38},
           {"39-47", 0.25, effects[2], 39, 47},
           {"48-65", 0.25, effects[3], 48, 65}}};
}

GeneratorVariable sex_variable(double female_effect) {
  return {Variable::SEX, {{"M", 0.647, 0.0}, {"F", 0.353, female_effect}}};
}

const std::vector<std::string> kPobCodes = {"11000", "13000", "21000", "22100", "23000", "31000", "32000",
                                            "33000", "34000", "34001", "34002", "41000", "42000", "43000",
                                            "44000", "51000", "52000", "53000", "61000", "62000"};
const std::vector<std::string> kNoiCodes = {"01000", "02000", "03400", "04000", "05302", "07000", "09000", "14530"};
const std::vector<std::string> kToaCodes = {"02100", "11230", "22000", "31500", "41000"};

}  // namespace

double true_survival(const BaselineSpec& b, double eta, double t) {
  return std::exp(-b.rate * std::pow(t, b.shape) * std::exp(eta));
}

double true_mean(const BaselineSpec& b, double eta) {
  return std::tgamma(1.0 + 1.0 / b.shape) * std::pow(b.rate * std::exp(eta), -1.0 / b.shape);
}

double true_quantile(const BaselineSpec& b, double eta, double q) {
  return std::pow(-std::log(1.0 - q) / (b.rate * std::exp(eta)), 1.0 / b.shape);
}

GeneratedData generate(const GeneratorConfig& config) {
  validate(config);
  Rng rng(config.seed);
  const auto n = config.records;
  const auto history_days = static_cast<long>(std::lround(config.censoring.history_weeks * 7.0));

  std::map<std::pair<std::string, std::string>, double> interaction_effects[4];
  if (config.interactions.size() > 4) throw Error("generator: at most 4 interaction blocks");
  for (std::size_t b = 0; b < config.interactions.size(); ++b) {
    for (const auto& e : config.interactions[b].effects) interaction_effects[b][{e.first, e.second}] = e.effect;
  }

  GeneratedData out;
  out.records.resize(n);
  out.etas.resize(n);
  std::vector<long> open_offset(n);  // days after the start of the open-date range
  std::vector<double> latent(n);
  std::array<std::string, kVariableCount> level_token;
  for (std::size_t i = 0; i < n; ++i) {
    auto& rec = out.records[i];
    double eta = 0.0;
    for (const auto& gv : config.variables) {
      const auto& level = gv.levels[pick(gv.levels, rng.uniform())];
      eta += level.effect;
      level_token[index_of(gv.variable)] = level.token;
      if (kind_of(gv.variable) == VariableKind::Quartile) {
        rec.covariates.set(gv.variable, numeric_token(gv.variable, level, rng.uniform()));
      } else {
        rec.covariates.set(gv.variable, level.token);
      }
    }
    for (std::size_t b = 0; b < config.interactions.size(); ++b) {
      const auto& block = config.interactions[b];
      const auto it = interaction_effects[b].find({level_token[index_of(block.first)], level_token[index_of(block.second)]});
      if (it != interaction_effects[b].end()) eta += it->second;
    }
    open_offset[i] = static_cast<long>(rng.uniform() * static_cast<double>(history_days));
    eta += config.trend_per_year * static_cast<double>(open_offset[i]) / kDaysPerYear;
    latent[i] = std::pow(rng.standard_exponential() / (config.baseline.rate * std::exp(eta)),
                         1.0 / config.baseline.shape);
    out.etas[i] = eta;
  }

  // Follow-up in weeks at capture for a given gap.
  auto window = [&](std::size_t i, long gap_days) {
    return static_cast<double>(gap_days + history_days - open_offset[i]) / 7.0;
  };

  long gap_days = static_cast<long>(std::lround(config.censoring.capture_gap_weeks * 7.0));
  if (config.censoring.enabled && config.censoring.recent_censor_fraction) {
    const double target = *config.censoring.recent_censor_fraction;
    const auto recent_days = static_cast<long>(std::lround(config.censoring.recent_window_weeks * 7.0));
    std::vector<std::size_t> recent;
    for (std::size_t i = 0; i < n; ++i) {
      if (open_offset[i] >= history_days - recent_days) recent.push_back(i);
    }
    if (recent.empty()) throw Error("generator: no records in the recent window");
    auto censored_fraction = [&](long gap) {
      std::size_t c = 0;
      for (const auto i : recent) c += latent[i] > window(i, gap) ? 1 : 0;
      return static_cast<double>(c) / static_cast<double>(recent.size());
    };
    if (censored_fraction(0) < target) {
      throw Error("generator: recent censor fraction " + std::to_string(target) +
                  " is infeasible; at most " + std::to_string(censored_fraction(0)) + " is reachable");
    }
    long lo = 0;
    long hi = 1;
    while (censored_fraction(hi) > target) hi *= 2;
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      (censored_fraction(mid) > target ? lo : hi) = mid;
    }
    gap_days = std::abs(censored_fraction(lo) - target) < std::abs(censored_fraction(hi) - target) ? lo : hi;
  }

  out.capture_gap_weeks = static_cast<double>(gap_days) / 7.0;
  out.first_open_date = config.capture_date - std::chrono::days{gap_days + history_days};
  for (std::size_t i = 0; i < n; ++i) {
    auto& rec = out.records[i];
    rec.open_date = out.first_open_date + std::chrono::days{open_offset[i]};
    const double follow_up = window(i, gap_days);
    if (config.censoring.enabled && latent[i] > follow_up) {
      rec.duration_weeks = follow_up;
      rec.event = false;
    } else {
      rec.duration_weeks = latent[i];
      rec.event = true;
    }
  }
  return out;
}

std::vector<std::string> preset_names() { return {"linear-v1", "interaction-v1", "null-v1", "trend-v1"}; }

GeneratorConfig preset(std::string_view name, std::size_t records, std::uint64_t seed) {
  GeneratorConfig c;
  c.name = std::string(name);
  c.records = records;
  c.seed = seed;
  if (name == "linear-v1") {
    c.variables = {age_variable({0.4, 0.1, -0.1, -0.4}), sex_variable(-0.3),
                   {Variable::POB, coded_levels({"21000", "31000", "34000", "41000", "51000"}, {-0.5, -0.2, 0.0, 0.3, 0.6})}};
    c.baseline = {0.1, 1.0};
    c.censoring.history_weeks = 156;
  } else if (name == "interaction-v1") {
    // Female durations shift by an amount whose sign alternates across body parts.
    const std::vector<double> gamma = {0.9, -0.9, 0.7, -0.7, 0.5, -0.5, 0.8, -0.8, 0.6, -0.6,
                                       0.9, -0.9, 0.7, -0.7, 0.5, -0.5, 0.8, -0.8, 0.6, -0.6};
    c.variables = {{Variable::NOI, coded_levels(kNoiCodes, spread(kNoiCodes.size(), -0.6, 0.6))},
                   {Variable::POB, coded_levels(kPobCodes, spread(kPobCodes.size(), -0.5, 0.5))},
                   {Variable::TOA, coded_levels(kToaCodes, {})},
                   age_variable({0.3, 0.1, -0.1, -0.3}),
                   sex_variable(-0.1)};
    GeneratorInteraction pob_sex{Variable::POB, Variable::SEX, {}};
    for (std::size_t k = 0; k < kPobCodes.size(); ++k) pob_sex.effects.push_back({kPobCodes[k], "F", gamma[k]});
    c.interactions = {pob_sex};
    c.baseline = {std::log(2.0) / 36.0, 2.0};
    c.censoring.history_weeks = 156;
  } else if (name == "null-v1") {
    c.variables = {{Variable::POB, coded_levels(std::vector<std::string>(kPobCodes.begin(), kPobCodes.begin() + 10), {})},
                   sex_variable(0.0), age_variable({0, 0, 0, 0})};
    c.baseline = {0.1, 1.0};
    c.censoring.history_weeks = 104;
    c.censoring.recent_censor_fraction = 0.30;
  } else if (name == "trend-v1") {
    c.variables = {sex_variable(0.0), age_variable({0, 0, 0, 0})};
    c.baseline = {0.1, 1.0};
    c.censoring.history_weeks = 104;
    c.censoring.recent_censor_fraction = 0.30;
    c.trend_per_year = -0.25;
  } else {
    throw Error("unknown generator preset '" + std::string(name) + "'");
  }
  return c;
}

double oracle_r2(std::span<const ClaimRecord> records, std::span<const double> etas) {
  const auto o = outcomes_of(records);
  const RiskSets risk(o.durations, o.events);
  const auto fit = fit_univariate_cox(etas, risk);
  return generalized_r2(fit.loglik_full, fit.loglik_null, records.size());
}

json to_json(const GeneratorConfig& c) {
  json vars = json::array();
  for (const auto& gv : c.variables) {
    json levels = json::array();
    for (const auto& l : gv.levels) {
      json lj = {{"token", l.token}, {"probability", l.probability}, {"effect", l.effect}};
      if (kind_of(gv.variable) == VariableKind::Quartile) {
        lj["low"] = l.low;
        lj["high"] = l.high;
      }
      levels.push_back(std::move(lj));
    }
    vars.push_back({{"variable", to_string(gv.variable)}, {"levels", std::move(levels)}});
  }
  json inter = json::array();
  for (const auto& b : c.interactions) {
    json effects = json::array();
    for (const auto& e : b.effects) effects.push_back({{"first", e.first}, {"second", e.second}, {"effect", e.effect}});
    inter.push_back({{"first", to_string(b.first)}, {"second", to_string(b.second)}, {"effects", std::move(effects)}});
  }
  json cens = {{"enabled", c.censoring.enabled},
               {"history_weeks", c.censoring.history_weeks},
               {"capture_gap_weeks", c.censoring.capture_gap_weeks},
               {"recent_window_weeks", c.censoring.recent_window_weeks}};
  if (c.censoring.recent_censor_fraction) cens["recent_censor_fraction"] = *c.censoring.recent_censor_fraction;
  return {{"name", c.name},
          {"variables", std::move(vars)},
          {"interactions", std::move(inter)},
          {"baseline", {{"rate", c.baseline.rate}, {"shape", c.baseline.shape}}},
          {"censoring", std::move(cens)},
          {"trend_per_year", c.trend_per_year},
          {"capture_date", format_date(c.capture_date)},
          {"records", c.records},
          {"seed", c.seed}};
}

GeneratorConfig generator_config_from_json(const json& doc) {
  auto variable = [](const json& j) {
    const auto s = j.get<std::string>();
    const auto v = parse_variable(s);
    if (!v) throw DataError("generator config: unknown variable '" + s + "'");
    return *v;
  };
  try {
    GeneratorConfig c;
    c.name = doc.value("name", std::string{});
    for (const auto& vj : doc.at("variables")) {
      GeneratorVariable gv{variable(vj.at("variable")), {}};
      for (const auto& lj : vj.at("levels")) {
        gv.levels.push_back({lj.at("token").get<std::string>(), lj.at("probability").get<double>(),
                             lj.value("effect", 0.0), lj.value("low", 0.0), lj.value("high", 0.0)});
      }
      c.variables.push_back(std::move(gv));
    }
    for (const auto& bj : doc.value("interactions", json::array())) {
      GeneratorInteraction b{variable(bj.at("first")), variable(bj.at("second")), {}};
      for (const auto& e : bj.at("effects")) {
        b.effects.push_back({e.at("first").get<std::string>(), e.at("second").get<std::string>(),
                             e.at("effect").get<double>()});
      }
      c.interactions.push_back(std::move(b));
    }
    if (doc.contains("baseline")) {
      c.baseline.rate = doc["baseline"].value("rate", c.baseline.rate);
      c.baseline.shape = doc["baseline"].value("shape", c.baseline.shape);
    }
    if (doc.contains("censoring")) {
      const auto& cj = doc["censoring"];
      c.censoring.enabled = cj.value("enabled", c.censoring.enabled);
      c.censoring.history_weeks = cj.value("history_weeks", c.censoring.history_weeks);
      c.censoring.capture_gap_weeks = cj.value("capture_gap_weeks", c.censoring.capture_gap_weeks);
      c.censoring.recent_window_weeks = cj.value("recent_window_weeks", c.censoring.recent_window_weeks);
      if (cj.contains("recent_censor_fraction")) {
        c.censoring.recent_censor_fraction = cj["recent_censor_fraction"].get<double>();
      }
    }
    c.trend_per_year = doc.value("trend_per_year", 0.0);
    if (doc.contains("capture_date")) {
      const auto d = parse_date(doc["capture_date"].get<std::string>());
      if (!d) throw DataError("generator config: capture_date must be YYYY-MM-DD");
      c.capture_date = *d;
    }
    c.records = doc.value("records", c.records);
    c.seed = doc.value("seed", c.seed);
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed generator config: ") + e.what());
  }
}

void write_oracle(std::ostream& out, std::span<const double> etas) {
  out << "record,eta\n";
  for (std::size_t i = 0; i < etas.size(); ++i) out << i << ',' << format_double(etas[i]) << '\n';
}

std::vector<double> read_oracle(std::istream& in) {
  std::string line;
  std::vector<double> etas;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw DataError("oracle file is empty");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("expected 'record,eta'", line_no);
    std::size_t id = 0;
    double eta = 0.0;
    std::istringstream a(line.substr(0, comma));
    std::istringstream b(line.substr(comma + 1));
    if (!(a >> id) || !(b >> eta) || id != etas.size()) throw DataError("malformed oracle row", line_no);
    etas.push_back(eta);
  }
  return etas;
}

}  // namespace claimnet
