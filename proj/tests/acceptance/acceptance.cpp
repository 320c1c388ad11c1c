// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "claimnet/coxnet.hpp"
#include "claimnet/datagen.hpp"
#include "claimnet/evaluation.hpp"
#include "claimnet/model_io.hpp"
#include "claimnet/partial_prediction.hpp"
#include "claimnet/random.hpp"
#include "claimnet/selection.hpp"
#include "claimnet/survival.hpp"
#include "cox_oracle.hpp"

using namespace claimnet;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Events = std::vector<std::uint8_t>;

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

// Shared state for criteria 5 to 8: the interaction-v1 split and the grid-selected model.
struct InteractionStudy {
  GeneratedData data;
  std::vector<ClaimRecord> train;
  std::vector<ClaimRecord> test;
  std::vector<double> test_true_etas;
  GridResult grid;
  std::optional<FittedModel> best;
  double seconds = 0.0;
};

InteractionStudy& study() {
  static InteractionStudy s;
  return s;
}

void criterion_1(Outcome& o) {
  Rng rng(20240611);
  double worst = 0.0;
  int nets = 0;
  for (; nets < 40; ++nets) {
    const std::size_t n_i = 1 + rng.below(10);
    const std::size_t n_h = rng.below(4);
    const std::size_t n = 2 + rng.below(29);
    InputMatrix x(n_i);
    std::vector<double> dur;
    Events ev;
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<double> row(n_i);
      for (auto& v : row) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
      x.add_dense_row(row);
      dur.push_back(std::ceil(rng.uniform() * 10));
      ev.push_back(r == 0 || rng.uniform() < 0.7 ? 1 : 0);
    }
    const RiskSets risk(dur, ev);
    NetworkWeights w(n_i, n_h);
    for (auto& v : w.parameters()) v = rng.uniform(-1, 1);
    const double lambda = rng.uniform(0, 3);
    const double lambda_b = lambda / 25;
    const auto g = gradient(w, x, risk, lambda, lambda_b);
    for (std::size_t k = 0; k < w.parameters().size(); ++k) {
      const double saved = w.parameters()[k];
      w.parameters()[k] = saved + 1e-5;
      const double up = objective(w, x, risk, lambda, lambda_b);
      w.parameters()[k] = saved - 1e-5;
      const double down = objective(w, x, risk, lambda, lambda_b);
      w.parameters()[k] = saved;
      const double fd = (up - down) / 2e-5;
      worst = std::max(worst, std::abs(fd - g.parameters()[k]) / std::max(1.0, std::abs(fd)));
    }
  }
  o.detail << nets << " nets, max relative error " << fmt(worst) << " ";
  o.require(worst < 1e-4, "max relative error < 1e-4");
}

void criterion_2(Outcome& o) {
  const auto data = generate(preset("linear-v1", 200, 7));
  const auto cb = build_codebook(data.records);
  TrainConfig c;
  c.hidden = 0;
  c.lambda = 0.0;
  const auto model = train(data.records, cb, c);

  // Reference coding: the first observed category of each variable is the baseline.
  struct Column {
    std::size_t input;
    std::size_t reference;
  };
  std::vector<Column> columns;
  for (const auto& coding : cb.variables()) {
    std::optional<std::size_t> ref;
    for (std::size_t k = 0; k < coding.categories.size(); ++k) {
      if (coding.counts[k] == 0) continue;
      const auto input = cb.input_index(coding.variable, k);
      if (!ref) {
        ref = input;
      } else {
        columns.push_back({input, *ref});
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(data.records.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(columns.size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto dense = encode(data.records[static_cast<std::size_t>(r)], cb);
    for (std::size_t j = 0; j < columns.size(); ++j) x(r, static_cast<Eigen::Index>(j)) = dense[columns[j].input];
  }
  const auto o_ = outcomes_of(data.records);
  const auto fit = oracle::newton_cox(x, o_.durations, o_.events);

  double worst = 0.0;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const double net = model.weights.input_output(columns[j].input + 1) -
                       model.weights.input_output(columns[j].reference + 1);
    worst = std::max(worst, std::abs(net - fit.beta[static_cast<Eigen::Index>(j)]));
  }
  o.detail << columns.size() << " coefficients, max difference " << fmt(worst) << ", loglik net "
           << fmt(model.loglik, 10) << " oracle " << fmt(fit.loglik, 10) << " ";
  o.require(worst < 1e-3, "coefficients within 1e-3");
}

void criterion_3(Outcome& o) {
  constexpr double tol = 1e-12;
  int checks = 0;
  const auto near = [&](double a, double b, const std::string& what) {
    ++checks;
    o.require(std::abs(a - b) <= tol, what + " (" + fmt(a, 17) + " vs " + fmt(b, 17) + ")");
  };

  const auto km1 = kaplan_meier(std::vector<double>{1, 2, 3}, Events{1, 0, 1});
  near(km1.at(1), 2.0 / 3.0, "KM S(1)");
  near(km1.at(2), 2.0 / 3.0, "KM S(2) censored");
  near(km1.at(3), 0.0, "KM S(3)");
  const auto km2 = kaplan_meier(std::vector<double>{1, 1, 2}, Events{1, 1, 1});
  near(km2.at(1), 1.0 / 3.0, "KM tied S(1)");
  const auto km3 = kaplan_meier(std::vector<double>{2, 2, 4}, Events{1, 0, 1});
  near(km3.at(2), 2.0 / 3.0, "KM censored at event time");

  const auto h = breslow_baseline(std::vector<double>{1, 2}, Events{1, 1}, std::vector<double>{0, 0});
  near(h.at(1), 0.5, "Breslow H(1)");
  near(h.at(2), 1.5, "Breslow H(2)");
  const std::vector<double> d{1, 1, 2, 3, 3, 3, 5};
  const Events e{1, 0, 1, 1, 1, 0, 1};
  const auto na = breslow_baseline(d, e, std::vector<double>(d.size(), 0.0));
  const double expected[] = {1.0 / 7, 1.0 / 7 + 1.0 / 5, 1.0 / 7 + 1.0 / 5 + 2.0 / 4, 1.0 / 7 + 1.0 / 5 + 2.0 / 4 + 1.0};
  const double times[] = {1, 2, 3, 5};
  for (int k = 0; k < 4; ++k) near(na.at(times[k]), expected[k], "Nelson-Aalen at " + fmt(times[k]));

  near(cox_partial_loglik(std::vector<double>{0, 0}, std::vector<double>{1, 2}, Events{1, 0}), std::log(0.5),
       "partial loglik two records");
  near(cox_partial_loglik(std::vector<double>{0, 0, 0}, std::vector<double>{1, 2, 3}, Events{1, 1, 1}),
       std::log(1.0 / 3) + std::log(0.5), "partial loglik three records");
  near(cox_partial_loglik(std::vector<double>{std::log(2.0), 0}, std::vector<double>{1, 2}, Events{1, 1}),
       std::log(2.0 / 3.0), "partial loglik weighted");
  near(cox_partial_loglik(std::vector<double>{1.0, 0.0}, std::vector<double>{1, 1}, Events{1, 1}),
       1.0 - 2.0 * std::log(std::exp(1.0) + 1.0), "partial loglik Breslow ties");

  near(generalized_r2(50, 0, 100), 1 - std::exp(-1.0), "generalized R2");
  near(generalized_r2(-10, -10, 7), 0.0, "generalized R2 null");
  o.detail << checks << " hand examples ";
}

void criterion_4(Outcome& o) {
  GeneratorConfig c = preset("linear-v1", 2000, 4);
  c.variables.clear();
  c.baseline = {0.1, 1.0};
  const auto data = generate(c);
  const auto cb = build_codebook(data.records);
  const auto model = train(data.records, cb, {});
  const double scale = std::exp(predict_eta(model, data.records[0]));

  std::vector<double> durations;
  for (const auto& r : data.records) durations.push_back(r.duration_weeks);
  std::sort(durations.begin(), durations.end());
  const auto rank = [&](double q) { return durations[static_cast<std::size_t>(std::ceil(q * 2000)) - 1]; };
  const double lo = rank(0.10);
  const double hi = rank(0.90);
  double worst = 0.0;
  for (std::size_t k = 0; k < model.baseline.times.size(); ++k) {
    const double t = model.baseline.times[k];
    if (t < lo || t > hi) continue;
    const double est = model.baseline.cumulative_hazard[k] * scale;
    worst = std::max(worst, std::abs(est / (0.1 * t) - 1.0));
  }
  o.detail << "durations P10 " << fmt(lo) << " to P90 " << fmt(hi) << ", max relative deviation " << fmt(worst)
           << " ";
  o.require(worst <= 0.10, "within 10% of 0.1 t");
}

void criterion_5(Outcome& o) {
  auto& s = study();
  const auto start = std::chrono::steady_clock::now();
  s.data = generate(preset("interaction-v1", 12000, 2024));
  const auto parts = split(s.data.records.size(), 8000, 2024);
  s.train = select(s.data.records, parts.train);
  s.test = select(s.data.records, parts.test);
  for (const auto id : parts.test) s.test_true_etas.push_back(s.data.etas[id]);

  s.grid = grid_search(s.train, s.test, GridOptions{});
  o.require(s.grid.best.has_value(), "grid produced a model");
  if (!s.grid.best) return;
  const auto& best = s.grid.entries[*s.grid.best];

  double main_r2 = -1.0;
  for (const auto& subset : {reduced_subset(), full_subset()}) {
    main_r2 = std::max(main_r2, score_model(main_effects_fit(s.train, subset.variables), s.test).r2);
  }
  const double oracle = oracle_r2(s.test, s.test_true_etas);

  const auto subset = best.subset == "R" ? reduced_subset() : full_subset();
  TrainConfig c;
  c.lambda = best.lambda;
  c.hidden = best.hidden;
  s.best = train(s.train, build_codebook(s.train, kDefaultMinCount, subset.variables), c);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  o.detail << "ANN " << fmt(best.r2) << " (" << best.subset << ", lambda " << fmt(best.lambda) << ", n_h "
           << best.hidden << "), main effects " << fmt(main_r2) << ", oracle " << fmt(oracle) << ", "
           << s.grid.entries.size() << " fits in " << fmt(s.seconds, 3) << " s ";
  o.require(best.r2 - main_r2 >= 0.02, "ANN beats main effects by 0.02");
  o.require(best.r2 < oracle + 0.02 && main_r2 < oracle + 0.02, "both below oracle + 0.02");
  o.require(s.seconds < 15 * 60, "under 15 minutes");
}

void criterion_6(Outcome& o) {
  auto& s = study();
  o.require(s.best.has_value(), "selected model available");
  if (!s.best) return;
  std::vector<double> etas;
  for (const auto& r : s.test) etas.push_back(predict_eta(*s.best, r));
  const auto out = outcomes_of(s.test);
  const auto t = quintile_table(etas, out.durations, out.events);
  for (std::size_t r = 0; r < 5; ++r) {
    double sum = 0;
    for (const double p : t[r]) sum += p;
    o.require(std::abs(sum - 1.0) <= 1e-9, "row " + std::to_string(r + 1) + " sums to 1");
  }
  o.detail << "(1,1) " << fmt(t[0][0], 3) << " (5,5) " << fmt(t[4][4], 3) << " (1,5) " << fmt(t[0][4], 3)
           << " (5,1) " << fmt(t[4][0], 3) << " ";
  o.require(t[0][0] > 0.30 && t[4][4] > 0.30, "diagonal corners above 0.30");
  o.require(t[0][4] < 0.12 && t[4][0] < 0.12, "off-diagonal corners below 0.12");
}

void criterion_7(Outcome& o) {
  auto& s = study();
  o.require(s.best.has_value(), "selected model available");
  if (!s.best) return;
  std::vector<double> etas;
  for (const auto& r : s.test) etas.push_back(predict_eta(*s.best, r));
  const auto predicted = record_summaries(s.best->baseline, etas);
  const auto out = outcomes_of(s.test);
  const auto points = moving_window_calibration(predicted.median, out.durations, out.events, Summary::Median);

  std::vector<double> finite;
  for (const double m : predicted.median) {
    if (std::isfinite(m)) finite.push_back(m);
  }
  std::sort(finite.begin(), finite.end());
  const auto rank = [&](double q) {
    return finite[static_cast<std::size_t>(std::ceil(q * static_cast<double>(finite.size()))) - 1];
  };
  const double lo = rank(0.10);
  const double hi = rank(0.90);
  double worst = 0.0;
  int used = 0;
  for (const auto& p : points) {
    if (p.center < lo || p.center > hi) continue;
    ++used;
    worst = std::max(worst, std::abs(p.actual - p.center) / p.center);
  }
  o.detail << used << " windows over predicted medians " << fmt(lo) << " to " << fmt(hi)
           << ", max relative deviation " << fmt(worst) << " ";
  o.require(used >= 3, "at least three windows in range");
  o.require(worst <= 0.15, "within 15%");
}

void criterion_8(Outcome& o) {
  auto& s = study();
  o.require(s.best.has_value(), "selected model available");
  if (!s.best) return;
  const auto& model = *s.best;

  const auto rows = group_calibration(model, s.train, Variable::POB, Variable::SEX, 30);
  std::vector<double> pred, actual;
  for (const auto& r : rows) {
    pred.push_back(r.predicted);
    actual.push_back(r.actual);
  }
  const double corr = rows.size() >= 3 ? pearson_correlation(pred, actual) : 0.0;
  o.detail << rows.size() << " groups r=" << fmt(corr) << ", ";
  o.require(corr > 0.9, "group median correlation > 0.9");

  const PartialPredictor predictor(model, s.train);
  std::size_t singletons = 0;
  bool identical = true;
  for (const auto& r : s.train) {
    if (predictor.match(r.covariates).size() != 1) continue;
    ++singletons;
    const auto individual = survival_from_eta(model.baseline, predict_eta(model, r));
    identical = identical && predictor.predict(r.covariates, PartialMethod::A).curve == individual &&
                predictor.predict(r.covariates, PartialMethod::B).curve == individual;
  }
  o.detail << singletons << " singleton matches, ";
  o.require(singletons > 0, "singleton matches exist");
  o.require(identical, "A = B = individual on singletons");

  const auto conc = sex_difference_concordance(model, s.train, Variable::POB, 10);
  const double share = static_cast<double>(conc.sign_agreements) / static_cast<double>(conc.rows.size());
  o.detail << "sign agreement " << conc.sign_agreements << "/" << conc.rows.size() << ", tau "
           << fmt(conc.kendall.tau) << " p " << fmt(conc.kendall.p_value) << " ";
  o.require(share >= 0.70, "sign agreement >= 70%");
  o.require(conc.kendall.tau > 0 && conc.kendall.p_value < 0.01, "Kendall tau positive with p < 0.01");
}

void criterion_9(Outcome& o) {
  const auto cfg = preset("trend-v1", 6000, 1998);
  const auto data = generate(cfg);
  const auto fit = fit_time_trend(data.records);
  // Covariate part of each true prediction term, without the open-date trend.
  std::vector<double> covariate_eta;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const double years = static_cast<double>((data.records[i].open_date - data.first_open_date).count()) / 365.25;
    covariate_eta.push_back(data.etas[i] - cfg.trend_per_year * years);
  }
  double worst = 0.0;
  for (const auto& q : fit.quarters) {
    if (q.records == 0) continue;
    const auto mid = q.start + (q.end - q.start) / 2;
    const double years = static_cast<double>((mid - data.first_open_date).count()) / 365.25;
    double truth = 0.0;
    for (const double e : covariate_eta) truth += true_mean(cfg.baseline, e + cfg.trend_per_year * years);
    truth /= static_cast<double>(covariate_eta.size());
    worst = std::max(worst, std::abs(q.model_mean / truth - 1.0));
  }
  o.detail << fit.quarters.size() << " quarters, max relative deviation of model means " << fmt(worst) << ", ";
  o.require(worst <= 0.15, "model means within 15%");
  const auto& last = fit.quarters.back();
  o.detail << "latest quarter naive " << fmt(last.naive_mean) << " vs model " << fmt(last.model_mean) << ", ";
  o.require(last.naive_mean < last.model_mean, "naive mean understates the latest quarter");

  const auto null_data = generate(preset("null-v1", 6000, 1998));
  const auto null_fit = fit_time_trend(null_data.records);
  double worst_z = 0.0;
  for (std::size_t k = 0; k < null_fit.coefficients.size(); ++k) {
    worst_z = std::max(worst_z, std::abs(null_fit.coefficients[k]) / null_fit.standard_errors[k]);
  }
  o.detail << "null slopes max |z| " << fmt(worst_z) << " ";
  o.require(worst_z <= 2.0, "null slopes within 2 SE");
}

void criterion_10(Outcome& o) {
  const auto data = generate(preset("interaction-v1", 2000, 10));
  const auto cb = build_codebook(data.records);
  TrainConfig c;
  c.lambda = 2;
  c.hidden = 4;
  c.seed = 77;
  const auto a = serialize_model(train(data.records, cb, c));
  const auto b = serialize_model(train(data.records, cb, c));
  o.require(a == b, "same seed gives identical model bytes");
  const auto parsed = parse_model(a);
  o.require(serialize_model(parsed) == a, "serialization round trip");
  bool same_eta = true;
  const auto original = parse_model(b);
  for (const auto& r : data.records) same_eta = same_eta && predict_eta(parsed, r) == predict_eta(original, r);
  o.require(same_eta, "round-tripped model predicts identically");
  o.detail << a.size() << " bytes ";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"gradient matches finite differences", criterion_1},
      {"linear degeneracy matches Newton Cox", criterion_2},
      {"survival primitives hand examples", criterion_3},
      {"Breslow baseline recovery", criterion_4},
      {"interaction advantage over main effects", criterion_5},
      {"quintile calibration", criterion_6},
      {"moving-window calibration", criterion_7},
      {"partial-input predictions", criterion_8},
      {"trend fit", criterion_9},
      {"determinism and round trip", criterion_10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "] ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s -- %s(%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
