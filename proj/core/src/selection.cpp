#include "claimnet/selection.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <numeric>
#include <ostream>
#include <tuple>

#include <spdlog/spdlog.h>

#include "claimnet/errors.hpp"
#include "claimnet/random.hpp"

namespace claimnet {

Split split(std::size_t record_count, std::size_t n_train, std::uint64_t seed) {
  if (n_train == 0 || n_train >= record_count) {
    throw Error("split: training size " + std::to_string(n_train) + " must lie in [1, " +
                std::to_string(record_count) + ")");
  }
  std::vector<std::size_t> ids(record_count);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = record_count - 1; i > 0; --i) std::swap(ids[i], ids[rng.below(i + 1)]);
  Split s;
  s.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<ClaimRecord> select(std::span<const ClaimRecord> records, std::span<const std::size_t> ids) {
  std::vector<ClaimRecord> out;
  out.reserve(ids.size());
  for (const auto i : ids) out.push_back(records[i]);
  return out;
}

Score score_etas(std::span<const double> etas, std::span<const ClaimRecord> test) {
  if (test.empty()) throw Error("score: no test records");
  if (etas.size() != test.size()) throw Error("score: prediction count does not match record count");
  const auto o = outcomes_of(test);
  const RiskSets risk(o.durations, o.events);
  if (risk.event_count() == 0) throw Error("score: test records contain no closed claims");
  const auto fit = fit_univariate_cox(etas, risk);
  Score s;
  s.n = test.size();
  s.beta = fit.beta;
  s.loglik_full = fit.loglik_full;
  s.loglik_null = fit.loglik_null;
  s.degenerate = fit.degenerate;
  if (fit.degenerate) {
    spdlog::warn("score: prediction term is constant over the test records; R^2 set to 0");
    return s;
  }
  s.r2 = generalized_r2(fit.loglik_full, fit.loglik_null, s.n);
  return s;
}

Score score_model(const FittedModel& model, std::span<const ClaimRecord> test) {
  std::vector<double> etas;
  etas.reserve(test.size());
  for (const auto& r : test) etas.push_back(predict_eta(model, r));
  return score_etas(etas, test);
}

VariableSubset reduced_subset() { return {"R", {Variable::AGE, Variable::SEX, Variable::POB}}; }

VariableSubset full_subset() { return {"F", {kAllVariables.begin(), kAllVariables.end()}}; }

std::optional<std::size_t> best_entry(std::span<const GridEntry> entries) {
  std::optional<std::size_t> best;
  auto key = [](const GridEntry& e) {
    return std::make_tuple(e.r2, -static_cast<double>(e.hidden), e.lambda, e.subset);
  };
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].error) continue;
    if (!best || key(entries[*best]) < key(entries[k])) best = k;
  }
  return best;
}

GridResult grid_search(std::span<const ClaimRecord> train_records, std::span<const ClaimRecord> test,
                       const GridOptions& options) {
  if (options.subsets.empty() || options.lambdas.empty() || options.hidden_sizes.empty()) {
    throw Error("grid: every grid dimension needs at least one value");
  }
  GridResult result;
  for (const auto& subset : options.subsets) {
    std::optional<Codebook> codebook;
    std::string codebook_error;
    try {
      codebook = build_codebook(train_records, options.min_count, subset.variables);
    } catch (const std::exception& e) {
      codebook_error = e.what();
    }
    for (const auto hidden : options.hidden_sizes) {
      for (const auto lambda : options.lambdas) {
        GridEntry entry;
        entry.subset = subset.name;
        entry.lambda = lambda;
        entry.hidden = hidden;
        const auto start = std::chrono::steady_clock::now();
        try {
          if (!codebook) throw Error(codebook_error);
          TrainConfig config = options.base;
          config.lambda = lambda;
          config.lambda_bias.reset();
          config.hidden = hidden;
          const auto model = train(train_records, *codebook, config);
          entry.objective = model.objective;
          entry.iterations = model.iterations;
          entry.r2 = score_model(model, test).r2;
        } catch (const std::exception& e) {
          entry.error = e.what();
          spdlog::warn("grid: subset {} lambda {} n_h {} failed: {}", subset.name, lambda, hidden, e.what());
        }
        entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        spdlog::info("grid: subset {} lambda {} n_h {} r2 {:.4f} ({} iterations, {:.1f}s)", subset.name, lambda,
                     hidden, entry.r2, entry.iterations, entry.seconds);
        result.entries.push_back(std::move(entry));
      }
    }
  }
  result.best = best_entry(result.entries);
  return result;
}

FittedModel main_effects_fit(std::span<const ClaimRecord> train_records, std::span<const Variable> subset,
                             std::size_t min_count, const TrainConfig& base) {
  TrainConfig config = base;
  config.hidden = 0;
  config.lambda = 0.0;
  config.lambda_bias = 0.0;
  return train(train_records, build_codebook(train_records, min_count, subset), config);
}

namespace {

std::size_t degrees_of_freedom(const Codebook& codebook, Variable v) {
  const auto* coding = codebook.find(v);
  if (!coding) return 0;
  const auto used = std::count_if(coding->counts.begin(), coding->counts.end(), [](auto c) { return c > 0; });
  return used > 0 ? static_cast<std::size_t>(used) - 1 : 0;
}

}  // namespace

std::vector<StepwiseRow> stepwise_report(std::span<const ClaimRecord> train_records,
                                         std::span<const Variable> candidates, std::size_t min_count) {
  const auto o = outcomes_of(train_records);
  const RiskSets risk(o.durations, o.events);
  if (risk.event_count() == 0) throw Error("stepwise: no closed claims");
  const std::vector<double> zeros(train_records.size(), 0.0);
  double current = cox_partial_loglik(zeros, risk);
  std::vector<Variable> chosen;
  std::vector<Variable> remaining(candidates.begin(), candidates.end());
  std::vector<StepwiseRow> rows;
  while (!remaining.empty()) {
    std::optional<StepwiseRow> best;
    for (const auto v : remaining) {
      auto trial = chosen;
      trial.push_back(v);
      const auto codebook = build_codebook(train_records, min_count, trial);
      const std::size_t df = degrees_of_freedom(codebook, v);
      if (df == 0) continue;
      TrainConfig config;
      config.lambda = 0.0;
      config.lambda_bias = 0.0;
      const auto model = train(train_records, codebook, config);
      StepwiseRow row{v, df, model.loglik, std::max(0.0, 2.0 * (model.loglik - current)), 1.0};
      row.p_value = chi_square_upper_tail(row.chi_square, static_cast<double>(df));
      if (!best || row.chi_square > best->chi_square) best = row;
    }
    if (!best) break;
    chosen.push_back(best->variable);
    remaining.erase(std::find(remaining.begin(), remaining.end(), best->variable));
    current = best->loglik;
    rows.push_back(*best);
  }
  return rows;
}

void write_grid(std::ostream& out, const GridResult& result) {
  out << "subset,lambda,n_h,r2,iterations,seconds,objective,error\n";
  for (const auto& e : result.entries) {
    out << e.subset << ',' << format_double(e.lambda) << ',' << e.hidden << ',' << format_double(e.r2) << ','
        << e.iterations << ',' << format_double(e.seconds) << ',' << format_double(e.objective) << ',';
    if (e.error) {
      std::string msg = *e.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << msg;
    }
    out << '\n';
  }
}

void write_stepwise(std::ostream& out, std::span<const StepwiseRow> rows) {
  out << "step,variable,df,loglik,chi_square,p_value\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    out << k + 1 << ',' << to_string(r.variable) << ',' << r.df << ',' << format_double(r.loglik) << ','
        << format_double(r.chi_square) << ',' << format_double(r.p_value) << '\n';
  }
}

}  // namespace claimnet
