#include "claimnet/partial_prediction.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace claimnet {

namespace {

std::string describe(const std::vector<EmptyMatchError::Constraint>& constraints, Variable most_restrictive) {
  std::string msg = "no training records match the partial input (";
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (i > 0) msg += ", ";
    msg += std::string(to_string(constraints[i].variable)) + "=" + constraints[i].category + ": " +
           std::to_string(constraints[i].matches);
  }
  return msg + "); most restrictive variable: " + std::string(to_string(most_restrictive));
}

}  // namespace

EmptyMatchError::EmptyMatchError(std::vector<Constraint> constraints, Variable most_restrictive)
    : Error(describe(constraints, most_restrictive)),
      constraints_(std::move(constraints)),
      most_restrictive_(most_restrictive) {}

MatchIndex::MatchIndex(std::vector<CategoryProfile> profiles, const Codebook& codebook)
    : profiles_(std::move(profiles)) {
  for (const auto& vc : codebook.variables()) {
    postings_[index_of(vc.variable)].resize(vc.categories.size());
  }
  for (std::size_t r = 0; r < profiles_.size(); ++r) {
    for (std::size_t v = 0; v < kVariableCount; ++v) {
      const auto c = profiles_[r][v];
      if (c < 0) continue;
      auto& lists = postings_[v];
      if (static_cast<std::size_t>(c) >= lists.size()) lists.resize(static_cast<std::size_t>(c) + 1);
      lists[static_cast<std::size_t>(c)].push_back(r);
    }
  }
}

std::size_t MatchIndex::count(Variable v, std::int32_t category) const {
  const auto& lists = postings_[index_of(v)];
  if (category < 0 || static_cast<std::size_t>(category) >= lists.size()) return 0;
  return lists[static_cast<std::size_t>(category)].size();
}

std::vector<std::size_t> MatchIndex::match(const CategoryProfile& partial) const {
  const std::vector<std::size_t>* smallest = nullptr;
  static const std::vector<std::size_t> kEmpty;
  bool constrained = false;
  for (std::size_t v = 0; v < kVariableCount; ++v) {
    const auto c = partial[v];
    if (c < 0) continue;
    constrained = true;
    const auto& lists = postings_[v];
    const auto* list = static_cast<std::size_t>(c) < lists.size() ? &lists[static_cast<std::size_t>(c)] : &kEmpty;
    if (smallest == nullptr || list->size() < smallest->size()) smallest = list;
  }
  std::vector<std::size_t> out;
  if (!constrained) {
    out.resize(profiles_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  for (const auto id : *smallest) {
    const auto& p = profiles_[id];
    bool ok = true;
    for (std::size_t v = 0; v < kVariableCount && ok; ++v) ok = partial[v] < 0 || partial[v] == p[v];
    if (ok) out.push_back(id);
  }
  return out;
}

CategoryProfile partial_profile(const Covariates& partial, const Codebook& codebook) {
  for (const auto v : kAllVariables) {
    if (partial.has(v) && !codebook.contains(v)) {
      throw EncodingError("variable " + std::string(to_string(v)) + " is not used by this model");
    }
  }
  return codebook.profile(partial);
}

std::vector<std::size_t> match_records(const Covariates& partial, std::span<const ClaimRecord> training,
                                       const Codebook& codebook) {
  const auto target = partial_profile(partial, codebook);
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < training.size(); ++r) {
    const auto p = codebook.profile(training[r].covariates);
    bool ok = true;
    for (std::size_t v = 0; v < kVariableCount && ok; ++v) ok = target[v] < 0 || target[v] == p[v];
    if (ok) out.push_back(r);
  }
  return out;
}

double average_eta(std::vector<double> etas) {
  if (etas.empty()) throw Error("average_eta: no values");
  std::sort(etas.begin(), etas.end());
  double sum = 0.0;
  for (const double e : etas) sum += e;
  return sum / static_cast<double>(etas.size());
}

SurvivalCurve average_survival(const BaselineHazard& baseline, std::vector<double> etas) {
  if (etas.empty()) throw Error("average_survival: no values");
  std::sort(etas.begin(), etas.end());
  std::vector<double> rates;
  std::vector<double> weights;
  for (std::size_t i = 0; i < etas.size();) {
    std::size_t j = i;
    while (j < etas.size() && etas[j] == etas[i]) ++j;
    rates.push_back(std::exp(etas[i]));
    weights.push_back(static_cast<double>(j - i));
    i = j;
  }
  const auto total = static_cast<double>(etas.size());
  SurvivalCurve c;
  c.times = baseline.times;
  c.survival.resize(baseline.times.size());
  for (std::size_t k = 0; k < baseline.times.size(); ++k) {
    const double h = baseline.cumulative_hazard[k];
    double s = 0.0;
    for (std::size_t u = 0; u < rates.size(); ++u) s += weights[u] * std::exp(-h * rates[u]);
    c.survival[k] = s / total;
  }
  return c;
}

PartialPredictor::PartialPredictor(const FittedModel& model)
    : model_(&model), index_(model.training_profiles, model.codebook) {
  etas_.reserve(model.training_profiles.size());
  for (const auto& p : model.training_profiles) etas_.push_back(predict_eta(model, p));
}

PartialPredictor::PartialPredictor(const FittedModel& model, std::span<const ClaimRecord> training)
    : model_(&model) {
  std::vector<CategoryProfile> profiles;
  profiles.reserve(training.size());
  for (const auto& r : training) profiles.push_back(model.codebook.profile(r.covariates));
  index_ = MatchIndex(std::move(profiles), model.codebook);
  etas_.reserve(training.size());
  for (const auto& p : index_.profiles()) etas_.push_back(predict_eta(model, p));
}

std::vector<std::size_t> PartialPredictor::match(const Covariates& partial) const {
  return index_.match(partial_profile(partial, model_->codebook));
}

PartialPrediction PartialPredictor::predict_ids(const std::vector<std::size_t>& ids, PartialMethod method) const {
  std::vector<double> etas;
  etas.reserve(ids.size());
  for (const auto id : ids) etas.push_back(etas_[id]);
  PartialPrediction out;
  out.method = method;
  out.match_count = ids.size();
  out.eta = average_eta(etas);
  out.curve = method == PartialMethod::A ? survival_from_eta(model_->baseline, out.eta)
                                         : average_survival(model_->baseline, std::move(etas));
  return out;
}

EmptyMatchError PartialPredictor::empty_match(const CategoryProfile& partial) const {
  std::vector<EmptyMatchError::Constraint> constraints;
  Variable worst = Variable::NOI;
  std::size_t worst_count = SIZE_MAX;
  for (const auto v : kAllVariables) {
    const auto c = partial[index_of(v)];
    if (c < 0) continue;
    const auto n = index_.count(v, c);
    constraints.push_back({v, model_->codebook.find(v)->categories[static_cast<std::size_t>(c)], n});
    if (n < worst_count) {
      worst_count = n;
      worst = v;
    }
  }
  return EmptyMatchError(std::move(constraints), worst);
}

PartialPrediction PartialPredictor::predict(const Covariates& partial, PartialMethod method, bool relax) const {
  auto profile = partial_profile(partial, model_->codebook);
  std::vector<Variable> relaxed;
  while (true) {
    const auto ids = index_.match(profile);
    if (!ids.empty()) {
      auto out = predict_ids(ids, method);
      out.relaxed = std::move(relaxed);
      return out;
    }
    auto err = empty_match(profile);
    if (!relax || err.constraints().empty()) throw err;
    relaxed.push_back(err.most_restrictive());
    profile[index_of(err.most_restrictive())] = -1;
  }
}

SurvivalCurve predict_method_a(const Covariates& partial, const FittedModel& model,
                               std::span<const ClaimRecord> training) {
  return PartialPredictor(model, training).predict(partial, PartialMethod::A).curve;
}

SurvivalCurve predict_method_b(const Covariates& partial, const FittedModel& model,
                               std::span<const ClaimRecord> training) {
  return PartialPredictor(model, training).predict(partial, PartialMethod::B).curve;
}

}  // namespace claimnet
