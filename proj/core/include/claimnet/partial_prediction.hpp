#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "claimnet/claims.hpp"
#include "claimnet/coxnet.hpp"
#include "claimnet/encoding.hpp"
#include "claimnet/errors.hpp"
#include "claimnet/survival.hpp"

namespace claimnet {

/// Averaging rule for partial inputs: A averages prediction terms over the
/// matching records, B averages their survival curves.
enum class PartialMethod { A, B };

/// No training record matches a partial input.
class EmptyMatchError : public Error {
 public:
  struct Constraint {
    Variable variable;
    std::string category;  // consolidated
    std::size_t matches;   // training records matching this constraint alone
  };

  EmptyMatchError(std::vector<Constraint> constraints, Variable most_restrictive);

  const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
  Variable most_restrictive() const noexcept { return most_restrictive_; }

 private:
  std::vector<Constraint> constraints_;
  Variable most_restrictive_;
};

/// Inverted index (variable, consolidated category) -> training record ids.
/// Read-only after construction.
class MatchIndex {
 public:
  MatchIndex() = default;
  MatchIndex(std::vector<CategoryProfile> profiles, const Codebook& codebook);

  std::size_t size() const noexcept { return profiles_.size(); }
  const std::vector<CategoryProfile>& profiles() const noexcept { return profiles_; }

  /// Ids (ascending) of records equal to `partial` on every entry that is
  /// not -1.
  std::vector<std::size_t> match(const CategoryProfile& partial) const;
  std::size_t count(Variable v, std::int32_t category) const;

 private:
  std::vector<CategoryProfile> profiles_;
  std::array<std::vector<std::vector<std::size_t>>, kVariableCount> postings_;
};

/// Consolidated profile of a partial input. Throws EncodingError for a
/// variable the codebook does not contain or a malformed token.
CategoryProfile partial_profile(const Covariates& partial, const Codebook& codebook);

std::vector<std::size_t> match_records(const Covariates& partial, std::span<const ClaimRecord> training,
                                       const Codebook& codebook);

struct PartialPrediction {
  PartialMethod method = PartialMethod::A;
  SurvivalCurve curve;
  double eta = 0.0;  // average prediction term over the matches
  std::size_t match_count = 0;
  std::vector<Variable> relaxed;  // constraints dropped to obtain a match
};

/// Serves partial-input predictions from a fitted model and the consolidated
/// profiles of its training records.
class PartialPredictor {
 public:
  explicit PartialPredictor(const FittedModel& model);
  PartialPredictor(const FittedModel& model, std::span<const ClaimRecord> training);

  /// With `relax`, an empty match set is retried after dropping the most
  /// restrictive constraint, repeatedly; otherwise EmptyMatchError.
  PartialPrediction predict(const Covariates& partial, PartialMethod method, bool relax = false) const;

  std::vector<std::size_t> match(const Covariates& partial) const;
  const std::vector<double>& training_etas() const noexcept { return etas_; }
  const FittedModel& model() const noexcept { return *model_; }

 private:
  PartialPrediction predict_ids(const std::vector<std::size_t>& ids, PartialMethod method) const;
  EmptyMatchError empty_match(const CategoryProfile& partial) const;

  const FittedModel* model_;
  MatchIndex index_;
  std::vector<double> etas_;
};

/// Mean of the prediction terms, summed in sorted order so that the result
/// does not depend on the order of the inputs.
double average_eta(std::vector<double> etas);

/// Pointwise mean of exp(-H0(t) exp(eta_i)) over the baseline time grid.
SurvivalCurve average_survival(const BaselineHazard& baseline, std::vector<double> etas);

SurvivalCurve predict_method_a(const Covariates& partial, const FittedModel& model,
                               std::span<const ClaimRecord> training);
SurvivalCurve predict_method_b(const Covariates& partial, const FittedModel& model,
                               std::span<const ClaimRecord> training);

}  // namespace claimnet
