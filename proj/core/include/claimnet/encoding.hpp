#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimnet/claims.hpp"
#include "claimnet/variables.hpp"

namespace claimnet {

inline constexpr std::string_view kUnknownCategory = "UNKNOWN";
inline constexpr std::size_t kDefaultMinCount = 10;

/// Coding of one variable: its consolidated categories and the input nodes
/// they occupy. The last category is always the reserved unknown category.
struct VariableCoding {
  Variable variable = Variable::NOI;
  std::vector<std::string> categories;
  std::vector<std::size_t> counts;                   // training frequency per category
  std::map<std::string, std::string> consolidation;  // raw token -> consolidated label
  std::array<double, 3> boundaries{};                // quartile variables only
  std::size_t offset = 0;                            // input index of categories[0]

  std::size_t unknown_index() const noexcept { return categories.size() - 1; }
  bool operator==(const VariableCoding&) const = default;
};

/// Consolidated category index per variable; -1 where the variable is absent
/// from the record or not part of the codebook.
using CategoryProfile = std::array<std::int32_t, kVariableCount>;

/// Immutable per-variable category inventory and input-node layout.
class Codebook {
 public:
  Codebook() = default;
  /// Takes codings in any order; sorts them by variable and assigns offsets.
  Codebook(std::vector<VariableCoding> variables, std::size_t min_count);

  const std::vector<VariableCoding>& variables() const noexcept { return variables_; }
  const VariableCoding* find(Variable v) const noexcept;
  bool contains(Variable v) const noexcept { return find(v) != nullptr; }
  std::size_t input_count() const noexcept { return input_count_; }
  std::size_t min_count() const noexcept { return min_count_; }

  /// Resolves a raw token to its consolidated category: direct lookup, then
  /// hierarchical rollup, then the unknown category. Throws EncodingError for
  /// tokens malformed for the variable or a variable not in the codebook.
  std::size_t category_index(Variable v, std::string_view raw) const;
  const std::string& consolidate(Variable v, std::string_view raw) const;

  std::size_t input_index(Variable v, std::size_t category) const;

  CategoryProfile profile(const Covariates& covariates) const;

  bool operator==(const Codebook&) const = default;

 private:
  std::vector<VariableCoding> variables_;
  std::array<std::int32_t, kVariableCount> slot_{};  // variable -> position in variables_, -1 if absent
  std::size_t input_count_ = 0;
  std::size_t min_count_ = kDefaultMinCount;
};

/// One rollup step: zero the lowest-order nonzero digit, or mask the last
/// unmasked character of a region prefix. Roots map to themselves.
std::string parent_code(Variable v, std::string_view code);
bool is_root_code(Variable v, std::string_view code);
/// True when `token` has the shape required by a hierarchical variable.
bool is_valid_code(Variable v, std::string_view token) noexcept;

/// Quartile bin in {1,2,3,4}; values on a boundary go to the lower bin.
int quartile_bin(double value, const std::array<double, 3>& boundaries) noexcept;

/// Nearest-rank 25/50/75% quantiles.
std::array<double, 3> empirical_quartiles(std::vector<double> values);

/// Builds the codebook over the variables in `subset` that occur in at least
/// one record. Hierarchical codes with fewer than `min_count` occurrences are
/// pooled into their parents until the pool is large enough or the root is reached.
Codebook build_codebook(std::span<const ClaimRecord> records, std::size_t min_count = kDefaultMinCount,
                        std::span<const Variable> subset = kAllVariables);

/// Dense one-hot input vector of length input_count() (bias node excluded).
std::vector<double> encode(const Covariates& covariates, const Codebook& codebook);
inline std::vector<double> encode(const ClaimRecord& record, const Codebook& codebook) {
  return encode(record.covariates, codebook);
}

/// Indices of the active (value 1) input nodes, ascending.
std::vector<std::uint32_t> active_inputs(const CategoryProfile& profile, const Codebook& codebook);

}  // namespace claimnet
