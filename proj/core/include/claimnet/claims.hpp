#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimnet/variables.hpp"

namespace claimnet {

using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD).
std::optional<Date> parse_date(std::string_view text) noexcept;
std::string format_date(Date d);

/// A sparse assignment of raw tokens to (a subset of) the ten variables.
/// Doubles as the partial input of a prediction request.
class Covariates {
 public:
  bool has(Variable v) const noexcept { return values_[index_of(v)].has_value(); }
  const std::optional<std::string>& get(Variable v) const noexcept { return values_[index_of(v)]; }
  void set(Variable v, std::string token) { values_[index_of(v)] = std::move(token); }
  void erase(Variable v) noexcept { values_[index_of(v)].reset(); }
  std::size_t count() const noexcept;

  bool operator==(const Covariates&) const = default;

 private:
  std::array<std::optional<std::string>, kVariableCount> values_;
};

struct ClaimRecord {
  Covariates covariates;
  double duration_weeks = 0.0;
  bool event = false;  // true: claim closed; false: still open (censored)
  Date open_date{};

  bool operator==(const ClaimRecord&) const = default;
};

/// Reads the delimited claims format: a header naming the columns
/// (noi, pob, soi, toa, age, sex, sic, occ, pay, cpc, duration_weeks, event,
/// open_date) in any order, then one record per line. Empty covariate cells
/// mean "not recorded". Errors carry the offending line number.
std::vector<ClaimRecord> read_claims(std::istream& in);
std::vector<ClaimRecord> read_claims_file(const std::string& path);

void write_claims(std::ostream& out, std::span<const ClaimRecord> records);
void write_claims_file(const std::string& path, std::span<const ClaimRecord> records);

/// Drops records with zero duration (no time loss).
std::vector<ClaimRecord> modelling_extract(std::span<const ClaimRecord> records);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Column view of durations and event flags (1 = closed, 0 = censored).
struct Outcomes {
  std::vector<double> durations;
  std::vector<std::uint8_t> events;
};

Outcomes outcomes_of(std::span<const ClaimRecord> records);

}  // namespace claimnet
