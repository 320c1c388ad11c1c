#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "claimnet/claims.hpp"

namespace test {

inline claimnet::ClaimRecord record(std::initializer_list<std::pair<claimnet::Variable, std::string>> covariates,
                                    double duration = 1.0, bool event = true) {
  claimnet::ClaimRecord r;
  for (const auto& [v, token] : covariates) r.covariates.set(v, token);
  r.duration_weeks = duration;
  r.event = event;
  r.open_date = claimnet::Date{std::chrono::year{1999} / 1 / 1};
  return r;
}

inline std::vector<claimnet::ClaimRecord> repeat(const claimnet::ClaimRecord& r, std::size_t n) {
  return std::vector<claimnet::ClaimRecord>(n, r);
}

}  // namespace test
