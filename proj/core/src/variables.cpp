#include "claimnet/variables.hpp"

#include <algorithm>
#include <cctype>

namespace claimnet {

namespace {

constexpr std::array<std::string_view, kVariableCount> kNames = {
    "NOI", "POB", "SOI", "TOA", "AGE", "SEX", "SIC", "OCC", "PAY", "CPC"};

}  // namespace

std::string_view to_string(Variable v) noexcept { return kNames[index_of(v)]; }

std::optional<Variable> parse_variable(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    const auto& candidate = kNames[i];
    if (candidate.size() != name.size()) continue;
    const bool same = std::equal(candidate.begin(), candidate.end(), name.begin(), [](char a, char b) {
      return a == std::toupper(static_cast<unsigned char>(b));
    });
    if (same) return kAllVariables[i];
  }
  return std::nullopt;
}

VariableKind kind_of(Variable v) noexcept {
  switch (v) {
    case Variable::NOI:
    case Variable::POB:
    case Variable::SOI:
    case Variable::TOA:
    case Variable::SIC:
    case Variable::OCC:
      return VariableKind::DigitCode;
    case Variable::CPC:
      return VariableKind::CharPrefix;
    case Variable::AGE:
    case Variable::PAY:
      return VariableKind::Quartile;
    case Variable::SEX:
      return VariableKind::Label;
  }
  return VariableKind::Label;
}

std::size_t code_length(Variable v) noexcept {
  switch (v) {
    case Variable::NOI:
    case Variable::POB:
    case Variable::SOI:
    case Variable::TOA:
      return 5;
    case Variable::SIC:
    case Variable::OCC:
      return 4;
    case Variable::CPC:
      return 3;
    default:
      return 0;
  }
}

}  // namespace claimnet
