#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace claimnet {

/// The ten claim covariates, in table order.
enum class Variable : std::uint8_t { NOI, POB, SOI, TOA, AGE, SEX, SIC, OCC, PAY, CPC };

inline constexpr std::size_t kVariableCount = 10;

inline constexpr std::array<Variable, kVariableCount> kAllVariables = {
    Variable::NOI, Variable::POB, Variable::SOI, Variable::TOA, Variable::AGE,
    Variable::SEX, Variable::SIC, Variable::OCC, Variable::PAY, Variable::CPC};

/// How raw tokens of a variable are interpreted and consolidated.
enum class VariableKind {
  DigitCode,   // hierarchical digit string, rolled up by zeroing low-order digits
  CharPrefix,  // postal-region prefix, rolled up by masking trailing characters
  Quartile,    // quantitative value binned at training quartiles
  Label,       // plain label, passed through
};

constexpr std::size_t index_of(Variable v) noexcept { return static_cast<std::size_t>(v); }

std::string_view to_string(Variable v) noexcept;

/// Case-insensitive lookup of a short variable name ("noi", "POB", ...).
std::optional<Variable> parse_variable(std::string_view name) noexcept;

VariableKind kind_of(Variable v) noexcept;

/// Number of characters of a hierarchical code; 0 for non-hierarchical variables.
std::size_t code_length(Variable v) noexcept;

}  // namespace claimnet
