#include "claimnet/encoding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "claimnet/errors.hpp"

namespace claimnet {

namespace {

constexpr std::array<std::string_view, 4> kQuartileLabels = {"Q1", "Q2", "Q3", "Q4"};

bool parse_number(std::string_view s, double& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size() && std::isfinite(out);
}

// Number of meaningful characters before the all-zero (or all-masked) tail.
std::size_t specificity(Variable v, std::string_view code) {
  const char blank = kind_of(v) == VariableKind::CharPrefix ? '*' : '0';
  std::size_t n = code.size();
  while (n > 0 && code[n - 1] == blank) --n;
  return n;
}

bool is_hierarchical(Variable v) {
  const auto k = kind_of(v);
  return k == VariableKind::DigitCode || k == VariableKind::CharPrefix;
}

VariableCoding consolidate_codes(Variable v, const std::map<std::string, std::size_t>& raw_counts,
                                 std::size_t min_count) {
  std::map<std::string, std::size_t> pooled(raw_counts.begin(), raw_counts.end());
  std::map<std::string, std::string> redirect;
  const std::size_t len = code_length(v);
  for (std::size_t level = len; level >= 1; --level) {
    std::vector<std::string> small;
    for (const auto& [code, n] : pooled) {
      if (specificity(v, code) == level && n < min_count) small.push_back(code);
    }
    for (const auto& code : small) {
      auto parent = parent_code(v, code);
      pooled[parent] += pooled[code];
      redirect[code] = std::move(parent);
      pooled.erase(code);
    }
  }

  VariableCoding coding;
  coding.variable = v;
  for (const auto& [code, n] : pooled) {
    coding.categories.push_back(code);
    coding.counts.push_back(n);
  }
  for (const auto& [raw, n] : raw_counts) {
    std::string target = raw;
    while (true) {
      const auto it = redirect.find(target);
      if (it == redirect.end()) break;
      target = it->second;
    }
    coding.consolidation.emplace(raw, std::move(target));
  }
  return coding;
}

}  // namespace

bool is_valid_code(Variable v, std::string_view token) noexcept {
  const auto len = code_length(v);
  if (len == 0 || token.size() != len) return false;
  if (kind_of(v) == VariableKind::DigitCode) {
    return std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
  }
  bool masked = false;
  for (const char c : token) {
    if (c == '*') {
      masked = true;
    } else if (masked || !std::isalnum(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return true;
}

bool is_root_code(Variable v, std::string_view code) { return specificity(v, code) == 0; }

std::string parent_code(Variable v, std::string_view code) {
  std::string out(code);
  const auto n = specificity(v, code);
  if (n > 0) out[n - 1] = kind_of(v) == VariableKind::CharPrefix ? '*' : '0';
  return out;
}

int quartile_bin(double value, const std::array<double, 3>& b) noexcept {
  if (value <= b[0]) return 1;
  if (value <= b[1]) return 2;
  if (value <= b[2]) return 3;
  return 4;
}

std::array<double, 3> empirical_quartiles(std::vector<double> values) {
  if (values.empty()) throw Error("empirical_quartiles: no values");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  std::array<double, 3> q{};
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto rank = (k * n + 3) / 4;  // ceil(k n / 4)
    q[k - 1] = values[std::max<std::size_t>(rank, 1) - 1];
  }
  return q;
}

Codebook::Codebook(std::vector<VariableCoding> variables, std::size_t min_count)
    : variables_(std::move(variables)), min_count_(min_count) {
  std::sort(variables_.begin(), variables_.end(),
            [](const auto& a, const auto& b) { return a.variable < b.variable; });
  slot_.fill(-1);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    auto& vc = variables_[i];
    if (slot_[index_of(vc.variable)] != -1) {
      throw Error("codebook lists variable " + std::string(to_string(vc.variable)) + " twice");
    }
    if (vc.categories.empty() || vc.categories.back() != kUnknownCategory) {
      throw Error("codebook variable " + std::string(to_string(vc.variable)) + " lacks the unknown category");
    }
    if (vc.counts.size() != vc.categories.size()) {
      throw Error("codebook variable " + std::string(to_string(vc.variable)) + " has mismatched counts");
    }
    slot_[index_of(vc.variable)] = static_cast<std::int32_t>(i);
    vc.offset = offset;
    offset += vc.categories.size();
  }
  input_count_ = offset;
}

const VariableCoding* Codebook::find(Variable v) const noexcept {
  const auto s = slot_[index_of(v)];
  return s < 0 ? nullptr : &variables_[static_cast<std::size_t>(s)];
}

std::size_t Codebook::category_index(Variable v, std::string_view raw) const {
  const auto* vc = find(v);
  if (vc == nullptr) {
    throw EncodingError("variable " + std::string(to_string(v)) + " is not part of the codebook");
  }
  auto index_of_label = [&](std::string_view label) -> std::optional<std::size_t> {
    const auto end = vc->categories.end() - 1;
    const auto it = std::lower_bound(vc->categories.begin(), end, label);
    if (it != end && *it == label) return static_cast<std::size_t>(it - vc->categories.begin());
    return std::nullopt;
  };

  switch (kind_of(v)) {
    case VariableKind::Quartile: {
      double value = 0;
      if (!parse_number(raw, value)) {
        throw EncodingError(std::string(to_string(v)) + " value '" + std::string(raw) + "' is not a number");
      }
      return static_cast<std::size_t>(quartile_bin(value, vc->boundaries) - 1);
    }
    case VariableKind::Label: {
      const auto it = vc->consolidation.find(std::string(raw));
      if (it != vc->consolidation.end()) return *index_of_label(it->second);
      return vc->unknown_index();
    }
    case VariableKind::DigitCode:
    case VariableKind::CharPrefix: {
      if (!is_valid_code(v, raw)) {
        throw EncodingError(std::string(to_string(v)) + " code '" + std::string(raw) + "' is malformed (expected " +
                            std::to_string(code_length(v)) + " characters)");
      }
      std::string code(raw);
      while (true) {
        if (const auto it = vc->consolidation.find(code); it != vc->consolidation.end()) {
          return *index_of_label(it->second);
        }
        if (const auto idx = index_of_label(code)) return *idx;
        if (is_root_code(v, code)) return vc->unknown_index();
        code = parent_code(v, code);
      }
    }
  }
  return vc->unknown_index();
}

const std::string& Codebook::consolidate(Variable v, std::string_view raw) const {
  return find(v)->categories[category_index(v, raw)];
}

std::size_t Codebook::input_index(Variable v, std::size_t category) const {
  const auto* vc = find(v);
  if (vc == nullptr || category >= vc->categories.size()) {
    throw EncodingError("no input node for " + std::string(to_string(v)) + " category " + std::to_string(category));
  }
  return vc->offset + category;
}

CategoryProfile Codebook::profile(const Covariates& covariates) const {
  CategoryProfile p;
  p.fill(-1);
  for (const auto& vc : variables_) {
    if (const auto& token = covariates.get(vc.variable)) {
      p[index_of(vc.variable)] = static_cast<std::int32_t>(category_index(vc.variable, *token));
    }
  }
  return p;
}

Codebook build_codebook(std::span<const ClaimRecord> records, std::size_t min_count,
                        std::span<const Variable> subset) {
  if (records.empty()) throw Error("build_codebook: no records");
  if (min_count == 0) throw Error("build_codebook: min_count must be positive");

  std::vector<VariableCoding> codings;
  for (const auto v : subset) {
    std::map<std::string, std::size_t> raw_counts;
    std::vector<double> values;
    for (std::size_t r = 0; r < records.size(); ++r) {
      const auto& token = records[r].covariates.get(v);
      if (!token) continue;
      const auto where = "record " + std::to_string(r + 1) + ", variable " + std::string(to_string(v)) + ": ";
      if (is_hierarchical(v) && !is_valid_code(v, *token)) {
        throw DataError(where + "code '" + *token + "' is not a " + std::to_string(code_length(v)) +
                        (kind_of(v) == VariableKind::DigitCode ? "-digit code" : "-character region code"));
      }
      if (kind_of(v) == VariableKind::Quartile) {
        double x = 0;
        if (!parse_number(*token, x)) throw DataError(where + "'" + *token + "' is not a number");
        values.push_back(x);
      } else {
        ++raw_counts[*token];
      }
    }
    if (raw_counts.empty() && values.empty()) continue;

    VariableCoding coding;
    if (kind_of(v) == VariableKind::Quartile) {
      coding.variable = v;
      coding.boundaries = empirical_quartiles(values);
      const auto& b = coding.boundaries;
      if (!(b[0] < b[1] && b[1] < b[2])) {
        throw DataError("variable " + std::string(to_string(v)) +
                        ": quartile boundaries are not distinct; too few distinct values");
      }
      coding.counts.assign(4, 0);
      for (const double x : values) ++coding.counts[static_cast<std::size_t>(quartile_bin(x, b) - 1)];
      coding.categories.assign(kQuartileLabels.begin(), kQuartileLabels.end());
    } else if (kind_of(v) == VariableKind::Label) {
      coding.variable = v;
      for (const auto& [label, n] : raw_counts) {
        coding.categories.push_back(label);
        coding.counts.push_back(n);
        coding.consolidation.emplace(label, label);
      }
    } else {
      coding = consolidate_codes(v, raw_counts, min_count);
    }
    coding.categories.emplace_back(kUnknownCategory);
    coding.counts.push_back(0);
    codings.push_back(std::move(coding));
  }
  return Codebook(std::move(codings), min_count);
}

std::vector<double> encode(const Covariates& covariates, const Codebook& codebook) {
  std::vector<double> x(codebook.input_count(), 0.0);
  for (const auto idx : active_inputs(codebook.profile(covariates), codebook)) x[idx] = 1.0;
  return x;
}

std::vector<std::uint32_t> active_inputs(const CategoryProfile& profile, const Codebook& codebook) {
  std::vector<std::uint32_t> active;
  for (const auto& vc : codebook.variables()) {
    const auto c = profile[index_of(vc.variable)];
    if (c >= 0) active.push_back(static_cast<std::uint32_t>(vc.offset + static_cast<std::size_t>(c)));
  }
  return active;
}

}  // namespace claimnet
