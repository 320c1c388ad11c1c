#include "claimnet/claims.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "claimnet/errors.hpp"

namespace claimnet {

namespace {

enum class Column { Covariate, Duration, Event, OpenDate, Ignored };

struct ColumnSpec {
  Column kind = Column::Ignored;
  Variable variable = Variable::NOI;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool parse_event(std::string_view s, bool& out) {
  const auto v = lower(s);
  if (v == "1" || v == "true" || v == "closed") {
    out = true;
    return true;
  }
  if (v == "0" || v == "false" || v == "open") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) noexcept {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto* first = text.data() + pos;
    const auto r = std::from_chars(first, first + len, out);
    return r.ec == std::errc{} && r.ptr == first + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::size_t Covariates::count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

std::string format_double(double value) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

std::vector<ClaimRecord> read_claims(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<ColumnSpec> columns;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DataError("claims file is empty");

  bool have_duration = false;
  bool have_event = false;
  bool have_date = false;
  for (const auto field : split_fields(line)) {
    const auto name = lower(field);
    ColumnSpec spec;
    if (auto v = parse_variable(name)) {
      spec = {Column::Covariate, *v};
    } else if (name == "duration_weeks") {
      spec.kind = Column::Duration;
      have_duration = true;
    } else if (name == "event") {
      spec.kind = Column::Event;
      have_event = true;
    } else if (name == "open_date") {
      spec.kind = Column::OpenDate;
      have_date = true;
    }
    columns.push_back(spec);
  }
  if (!have_duration || !have_event || !have_date) {
    throw DataError("header must name duration_weeks, event and open_date columns", line_no);
  }

  std::vector<ClaimRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != columns.size()) {
      throw DataError("expected " + std::to_string(columns.size()) + " fields, found " +
                          std::to_string(fields.size()),
                      line_no);
    }
    ClaimRecord rec;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto f = fields[c];
      switch (columns[c].kind) {
        case Column::Covariate:
          if (!f.empty()) rec.covariates.set(columns[c].variable, std::string(f));
          break;
        case Column::Duration: {
          double v = 0;
          const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
          if (r.ec != std::errc{} || r.ptr != f.data() + f.size() || !std::isfinite(v) || v < 0) {
            throw DataError("duration_weeks must be a nonnegative number, got '" + std::string(f) + "'",
                            line_no);
          }
          rec.duration_weeks = v;
          break;
        }
        case Column::Event:
          if (!parse_event(f, rec.event)) {
            throw DataError("event must be 0/1 or true/false, got '" + std::string(f) + "'", line_no);
          }
          break;
        case Column::OpenDate: {
          const auto d = parse_date(f);
          if (!d) throw DataError("open_date must be YYYY-MM-DD, got '" + std::string(f) + "'", line_no);
          rec.open_date = *d;
          break;
        }
        case Column::Ignored:
          break;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ClaimRecord> read_claims_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open claims file '" + path + "'");
  return read_claims(in);
}

void write_claims(std::ostream& out, std::span<const ClaimRecord> records) {
  for (const auto v : kAllVariables) out << lower(to_string(v)) << ',';
  out << "duration_weeks,event,open_date\n";
  for (const auto& r : records) {
    for (const auto v : kAllVariables) {
      if (const auto& t = r.covariates.get(v)) out << *t;
      out << ',';
    }
    out << format_double(r.duration_weeks) << ',' << (r.event ? 1 : 0) << ',' << format_date(r.open_date) << '\n';
  }
}

void write_claims_file(const std::string& path, std::span<const ClaimRecord> records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write claims file '" + path + "'");
  write_claims(out, records);
}

std::vector<ClaimRecord> modelling_extract(std::span<const ClaimRecord> records) {
  std::vector<ClaimRecord> out;
  out.reserve(records.size());
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const ClaimRecord& r) { return r.duration_weeks > 0; });
  return out;
}

Outcomes outcomes_of(std::span<const ClaimRecord> records) {
  Outcomes o;
  o.durations.reserve(records.size());
  o.events.reserve(records.size());
  for (const auto& r : records) {
    o.durations.push_back(r.duration_weeks);
    o.events.push_back(r.event);
  }
  return o;
}

}  // namespace claimnet
