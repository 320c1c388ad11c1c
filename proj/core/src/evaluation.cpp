#include "claimnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "claimnet/errors.hpp"
#include "claimnet/partial_prediction.hpp"

namespace claimnet {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDaysPerYear = 365.25;

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) throw Error("prediction terms, durations and events differ in length");
}

double nearest_rank(const std::vector<double>& sorted, double p) {
  const auto n = sorted.size();
  auto r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
  r = std::clamp<std::size_t>(r, 1, n);
  return sorted[r - 1];
}

const VariableCoding& require(const Codebook& codebook, Variable v) {
  const auto* coding = codebook.find(v);
  if (!coding) throw Error("variable " + std::string(to_string(v)) + " is not part of the model");
  return *coding;
}

struct Subset {
  std::vector<double> durations;
  std::vector<std::uint8_t> events;
  void add(const ClaimRecord& r) {
    durations.push_back(r.duration_weeks);
    events.push_back(r.event ? 1 : 0);
  }
  std::size_t size() const noexcept { return durations.size(); }
};

std::optional<double> km_median(const Subset& s) {
  return curve_quantile(kaplan_meier(s.durations, s.events), 0.5);
}

std::string csv_cell(std::optional<double> v) { return v ? format_double(*v) : std::string{}; }

json json_value(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<std::size_t> rank_groups(std::size_t n, std::size_t groups) {
  if (groups == 0) throw Error("rank_groups: group count must be positive");
  std::vector<std::size_t> out(n);
  std::size_t g = 0;
  for (std::size_t r = 1; r <= n; ++r) {
    // r > ceil((g+1) n / groups)  <=>  (r-1) groups >= (g+1) n
    while (g + 1 < groups && (r - 1) * groups >= (g + 1) * n) ++g;
    out[r - 1] = g;
  }
  return out;
}

std::vector<std::size_t> order_by_predicted_duration(std::span<const double> etas) {
  std::vector<std::size_t> ids(etas.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return etas[a] > etas[b]; });
  return ids;
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats b;
  b.n = values.size();
  if (values.empty()) return b;
  std::sort(values.begin(), values.end());
  b.min = values.front();
  b.max = values.back();
  b.q1 = nearest_rank(values, 0.25);
  b.median = nearest_rank(values, 0.5);
  b.q3 = nearest_rank(values, 0.75);
  return b;
}

std::vector<PredictionGroup> prediction_groups(std::span<const double> etas, std::span<const double> durations,
                                               std::span<const std::uint8_t> events, std::size_t groups) {
  check_lengths(etas.size(), durations.size(), events.size());
  const auto closed = static_cast<std::size_t>(std::count(events.begin(), events.end(), std::uint8_t{1}));
  if (closed < groups) {
    throw Error("need at least " + std::to_string(groups) + " closed claims, have " + std::to_string(closed));
  }
  const auto order = order_by_predicted_duration(etas);
  const auto group_of = rank_groups(order.size(), groups);
  std::vector<PredictionGroup> out(groups);
  std::vector<std::vector<double>> closed_durations(groups);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto i = order[r];
    auto& g = out[group_of[r]];
    if (g.records == 0) {
      g.eta_min = g.eta_max = etas[i];
    } else {
      g.eta_min = std::min(g.eta_min, etas[i]);
      g.eta_max = std::max(g.eta_max, etas[i]);
    }
    ++g.records;
    if (events[i]) closed_durations[group_of[r]].push_back(durations[i]);
  }
  for (std::size_t g = 0; g < groups; ++g) out[g].closed = box_stats(std::move(closed_durations[g]));
  return out;
}

QuintileTable quintile_table(std::span<const double> etas, std::span<const double> durations,
                             std::span<const std::uint8_t> events) {
  check_lengths(etas.size(), durations.size(), events.size());
  std::vector<std::size_t> closed;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (events[i]) closed.push_back(i);
  }
  if (closed.size() < 25) throw Error("quintile table needs at least 25 closed claims");
  const auto n = closed.size();
  auto by_prediction = closed;
  std::stable_sort(by_prediction.begin(), by_prediction.end(),
                   [&](std::size_t a, std::size_t b) { return etas[a] > etas[b]; });
  auto by_duration = closed;
  std::stable_sort(by_duration.begin(), by_duration.end(),
                   [&](std::size_t a, std::size_t b) { return durations[a] < durations[b]; });
  const auto group_of = rank_groups(n, 5);
  std::vector<std::size_t> predicted(etas.size()), actual(etas.size());
  for (std::size_t r = 0; r < n; ++r) {
    predicted[by_prediction[r]] = group_of[r];
    actual[by_duration[r]] = group_of[r];
  }
  std::array<std::array<std::size_t, 5>, 5> counts{};
  for (const auto i : closed) ++counts[predicted[i]][actual[i]];
  QuintileTable table{};
  for (std::size_t row = 0; row < 5; ++row) {
    const auto total = std::accumulate(counts[row].begin(), counts[row].end(), std::size_t{0});
    for (std::size_t col = 0; col < 5; ++col) {
      table[row][col] = static_cast<double>(counts[row][col]) / static_cast<double>(total);
    }
  }
  return table;
}

const char* to_string(Summary s) noexcept {
  switch (s) {
    case Summary::Mean: return "mean";
    case Summary::Q1: return "q1";
    case Summary::Median: return "median";
    case Summary::Q3: return "q3";
  }
  return "?";
}

std::optional<Summary> parse_summary(std::string_view text) noexcept {
  for (const auto s : {Summary::Mean, Summary::Q1, Summary::Median, Summary::Q3}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

std::optional<double> curve_summary(const SurvivalCurve& curve, Summary s) {
  switch (s) {
    case Summary::Mean: return curve_mean(curve);
    case Summary::Q1: return curve_quantile(curve, 0.25);
    case Summary::Median: return curve_quantile(curve, 0.5);
    case Summary::Q3: return curve_quantile(curve, 0.75);
  }
  return std::nullopt;
}

const std::vector<double>& RecordSummaries::of(Summary s) const noexcept {
  switch (s) {
    case Summary::Mean: return mean;
    case Summary::Q1: return q1;
    case Summary::Median: return median;
    case Summary::Q3: return q3;
  }
  return mean;
}

RecordSummaries record_summaries(const BaselineHazard& baseline, std::span<const double> etas) {
  RecordSummaries out;
  for (auto* v : {&out.mean, &out.q1, &out.median, &out.q3}) v->reserve(etas.size());
  for (const auto eta : etas) {
    const auto curve = survival_from_eta(baseline, eta);
    out.mean.push_back(curve_mean(curve));
    out.q1.push_back(curve_quantile(curve, 0.25).value_or(kNaN));
    out.median.push_back(curve_quantile(curve, 0.5).value_or(kNaN));
    out.q3.push_back(curve_quantile(curve, 0.75).value_or(kNaN));
  }
  return out;
}

std::vector<WindowPoint> moving_window_calibration(std::span<const double> predicted,
                                                   std::span<const double> durations,
                                                   std::span<const std::uint8_t> events, Summary summary,
                                                   const WindowOptions& options) {
  check_lengths(predicted.size(), durations.size(), events.size());
  if (predicted.size() < 50) throw Error("moving-window calibration needs at least 50 records");
  if (!(options.width > 0.0) || !(options.step > 0.0)) throw Error("window width and step must be positive");
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (std::isfinite(predicted[i])) ids.push_back(i);
  }
  if (ids.empty()) return {};
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return predicted[a] < predicted[b]; });
  const double lo = predicted[ids.front()];
  const double hi = predicted[ids.back()];
  const double half = options.width / 2.0;

  std::vector<WindowPoint> out;
  std::size_t begin = 0;
  std::size_t end = 0;
  for (std::size_t k = 0;; ++k) {
    const double center = lo + static_cast<double>(k) * options.step;
    if (center > hi) break;
    // window (center - half, center + half]
    while (begin < ids.size() && predicted[ids[begin]] <= center - half) ++begin;
    while (end < ids.size() && predicted[ids[end]] <= center + half) ++end;
    const std::size_t count = end > begin ? end - begin : 0;
    if (count < options.min_records) continue;
    std::vector<double> d;
    std::vector<std::uint8_t> e;
    for (std::size_t r = begin; r < end; ++r) {
      d.push_back(durations[ids[r]]);
      e.push_back(events[ids[r]]);
    }
    const auto actual = curve_summary(kaplan_meier(d, e), summary);
    if (!actual) continue;
    out.push_back({center, count, *actual});
  }
  return out;
}

InteractionReport interaction_analysis(std::span<const ClaimRecord> records, const Codebook& codebook,
                                       Variable code_var, Variable group_var, std::size_t min_per_group,
                                       double alpha) {
  const auto& codes = require(codebook, code_var);
  const auto& group_coding = require(codebook, group_var);
  std::vector<std::size_t> group_categories;
  for (std::size_t c = 0; c < group_coding.categories.size(); ++c) {
    if (c != group_coding.unknown_index() && group_coding.counts[c] > 0) group_categories.push_back(c);
  }
  if (group_categories.size() != 2) {
    throw Error("interaction analysis: " + std::string(to_string(group_var)) + " must have exactly two categories");
  }
  InteractionReport report;
  report.groups = {group_coding.categories[group_categories[0]], group_coding.categories[group_categories[1]]};

  std::vector<std::array<Subset, 2>> cells(codes.categories.size());
  for (const auto& r : records) {
    const auto profile = codebook.profile(r.covariates);
    const auto c = profile[index_of(code_var)];
    const auto g = profile[index_of(group_var)];
    if (c < 0 || g < 0) continue;
    for (std::size_t k = 0; k < 2; ++k) {
      if (static_cast<std::size_t>(g) == group_categories[k]) cells[static_cast<std::size_t>(c)][k].add(r);
    }
  }
  for (std::size_t c = 0; c < codes.categories.size(); ++c) {
    auto& cell = cells[c];
    if (cell[0].size() == 0 && cell[1].size() == 0) continue;
    if (cell[0].size() < min_per_group || cell[1].size() < min_per_group) {
      ++report.omitted;
      continue;
    }
    InteractionRow row;
    row.code = codes.categories[c];
    row.n = {cell[0].size(), cell[1].size()};
    try {
      const auto lr = log_rank(cell[0].durations, cell[0].events, cell[1].durations, cell[1].events);
      row.statistic = lr.statistic;
      row.p_value = lr.p_value;
    } catch (const Error&) {
      // no closed claims in this code: nothing to compare
    }
    const auto inf = std::numeric_limits<double>::infinity();
    const auto curve_a = kaplan_meier(cell[0].durations, cell[0].events);
    const auto curve_b = kaplan_meier(cell[1].durations, cell[1].events);
    const double med_a = curve_quantile(curve_a, 0.5).value_or(inf);
    const double med_b = curve_quantile(curve_b, 0.5).value_or(inf);
    const double mean_a = curve_mean(curve_a);
    const double mean_b = curve_mean(curve_b);
    if (med_a != med_b) {
      row.favored = med_a > med_b ? report.groups[0] : report.groups[1];
    } else if (mean_a != mean_b) {
      row.favored = mean_a > mean_b ? report.groups[0] : report.groups[1];
    } else {
      row.favored = "tie";
    }
    row.significant = row.p_value <= alpha;
    ++report.qualifying;
    report.significant += row.significant ? 1 : 0;
    report.rows.push_back(std::move(row));
  }
  return report;
}

KendallResult kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("kendall: samples differ in length");
  KendallResult r;
  r.n = x.size();
  const auto n = static_cast<double>(r.n);
  if (r.n < 2) {
    r.tau = kNaN;
    return r;
  }
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) s += sign(x[i] - x[j]) * sign(y[i] - y[j]);
  }
  struct TieSums {
    double pairs = 0.0, v = 0.0, t1 = 0.0, t2 = 0.0;
  };
  auto ties = [](std::span<const double> v) {
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    TieSums t;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const auto k = static_cast<double>(j - i);
      t.pairs += k * (k - 1) / 2;
      t.v += k * (k - 1) * (2 * k + 5);
      t.t1 += k * (k - 1);
      t.t2 += k * (k - 1) * (k - 2);
      i = j;
    }
    return t;
  };
  const auto tx = ties(x);
  const auto ty = ties(y);
  const double n0 = n * (n - 1) / 2;
  const double denom = std::sqrt((n0 - tx.pairs) * (n0 - ty.pairs));
  r.tau = denom > 0 ? s / denom : kNaN;
  double var = (n * (n - 1) * (2 * n + 5) - tx.v - ty.v) / 18 + tx.t1 * ty.t1 / (2 * n * (n - 1));
  if (r.n > 2) var += tx.t2 * ty.t2 / (9 * n * (n - 1) * (n - 2));
  if (var > 0) {
    r.z = s / std::sqrt(var);
    r.p_value = std::erfc(std::abs(r.z) / std::sqrt(2.0));
  }
  return r;
}

ConcordanceReport concordance_from_differences(std::vector<DifferenceRow> rows) {
  if (rows.size() < 3) {
    throw Error("concordance needs at least 3 qualifying codes, have " + std::to_string(rows.size()));
  }
  ConcordanceReport report;
  std::vector<double> actual, predicted;
  for (const auto& r : rows) {
    actual.push_back(r.actual);
    predicted.push_back(r.predicted);
    if ((r.actual > 0) == (r.predicted > 0) && r.predicted != 0.0) ++report.sign_agreements;
  }
  report.kendall = kendall_tau_b(predicted, actual);
  report.rows = std::move(rows);
  return report;
}

namespace {

struct CodeGroupCells {
  const VariableCoding* codes;
  const VariableCoding* groups;
  std::vector<std::vector<Subset>> cells;  // [code][group]
};

CodeGroupCells tabulate(const Codebook& codebook, std::span<const ClaimRecord> records, Variable code_var,
                        Variable group_var) {
  if (kind_of(code_var) == VariableKind::Quartile) {
    throw Error("code variable " + std::string(to_string(code_var)) + " must be categorical");
  }
  CodeGroupCells t{&require(codebook, code_var), &require(codebook, group_var), {}};
  t.cells.assign(t.codes->categories.size(), std::vector<Subset>(t.groups->categories.size()));
  for (const auto& r : records) {
    const auto profile = codebook.profile(r.covariates);
    const auto c = profile[index_of(code_var)];
    const auto g = profile[index_of(group_var)];
    if (c < 0 || g < 0) continue;
    t.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(g)].add(r);
  }
  return t;
}

std::optional<double> method_a_median(const PartialPredictor& predictor, Variable code_var, const std::string& code,
                                      Variable group_var, const std::string& group) {
  Covariates partial;
  partial.set(code_var, code);
  partial.set(group_var, group);
  const auto p = predictor.predict(partial, PartialMethod::A);
  return curve_quantile(p.curve, 0.5);
}

}  // namespace

ConcordanceReport sex_difference_concordance(const FittedModel& model, std::span<const ClaimRecord> records,
                                             Variable code_var, std::size_t min_per_group) {
  const auto t = tabulate(model.codebook, records, code_var, Variable::SEX);
  const auto find_sex = [&](std::string_view s) -> std::size_t {
    const auto& cats = t.groups->categories;
    const auto it = std::find(cats.begin(), cats.end(), s);
    if (it == cats.end()) throw Error("model has no SEX category '" + std::string(s) + "'");
    return static_cast<std::size_t>(it - cats.begin());
  };
  const auto male = find_sex("M");
  const auto female = find_sex("F");
  const PartialPredictor predictor(model, records);
  std::vector<DifferenceRow> rows;
  for (std::size_t c = 0; c < t.codes->categories.size(); ++c) {
    if (c == t.codes->unknown_index()) continue;
    const auto& m = t.cells[c][male];
    const auto& f = t.cells[c][female];
    if (m.size() < min_per_group || f.size() < min_per_group) continue;
    const auto actual_m = km_median(m);
    const auto actual_f = km_median(f);
    if (!actual_m || !actual_f || *actual_m == *actual_f) continue;
    const auto& code = t.codes->categories[c];
    const auto pred_m = method_a_median(predictor, code_var, code, Variable::SEX, "M");
    const auto pred_f = method_a_median(predictor, code_var, code, Variable::SEX, "F");
    if (!pred_m || !pred_f) continue;
    rows.push_back({code, {m.size(), f.size()}, *actual_m - *actual_f, *pred_m - *pred_f});
  }
  return concordance_from_differences(std::move(rows));
}

std::vector<GroupCalibrationRow> group_calibration(const FittedModel& model, std::span<const ClaimRecord> records,
                                                   Variable code_var, Variable group_var, std::size_t min_records) {
  const auto t = tabulate(model.codebook, records, code_var, group_var);
  const PartialPredictor predictor(model, records);
  std::vector<GroupCalibrationRow> rows;
  for (std::size_t c = 0; c < t.codes->categories.size(); ++c) {
    for (std::size_t g = 0; g < t.groups->categories.size(); ++g) {
      const auto& cell = t.cells[c][g];
      if (cell.size() < min_records || c == t.codes->unknown_index() || g == t.groups->unknown_index()) continue;
      const auto actual = km_median(cell);
      const auto predicted =
          method_a_median(predictor, code_var, t.codes->categories[c], group_var, t.groups->categories[g]);
      if (!actual || !predicted) continue;
      rows.push_back({t.codes->categories[c], t.groups->categories[g], cell.size(), *predicted, *actual});
    }
  }
  return rows;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("correlation needs two samples of equal length >= 2");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<HazardCurve> ph_diagnostic(std::span<const ClaimRecord> records, const Codebook& codebook, Variable v) {
  const auto& coding = require(codebook, v);
  std::vector<Subset> cells(coding.categories.size());
  for (const auto& r : records) {
    const auto c = codebook.profile(r.covariates)[index_of(v)];
    if (c >= 0) cells[static_cast<std::size_t>(c)].add(r);
  }
  std::vector<HazardCurve> out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    const auto events = static_cast<std::size_t>(std::count(cell.events.begin(), cell.events.end(), 1));
    if (events == 0) continue;
    const auto curve = kaplan_meier(cell.durations, cell.events);
    HazardCurve h{coding.categories[c], cell.size(), events, {}};
    try {
      h.points = log_cumulative_hazard(curve);
    } catch (const Error&) {
      continue;
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<double> trend_basis(Date d, Date origin, std::span<const Date> knots) {
  std::vector<double> x;
  x.reserve(knots.size() + 1);
  x.push_back(static_cast<double>((d - origin).count()) / kDaysPerYear);
  for (const auto k : knots) x.push_back(std::max(0.0, static_cast<double>((d - k).count()) / kDaysPerYear));
  return x;
}

double TrendFit::eta(Date d) const {
  const auto x = trend_basis(d, origin, knots);
  double e = intercept;
  for (std::size_t k = 0; k < x.size(); ++k) e += coefficients[k] * x[k];
  return e;
}

namespace {

Date quarter_start(Date d) {
  const std::chrono::year_month_day ymd{d};
  const unsigned m = static_cast<unsigned>(ymd.month());
  return Date{ymd.year() / std::chrono::month{(m - 1) / 3 * 3 + 1} / 1};
}

Date next_quarter(Date start) {
  const std::chrono::year_month_day ymd{start};
  return Date{ymd.year() / ymd.month() / 1 + std::chrono::months{3}};
}

}  // namespace

TrendFit fit_time_trend(std::span<const ClaimRecord> records, const TrainConfig& base) {
  if (records.empty()) throw Error("trend: no records");
  const auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                            [](const auto& a, const auto& b) { return a.open_date < b.open_date; });
  TrendFit fit;
  fit.origin = lo->open_date;
  const Date last = hi->open_date;

  for (Date q = quarter_start(fit.origin); q <= last; q = next_quarter(q)) {
    QuarterSummary s;
    s.start = q;
    s.end = next_quarter(q);
    fit.quarters.push_back(s);
  }
  if (fit.quarters.size() < 2) throw Error("trend: open dates must span at least two calendar quarters");
  for (std::size_t k = 0; k + 1 < fit.quarters.size(); ++k) fit.knots.push_back(fit.quarters[k].end);

  const std::size_t p = fit.knots.size() + 1;
  InputMatrix inputs(p);
  std::vector<double> design;
  design.reserve(records.size() * p);
  for (const auto& r : records) {
    const auto x = trend_basis(r.open_date, fit.origin, fit.knots);
    inputs.add_dense_row(x);
    design.insert(design.end(), x.begin(), x.end());
  }
  const auto o = outcomes_of(records);
  const RiskSets risk(o.durations, o.events);
  TrainConfig config = base;
  config.hidden = 0;
  config.lambda = 0.0;
  config.lambda_bias = 0.0;
  const auto net = train_network(inputs, risk, config);
  fit.intercept = net.weights.input_output(0);
  for (std::size_t k = 0; k < p; ++k) fit.coefficients.push_back(net.weights.input_output(k + 1));
  fit.baseline = breslow_baseline(risk, net.etas);

  const auto info = linear_cox_information(design, p, net.etas, risk);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> I(
      info.data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(I);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = lu.inverse();
    for (std::size_t k = 0; k < p; ++k) {
      fit.standard_errors.push_back(std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)))));
    }
  } else {
    spdlog::warn("trend: information matrix is singular; standard errors unavailable");
    fit.standard_errors.assign(p, kNaN);
  }

  std::vector<std::vector<double>> durations(fit.quarters.size());
  for (const auto& r : records) {
    std::size_t q = 0;
    while (r.open_date >= fit.quarters[q].end) ++q;
    auto& s = fit.quarters[q];
    ++s.records;
    s.closed += r.event ? 1 : 0;
    durations[q].push_back(r.duration_weeks);
  }
  for (std::size_t q = 0; q < fit.quarters.size(); ++q) {
    auto& s = fit.quarters[q];
    if (s.records > 0) {
      s.censor_rate = 1.0 - static_cast<double>(s.closed) / static_cast<double>(s.records);
      s.naive_mean = std::accumulate(durations[q].begin(), durations[q].end(), 0.0) / static_cast<double>(s.records);
      s.naive_median = box_stats(durations[q]).median;
    } else {
      s.censor_rate = s.naive_mean = s.naive_median = kNaN;
    }
    if (s.closed == 0) spdlog::warn("trend: quarter starting {} has no closed claims", format_date(s.start));
    const Date mid = s.start + (s.end - s.start) / 2;
    const auto curve = survival_from_eta(fit.baseline, fit.eta(mid));
    s.model_mean = curve_mean(curve);
    s.model_median = curve_quantile(curve, 0.5);
  }
  return fit;
}

void write_groups(std::ostream& out, std::span<const PredictionGroup> groups) {
  out << "group,records,eta_min,eta_max,closed,min,q1,median,q3,max\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& x = groups[g];
    out << g + 1 << ',' << x.records << ',' << format_double(x.eta_min) << ',' << format_double(x.eta_max) << ','
        << x.closed.n << ',' << format_double(x.closed.min) << ',' << format_double(x.closed.q1) << ','
        << format_double(x.closed.median) << ',' << format_double(x.closed.q3) << ','
        << format_double(x.closed.max) << '\n';
  }
}

void write_quintiles(std::ostream& out, const QuintileTable& table) {
  out << "predicted,actual_1,actual_2,actual_3,actual_4,actual_5\n";
  for (std::size_t r = 0; r < 5; ++r) {
    out << r + 1;
    for (const auto v : table[r]) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_windows(std::ostream& out, Summary summary, std::span<const WindowPoint> points) {
  out << "summary,predicted,actual,records\n";
  for (const auto& p : points) {
    out << to_string(summary) << ',' << format_double(p.center) << ',' << format_double(p.actual) << ','
        << p.records << '\n';
  }
}

void write_interactions(std::ostream& out, const InteractionReport& report) {
  out << "code,n_" << report.groups[0] << ",n_" << report.groups[1] << ",statistic,p_value,favored,significant\n";
  for (const auto& r : report.rows) {
    out << r.code << ',' << r.n[0] << ',' << r.n[1] << ',' << format_double(r.statistic) << ','
        << format_double(r.p_value) << ',' << r.favored << ',' << (r.significant ? 1 : 0) << '\n';
  }
}

void write_concordance(std::ostream& out, const ConcordanceReport& report) {
  out << "code,n_male,n_female,actual_difference,predicted_difference\n";
  for (const auto& r : report.rows) {
    out << r.code << ',' << r.n[0] << ',' << r.n[1] << ',' << format_double(r.actual) << ','
        << format_double(r.predicted) << '\n';
  }
  out << "# codes=" << report.rows.size() << " sign_agreements=" << report.sign_agreements
      << " tau=" << format_double(report.kendall.tau) << " p=" << format_double(report.kendall.p_value) << '\n';
}

void write_group_calibration(std::ostream& out, std::span<const GroupCalibrationRow> rows) {
  out << "code,group,records,predicted_median,actual_median\n";
  for (const auto& r : rows) {
    out << r.code << ',' << r.group << ',' << r.n << ',' << format_double(r.predicted) << ','
        << format_double(r.actual) << '\n';
  }
}

void write_hazard_curves(std::ostream& out, std::span<const HazardCurve> curves) {
  out << "category,time,log_cumulative_hazard\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) out << c.category << ',' << format_double(p.time) << ',' << format_double(p.value) << '\n';
  }
}

void write_trend(std::ostream& out, const TrendFit& fit) {
  out << "quarter_start,records,closed,censor_rate,naive_mean,naive_median,model_mean,model_median\n";
  for (const auto& q : fit.quarters) {
    out << format_date(q.start) << ',' << q.records << ',' << q.closed << ',' << format_double(q.censor_rate) << ','
        << format_double(q.naive_mean) << ',' << format_double(q.naive_median) << ','
        << format_double(q.model_mean) << ',' << csv_cell(q.model_median) << '\n';
  }
}

json to_json(std::span<const PredictionGroup> groups) {
  json rows = json::array();
  for (const auto& g : groups) {
    rows.push_back({{"records", g.records},
                    {"eta_min", g.eta_min},
                    {"eta_max", g.eta_max},
                    {"closed", g.closed.n},
                    {"min", g.closed.min},
                    {"q1", g.closed.q1},
                    {"median", g.closed.median},
                    {"q3", g.closed.q3},
                    {"max", g.closed.max}});
  }
  return {{"report", "groups"}, {"groups", std::move(rows)}};
}

json to_json(const QuintileTable& table) {
  json rows = json::array();
  for (const auto& r : table) rows.push_back(r);
  return {{"report", "quintiles"}, {"rows", std::move(rows)}};
}

json to_json(Summary summary, std::span<const WindowPoint> points) {
  json rows = json::array();
  for (const auto& p : points) rows.push_back({{"predicted", p.center}, {"actual", p.actual}, {"records", p.records}});
  return {{"report", "windows"}, {"summary", to_string(summary)}, {"points", std::move(rows)}};
}

json to_json(const InteractionReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"code", r.code},
                    {"n", r.n},
                    {"statistic", r.statistic},
                    {"p_value", r.p_value},
                    {"favored", r.favored},
                    {"significant", r.significant}});
  }
  return {{"report", "interactions"},
          {"groups", report.groups},
          {"qualifying", report.qualifying},
          {"significant", report.significant},
          {"omitted", report.omitted},
          {"rows", std::move(rows)}};
}

json to_json(const ConcordanceReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"code", r.code}, {"n", r.n}, {"actual", r.actual}, {"predicted", r.predicted}});
  }
  return {{"report", "concordance"},
          {"codes", report.rows.size()},
          {"sign_agreements", report.sign_agreements},
          {"kendall_tau", json_value(report.kendall.tau)},
          {"p_value", report.kendall.p_value},
          {"rows", std::move(rows)}};
}

json to_json(std::span<const GroupCalibrationRow> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"code", r.code}, {"group", r.group}, {"records", r.n}, {"predicted", r.predicted}, {"actual", r.actual}});
  }
  return {{"report", "group-calibration"}, {"rows", std::move(out)}};
}

json to_json(std::span<const HazardCurve> curves) {
  json out = json::array();
  for (const auto& c : curves) {
    json times = json::array(), values = json::array();
    for (const auto& p : c.points) {
      times.push_back(p.time);
      values.push_back(p.value);
    }
    out.push_back({{"category", c.category},
                   {"records", c.records},
                   {"events", c.events},
                   {"times", std::move(times)},
                   {"log_cumulative_hazard", std::move(values)}});
  }
  return {{"report", "ph-diagnostic"}, {"curves", std::move(out)}};
}

json to_json(const TrendFit& fit) {
  json knots = json::array();
  for (const auto k : fit.knots) knots.push_back(format_date(k));
  json se = json::array();
  for (const auto s : fit.standard_errors) se.push_back(json_value(s));
  json quarters = json::array();
  for (const auto& q : fit.quarters) {
    quarters.push_back({{"start", format_date(q.start)},
                        {"records", q.records},
                        {"closed", q.closed},
                        {"censor_rate", json_value(q.censor_rate)},
                        {"naive_mean", json_value(q.naive_mean)},
                        {"naive_median", json_value(q.naive_median)},
                        {"model_mean", q.model_mean},
                        {"model_median", q.model_median ? json(*q.model_median) : json(nullptr)}});
  }
  return {{"report", "trend"},
          {"origin", format_date(fit.origin)},
          {"knots", std::move(knots)},
          {"coefficients", fit.coefficients},
          {"standard_errors", std::move(se)},
          {"quarters", std::move(quarters)}};
}

}  // namespace claimnet
