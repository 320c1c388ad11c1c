#include "claimnet/model_io.hpp"

#include <fstream>
#include <sstream>

#include "claimnet/errors.hpp"

namespace claimnet {

using nlohmann::json;

namespace {

std::string_view kind_name(VariableKind k) {
  switch (k) {
    case VariableKind::DigitCode:
      return "digit_code";
    case VariableKind::CharPrefix:
      return "region_prefix";
    case VariableKind::Quartile:
      return "quartile";
    case VariableKind::Label:
      return "label";
  }
  return "label";
}

StopReason stop_reason_from(std::string_view s) {
  for (const auto r : {StopReason::GradientTolerance, StopReason::RelativeDecrease, StopReason::MaxIterations,
                       StopReason::LineSearchFailed}) {
    if (to_string(r) == s) return r;
  }
  throw DataError("unknown stop reason '" + std::string(s) + "'");
}

Variable variable_from(const json& j) {
  const auto name = j.get<std::string>();
  const auto v = parse_variable(name);
  if (!v) throw DataError("unknown variable '" + name + "'");
  return *v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

json to_json(const Codebook& codebook) {
  json vars = json::array();
  for (const auto& vc : codebook.variables()) {
    json v = {{"name", to_string(vc.variable)},
              {"kind", kind_name(kind_of(vc.variable))},
              {"offset", vc.offset},
              {"categories", vc.categories},
              {"counts", vc.counts}};
    if (kind_of(vc.variable) == VariableKind::Quartile) {
      v["boundaries"] = vc.boundaries;
    } else {
      v["consolidation"] = vc.consolidation;
    }
    vars.push_back(std::move(v));
  }
  return {{"format", kCodebookFormatName},
          {"version", kModelFormatVersion},
          {"min_count", codebook.min_count()},
          {"input_count", codebook.input_count()},
          {"variables", std::move(vars)}};
}

Codebook codebook_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kCodebookFormatName) throw DataError("not a codebook document");
    std::vector<VariableCoding> codings;
    for (const auto& v : doc.at("variables")) {
      VariableCoding vc;
      vc.variable = variable_from(v.at("name"));
      vc.categories = v.at("categories").get<std::vector<std::string>>();
      vc.counts = v.at("counts").get<std::vector<std::size_t>>();
      if (v.contains("boundaries")) vc.boundaries = v.at("boundaries").get<std::array<double, 3>>();
      if (v.contains("consolidation")) {
        vc.consolidation = v.at("consolidation").get<std::map<std::string, std::string>>();
      }
      codings.push_back(std::move(vc));
    }
    Codebook cb(std::move(codings), doc.at("min_count").get<std::size_t>());
    if (cb.input_count() != doc.at("input_count").get<std::size_t>()) {
      throw DataError("codebook input_count does not match its categories");
    }
    return cb;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed codebook document: ") + e.what());
  }
}

json to_json(const TrainConfig& c) {
  return {{"lambda", c.lambda},
          {"lambda_bias", c.bias_lambda()},
          {"hidden", c.hidden},
          {"max_iterations", c.max_iterations},
          {"tolerance", c.tolerance},
          {"gradient_tolerance", c.gradient_tolerance},
          {"init_scale", c.init_scale},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& doc) {
  TrainConfig c;
  c.lambda = doc.value("lambda", c.lambda);
  if (doc.contains("lambda_bias")) c.lambda_bias = doc.at("lambda_bias").get<double>();
  c.hidden = doc.value("hidden", c.hidden);
  c.max_iterations = doc.value("max_iterations", c.max_iterations);
  c.tolerance = doc.value("tolerance", c.tolerance);
  c.gradient_tolerance = doc.value("gradient_tolerance", c.gradient_tolerance);
  c.init_scale = doc.value("init_scale", c.init_scale);
  c.seed = doc.value("seed", c.seed);
  return c;
}

json to_json(const SurvivalCurve& curve) { return {{"times", curve.times}, {"survival", curve.survival}}; }

json to_json(const BaselineHazard& b) {
  return {{"times", b.times}, {"cumulative_hazard", b.cumulative_hazard}};
}

json to_json(const FittedModel& m) {
  const auto& w = m.weights;
  const auto p = w.parameters();
  const auto ih_end = p.begin() + static_cast<std::ptrdiff_t>(w.ho_offset());
  const auto ho_end = p.begin() + static_cast<std::ptrdiff_t>(w.io_offset());
  json profiles = json::array();
  for (const auto& prof : m.training_profiles) profiles.push_back(prof);
  return {
      {"format", kModelFormatName},
      {"version", kModelFormatVersion},
      {"config", to_json(m.config)},
      {"network",
       {{"inputs", w.inputs()},
        {"hidden", w.hidden()},
        {"input_hidden",
         {{"rows", w.inputs() + 1}, {"cols", w.hidden()}, {"values", std::vector<double>(p.begin(), ih_end)}}},
        {"hidden_output", std::vector<double>(ih_end, ho_end)},
        {"input_output", std::vector<double>(ho_end, p.end())}}},
      {"baseline", to_json(m.baseline)},
      {"codebook", to_json(m.codebook)},
      {"training",
       {{"objective", m.objective},
        {"loglik", m.loglik},
        {"iterations", m.iterations},
        {"stop_reason", to_string(m.stop_reason)},
        {"profiles", std::move(profiles)}}},
  };
}

FittedModel model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kModelFormatName) throw DataError("not a model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model format version " + std::to_string(version));
    }
    FittedModel m;
    m.config = train_config_from_json(doc.at("config"));
    const auto& net = doc.at("network");
    const auto inputs = net.at("inputs").get<std::size_t>();
    const auto hidden = net.at("hidden").get<std::size_t>();
    const auto& ih = net.at("input_hidden");
    if (ih.at("rows").get<std::size_t>() != inputs + 1 || ih.at("cols").get<std::size_t>() != hidden) {
      throw DataError("input_hidden shape does not match network size");
    }
    auto params = ih.at("values").get<std::vector<double>>();
    const auto ho = net.at("hidden_output").get<std::vector<double>>();
    const auto io = net.at("input_output").get<std::vector<double>>();
    params.insert(params.end(), ho.begin(), ho.end());
    params.insert(params.end(), io.begin(), io.end());
    m.weights = NetworkWeights(inputs, hidden, std::move(params));
    if (ho.size() != hidden || io.size() != inputs + 1) throw DataError("network arrays have wrong lengths");

    const auto& b = doc.at("baseline");
    m.baseline.times = b.at("times").get<std::vector<double>>();
    m.baseline.cumulative_hazard = b.at("cumulative_hazard").get<std::vector<double>>();
    if (m.baseline.times.size() != m.baseline.cumulative_hazard.size()) {
      throw DataError("baseline arrays have different lengths");
    }
    m.codebook = codebook_from_json(doc.at("codebook"));
    if (m.codebook.input_count() != inputs) throw DataError("codebook does not match network inputs");

    const auto& t = doc.at("training");
    m.objective = t.at("objective").get<double>();
    m.loglik = t.at("loglik").get<double>();
    m.iterations = t.at("iterations").get<int>();
    m.stop_reason = stop_reason_from(t.at("stop_reason").get<std::string>());
    m.training_profiles = t.at("profiles").get<std::vector<CategoryProfile>>();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

std::string serialize_model(const FittedModel& model) { return to_json(model).dump(1) + "\n"; }

FittedModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model document is not valid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

void save_model(const std::string& path, const FittedModel& model) { write_file(path, serialize_model(model)); }

FittedModel load_model(const std::string& path) { return parse_model(read_file(path)); }

void save_codebook(const std::string& path, const Codebook& codebook) {
  write_file(path, to_json(codebook).dump(2) + "\n");
}

Codebook load_codebook(const std::string& path) {
  try {
    return codebook_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw DataError(std::string("codebook is not valid JSON: ") + e.what());
  }
}

}  // namespace claimnet
