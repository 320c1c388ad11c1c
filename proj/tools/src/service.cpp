#include "claimnet/tools/service.hpp"

#include <chrono>
#include <exception>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "claimnet/errors.hpp"
#include "claimnet/model_io.hpp"

namespace claimnet::tools {

using nlohmann::json;

namespace {

Response reply(int status, const json& body) { return {status, body.dump()}; }

Response error(int status, const std::string& message) { return reply(status, {{"error", message}}); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

PredictionService::PredictionService(FittedModel model) : model_(std::move(model)), predictor_(model_) {}

Response PredictionService::health() const {
  return reply(200, {{"status", "ok"},
                     {"model_format", kModelFormatName},
                     {"model_version", kModelFormatVersion},
                     {"hidden", model_.weights.hidden()},
                     {"inputs", model_.weights.inputs()},
                     {"training_records", model_.training_profiles.size()}});
}

Response PredictionService::schema() const {
  json vars = json::array();
  for (const auto v : kAllVariables) {
    json entry = {{"name", to_string(v)}, {"in_model", false}, {"categories", json::array()}};
    if (const auto* coding = model_.codebook.find(v)) {
      entry["in_model"] = true;
      entry["categories"] = coding->categories;
      if (kind_of(v) == VariableKind::Quartile) entry["quartile_boundaries"] = coding->boundaries;
    }
    switch (kind_of(v)) {
      case VariableKind::DigitCode: entry["kind"] = "code"; break;
      case VariableKind::CharPrefix: entry["kind"] = "region"; break;
      case VariableKind::Quartile: entry["kind"] = "number"; break;
      case VariableKind::Label: entry["kind"] = "label"; break;
    }
    vars.push_back(std::move(entry));
  }
  return reply(200, {{"variables", std::move(vars)}, {"methods", {"A", "B"}}, {"default_method", "A"}});
}

PredictRequest parse_predict_request(std::string_view body) {
  json doc;
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    doc = json::object();
  } else {
    doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw DataError("request body is not valid JSON");
  }
  if (!doc.is_object()) throw DataError("request body must be a JSON object");
  PredictRequest req;
  for (const auto& [key, value] : doc.items()) {
    if (key != "inputs" && key != "method" && key != "relax") throw DataError("unknown field '" + key + "'");
  }
  if (doc.contains("inputs")) {
    const auto& inputs = doc["inputs"];
    if (!inputs.is_object()) throw DataError("'inputs' must be an object");
    for (const auto& [name, value] : inputs.items()) {
      const auto v = parse_variable(name);
      if (!v) throw DataError("unknown variable '" + name + "'");
      if (value.is_null()) continue;
      std::string token;
      if (value.is_string()) {
        token = value.get<std::string>();
      } else if (value.is_number()) {
        token = value.dump();
      } else {
        throw DataError("value of '" + name + "' must be a string or number");
      }
      if (!token.empty()) req.inputs.set(*v, std::move(token));
    }
  }
  if (doc.contains("method")) {
    const auto& m = doc["method"];
    if (m == "A" || m == "a") {
      req.method = PartialMethod::A;
    } else if (m == "B" || m == "b") {
      req.method = PartialMethod::B;
    } else {
      throw DataError("'method' must be \"A\" or \"B\"");
    }
  }
  if (doc.contains("relax")) {
    if (!doc["relax"].is_boolean()) throw DataError("'relax' must be a boolean");
    req.relax = doc["relax"].get<bool>();
  }
  return req;
}

json prediction_json(const PartialPrediction& p) {
  json relaxed = json::array();
  for (const auto v : p.relaxed) relaxed.push_back(to_string(v));
  return {{"method", p.method == PartialMethod::A ? "A" : "B"},
          {"curve", {{"times", p.curve.times}, {"survival", p.curve.survival}}},
          {"mean", curve_mean(p.curve)},
          {"mean_truncated", mean_is_truncated(p.curve)},
          {"median", optional_number(curve_quantile(p.curve, 0.5))},
          {"q1", optional_number(curve_quantile(p.curve, 0.25))},
          {"q3", optional_number(curve_quantile(p.curve, 0.75))},
          {"match_count", p.match_count},
          {"eta", p.eta},
          {"relaxed", std::move(relaxed)}};
}

Response PredictionService::predict(std::string_view body) const {
  try {
    const auto req = parse_predict_request(body);
    return reply(200, prediction_json(predictor_.predict(req.inputs, req.method, req.relax)));
  } catch (const EmptyMatchError& e) {
    json constraints = json::array();
    for (const auto& c : e.constraints()) {
      constraints.push_back({{"variable", to_string(c.variable)}, {"category", c.category}, {"matches", c.matches}});
    }
    return reply(422, {{"error", e.what()},
                       {"diagnostics",
                        {{"constraints", std::move(constraints)}, {"most_restrictive", to_string(e.most_restrictive())}}}});
  } catch (const DataError& e) {
    return error(400, e.what());
  } catch (const EncodingError& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    spdlog::error("predict failed: {}", e.what());
    return error(500, "internal error");
  }
}

namespace {

thread_local std::chrono::steady_clock::time_point request_start;

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

std::unique_ptr<httplib::Server> make_server(const PredictionService& service, const std::string& ui_dir) {
  auto server = std::make_unique<httplib::Server>();
  server->set_pre_routing_handler([](const httplib::Request&, httplib::Response&) {
    request_start = std::chrono::steady_clock::now();
    return httplib::Server::HandlerResponse::Unhandled;
  });
  server->set_logger([](const httplib::Request& req, const httplib::Response& res) {
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - request_start).count();
    spdlog::info("{} {} {} {:.1f}ms", req.method, req.path, res.status, ms);
  });
  server->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send(res, error(500, "internal error"));
  });
  server->Get("/health", [&service](const httplib::Request&, httplib::Response& res) { send(res, service.health()); });
  server->Get("/schema", [&service](const httplib::Request&, httplib::Response& res) { send(res, service.schema()); });
  server->Post("/predict", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.predict(req.body));
  });
  if (!ui_dir.empty() && !server->set_mount_point("/ui", ui_dir)) {
    throw Error("cannot serve UI assets from '" + ui_dir + "'");
  }
  return server;
}

}  // namespace claimnet::tools
