#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "claimnet/coxnet.hpp"
#include "claimnet/partial_prediction.hpp"

namespace httplib {
class Server;
}

namespace claimnet::tools {

struct Response {
  int status = 200;
  std::string body;  // JSON
};

/// Request handling for the prediction endpoints, independent of the HTTP
/// transport. Immutable after construction; safe to share across threads.
class PredictionService {
 public:
  explicit PredictionService(FittedModel model);
  PredictionService(const PredictionService&) = delete;
  PredictionService& operator=(const PredictionService&) = delete;

  Response health() const;
  Response schema() const;
  /// Body: {"inputs": {VAR: token, ...}, "method": "A"|"B", "relax": bool}.
  Response predict(std::string_view body) const;

  const FittedModel& model() const noexcept { return model_; }

 private:
  FittedModel model_;
  PartialPredictor predictor_;
};

/// Prediction response document shared by the service and `claimnet predict`.
nlohmann::json prediction_json(const PartialPrediction& prediction);

/// Parses a request body into a partial input. Throws DataError for a
/// malformed body or an unknown variable name.
struct PredictRequest {
  Covariates inputs;
  PartialMethod method = PartialMethod::A;
  bool relax = false;
};
PredictRequest parse_predict_request(std::string_view body);

/// Routes GET /health, GET /schema and POST /predict, with one stderr log
/// line per request. `ui_dir`, when not empty, is served under /ui.
std::unique_ptr<httplib::Server> make_server(const PredictionService& service, const std::string& ui_dir = {});

}  // namespace claimnet::tools
