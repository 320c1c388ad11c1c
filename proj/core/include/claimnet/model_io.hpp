#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "claimnet/coxnet.hpp"
#include "claimnet/encoding.hpp"
#include "claimnet/survival.hpp"

namespace claimnet {

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelFormatName = "claimnet-model";
inline constexpr std::string_view kCodebookFormatName = "claimnet-codebook";

// Documents use sorted object keys, so identical objects serialize to
// identical bytes; doubles are written in shortest round-trip form.

nlohmann::json to_json(const Codebook& codebook);
Codebook codebook_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const SurvivalCurve& curve);
nlohmann::json to_json(const BaselineHazard& baseline);

nlohmann::json to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& doc);

std::string serialize_model(const FittedModel& model);
FittedModel parse_model(std::string_view text);

void save_model(const std::string& path, const FittedModel& model);
FittedModel load_model(const std::string& path);

void save_codebook(const std::string& path, const Codebook& codebook);
Codebook load_codebook(const std::string& path);

}  // namespace claimnet
