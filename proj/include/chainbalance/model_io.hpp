#pragma once

#include <filesystem>

#include "chainbalance/ensemble.hpp"
#include "json.hpp"

namespace chainbalance {

inline constexpr const char* kModelSchema = "chainbalance.model/1";

nlohmann::json model_to_json(const EnsembleModel& model);
// Throws Error(kInvalidArgument) on a schema mismatch or inconsistent content.
EnsembleModel model_from_json(const nlohmann::json& doc);

void save_model(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_model(const std::filesystem::path& path);

}  // namespace chainbalance
