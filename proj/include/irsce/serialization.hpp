#pragma once

// JSON forms of schedules and estimate reports. Complex entries are [re, im]
// pairs; matrices are arrays of rows.

#include "irsce/estimators.hpp"
#include "irsce/training_design.hpp"

#include <json.hpp>

namespace irsce {

nlohmann::json toJson(const CMatrix& m);
CMatrix matrixFromJson(const nlohmann::json& j);

nlohmann::json toJson(const Phase1Schedule& s);
nlohmann::json toJson(const Phase2Schedule& s);
nlohmann::json toJson(const Phase3Schedule& s);
nlohmann::json toJson(const EstimateReport& r);

Phase1Schedule phase1FromJson(const nlohmann::json& j);
Phase2Schedule phase2FromJson(const nlohmann::json& j);
Phase3Schedule phase3FromJson(const nlohmann::json& j);

}  // namespace irsce
