#pragma once

#include <nlohmann/json.hpp>

#include "rapport/user_model.hpp"

namespace rapport {

void to_json(nlohmann::json& j, const OpinionRecord& r);
void from_json(const nlohmann::json& j, OpinionRecord& r);

void to_json(nlohmann::json& j, const UserModel& m);
void from_json(const nlohmann::json& j, UserModel& m);

// {"type": "HobbyDetected", "hobby": "chess"} and so on.
nlohmann::json event_to_json(const UserModelEvent& e);
UserModelEvent event_from_json(const nlohmann::json& j);

}  // namespace rapport
