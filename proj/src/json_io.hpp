#pragma once

#include <json.hpp>

#include "goats/sac.hpp"
#include "goats/trainer.hpp"

namespace goats::detail {

using nlohmann::json;

json to_json(const RunConfig& config);
RunConfig run_config_from_json(const json& doc);

json to_json(const Mlp& net);
Mlp mlp_from_json(const json& doc);
json to_json(const AdamState& state);
AdamState adam_from_json(const json& doc);

}  // namespace goats::detail
