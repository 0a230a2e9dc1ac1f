#pragma once

#include <json.hpp>

#include "seqvid/movingmnist.hpp"
#include "seqvid/seq2seq.hpp"
#include "seqvid/trainer.hpp"

namespace seqvid {

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace seqvid
