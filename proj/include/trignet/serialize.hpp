#pragma once

#include <string>

#include <json.hpp>

#include "trignet/config.hpp"
#include "trignet/model.hpp"
#include "trignet/param_store.hpp"

namespace trignet {

/// Full resolved config; every artifact embeds this as its
/// reproducibility header (no timestamps anywhere, so identical runs
/// produce identical bytes).
nlohmann::json config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const nlohmann::json& j);

nlohmann::json eval_report_to_json(const EvalReport& report);
nlohmann::json history_to_json(const TrainHistory& history);

/// Text checkpoint:
///   TRIGNET-CHECKPOINT 1
///   CONFIG <single-line JSON>
///   PARAMS <count>
///   PARAM <name> <rows> <cols> <adam_step>
///   <rows lines of cols values>          (parameter, %.17g)
///   <rows lines of cols values>          (Adam first moment)
///   <rows lines of cols values>          (Adam second moment)
///   END
void save_checkpoint(const std::string& path, const ParamStore& store, const ModelConfig& cfg);

struct Checkpoint {
    ModelConfig config;
    ParamStore store;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace trignet
