#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imn/net.hpp"
#include "imn/preprocess.hpp"
#include "imn/train.hpp"

namespace imn {

// Bit-exact serialization of doubles: raw little-endian bytes, base64.
std::string base64_encode(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> base64_decode(const std::string& text);
std::string encode_doubles(const double* values, std::size_t count);
std::vector<double> decode_doubles(const std::string& text);

nlohmann::json net_config_to_json(const NetConfig& config);
NetConfig net_config_from_json(const nlohmann::json& doc);

nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& doc);

nlohmann::json params_to_json(const NetConfig& config, const ParamSet& params);
ParamSet params_from_json(const NetConfig& config, const nlohmann::json& doc);

// Everything needed to reload a trained model and apply it to raw data.
struct Checkpoint {
  SnapshotEnsemble ensemble;
  TrainConfig train_config;
  std::optional<PreprocessorState> preprocessor;
};

inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace imn
