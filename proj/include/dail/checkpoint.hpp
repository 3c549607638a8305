#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dail/trainer.hpp"

namespace dail {

/// One named dense array; dims are row-major.
struct NamedArray {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

/// Binary model snapshot. Layout: magic "DAILCKPT", one version byte, a
/// length-prefixed UTF-8 metadata block (JSON), the array count, then per
/// array a length-prefixed UTF-8 name, a 32-bit dim count, 64-bit dims and
/// row-major little-endian 64-bit floats. Save/load round-trips bitwise.
struct Checkpoint {
  static constexpr std::uint8_t kVersion = 1;
  std::uint8_t version = kVersion;
  nlohmann::json metadata;
  std::vector<NamedArray> arrays;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Packs a training state (parameters + momentum buffers + counters) and the
/// config snapshot into a checkpoint.
Checkpoint make_checkpoint(const TrainState& state, const TrainConfig& config);

/// Rebuilds the training state saved by make_checkpoint.
TrainState state_from_checkpoint(const Checkpoint& ckpt);

/// Train-config snapshot helpers for metadata blocks.
nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace dail
