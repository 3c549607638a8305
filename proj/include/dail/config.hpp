#pragma once

#include <cstdint>
#include <string>

#include "dail/datagen.hpp"
#include "dail/trainer.hpp"

namespace dail {

struct EvalOptions {
  std::size_t pairs = 500;  // positives and negatives each
  std::uint64_t seed = 1;
};

struct RunConfig {
  GenConfig gen;
  TrainConfig train;
  EvalOptions eval;
};

/// Parses the flat sectioned key=value format:
///   # comment
///   train.lambda = 0.1
///   train.lr_decay_steps = 700, 1167
/// Absent keys keep their defaults; unknown keys are an error, as are
/// malformed values (both name the offending line/key). The parsed config is
/// validated before it is returned.
RunConfig parse_config(const std::string& text);

/// The reference configuration: every key with its default value.
std::string default_config_text();

/// Applies a DAIL_SEED-style override to every seed field.
void override_seeds(RunConfig& config, std::uint64_t seed);

}  // namespace dail
