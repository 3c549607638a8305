#pragma once

#include <string>

#include <json.hpp>

#include "dail/datagen.hpp"

namespace dail {

/// Writes DIR/corpus.csv (header f0..f{d-1},global_identity,local_class,
/// dataset_id; features with 17 significant digits) and
/// DIR/corpus_meta.json (generator config, seed, split indices).
void write_corpus(const std::string& dir, const SyntheticCorpus& corpus,
                  const GenConfig& cfg);

/// Reads back a corpus written by write_corpus. Features round-trip bitwise.
SyntheticCorpus load_corpus(const std::string& dir);

nlohmann::json gen_config_to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const nlohmann::json& j);

}  // namespace dail
