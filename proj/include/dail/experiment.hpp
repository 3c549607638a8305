#pragma once

#include <string>
#include <vector>

#include "dail/eval.hpp"
#include "dail/model.hpp"

namespace dail {

struct EvalOutcome {
  EvalReport report;
  std::vector<std::string> notes;  // skipped measurements (degenerate corpora)
};

/// Embeddings of the given corpus samples under a trained model.
Matrix embed_subset(const ModelParams& params, const SyntheticCorpus& corpus,
                    const std::vector<std::size_t>& subset);

/// Runs the full evaluation battery on the corpus's eval split: best-threshold
/// verification over seeded pairs, the dataset-membership probe and the
/// overlap-consistency cosines. Measurements that a corpus cannot support
/// (single dataset, no shared identities) are skipped with a note.
EvalOutcome evaluate_model(const ModelParams& params, const SyntheticCorpus& corpus,
                           std::size_t pairs_each, std::uint64_t eval_seed);

}  // namespace dail
