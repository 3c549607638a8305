#include "dail/experiment.hpp"

#include <stdexcept>

namespace dail {

namespace {

constexpr std::uint64_t kPairStream = 0x41;
constexpr std::uint64_t kProbeStream = 0x42;
constexpr std::uint64_t kOverlapStream = 0x43;

}  // namespace

Matrix embed_subset(const ModelParams& params, const SyntheticCorpus& corpus,
                    const std::vector<std::size_t>& subset) {
  Matrix x(subset.size(), corpus.input_dim);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const Sample& sample = corpus.samples[subset[i]];
    for (std::size_t j = 0; j < corpus.input_dim; ++j) {
      x.at(i, j) = sample.features[j];
    }
  }
  return embed_forward(params, x).embeddings;
}

EvalOutcome evaluate_model(const ModelParams& params, const SyntheticCorpus& corpus,
                           std::size_t pairs_each, std::uint64_t eval_seed) {
  const std::vector<std::size_t>& subset =
      corpus.eval_indices.empty() ? corpus.train_indices : corpus.eval_indices;
  if (subset.empty()) throw std::invalid_argument("evaluate_model: empty corpus");
  const Matrix embeddings = embed_subset(params, corpus, subset);

  EvalOutcome outcome;
  Prng pair_rng(mix_seed(eval_seed, kPairStream));
  const auto pairs =
      make_verification_pairs(corpus, subset, pairs_each, pairs_each, pair_rng);
  // Remap corpus sample indices to embedding rows.
  std::vector<VerificationPair> rows = pairs;
  {
    std::vector<std::size_t> row_of(corpus.samples.size(), 0);
    for (std::size_t r = 0; r < subset.size(); ++r) row_of[subset[r]] = r;
    for (auto& pair : rows) {
      pair.a = row_of[pair.a];
      pair.b = row_of[pair.b];
    }
  }
  const auto [accuracy, threshold] = verification_accuracy(embeddings, rows);
  outcome.report.verification_accuracy = accuracy;
  outcome.report.best_threshold = threshold;
  outcome.report.n_pos = pairs_each;
  outcome.report.n_neg = pairs_each;

  std::vector<std::size_t> dataset_ids;
  for (std::size_t idx : subset) dataset_ids.push_back(corpus.samples[idx].dataset_id);
  try {
    Prng probe_rng(mix_seed(eval_seed, kProbeStream));
    outcome.report.domain_probe_accuracy =
        domain_probe(embeddings, dataset_ids, probe_rng);
    outcome.report.has_domain_probe = true;
  } catch (const std::invalid_argument& e) {
    outcome.notes.push_back(std::string("domain_probe: ") + e.what());
  }

  try {
    Prng overlap_rng(mix_seed(eval_seed, kOverlapStream));
    const auto [same_id, cross_id] =
        overlap_consistency(embeddings, corpus, subset, overlap_rng);
    outcome.report.overlap_same_id_cosine = same_id;
    outcome.report.cross_id_cosine = cross_id;
    outcome.report.has_overlap = true;
  } catch (const std::invalid_argument& e) {
    outcome.notes.push_back(std::string("overlap_consistency: ") + e.what());
  }
  return outcome;
}

}  // namespace dail
