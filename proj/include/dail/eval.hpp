#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dail/datagen.hpp"
#include "dail/matrix.hpp"
#include "dail/prng.hpp"

namespace dail {

struct EvalReport {
  double verification_accuracy = 0.0;
  double best_threshold = 0.0;
  double domain_probe_accuracy = 0.0;
  bool has_domain_probe = false;
  double overlap_same_id_cosine = 0.0;
  double cross_id_cosine = 0.0;
  bool has_overlap = false;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

/// Best-threshold verification accuracy over cosine similarities. The sweep
/// covers every midpoint between consecutive sorted similarities plus the
/// +/-infinity extremes; prediction is "same" when sim >= threshold; ties go
/// to the smaller threshold. Embeddings are L2-normalized internally.
/// pairs index rows of embeddings.
std::pair<double, double> verification_accuracy(
    const Matrix& embeddings, const std::vector<VerificationPair>& pairs);

/// Held-out accuracy of a fresh affine softmax probe trained on frozen
/// embeddings (70/30 split, fixed 500 full-batch steps, SGD with momentum).
/// Chance-level accuracy means the embeddings carry no dataset signal.
/// Throws "single dataset" when fewer than two datasets are present.
double domain_probe(const Matrix& embeddings,
                    std::span<const std::size_t> dataset_ids, Prng& prng);

/// (mean cosine over same-identity cross-dataset pairs,
///  mean cosine over a seeded sample of different-identity pairs).
/// rows[r] is the corpus sample index behind embedding row r. Throws when
/// the rows contain no shared identity spanning two datasets.
std::pair<double, double> overlap_consistency(const Matrix& embeddings,
                                              const SyntheticCorpus& corpus,
                                              std::span<const std::size_t> rows,
                                              Prng& prng,
                                              std::size_t n_cross_pairs = 10000);

}  // namespace dail
