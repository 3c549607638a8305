#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dail/class_table.hpp"
#include "dail/prng.hpp"

namespace dail {

/// Recipe for a synthetic multi-dataset corpus with planted identity overlap
/// and per-dataset domain shift.
struct GenConfig {
  std::size_t num_datasets = 3;
  std::size_t identities_per_dataset = 30;
  double overlap_fraction = 0.3;     // fraction of each dataset's identities
                                     // drawn from the pool shared by all
  std::size_t samples_per_identity = 20;  // per (dataset, identity) class
  std::size_t input_dim = 8;
  double prototype_spread = 1.0;     // inter-identity stddev
  double sample_noise = 0.35;        // intra-identity stddev
  double domain_shift_strength = 0.5;
  double holdout_fraction = 0.25;    // per-class eval split
  std::uint64_t seed = 1;

  void validate() const;
};

struct Sample {
  std::vector<double> features;
  std::size_t global_identity;  // ground truth, evaluation only
  std::size_t local_class;      // the training label
  std::size_t dataset_id;
};

/// Labeled samples plus the class table and the ground-truth map from local
/// class to global identity. Shared identities get a distinct local class in
/// every dataset they appear in: the same-person-two-labels trap.
struct SyntheticCorpus {
  std::vector<Sample> samples;
  ClassTable class_table;
  std::vector<std::size_t> identity_of_class;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> eval_indices;
  std::size_t input_dim = 0;
  std::size_t num_identities = 0;
};

/// Deterministic given cfg.seed. Identity prototypes are Gaussian; each
/// dataset applies a rotation-like orthogonal map blended with the identity
/// by domain_shift_strength plus a constant offset scaled the same way, so
/// strength 0 leaves all datasets coincident.
SyntheticCorpus generate_corpus(const GenConfig& cfg);

struct VerificationPair {
  std::size_t a = 0;  // corpus sample indices
  std::size_t b = 0;
  bool same_identity = false;
};

/// n_pos same-identity pairs (cross-dataset preferred whenever the identity
/// spans several datasets) and n_neg different-identity pairs, drawn from the
/// given subset of corpus sample indices. A sample is never paired with
/// itself. Throws when the subset cannot supply the requested pairs.
std::vector<VerificationPair> make_verification_pairs(
    const SyntheticCorpus& corpus, std::span<const std::size_t> subset,
    std::size_t n_pos, std::size_t n_neg, Prng& prng);

/// Convenience overload over all corpus samples.
std::vector<VerificationPair> make_verification_pairs(const SyntheticCorpus& corpus,
                                                      std::size_t n_pos,
                                                      std::size_t n_neg, Prng& prng);

}  // namespace dail
