#include "dail/datagen.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dail/matrix.hpp"

namespace dail {

namespace {

constexpr std::uint64_t kProtoStream = 0x21;
constexpr std::uint64_t kDomainStream = 0x22;
constexpr std::uint64_t kSampleStream = 0x23;

/// Random orthogonal map via Gram-Schmidt on a Gaussian matrix.
Matrix random_orthogonal(std::size_t dim, Prng& prng) {
  Matrix r(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    while (true) {
      for (std::size_t j = 0; j < dim; ++j) r.at(i, j) = prng.gaussian();
      for (std::size_t p = 0; p < i; ++p) {
        const double proj = dot(r.row(i), r.row(p));
        for (std::size_t j = 0; j < dim; ++j) r.at(i, j) -= proj * r.at(p, j);
      }
      const double norm = l2_norm(r.row(i));
      if (norm > 1e-8) {
        for (std::size_t j = 0; j < dim; ++j) r.at(i, j) /= norm;
        break;
      }
      // Degenerate draw; try a fresh row.
    }
  }
  return r;
}

}  // namespace

void GenConfig::validate() const {
  if (num_datasets == 0) throw std::invalid_argument("GenConfig: num_datasets >= 1");
  if (identities_per_dataset == 0) {
    throw std::invalid_argument("GenConfig: identities_per_dataset >= 1");
  }
  if (samples_per_identity == 0) {
    throw std::invalid_argument("GenConfig: samples_per_identity >= 1");
  }
  if (input_dim == 0) throw std::invalid_argument("GenConfig: input_dim >= 1");
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 1.0)) {
    throw std::invalid_argument("GenConfig: overlap_fraction must lie in [0, 1]");
  }
  if (prototype_spread < 0.0 || sample_noise < 0.0) {
    throw std::invalid_argument("GenConfig: stddevs must be >= 0");
  }
  if (domain_shift_strength < 0.0) {
    throw std::invalid_argument("GenConfig: domain_shift_strength must be >= 0");
  }
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw std::invalid_argument("GenConfig: holdout_fraction must lie in [0, 1)");
  }
}

SyntheticCorpus generate_corpus(const GenConfig& cfg) {
  cfg.validate();
  const std::size_t k_sets = cfg.num_datasets;
  const std::size_t ipd = cfg.identities_per_dataset;
  const std::size_t num_shared = static_cast<std::size_t>(
      std::llround(cfg.overlap_fraction * static_cast<double>(ipd)));
  if (num_shared > ipd) {
    throw std::invalid_argument(
        "generate_corpus: shared pool exhausted (overlap rounds to " +
        std::to_string(num_shared) + " of " + std::to_string(ipd) + " identities)");
  }
  const std::size_t num_exclusive = ipd - num_shared;
  const std::size_t num_identities = num_shared + k_sets * num_exclusive;

  // Identity prototypes: shared pool first, then each dataset's exclusives.
  Prng proto_rng(mix_seed(cfg.seed, kProtoStream));
  Matrix prototypes(num_identities, cfg.input_dim);
  for (double& v : prototypes.data) v = cfg.prototype_spread * proto_rng.gaussian();

  // Per-dataset shift: rotation-like map blended with identity, plus offset.
  Prng domain_rng(mix_seed(cfg.seed, kDomainStream));
  const double alpha = cfg.domain_shift_strength;
  std::vector<Matrix> rotations;
  std::vector<std::vector<double>> offsets;
  for (std::size_t k = 0; k < k_sets; ++k) {
    rotations.push_back(random_orthogonal(cfg.input_dim, domain_rng));
    std::vector<double> c(cfg.input_dim);
    for (double& v : c) v = domain_rng.gaussian();
    offsets.push_back(std::move(c));
  }

  SyntheticCorpus corpus;
  corpus.input_dim = cfg.input_dim;
  corpus.num_identities = num_identities;

  Prng sample_rng(mix_seed(cfg.seed, kSampleStream));
  std::vector<std::pair<std::size_t, std::size_t>> class_dataset_pairs;
  std::vector<double> raw(cfg.input_dim);

  for (std::size_t k = 0; k < k_sets; ++k) {
    std::vector<std::size_t> identities;
    for (std::size_t s = 0; s < num_shared; ++s) identities.push_back(s);
    for (std::size_t e = 0; e < num_exclusive; ++e) {
      identities.push_back(num_shared + k * num_exclusive + e);
    }
    for (std::size_t identity : identities) {
      const std::size_t local_class = corpus.identity_of_class.size();
      corpus.identity_of_class.push_back(identity);
      class_dataset_pairs.emplace_back(local_class, k);
      for (std::size_t s = 0; s < cfg.samples_per_identity; ++s) {
        for (std::size_t j = 0; j < cfg.input_dim; ++j) {
          raw[j] = prototypes.at(identity, j) + cfg.sample_noise * sample_rng.gaussian();
        }
        Sample sample;
        sample.global_identity = identity;
        sample.local_class = local_class;
        sample.dataset_id = k;
        sample.features.resize(cfg.input_dim);
        for (std::size_t j = 0; j < cfg.input_dim; ++j) {
          sample.features[j] = (1.0 - alpha) * raw[j] +
                               alpha * dot(rotations[k].row(j), raw) +
                               alpha * offsets[k][j];
        }
        corpus.samples.push_back(std::move(sample));
      }
    }
  }

  corpus.class_table = build_class_table(class_dataset_pairs);

  // Per-class split: the trailing fraction of each class's samples is held
  // out for verification pairs and probes.
  const std::size_t spi = cfg.samples_per_identity;
  const std::size_t num_hold = std::min(
      spi, static_cast<std::size_t>(
               std::llround(cfg.holdout_fraction * static_cast<double>(spi))));
  for (std::size_t c = 0; c < corpus.identity_of_class.size(); ++c) {
    const std::size_t base = c * spi;
    for (std::size_t s = 0; s < spi; ++s) {
      if (s + num_hold < spi) {
        corpus.train_indices.push_back(base + s);
      } else {
        corpus.eval_indices.push_back(base + s);
      }
    }
  }
  return corpus;
}

std::vector<VerificationPair> make_verification_pairs(
    const SyntheticCorpus& corpus, std::span<const std::size_t> subset,
    std::size_t n_pos, std::size_t n_neg, Prng& prng) {
  for (std::size_t idx : subset) {
    if (idx >= corpus.samples.size()) {
      throw std::invalid_argument("make_verification_pairs: sample index " +
                                  std::to_string(idx) + " out of range");
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> by_identity;
  for (std::size_t idx : subset) {
    by_identity[corpus.samples[idx].global_identity].push_back(idx);
  }

  // All eligible positive pairs; identities spanning several datasets
  // contribute only their cross-dataset pairs.
  std::vector<std::pair<std::size_t, std::size_t>> pos_pairs;
  for (const auto& [identity, members] : by_identity) {
    (void)identity;
    if (members.size() < 2) continue;
    bool cross_capable = false;
    for (std::size_t m = 1; m < members.size(); ++m) {
      if (corpus.samples[members[m]].dataset_id !=
          corpus.samples[members[0]].dataset_id) {
        cross_capable = true;
        break;
      }
    }
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const bool cross = corpus.samples[members[a]].dataset_id !=
                           corpus.samples[members[b]].dataset_id;
        if (!cross_capable || cross) pos_pairs.emplace_back(members[a], members[b]);
      }
    }
  }
  if (n_pos > 0 && pos_pairs.empty()) {
    throw std::invalid_argument(
        "make_verification_pairs: no identity has two samples for positives");
  }

  std::size_t distinct_identities = by_identity.size();
  if (n_neg > 0 && distinct_identities < 2) {
    throw std::invalid_argument(
        "make_verification_pairs: need two identities for negatives");
  }

  std::vector<VerificationPair> pairs;
  pairs.reserve(n_pos + n_neg);
  for (std::size_t p = 0; p < n_pos; ++p) {
    const auto& [a, b] = pos_pairs[prng.below(pos_pairs.size())];
    pairs.push_back({a, b, true});
  }
  for (std::size_t p = 0; p < n_neg; ++p) {
    while (true) {
      const std::size_t a = subset[prng.below(subset.size())];
      const std::size_t b = subset[prng.below(subset.size())];
      if (a == b) continue;
      if (corpus.samples[a].global_identity == corpus.samples[b].global_identity) {
        continue;
      }
      pairs.push_back({a, b, false});
      break;
    }
  }
  return pairs;
}

std::vector<VerificationPair> make_verification_pairs(const SyntheticCorpus& corpus,
                                                      std::size_t n_pos,
                                                      std::size_t n_neg, Prng& prng) {
  std::vector<std::size_t> all(corpus.samples.size());
  std::iota(all.begin(), all.end(), 0);
  return make_verification_pairs(corpus, all, n_pos, n_neg, prng);
}

}  // namespace dail
