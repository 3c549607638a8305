#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "dail/prng.hpp"

namespace dail {

/// Global class label space with the class -> dataset map. Immutable after
/// construction; shareable across threads.
struct ClassTable {
  std::size_t num_classes = 0;
  std::size_t num_datasets = 0;
  std::vector<std::size_t> dataset_of;                // length num_classes
  std::vector<std::size_t> per_dataset_class_count;   // length num_datasets
};

/// Builds the table from (class label, dataset index) pairs. Class labels
/// must cover 0..C-1 and dataset indices 0..K-1 with every dataset owning at
/// least one class; a class mapped to two datasets is an inconsistency.
ClassTable build_class_table(
    const std::vector<std::pair<std::size_t, std::size_t>>& class_dataset_pairs);

/// Binary mask over classes: mask[j] = 1 iff class j belongs to dataset k.
std::vector<std::uint8_t> dataset_mask(const ClassTable& table, std::size_t k);

/// Crossing-dropout mask: own-dataset classes always active, each
/// cross-dataset class independently admitted with probability p.
/// Fresh uniform draws on every call.
std::vector<std::uint8_t> crossing_dropout_mask(const ClassTable& table, std::size_t k,
                                                double p, Prng& prng);

}  // namespace dail
