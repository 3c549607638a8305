#include "dail/class_table.hpp"

#include <stdexcept>
#include <string>

namespace dail {

ClassTable build_class_table(
    const std::vector<std::pair<std::size_t, std::size_t>>& class_dataset_pairs) {
  if (class_dataset_pairs.empty()) {
    throw std::invalid_argument("build_class_table: no classes");
  }

  std::size_t num_classes = 0;
  std::size_t num_datasets = 0;
  for (const auto& [cls, ds] : class_dataset_pairs) {
    num_classes = std::max(num_classes, cls + 1);
    num_datasets = std::max(num_datasets, ds + 1);
  }

  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  ClassTable table;
  table.num_classes = num_classes;
  table.num_datasets = num_datasets;
  table.dataset_of.assign(num_classes, kUnset);

  for (const auto& [cls, ds] : class_dataset_pairs) {
    if (table.dataset_of[cls] != kUnset && table.dataset_of[cls] != ds) {
      throw std::invalid_argument("build_class_table: inconsistent class map (class " +
                                  std::to_string(cls) + " in datasets " +
                                  std::to_string(table.dataset_of[cls]) + " and " +
                                  std::to_string(ds) + ")");
    }
    table.dataset_of[cls] = ds;
  }

  for (std::size_t j = 0; j < num_classes; ++j) {
    if (table.dataset_of[j] == kUnset) {
      throw std::invalid_argument("build_class_table: class " + std::to_string(j) +
                                  " missing (labels must cover 0..C-1)");
    }
  }

  table.per_dataset_class_count.assign(num_datasets, 0);
  for (std::size_t ds : table.dataset_of) table.per_dataset_class_count[ds]++;
  for (std::size_t k = 0; k < num_datasets; ++k) {
    if (table.per_dataset_class_count[k] == 0) {
      throw std::invalid_argument("build_class_table: dataset " + std::to_string(k) +
                                  " owns no class");
    }
  }
  return table;
}

std::vector<std::uint8_t> dataset_mask(const ClassTable& table, std::size_t k) {
  if (k >= table.num_datasets) {
    throw std::invalid_argument("dataset_mask: dataset index " + std::to_string(k) +
                                " out of range [0, " +
                                std::to_string(table.num_datasets) + ")");
  }
  std::vector<std::uint8_t> mask(table.num_classes, 0);
  for (std::size_t j = 0; j < table.num_classes; ++j) {
    mask[j] = table.dataset_of[j] == k ? 1 : 0;
  }
  return mask;
}

std::vector<std::uint8_t> crossing_dropout_mask(const ClassTable& table, std::size_t k,
                                                double p, Prng& prng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("crossing_dropout_mask: p must lie in [0, 1]");
  }
  std::vector<std::uint8_t> mask = dataset_mask(table, k);
  for (std::size_t j = 0; j < table.num_classes; ++j) {
    if (!mask[j] && prng.uniform() < p) mask[j] = 1;
  }
  return mask;
}

}  // namespace dail
