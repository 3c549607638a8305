#include "dail/corpus_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dail {

namespace {

std::string format_feature(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream stream(line);
  std::string field;
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

nlohmann::json gen_config_to_json(const GenConfig& cfg) {
  return nlohmann::json{
      {"num_datasets", cfg.num_datasets},
      {"identities_per_dataset", cfg.identities_per_dataset},
      {"overlap_fraction", cfg.overlap_fraction},
      {"samples_per_identity", cfg.samples_per_identity},
      {"input_dim", cfg.input_dim},
      {"prototype_spread", cfg.prototype_spread},
      {"sample_noise", cfg.sample_noise},
      {"domain_shift_strength", cfg.domain_shift_strength},
      {"holdout_fraction", cfg.holdout_fraction},
      {"seed", cfg.seed},
  };
}

GenConfig gen_config_from_json(const nlohmann::json& j) {
  GenConfig cfg;
  cfg.num_datasets = j.at("num_datasets").get<std::size_t>();
  cfg.identities_per_dataset = j.at("identities_per_dataset").get<std::size_t>();
  cfg.overlap_fraction = j.at("overlap_fraction").get<double>();
  cfg.samples_per_identity = j.at("samples_per_identity").get<std::size_t>();
  cfg.input_dim = j.at("input_dim").get<std::size_t>();
  cfg.prototype_spread = j.at("prototype_spread").get<double>();
  cfg.sample_noise = j.at("sample_noise").get<double>();
  cfg.domain_shift_strength = j.at("domain_shift_strength").get<double>();
  cfg.holdout_fraction = j.at("holdout_fraction").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

void write_corpus(const std::string& dir, const SyntheticCorpus& corpus,
                  const GenConfig& cfg) {
  std::filesystem::create_directories(dir);
  const std::string csv_path = dir + "/corpus.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("write_corpus: cannot open " + csv_path);

  for (std::size_t j = 0; j < corpus.input_dim; ++j) csv << "f" << j << ",";
  csv << "global_identity,local_class,dataset_id\n";
  for (const Sample& sample : corpus.samples) {
    for (double v : sample.features) csv << format_feature(v) << ",";
    csv << sample.global_identity << "," << sample.local_class << ","
        << sample.dataset_id << "\n";
  }
  if (!csv) throw std::runtime_error("write_corpus: write failed for " + csv_path);

  nlohmann::json meta{
      {"gen", gen_config_to_json(cfg)},
      {"seed", cfg.seed},
      {"prng", Prng::kAlgorithm},
      {"num_identities", corpus.num_identities},
      {"train_indices", corpus.train_indices},
      {"eval_indices", corpus.eval_indices},
  };
  const std::string meta_path = dir + "/corpus_meta.json";
  std::ofstream meta_out(meta_path);
  if (!meta_out) throw std::runtime_error("write_corpus: cannot open " + meta_path);
  meta_out << meta.dump(2) << "\n";
}

SyntheticCorpus load_corpus(const std::string& dir) {
  const std::string csv_path = dir + "/corpus.csv";
  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("load_corpus: cannot open " + csv_path);

  std::string line;
  if (!std::getline(csv, line)) {
    throw std::runtime_error("load_corpus: empty corpus file");
  }
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[header.size() - 3] != "global_identity" ||
      header[header.size() - 2] != "local_class" || header.back() != "dataset_id") {
    throw std::runtime_error("load_corpus: unexpected corpus header");
  }
  const std::size_t input_dim = header.size() - 3;

  SyntheticCorpus corpus;
  corpus.input_dim = input_dim;
  std::vector<std::pair<std::size_t, std::size_t>> class_dataset_pairs;
  std::size_t line_number = 1;
  while (std::getline(csv, line)) {
    line_number++;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != input_dim + 3) {
      throw std::runtime_error("load_corpus: line " + std::to_string(line_number) +
                               " has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(input_dim + 3));
    }
    Sample sample;
    sample.features.resize(input_dim);
    for (std::size_t j = 0; j < input_dim; ++j) {
      sample.features[j] = std::stod(fields[j]);
    }
    sample.global_identity = std::stoull(fields[input_dim]);
    sample.local_class = std::stoull(fields[input_dim + 1]);
    sample.dataset_id = std::stoull(fields[input_dim + 2]);
    class_dataset_pairs.emplace_back(sample.local_class, sample.dataset_id);
    corpus.samples.push_back(std::move(sample));
  }
  if (corpus.samples.empty()) {
    throw std::runtime_error("load_corpus: corpus has no samples");
  }

  corpus.class_table = build_class_table(class_dataset_pairs);
  corpus.identity_of_class.assign(corpus.class_table.num_classes, 0);
  std::size_t max_identity = 0;
  for (const Sample& sample : corpus.samples) {
    corpus.identity_of_class[sample.local_class] = sample.global_identity;
    max_identity = std::max(max_identity, sample.global_identity);
  }
  corpus.num_identities = max_identity + 1;

  const std::string meta_path = dir + "/corpus_meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw std::runtime_error("load_corpus: cannot open " + meta_path);
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("load_corpus: bad metadata: ") + e.what());
  }
  corpus.train_indices = meta.at("train_indices").get<std::vector<std::size_t>>();
  corpus.eval_indices = meta.at("eval_indices").get<std::vector<std::size_t>>();
  if (meta.contains("num_identities")) {
    corpus.num_identities = meta.at("num_identities").get<std::size_t>();
  }
  for (std::size_t idx : corpus.train_indices) {
    if (idx >= corpus.samples.size()) {
      throw std::runtime_error("load_corpus: train split index out of range");
    }
  }
  for (std::size_t idx : corpus.eval_indices) {
    if (idx >= corpus.samples.size()) {
      throw std::runtime_error("load_corpus: eval split index out of range");
    }
  }
  return corpus;
}

}  // namespace dail
