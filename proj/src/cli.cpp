#include "dail/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dail/checkpoint.hpp"
#include "dail/config.hpp"
#include "dail/corpus_io.hpp"
#include "dail/eval.hpp"
#include "dail/experiment.hpp"
#include "dail/gradcheck.hpp"
#include "dail/trainer.hpp"

namespace dail {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

RunConfig load_run_config(const std::string& config_path) {
  RunConfig config =
      config_path.empty() ? parse_config("") : parse_config(read_file(config_path));
  if (const char* env = std::getenv("DAIL_SEED")) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      throw std::runtime_error(std::string("invalid DAIL_SEED value '") + env + "'");
    }
    override_seeds(config, seed);
  }
  return config;
}

nlohmann::ordered_json metrics_to_json(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["stage"] = m.stage;
  j["loss_cls"] = m.loss_cls;
  if (m.has_loss_d) j["loss_d"] = m.loss_d;
  j["lr"] = m.lr;
  j["wall_ms"] = m.wall_ms;
  return j;
}

void write_metrics(const std::string& path, const std::vector<StepMetrics>& metrics) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const StepMetrics& m : metrics) out << metrics_to_json(m).dump() << "\n";
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["verification_accuracy"] = report.verification_accuracy;
  j["best_threshold"] = report.best_threshold;
  j["n_pos"] = report.n_pos;
  j["n_neg"] = report.n_neg;
  if (report.has_domain_probe) {
    j["domain_probe_accuracy"] = report.domain_probe_accuracy;
  } else {
    j["domain_probe_accuracy"] = nullptr;
  }
  if (report.has_overlap) {
    j["overlap_same_id_cosine"] = report.overlap_same_id_cosine;
    j["cross_id_cosine"] = report.cross_id_cosine;
  } else {
    j["overlap_same_id_cosine"] = nullptr;
    j["cross_id_cosine"] = nullptr;
  }
  return j;
}

int command_gen(const std::string& config_path, const std::string& out_dir) {
  const RunConfig config = load_run_config(config_path);
  const SyntheticCorpus corpus = generate_corpus(config.gen);
  write_corpus(out_dir, corpus, config.gen);
  std::cout << "wrote " << corpus.samples.size() << " samples, "
            << corpus.class_table.num_classes << " classes, "
            << corpus.class_table.num_datasets << " datasets to " << out_dir << "\n";
  return 0;
}

int command_train(const std::string& config_path, const std::string& data_dir,
                  const std::string& out_dir, const std::string& resume_path) {
  const RunConfig config = load_run_config(config_path);
  const SyntheticCorpus corpus = load_corpus(data_dir);

  TrainResult result;
  if (resume_path.empty()) {
    result = train(config.train, corpus);
  } else {
    TrainState state = state_from_checkpoint(load_checkpoint(resume_path));
    result = train(config.train, corpus, std::move(state));
  }

  std::filesystem::create_directories(out_dir);
  write_metrics(out_dir + "/metrics.jsonl", result.metrics);
  save_checkpoint(out_dir + "/checkpoint.bin",
                  make_checkpoint(result.final_state, config.train));
  if (!result.metrics.empty()) {
    const StepMetrics& last = result.metrics.back();
    std::cout << "trained " << config.train.total_steps << " steps; final loss_cls "
              << last.loss_cls;
    if (last.has_loss_d) std::cout << ", loss_d " << last.loss_d;
    std::cout << "\n";
  }
  std::cout << "wrote " << out_dir << "/metrics.jsonl and " << out_dir
            << "/checkpoint.bin\n";
  return 0;
}

int command_eval(const std::string& checkpoint_path, const std::string& data_dir,
                 const std::string& config_path, std::size_t pairs_override,
                 const std::string& out_path) {
  RunConfig config = load_run_config(config_path);
  if (pairs_override > 0) config.eval.pairs = pairs_override;

  const TrainState state = state_from_checkpoint(load_checkpoint(checkpoint_path));
  const SyntheticCorpus corpus = load_corpus(data_dir);
  const EvalOutcome outcome =
      evaluate_model(state.params, corpus, config.eval.pairs, config.eval.seed);

  for (const std::string& note : outcome.notes) std::cerr << note << "\n";
  const std::string text = report_to_json(outcome.report).dump(2);
  std::cout << text << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << text << "\n";
  }
  return 0;
}

int command_gradcheck(std::uint64_t seed) {
  const auto results = run_gradcheck(seed);
  double worst = 0.0;
  for (const auto& result : results) {
    std::cout << result.group << "  max relative error " << std::scientific
              << result.max_rel_error << std::defaultfloat << "\n";
    worst = std::max(worst, result.max_rel_error);
  }
  if (worst >= 1e-4) {
    std::cerr << "gradient check failed: worst relative error " << worst << "\n";
    return 2;
  }
  std::cout << "all parameter groups below 1e-4\n";
  return 0;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = mean_of(v);
  double sum = 0.0;
  for (double x : v) sum += (x - mean) * (x - mean);
  return std::sqrt(sum / static_cast<double>(v.size() - 1));
}

int command_ablate(const std::string& config_path, const std::string& out_dir,
                   std::size_t num_seeds) {
  const RunConfig base = load_run_config(config_path);
  const LossMode modes[] = {LossMode::naive, LossMode::dataset_aware,
                            LossMode::dataset_aware_grl,
                            LossMode::dataset_aware_grl_cd};

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir + "/ablation.csv");
  if (!csv) throw std::runtime_error("cannot open " + out_dir + "/ablation.csv");
  csv << "mode,seed,verification_accuracy,domain_probe_accuracy,"
         "overlap_same_id_cosine\n";
  csv.precision(10);

  std::map<LossMode, std::vector<double>> verif, probe, overlap;
  for (std::size_t s = 0; s < num_seeds; ++s) {
    const std::uint64_t seed = base.gen.seed + s;
    GenConfig gen = base.gen;
    gen.seed = seed;
    const SyntheticCorpus corpus = generate_corpus(gen);
    for (LossMode mode : modes) {
      TrainConfig train_config = base.train;
      train_config.loss_mode = mode;
      train_config.seed = seed;
      const TrainResult result = train(train_config, corpus);
      const EvalOutcome outcome =
          evaluate_model(result.params, corpus, base.eval.pairs, seed);

      const double v = outcome.report.verification_accuracy;
      const double p = outcome.report.has_domain_probe
                           ? outcome.report.domain_probe_accuracy
                           : std::nan("");
      const double o = outcome.report.has_overlap
                           ? outcome.report.overlap_same_id_cosine
                           : std::nan("");
      verif[mode].push_back(v);
      probe[mode].push_back(p);
      overlap[mode].push_back(o);
      csv << loss_mode_name(mode) << "," << seed << "," << v << "," << p << "," << o
          << "\n";
      std::cout << loss_mode_name(mode) << " seed " << seed << ": verification " << v
                << ", probe " << p << "\n";
    }
  }

  std::ostringstream table;
  table.precision(4);
  table << std::fixed;
  table << "mode                     verification_acc     domain_probe_acc     "
           "overlap_cos\n";
  for (LossMode mode : modes) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-24s %.4f +/- %.4f    %.4f +/- %.4f    %.4f\n",
                  loss_mode_name(mode), mean_of(verif[mode]), stddev_of(verif[mode]),
                  mean_of(probe[mode]), stddev_of(probe[mode]), mean_of(overlap[mode]));
    table << line;
  }
  std::ofstream txt(out_dir + "/ablation.txt");
  if (!txt) throw std::runtime_error("cannot open " + out_dir + "/ablation.txt");
  txt << table.str();
  std::cout << table.str();
  std::cout << "wrote " << out_dir << "/ablation.csv and " << out_dir
            << "/ablation.txt\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Multi-dataset training laboratory: dataset-aware losses, "
               "gradient-reversal domain adaptation and crossing dropout on "
               "synthetic corpora"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, checkpoint_path, resume_path, out_path;
  std::size_t pairs_override = 0;
  std::uint64_t gradcheck_seed = 1;
  std::size_t ablate_seeds = 5;

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen->add_option("--config", config_path, "Config file (key = value)");
  gen->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* train = app.add_subcommand("train", "Train on a generated corpus");
  train->add_option("--config", config_path, "Config file (key = value)");
  train->add_option("--data", data_dir, "Corpus directory")->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--resume", resume_path, "Checkpoint to continue from");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval->add_option("--data", data_dir, "Corpus directory")->required();
  eval->add_option("--config", config_path, "Config file (key = value)");
  eval->add_option("--pairs", pairs_override,
                   "Verification pairs (positives and negatives each)");
  eval->add_option("--out", out_path, "Also write the report here");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--seed", gradcheck_seed, "Seed for the tiny model");

  CLI::App* ablate =
      app.add_subcommand("ablate", "Compare the four loss modes over several seeds");
  ablate->add_option("--config", config_path, "Config file (key = value)");
  ablate->add_option("--out", out_dir, "Output directory")->required();
  ablate->add_option("--seeds", ablate_seeds, "Seeds per mode");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return command_gen(config_path, out_dir);
    if (train->parsed()) {
      return command_train(config_path, data_dir, out_dir, resume_path);
    }
    if (eval->parsed()) {
      return command_eval(checkpoint_path, data_dir, config_path, pairs_override,
                          out_path);
    }
    if (gradcheck->parsed()) return command_gradcheck(gradcheck_seed);
    if (ablate->parsed()) return command_ablate(config_path, out_dir, ablate_seeds);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace dail
