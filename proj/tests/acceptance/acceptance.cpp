// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs on a laptop CPU in a few minutes; the ablation-style
// criteria average five seeded runs each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "dail/checkpoint.hpp"
#include "dail/cli.hpp"
#include "dail/config.hpp"
#include "dail/corpus_io.hpp"
#include "dail/experiment.hpp"
#include "dail/gradcheck.hpp"
#include "dail/numerics.hpp"
#include "dail/trainer.hpp"

using namespace dail;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool max_abs_diff_below(const std::vector<double>& a, const std::vector<double>& b,
                        double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

bool embedder_and_classifier_close(const ModelParams& a, const ModelParams& b,
                                   double tol) {
  if (a.embed_layers.size() != b.embed_layers.size()) return false;
  for (std::size_t l = 0; l < a.embed_layers.size(); ++l) {
    if (!max_abs_diff_below(a.embed_layers[l].w.data, b.embed_layers[l].w.data, tol) ||
        !max_abs_diff_below(a.embed_layers[l].b, b.embed_layers[l].b, tol)) {
      return false;
    }
  }
  return max_abs_diff_below(a.class_w.data, b.class_w.data, tol) &&
         max_abs_diff_below(a.class_b, b.class_b, tol);
}

// ---------------------------------------------------------------------------
// 1. Mask correctness (exact partition of the class space)
// ---------------------------------------------------------------------------
bool criterion_masks(std::string& detail) {
  Prng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t num_datasets = 1 + rng.below(6);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t cls = 0;
    for (std::size_t k = 0; k < num_datasets; ++k) {
      const std::size_t count = 1 + rng.below(12);
      for (std::size_t c = 0; c < count; ++c) pairs.emplace_back(cls++, k);
    }
    const ClassTable table = build_class_table(pairs);
    std::vector<std::size_t> coverage(table.num_classes, 0);
    for (std::size_t k = 0; k < num_datasets; ++k) {
      const auto mask = dataset_mask(table, k);
      std::size_t ones = 0;
      for (std::size_t j = 0; j < mask.size(); ++j) {
        ones += mask[j];
        coverage[j] += mask[j];
      }
      if (ones != table.per_dataset_class_count[k]) {
        detail = "popcount mismatch";
        return false;
      }
    }
    for (std::size_t c : coverage) {
      if (c != 1) {
        detail = "masks do not partition the classes";
        return false;
      }
    }
  }
  detail = "100 random class tables";
  return true;
}

// ---------------------------------------------------------------------------
// 2. Single-dataset equivalence: dataset-aware loss and training reduce to
//    the plain softmax versions when K = 1
// ---------------------------------------------------------------------------
bool criterion_single_dataset(std::string& detail) {
  // Loss-level equality on random logits.
  Prng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix logits(3, 8);
    for (double& v : logits.data) v = 6.0 * (rng.uniform() - 0.5);
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < 3; ++i) targets.push_back(rng.below(8));
    const std::vector<std::vector<std::uint8_t>> ones(
        3, std::vector<std::uint8_t>(8, 1));
    const LossOutput masked = dataset_aware_loss(logits, targets, ones);
    double plain = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      plain -= log_softmax(logits.row(i))[targets[i]];
    }
    plain /= 3.0;
    if (std::abs(masked.loss - plain) > 1e-12) {
      detail = "loss differs from plain softmax";
      return false;
    }
  }

  // Trajectory-level equality on a K = 1 corpus.
  GenConfig gen;
  gen.num_datasets = 1;
  gen.identities_per_dataset = 10;
  gen.overlap_fraction = 0.0;
  gen.samples_per_identity = 10;
  gen.input_dim = 6;
  gen.seed = 11;
  const SyntheticCorpus corpus = generate_corpus(gen);

  TrainConfig config;
  config.total_steps = 300;
  config.stage2_start_step = 100;
  config.lr_decay_steps = {100, 175};
  config.batch_size = 32;
  config.hidden_dims = {16};
  config.embed_dim = 8;
  config.seed = 4;

  config.loss_mode = LossMode::naive;
  const TrainResult naive = train(config, corpus);
  config.loss_mode = LossMode::dataset_aware;
  const TrainResult aware = train(config, corpus);

  if (!embedder_and_classifier_close(naive.params, aware.params, 1e-12)) {
    detail = "trajectories diverged";
    return false;
  }
  for (std::size_t i = 0; i < naive.metrics.size(); ++i) {
    if (naive.metrics[i].loss_cls != aware.metrics[i].loss_cls) {
      detail = "loss streams diverged";
      return false;
    }
  }
  detail = "losses equal, 300-step trajectories coincide";
  return true;
}

// ---------------------------------------------------------------------------
// 3. Gradient sparsity: inactive classes receive exactly zero gradient
// ---------------------------------------------------------------------------
bool criterion_sparsity(std::string& detail) {
  GenConfig gen;
  gen.num_datasets = 2;
  gen.identities_per_dataset = 6;
  gen.overlap_fraction = 0.5;  // plant overlapping identities
  gen.samples_per_identity = 6;
  gen.input_dim = 5;
  gen.seed = 23;
  const SyntheticCorpus corpus = generate_corpus(gen);
  const ClassTable& table = corpus.class_table;

  Prng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    // Single-dataset batch: all of the other dataset's classes are inactive,
    // including the other labels of overlapping identities.
    const std::size_t active_ds = trial % 2;
    std::vector<const Sample*> pool;
    for (const Sample& sample : corpus.samples) {
      if (sample.dataset_id == active_ds) pool.push_back(&sample);
    }
    const std::size_t n = 4 + rng.below(8);
    Batch batch;
    batch.x = Matrix(n, corpus.input_dim);
    std::vector<std::vector<std::uint8_t>> masks;
    for (std::size_t i = 0; i < n; ++i) {
      const Sample& sample = *pool[rng.below(pool.size())];
      for (std::size_t j = 0; j < corpus.input_dim; ++j) {
        batch.x.at(i, j) = sample.features[j];
      }
      batch.targets.push_back(sample.local_class);
      batch.dataset_ids.push_back(sample.dataset_id);
      masks.push_back(dataset_mask(table, active_ds));
    }

    ModelConfig model_config;
    model_config.input_dim = corpus.input_dim;
    model_config.layer_dims = {8, 4};
    model_config.num_classes = table.num_classes;
    model_config.num_datasets = table.num_datasets;
    model_config.margin =
        trial % 2 == 0 ? MarginSpec::arcface(16.0) : MarginSpec::linear();
    ModelParams params = init_params(model_config, 1000 + trial);
    ForwardTrace trace = embed_forward(params, batch.x);
    heads_forward(params, trace, batch.targets);
    const BackwardResult back =
        backward(params, trace, batch.targets, batch.dataset_ids, masks, 1);

    for (std::size_t j = 0; j < table.num_classes; ++j) {
      if (table.dataset_of[j] == active_ds) continue;
      for (std::size_t d = 0; d < params.class_w.cols; ++d) {
        if (back.grads.class_w.at(j, d) != 0.0) {
          detail = "inactive class received gradient";
          return false;
        }
      }
    }

    // Per-sample logit gradients of masked-out classes are exactly zero.
    const LossOutput out = dataset_aware_loss(trace.class_logits, batch.targets, masks);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < table.num_classes; ++j) {
        if (!masks[i][j] && out.grad_logits.at(i, j) != 0.0) {
          detail = "masked logit received gradient";
          return false;
        }
      }
    }
  }
  detail = "50 random batches, exact zeros";
  return true;
}

// ---------------------------------------------------------------------------
// 4. Gradient checks across modes, stages and margins
// ---------------------------------------------------------------------------
bool criterion_gradcheck(std::string& detail) {
  const auto results = run_gradcheck(1);
  double worst = 0.0;
  for (const auto& result : results) worst = std::max(worst, result.max_rel_error);
  if (worst >= 1e-5) {
    detail = "worst relative error " + std::to_string(worst);
    return false;
  }
  if (run_command({"gradcheck"}) != 0) {
    detail = "gradcheck command exited nonzero";
    return false;
  }
  std::ostringstream out;
  out.precision(2);
  out << std::scientific << "worst relative error " << worst;
  detail = out.str();
  return true;
}

// ---------------------------------------------------------------------------
// 5. GRL semantics
// ---------------------------------------------------------------------------
bool criterion_grl(std::string& detail) {
  // Backward is exactly -lambda * upstream.
  Prng rng(3);
  Matrix upstream(4, 6);
  for (double& v : upstream.data) v = rng.gaussian();
  const double lambda = 0.37;
  const Matrix reversed = grl_backward(upstream, lambda);
  for (std::size_t i = 0; i < upstream.data.size(); ++i) {
    if (reversed.data[i] != -lambda * upstream.data[i]) {
      detail = "backward is not exactly -lambda x upstream";
      return false;
    }
  }

  // Forward identity: logits are bitwise independent of lambda.
  GenConfig gen;
  gen.num_datasets = 2;
  gen.identities_per_dataset = 5;
  gen.overlap_fraction = 0.4;
  gen.samples_per_identity = 6;
  gen.input_dim = 5;
  gen.seed = 13;
  const SyntheticCorpus corpus = generate_corpus(gen);

  TrainConfig base;
  base.loss_mode = LossMode::dataset_aware_grl;
  base.total_steps = 200;
  base.stage2_start_step = 0;
  base.lr_decay_steps = {100};
  base.batch_size = 16;
  base.hidden_dims = {8};
  base.embed_dim = 4;
  base.seed = 6;

  {
    TrainState a = init_train_state(base, corpus);
    TrainState b = a;
    b.params.lambda = 123.0;
    Matrix x(4, corpus.input_dim);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < corpus.input_dim; ++j) {
        x.at(i, j) = corpus.samples[i].features[j];
      }
    }
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < 4; ++i) {
      targets.push_back(corpus.samples[i].local_class);
    }
    ForwardTrace ta = embed_forward(a.params, x);
    heads_forward(a.params, ta, targets);
    ForwardTrace tb = embed_forward(b.params, x);
    heads_forward(b.params, tb, targets);
    if (ta.class_logits.data != tb.class_logits.data ||
        ta.domain_logits.data != tb.domain_logits.data) {
      detail = "forward depends on lambda";
      return false;
    }
  }

  // lambda = 0 stage-2 trajectory equals the stage-1-style trajectory on
  // (W_f, W_y).
  TrainConfig all_stage2 = base;
  all_stage2.lambda = 0.0;
  all_stage2.stage2_start_step = 0;
  TrainConfig all_stage1 = base;
  all_stage1.lambda = 0.0;
  all_stage1.stage2_start_step = all_stage1.total_steps;
  const TrainResult s2 = train(all_stage2, corpus);
  const TrainResult s1 = train(all_stage1, corpus);
  if (!embedder_and_classifier_close(s2.params, s1.params, 1e-12)) {
    detail = "lambda=0 stage-2 trajectory differs from stage 1";
    return false;
  }
  detail = "identity forward, exact reversal, lambda=0 equivalence";
  return true;
}

// ---------------------------------------------------------------------------
// 6. Crossing dropout endpoints and admission rate
// ---------------------------------------------------------------------------
bool criterion_crossing_dropout(std::string& detail) {
  Prng table_rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t num_datasets = 2 + table_rng.below(3);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t cls = 0;
    for (std::size_t k = 0; k < num_datasets; ++k) {
      const std::size_t count = 1 + table_rng.below(8);
      for (std::size_t c = 0; c < count; ++c) pairs.emplace_back(cls++, k);
    }
    const ClassTable table = build_class_table(pairs);
    const std::size_t k = table_rng.below(num_datasets);
    Prng rng(100 + trial);
    if (crossing_dropout_mask(table, k, 0.0, rng) != dataset_mask(table, k)) {
      detail = "p=0 does not reproduce the dataset mask";
      return false;
    }
    const auto all = crossing_dropout_mask(table, k, 1.0, rng);
    for (std::uint8_t bit : all) {
      if (!bit) {
        detail = "p=1 is not all-ones";
        return false;
      }
    }
  }

  // Admission rate at p = 0.01 over one million cross-dataset draws.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.emplace_back(0, 0);
  const std::size_t foreign = 10000;
  for (std::size_t j = 0; j < foreign; ++j) pairs.emplace_back(1 + j, 1);
  const ClassTable table = build_class_table(pairs);
  Prng rng(2718);
  std::size_t active = 0;
  const std::size_t rounds = 100;  // 1e6 cross-dataset draws
  for (std::size_t r = 0; r < rounds; ++r) {
    const auto mask = crossing_dropout_mask(table, 0, 0.01, rng);
    for (std::size_t j = 1; j < mask.size(); ++j) active += mask[j];
  }
  const double fraction =
      static_cast<double>(active) / static_cast<double>(rounds * foreign);
  const double band = 3.0 * std::sqrt(0.01 * 0.99 / 1e6);
  if (std::abs(fraction - 0.01) >= band) {
    detail = "admission rate " + std::to_string(fraction) + " outside 0.01 +/- " +
             std::to_string(band);
    return false;
  }
  std::ostringstream out;
  out.precision(5);
  out << "admission rate " << fraction << " within 0.01 +/- " << band;
  detail = out.str();
  return true;
}

// ---------------------------------------------------------------------------
// 7. Directional reproduction of the ablation ordering
// ---------------------------------------------------------------------------
struct ModeStats {
  std::vector<double> verification;
  std::vector<double> probe;
  std::vector<double> overlap;
};

ModeStats run_mode(LossMode mode, const GenConfig& gen_base, std::size_t seeds) {
  ModeStats stats;
  for (std::size_t s = 0; s < seeds; ++s) {
    GenConfig gen = gen_base;
    gen.seed = gen_base.seed + s;
    const SyntheticCorpus corpus = generate_corpus(gen);
    TrainConfig config;  // desk-scale defaults
    config.loss_mode = mode;
    config.seed = gen.seed;
    const TrainResult result = train(config, corpus);
    const EvalOutcome outcome = evaluate_model(result.params, corpus, 500, gen.seed);
    stats.verification.push_back(outcome.report.verification_accuracy);
    if (outcome.report.has_domain_probe) {
      stats.probe.push_back(outcome.report.domain_probe_accuracy);
    }
    if (outcome.report.has_overlap) {
      stats.overlap.push_back(outcome.report.overlap_same_id_cosine);
    }
  }
  return stats;
}

bool criterion_ablation_ordering(std::string& detail) {
  const GenConfig gen;  // defaults: K=3, rho=0.3, shift=0.5
  const std::size_t seeds = 5;
  const ModeStats naive = run_mode(LossMode::naive, gen, seeds);
  const ModeStats aware = run_mode(LossMode::dataset_aware, gen, seeds);
  const ModeStats grl = run_mode(LossMode::dataset_aware_grl, gen, seeds);

  const double v_naive = mean_of(naive.verification);
  const double v_aware = mean_of(aware.verification);
  const double v_grl = mean_of(grl.verification);
  const double p_aware = mean_of(aware.probe);
  const double p_grl = mean_of(grl.probe);

  std::ostringstream out;
  out.precision(4);
  out << std::fixed << "verification naive " << v_naive << ", DA " << v_aware
      << ", DA+GRL " << v_grl << "; probe DA " << p_aware << ", DA+GRL " << p_grl;
  detail = out.str();

  if (v_aware < v_naive + 0.02) return false;       // DA >= Naive + 2 points
  if (v_grl < v_aware - 0.005) return false;        // DA+GRL >= DA - 0.5 points
  if (p_grl > p_aware - 0.10) return false;         // probe drops >= 10 points
  return true;
}

// ---------------------------------------------------------------------------
// 8. Overlap healing on a heavily shared corpus
// ---------------------------------------------------------------------------
bool criterion_overlap_healing(std::string& detail) {
  GenConfig gen;
  gen.overlap_fraction = 0.5;
  const std::size_t seeds = 5;
  const ModeStats naive = run_mode(LossMode::naive, gen, seeds);
  const ModeStats aware = run_mode(LossMode::dataset_aware, gen, seeds);
  const double same_naive = mean_of(naive.overlap);
  const double same_aware = mean_of(aware.overlap);

  std::ostringstream out;
  out.precision(4);
  out << std::fixed << "same-identity cross-dataset cosine naive " << same_naive
      << ", DA " << same_aware;
  detail = out.str();
  return same_aware >= same_naive + 0.05;
}

// ---------------------------------------------------------------------------
// 9. Determinism and persistence
// ---------------------------------------------------------------------------
std::vector<std::string> metrics_lines_without_wall(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto record = nlohmann::ordered_json::parse(line);
    record.erase("wall_ms");
    lines.push_back(record.dump());
  }
  return lines;
}

bool criterion_determinism(std::string& detail) {
  const fs::path root = fs::temp_directory_path() / "dail_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto config_path = root / "run.cfg";
  {
    std::ofstream cfg(config_path);
    cfg << "gen.identities_per_dataset = 8\n"
        << "gen.samples_per_identity = 10\n"
        << "train.loss_mode = dataset_aware_grl_cd\n"
        << "train.total_steps = 240\n"
        << "train.stage2_start_step = 80\n"
        << "train.lr_decay_steps = 80, 140\n"
        << "train.hidden_dims = 16\n"
        << "train.embed_dim = 8\n"
        << "eval.pairs = 100\n";
  }
  const std::string data_dir = (root / "data").string();
  if (run_command({"gen", "--config", config_path.string(), "--out", data_dir}) != 0) {
    detail = "gen failed";
    return false;
  }
  for (const char* run : {"a", "b"}) {
    if (run_command({"train", "--config", config_path.string(), "--data", data_dir,
                     "--out", (root / run).string()}) != 0) {
      detail = "train failed";
      return false;
    }
  }
  const auto lines_a = metrics_lines_without_wall(root / "a" / "metrics.jsonl");
  const auto lines_b = metrics_lines_without_wall(root / "b" / "metrics.jsonl");
  if (lines_a.empty() || lines_a != lines_b) {
    detail = "metrics streams differ between identical runs";
    return false;
  }

  // Checkpoint resume equals uninterrupted training.
  const SyntheticCorpus corpus = load_corpus(data_dir);
  TrainConfig config = parse_config("").train;
  config.loss_mode = LossMode::dataset_aware_grl_cd;
  config.total_steps = 240;
  config.stage2_start_step = 80;
  config.lr_decay_steps = {80, 140};
  config.hidden_dims = {16};
  config.embed_dim = 8;
  const TrainResult full = train(config, corpus);

  TrainConfig half = config;
  half.total_steps = 130;
  const TrainResult part = train(half, corpus);
  const auto ckpt_path = (root / "half.bin").string();
  save_checkpoint(ckpt_path, make_checkpoint(part.final_state, half));
  const TrainResult resumed =
      train(config, corpus, state_from_checkpoint(load_checkpoint(ckpt_path)));

  bool equal = embedder_and_classifier_close(resumed.params, full.params, 1e-12);
  equal = equal && max_abs_diff_below(resumed.params.domain_w.data,
                                      full.params.domain_w.data, 1e-12);
  fs::remove_all(root);
  if (!equal) {
    detail = "resumed run differs from uninterrupted run";
    return false;
  }
  detail = "identical metrics bytes; resume matches to 1e-12";
  return true;
}

// ---------------------------------------------------------------------------
// 10. Verification metric equals the brute-force threshold oracle
// ---------------------------------------------------------------------------
std::pair<double, double> brute_force_accuracy(const std::vector<double>& sims,
                                               const std::vector<bool>& positive) {
  std::vector<double> sorted = sims;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> candidates = {-std::numeric_limits<double>::infinity(),
                                    std::numeric_limits<double>::infinity()};
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1] < sorted[i]) {
      candidates.push_back(0.5 * (sorted[i - 1] + sorted[i]));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  double best_acc = -1.0;
  double best_threshold = 0.0;
  for (double t : candidates) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < sims.size(); ++i) {
      if ((sims[i] >= t) == positive[i]) correct++;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(sims.size());
    if (acc > best_acc) {
      best_acc = acc;
      best_threshold = t;
    }
  }
  return {best_acc, best_threshold};
}

bool criterion_verification_oracle(std::string& detail) {
  Prng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_pairs = 2 + rng.below(40);
    Matrix embeddings(2 * n_pairs, 4);
    for (double& v : embeddings.data) v = rng.gaussian();
    std::vector<VerificationPair> pairs;
    for (std::size_t p = 0; p < n_pairs; ++p) {
      const bool positive = p == 0 ? true : (p == 1 ? false : rng.uniform() < 0.5);
      pairs.push_back({2 * p, 2 * p + 1, positive});
    }
    if (trial % 4 == 0) {
      // Inject duplicate similarity values.
      for (std::size_t d = 0; d < 4; ++d) {
        embeddings.at(2, d) = embeddings.at(0, d);
        embeddings.at(3, d) = embeddings.at(1, d);
      }
    }
    const Matrix normed = l2_normalize_rows(embeddings);
    std::vector<double> sims;
    std::vector<bool> positive;
    for (const auto& pair : pairs) {
      sims.push_back(dot(normed.row(pair.a), normed.row(pair.b)));
      positive.push_back(pair.same_identity);
    }
    const auto expected = brute_force_accuracy(sims, positive);
    const auto actual = verification_accuracy(embeddings, pairs);
    if (actual.first != expected.first || actual.second != expected.second) {
      detail = "sweep disagrees with the oracle on trial " + std::to_string(trial);
      return false;
    }
  }
  detail = "200 random pair sets, exact agreement";
  return true;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"mask correctness", criterion_masks},
      {"single-dataset equivalence", criterion_single_dataset},
      {"gradient sparsity", criterion_sparsity},
      {"gradient checks", criterion_gradcheck},
      {"GRL semantics", criterion_grl},
      {"crossing dropout", criterion_crossing_dropout},
      {"ablation ordering", criterion_ablation_ordering},
      {"overlap healing", criterion_overlap_healing},
      {"determinism & persistence", criterion_determinism},
      {"verification threshold oracle", criterion_verification_oracle},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %zu. %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), secs, detail.empty() ? "" : ": ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) failures++;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
