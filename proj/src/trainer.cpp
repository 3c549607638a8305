#include "dail/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dail {

namespace {

constexpr std::uint64_t kEpochStream = 0x31;
constexpr std::uint64_t kCdStream = 0x32;

void sgd_update(Matrix& param, Matrix& buffer, const Matrix& grad, double momentum,
                double lr) {
  for (std::size_t i = 0; i < param.data.size(); ++i) {
    buffer.data[i] = momentum * buffer.data[i] + grad.data[i];
    param.data[i] -= lr * buffer.data[i];
  }
}

void sgd_update(std::vector<double>& param, std::vector<double>& buffer,
                const std::vector<double>& grad, double momentum, double lr) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    buffer[i] = momentum * buffer[i] + grad[i];
    param[i] -= lr * buffer[i];
  }
}

}  // namespace

const char* loss_mode_name(LossMode mode) {
  switch (mode) {
    case LossMode::naive: return "naive";
    case LossMode::dataset_aware: return "dataset_aware";
    case LossMode::dataset_aware_grl: return "dataset_aware_grl";
    case LossMode::dataset_aware_grl_cd: return "dataset_aware_grl_cd";
  }
  throw std::invalid_argument("loss_mode_name: unknown mode");
}

LossMode loss_mode_from_name(const std::string& name) {
  if (name == "naive") return LossMode::naive;
  if (name == "dataset_aware") return LossMode::dataset_aware;
  if (name == "dataset_aware_grl") return LossMode::dataset_aware_grl;
  if (name == "dataset_aware_grl_cd") return LossMode::dataset_aware_grl_cd;
  throw std::invalid_argument("unknown loss_mode '" + name + "'");
}

void TrainConfig::validate() const {
  margin.validate();
  if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
  if (!(cd_p >= 0.0 && cd_p <= 1.0)) {
    throw std::invalid_argument("TrainConfig: cd_p must lie in [0, 1]");
  }
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size >= 1");
  if (stage2_start_step > total_steps) {
    throw std::invalid_argument("TrainConfig: stage2_start_step must be <= total_steps");
  }
  for (std::size_t i = 1; i < lr_decay_steps.size(); ++i) {
    if (lr_decay_steps[i] <= lr_decay_steps[i - 1]) {
      throw std::invalid_argument("TrainConfig: lr_decay_steps must strictly increase");
    }
  }
  if (lr_decay_factor <= 0.0) {
    throw std::invalid_argument("TrainConfig: lr_decay_factor must be > 0");
  }
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
  }
  if (base_lr <= 0.0) throw std::invalid_argument("TrainConfig: base_lr must be > 0");
  if (embed_dim == 0) throw std::invalid_argument("TrainConfig: embed_dim >= 1");
  if (emit_every == 0) throw std::invalid_argument("TrainConfig: emit_every >= 1");
}

double lr_at(const TrainConfig& config, std::size_t step) {
  double lr = config.base_lr;
  for (std::size_t boundary : config.lr_decay_steps) {
    if (boundary <= step) lr *= config.lr_decay_factor;
  }
  return lr;
}

StepMetrics train_step(TrainState& state, const Batch& batch, const ClassTable& table,
                       const TrainConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = batch.x.rows;
  if (batch.targets.size() != n || batch.dataset_ids.size() != n) {
    throw std::invalid_argument("train_step: batch label count mismatch");
  }

  const int stage = state.step < config.stage2_start_step ? 1 : 2;

  // Crossing-dropout draws come from a per-step derived stream, so a resumed
  // run consumes exactly the draws an uninterrupted run would.
  std::vector<std::vector<std::uint8_t>> masks;
  masks.reserve(n);
  switch (config.loss_mode) {
    case LossMode::naive:
      for (std::size_t i = 0; i < n; ++i) {
        masks.emplace_back(table.num_classes, 1);
      }
      break;
    case LossMode::dataset_aware:
    case LossMode::dataset_aware_grl:
      for (std::size_t i = 0; i < n; ++i) {
        masks.push_back(dataset_mask(table, batch.dataset_ids[i]));
      }
      break;
    case LossMode::dataset_aware_grl_cd: {
      Prng cd_rng(mix_seed(state.seed, kCdStream, state.step));
      for (std::size_t i = 0; i < n; ++i) {
        masks.push_back(
            crossing_dropout_mask(table, batch.dataset_ids[i], config.cd_p, cd_rng));
      }
      break;
    }
  }

  ForwardTrace trace = embed_forward(state.params, batch.x);
  heads_forward(state.params, trace, batch.targets);
  BackwardResult back =
      backward(state.params, trace, batch.targets, batch.dataset_ids, masks, stage);

  const double lr = lr_at(config, state.step);
  for (std::size_t l = 0; l < state.params.embed_layers.size(); ++l) {
    sgd_update(state.params.embed_layers[l].w, state.momentum.embed_layers[l].w,
               back.grads.embed_layers[l].w, config.momentum, lr);
    sgd_update(state.params.embed_layers[l].b, state.momentum.embed_layers[l].b,
               back.grads.embed_layers[l].b, config.momentum, lr);
  }
  sgd_update(state.params.class_w, state.momentum.class_w, back.grads.class_w,
             config.momentum, lr);
  sgd_update(state.params.class_b, state.momentum.class_b, back.grads.class_b,
             config.momentum, lr);
  if (state.params.has_domain_head()) {
    sgd_update(state.params.domain_w, state.momentum.domain_w, back.grads.domain_w,
               config.momentum, lr);
    sgd_update(state.params.domain_b, state.momentum.domain_b, back.grads.domain_b,
               config.momentum, lr);
  }

  StepMetrics metrics;
  metrics.step = state.step;
  metrics.stage = stage;
  metrics.loss_cls = back.loss_cls;
  metrics.loss_d = back.loss_d;
  metrics.has_loss_d = back.has_domain_loss;
  metrics.lr = lr;
  metrics.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  state.step++;
  return metrics;
}

std::vector<std::size_t> epoch_permutation(const std::vector<std::size_t>& indices,
                                           std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> perm = indices;
  Prng rng(mix_seed(seed, kEpochStream, epoch));
  rng.shuffle(perm);
  return perm;
}

TrainState init_train_state(const TrainConfig& config, const SyntheticCorpus& corpus) {
  config.validate();
  ModelConfig model_config;
  model_config.input_dim = corpus.input_dim;
  model_config.layer_dims = config.hidden_dims;
  model_config.layer_dims.push_back(config.embed_dim);
  model_config.num_classes = corpus.class_table.num_classes;
  model_config.num_datasets = corpus.class_table.num_datasets;
  model_config.margin = config.margin;
  model_config.lambda = config.lambda;
  model_config.with_domain_head = config.uses_grl();

  TrainState state;
  state.params = init_params(model_config, config.seed);
  state.momentum = zero_grads(state.params);
  state.step = 0;
  state.seed = config.seed;
  return state;
}

TrainResult train(const TrainConfig& config, const SyntheticCorpus& corpus,
                  TrainState state) {
  config.validate();
  if (corpus.train_indices.empty()) {
    throw std::invalid_argument("train: corpus has an empty training split");
  }
  if (corpus.class_table.num_classes == 0) {
    throw std::invalid_argument("train: corpus has no classes");
  }
  if (state.params.class_w.rows != corpus.class_table.num_classes) {
    throw std::invalid_argument("train: state/corpus class count mismatch");
  }
  if (state.params.has_domain_head() &&
      state.params.domain_w.rows != corpus.class_table.num_datasets) {
    throw std::invalid_argument("train: state/corpus dataset count mismatch");
  }

  const std::size_t n_train = corpus.train_indices.size();
  const std::size_t batch_size = std::min(config.batch_size, n_train);
  const std::size_t steps_per_epoch = (n_train + batch_size - 1) / batch_size;

  TrainResult result;
  std::vector<std::size_t> perm;
  std::size_t perm_epoch = static_cast<std::size_t>(-1);

  while (state.step < config.total_steps) {
    const std::size_t epoch = state.step / steps_per_epoch;
    const std::size_t pos = state.step % steps_per_epoch;
    if (epoch != perm_epoch) {
      perm = epoch_permutation(corpus.train_indices, state.seed, epoch);
      perm_epoch = epoch;
    }
    const std::size_t begin = pos * batch_size;
    const std::size_t end = std::min(begin + batch_size, n_train);

    Batch batch;
    batch.x = Matrix(end - begin, corpus.input_dim);
    for (std::size_t i = begin; i < end; ++i) {
      const Sample& sample = corpus.samples[perm[i]];
      for (std::size_t j = 0; j < corpus.input_dim; ++j) {
        batch.x.at(i - begin, j) = sample.features[j];
      }
      batch.targets.push_back(sample.local_class);
      batch.dataset_ids.push_back(sample.dataset_id);
    }

    const StepMetrics metrics = train_step(state, batch, corpus.class_table, config);
    if (metrics.step % config.emit_every == 0 || metrics.step + 1 == config.total_steps) {
      result.metrics.push_back(metrics);
    }
  }

  result.params = state.params;
  result.final_state = std::move(state);
  return result;
}

TrainResult train(const TrainConfig& config, const SyntheticCorpus& corpus) {
  return train(config, corpus, init_train_state(config, corpus));
}

}  // namespace dail
