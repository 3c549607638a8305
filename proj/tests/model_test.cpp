#include <cmath>

#include <stdexcept>

#include <doctest.h>

#include "dail/model.hpp"
#include "dail/numerics.hpp"
#include "dail/prng.hpp"

using namespace dail;

namespace {

ModelConfig tiny_config(bool with_domain, MarginSpec margin = MarginSpec::linear()) {
  ModelConfig config;
  config.input_dim = 3;
  config.layer_dims = {4, 2};
  config.num_classes = 4;
  config.num_datasets = 2;
  config.margin = margin;
  config.lambda = 0.1;
  config.with_domain_head = with_domain;
  return config;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Prng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.gaussian();
  return m;
}

struct TinyBatch {
  Matrix x;
  std::vector<std::size_t> targets;
  std::vector<std::size_t> dataset_ids;
  std::vector<std::vector<std::uint8_t>> masks;
};

TinyBatch tiny_batch(Prng& rng, std::size_t n = 3) {
  TinyBatch batch;
  batch.x = random_matrix(n, 3, rng);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t target = rng.below(4);
    batch.targets.push_back(target);
    batch.dataset_ids.push_back(target < 2 ? 0 : 1);  // classes 0,1 -> ds 0
    std::vector<std::uint8_t> mask(4, 0);
    mask[0] = mask[1] = batch.dataset_ids.back() == 0;
    mask[2] = mask[3] = batch.dataset_ids.back() == 1;
    batch.masks.push_back(std::move(mask));
  }
  return batch;
}

}  // namespace

TEST_CASE("embed_forward") {
  // Identity configuration: no layers at all.
  ModelConfig identity;
  identity.input_dim = 3;
  identity.num_classes = 2;
  identity.margin = MarginSpec::linear();
  ModelParams params = init_params(identity, 7);
  Prng rng(1);
  const Matrix x = random_matrix(2, 3, rng);
  CHECK(embed_forward(params, x).embeddings.data == x.data);

  // All-zero weights and biases: embeddings all zero.
  ModelParams zeroed = init_params(tiny_config(false), 7);
  for (auto& layer : zeroed.embed_layers) {
    for (double& v : layer.w.data) v = 0.0;
    for (double& v : layer.b) v = 0.0;
  }
  const Matrix embeddings = embed_forward(zeroed, x).embeddings;
  for (double v : embeddings.data) CHECK(v == 0.0);

  // Hand-set 2x2 single hidden layer against a manual computation.
  ModelConfig hand;
  hand.input_dim = 2;
  hand.layer_dims = {2, 2};
  hand.num_classes = 2;
  ModelParams handset = init_params(hand, 7);
  handset.embed_layers[0].w.data = {1.0, -1.0, 2.0, 0.5};
  handset.embed_layers[0].b = {0.1, -4.0};
  handset.embed_layers[1].w.data = {1.0, 1.0, 0.0, 3.0};
  handset.embed_layers[1].b = {0.0, 0.25};
  Matrix input(1, 2);
  input.at(0, 0) = 1.5;
  input.at(0, 1) = -0.5;
  // Layer 0 pre-activation: (1*1.5 - 1*(-0.5) + 0.1, 2*1.5 + 0.5*(-0.5) - 4)
  //                       = (2.1, -1.25); ReLU -> (2.1, 0).
  // Layer 1 (affine only): (2.1 + 0, 0 + 3*0 + 0.25) = (2.1, 0.25).
  const ForwardTrace trace = embed_forward(handset, input);
  CHECK(trace.embeddings.at(0, 0) == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(trace.embeddings.at(0, 1) == doctest::Approx(0.25).epsilon(1e-12));

  CHECK_THROWS_AS(embed_forward(handset, random_matrix(1, 3, rng)),
                  std::invalid_argument);
}

TEST_CASE("heads_forward matches standalone loss-module calls") {
  Prng rng(42);
  const TinyBatch batch = tiny_batch(rng);

  for (bool angular : {false, true}) {
    const MarginSpec margin =
        angular ? MarginSpec::arcface(16.0, 0.5) : MarginSpec::linear();
    ModelParams params = init_params(tiny_config(true, margin), 11);
    ForwardTrace trace = embed_forward(params, batch.x);
    heads_forward(params, trace, batch.targets);

    const Matrix expected_class =
        angular
            ? angular_logits(trace.embeddings, params.class_w, batch.targets, margin)
            : linear_logits(trace.embeddings, params.class_w, params.class_b);
    const Matrix expected_domain =
        linear_logits(trace.embeddings, params.domain_w, params.domain_b);
    for (std::size_t i = 0; i < expected_class.data.size(); ++i) {
      CHECK(trace.class_logits.data[i] ==
            doctest::Approx(expected_class.data[i]).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < expected_domain.data.size(); ++i) {
      CHECK(trace.domain_logits.data[i] ==
            doctest::Approx(expected_domain.data[i]).epsilon(1e-12));
    }
  }

  // Zeroed domain head: uniform prediction, loss = ln K.
  ModelParams params = init_params(tiny_config(true), 11);
  for (double& v : params.domain_w.data) v = 0.0;
  ForwardTrace trace = embed_forward(params, batch.x);
  heads_forward(params, trace, batch.targets);
  const LossOutput out = domain_loss(trace.domain_logits, batch.dataset_ids);
  CHECK(out.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("grl_backward") {
  Matrix upstream(1, 2);
  upstream.at(0, 0) = 1.0;
  upstream.at(0, 1) = -2.0;
  const Matrix reversed = grl_backward(upstream, 0.1);
  CHECK(reversed.at(0, 0) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(reversed.at(0, 1) == doctest::Approx(0.2).epsilon(1e-15));

  const Matrix zero = grl_backward(upstream, 0.0);
  for (double v : zero.data) CHECK(v == 0.0);

  // Forward through the GRL position is the identity: logits do not depend
  // on lambda.
  Prng rng(5);
  const TinyBatch batch = tiny_batch(rng);
  ModelParams a = init_params(tiny_config(true), 3);
  ModelParams b = a;
  b.lambda = 17.0;
  ForwardTrace ta = embed_forward(a, batch.x);
  heads_forward(a, ta, batch.targets);
  ForwardTrace tb = embed_forward(b, batch.x);
  heads_forward(b, tb, batch.targets);
  CHECK(ta.class_logits.data == tb.class_logits.data);
  CHECK(ta.domain_logits.data == tb.domain_logits.data);
}

// Test-only reference: backprop an embedding gradient through the MLP layers.
static std::vector<Matrix> reference_embedder_backprop(const ModelParams& params,
                                                       const ForwardTrace& trace,
                                                       Matrix delta) {
  const std::size_t num_layers = params.embed_layers.size();
  std::vector<Matrix> grads(num_layers);
  for (std::size_t l = num_layers; l-- > 0;) {
    if (l + 1 < num_layers) {
      for (std::size_t i = 0; i < delta.data.size(); ++i) {
        if (trace.pre_acts[l].data[i] <= 0.0) delta.data[i] = 0.0;
      }
    }
    const Matrix& prev = l == 0 ? trace.input : trace.acts[l - 1];
    grads[l] = matmul_tn(delta, prev);
    if (l > 0) delta = matmul(delta, params.embed_layers[l].w);
  }
  return grads;
}

TEST_CASE("backward stage semantics") {
  Prng rng(88);
  const TinyBatch batch = tiny_batch(rng);
  ModelParams params = init_params(tiny_config(true, MarginSpec::arcface(16.0)), 9);
  ForwardTrace trace = embed_forward(params, batch.x);
  heads_forward(params, trace, batch.targets);

  const BackwardResult stage1 =
      backward(params, trace, batch.targets, batch.dataset_ids, batch.masks, 1);
  const BackwardResult stage2 =
      backward(params, trace, batch.targets, batch.dataset_ids, batch.masks, 2);

  // Head gradients are stage-independent, and the domain head's gradient is
  // exactly the standalone domain-loss backward.
  CHECK(stage1.grads.class_w.data == stage2.grads.class_w.data);
  CHECK(stage1.grads.domain_w.data == stage2.grads.domain_w.data);
  const LossOutput dom = domain_loss(trace.domain_logits, batch.dataset_ids);
  const LinearLogitsGrad dom_grads =
      linear_logits_backward(trace.embeddings, params.domain_w, true, dom.grad_logits);
  CHECK(dom_grads.grad_w.data == stage1.grads.domain_w.data);

  // Stage-2 embedder gradient = stage-1 gradient - lambda * (domain-loss
  // backprop through the embedder), with the domain path computed separately.
  const std::vector<Matrix> domain_path =
      reference_embedder_backprop(params, trace, dom_grads.grad_x);
  for (std::size_t l = 0; l < params.embed_layers.size(); ++l) {
    const auto& g1 = stage1.grads.embed_layers[l].w.data;
    const auto& g2 = stage2.grads.embed_layers[l].w.data;
    for (std::size_t i = 0; i < g1.size(); ++i) {
      CHECK(g2[i] == doctest::Approx(g1[i] - params.lambda * domain_path[l].data[i])
                         .epsilon(1e-12));
    }
  }

  // lambda = 0: stage 2 equals stage 1 on every embedder gradient.
  ModelParams no_lambda = params;
  no_lambda.lambda = 0.0;
  const BackwardResult stage2_zero =
      backward(no_lambda, trace, batch.targets, batch.dataset_ids, batch.masks, 2);
  for (std::size_t l = 0; l < params.embed_layers.size(); ++l) {
    for (std::size_t i = 0; i < stage1.grads.embed_layers[l].w.data.size(); ++i) {
      CHECK(stage2_zero.grads.embed_layers[l].w.data[i] ==
            doctest::Approx(stage1.grads.embed_layers[l].w.data[i]).epsilon(1e-12));
    }
  }

  // Stage 1 cuts the domain path into the embedder entirely: doubling lambda
  // changes nothing there.
  ModelParams doubled = params;
  doubled.lambda = 2.0 * params.lambda;
  const BackwardResult stage1_doubled =
      backward(doubled, trace, batch.targets, batch.dataset_ids, batch.masks, 1);
  for (std::size_t l = 0; l < params.embed_layers.size(); ++l) {
    CHECK(stage1_doubled.grads.embed_layers[l].w.data ==
          stage1.grads.embed_layers[l].w.data);
  }

  CHECK_THROWS_AS(
      backward(params, trace, batch.targets, batch.dataset_ids, batch.masks, 3),
      std::invalid_argument);
}

TEST_CASE("inactive class weight rows receive exactly zero gradient") {
  Prng rng(64);
  for (int trial = 0; trial < 20; ++trial) {
    TinyBatch batch = tiny_batch(rng);
    // Force the whole batch into dataset 0 so classes 2,3 are inactive.
    for (std::size_t i = 0; i < batch.targets.size(); ++i) {
      batch.targets[i] = rng.below(2);
      batch.dataset_ids[i] = 0;
      batch.masks[i] = {1, 1, 0, 0};
    }
    const MarginSpec margin =
        trial % 2 == 0 ? MarginSpec::arcface(16.0) : MarginSpec::linear();
    ModelParams params = init_params(tiny_config(true, margin), 100 + trial);
    ForwardTrace trace = embed_forward(params, batch.x);
    heads_forward(params, trace, batch.targets);
    const BackwardResult back =
        backward(params, trace, batch.targets, batch.dataset_ids, batch.masks, 2);
    for (std::size_t j = 2; j < 4; ++j) {
      for (std::size_t d = 0; d < params.class_w.cols; ++d) {
        CHECK(back.grads.class_w.at(j, d) == 0.0);
      }
    }
  }
}

TEST_CASE("every parameter gradient matches finite differences across 20 configs") {
  // Random tiny models; both stages, angular and linear heads, random masks.
  for (std::uint64_t config_seed = 1; config_seed <= 20; ++config_seed) {
    Prng rng(mix_seed(9000, config_seed));
    const bool angular = rng.uniform() < 0.5;
    const bool with_domain = rng.uniform() < 0.7;
    const int stage = with_domain && rng.uniform() < 0.5 ? 2 : 1;
    const MarginSpec margin = angular
                                  ? MarginSpec::combined(0.8 + 0.4 * rng.uniform(),
                                                         0.5 * rng.uniform(),
                                                         0.2 * rng.uniform(), 8.0)
                                  : MarginSpec::linear();
    ModelConfig config = tiny_config(with_domain, margin);
    ModelParams params = init_params(config, config_seed);

    TinyBatch batch = tiny_batch(rng);
    ForwardTrace trace = embed_forward(params, batch.x);
    heads_forward(params, trace, batch.targets);
    const BackwardResult back =
        backward(params, trace, batch.targets, batch.dataset_ids, batch.masks, stage);

    const auto objective = [&](const ModelParams& p, bool domain_path) {
      ForwardTrace t = embed_forward(p, batch.x);
      heads_forward(p, t, batch.targets);
      if (domain_path) return domain_loss(t.domain_logits, batch.dataset_ids).loss;
      const double cls =
          dataset_aware_loss(t.class_logits, batch.targets, batch.masks).loss;
      if (stage == 2 && p.has_domain_head()) {
        return cls - p.lambda * domain_loss(t.domain_logits, batch.dataset_ids).loss;
      }
      return cls;
    };

    const auto check_group = [&](std::vector<double>& values,
                                 const std::vector<double>& analytic,
                                 bool domain_path) {
      const std::vector<double> saved = values;
      const auto f = [&](std::span<const double> theta) {
        std::copy(theta.begin(), theta.end(), values.begin());
        const double v = objective(params, domain_path);
        return v;
      };
      const auto fd = finite_diff_grad(f, saved, 1e-6);
      values = saved;
      CHECK(relative_error(analytic, fd) < 1e-5);
    };

    for (std::size_t l = 0; l < params.embed_layers.size(); ++l) {
      check_group(params.embed_layers[l].w.data, back.grads.embed_layers[l].w.data,
                  false);
      check_group(params.embed_layers[l].b, back.grads.embed_layers[l].b, false);
    }
    check_group(params.class_w.data, back.grads.class_w.data, false);
    if (!params.class_b.empty()) {
      check_group(params.class_b, back.grads.class_b, false);
    }
    if (params.has_domain_head()) {
      check_group(params.domain_w.data, back.grads.domain_w.data, true);
      check_group(params.domain_b, back.grads.domain_b, true);
    }
  }
}
