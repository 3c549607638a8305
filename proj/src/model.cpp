#include "dail/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dail/prng.hpp"

namespace dail {

namespace {

constexpr std::uint64_t kInitStream = 0x11;
constexpr std::uint64_t kInitDomainStream = 0x12;

Matrix glorot_matrix(std::size_t out, std::size_t in, Prng& prng) {
  const double a = std::sqrt(6.0 / static_cast<double>(in + out));
  Matrix w(out, in);
  for (double& v : w.data) v = (2.0 * prng.uniform() - 1.0) * a;
  return w;
}

// Biases draw from the same uniform range. A zero bias would leave a sample
// with an all-dead hidden layer at an exactly-zero embedding, where the
// angular normalization is singular.
std::vector<double> init_bias(std::size_t out, std::size_t in, Prng& prng) {
  const double a = std::sqrt(6.0 / static_cast<double>(in + out));
  std::vector<double> b(out);
  for (double& v : b) v = (2.0 * prng.uniform() - 1.0) * a;
  return b;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim == 0) throw std::invalid_argument("ModelConfig: input_dim must be >= 1");
  if (num_classes == 0) {
    throw std::invalid_argument("ModelConfig: num_classes must be >= 1");
  }
  for (std::size_t d : layer_dims) {
    if (d == 0) throw std::invalid_argument("ModelConfig: zero layer width");
  }
  if (with_domain_head && num_datasets == 0) {
    throw std::invalid_argument("ModelConfig: domain head needs num_datasets >= 1");
  }
  if (lambda < 0.0) throw std::invalid_argument("ModelConfig: lambda must be >= 0");
  margin.validate();
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams params;
  params.margin = config.margin;
  params.lambda = config.lambda;

  Prng main(mix_seed(seed, kInitStream));
  std::size_t in = config.input_dim;
  for (std::size_t out : config.layer_dims) {
    Matrix w = glorot_matrix(out, in, main);
    params.embed_layers.push_back({std::move(w), init_bias(out, in, main)});
    in = out;
  }
  params.class_w = glorot_matrix(config.num_classes, in, main);
  if (!config.margin.angular) {
    params.class_b.assign(config.num_classes, 0.0);
  }

  if (config.with_domain_head) {
    Prng dom(mix_seed(seed, kInitDomainStream));
    params.domain_w = glorot_matrix(config.num_datasets, in, dom);
    params.domain_b.assign(config.num_datasets, 0.0);
  }
  return params;
}

ModelGrads zero_grads(const ModelParams& params) {
  ModelGrads g;
  for (const auto& layer : params.embed_layers) {
    g.embed_layers.push_back({Matrix::zeros(layer.w.rows, layer.w.cols),
                              std::vector<double>(layer.b.size(), 0.0)});
  }
  g.class_w = Matrix::zeros(params.class_w.rows, params.class_w.cols);
  g.class_b.assign(params.class_b.size(), 0.0);
  g.domain_w = Matrix::zeros(params.domain_w.rows, params.domain_w.cols);
  g.domain_b.assign(params.domain_b.size(), 0.0);
  return g;
}

ForwardTrace embed_forward(const ModelParams& params, const Matrix& x) {
  ForwardTrace trace;
  trace.input = x;
  Matrix current = x;
  const std::size_t num_layers = params.embed_layers.size();
  for (std::size_t l = 0; l < num_layers; ++l) {
    const auto& layer = params.embed_layers[l];
    if (current.cols != layer.w.cols) {
      throw std::invalid_argument("embed_forward: layer " + std::to_string(l) +
                                  " expects width " + std::to_string(layer.w.cols) +
                                  ", got " + std::to_string(current.cols));
    }
    Matrix z = matmul_nt(current, layer.w);
    add_row_vector(z, layer.b);
    trace.pre_acts.push_back(z);
    if (l + 1 < num_layers) {
      for (double& v : z.data) v = v > 0.0 ? v : 0.0;  // ReLU on hidden layers
    }
    trace.acts.push_back(z);
    current = std::move(z);
  }
  trace.embeddings = current;
  return trace;
}

void heads_forward(const ModelParams& params, ForwardTrace& trace,
                   std::span<const std::size_t> targets) {
  const Matrix& x = trace.embeddings;
  if (params.margin.angular) {
    trace.class_logits = angular_logits(x, params.class_w, targets, params.margin);
  } else {
    trace.class_logits = linear_logits(x, params.class_w, params.class_b);
  }
  if (params.has_domain_head()) {
    trace.domain_logits = linear_logits(x, params.domain_w, params.domain_b);
  }
}

Matrix grl_backward(const Matrix& upstream, double lambda) {
  Matrix out(upstream.rows, upstream.cols);
  for (std::size_t i = 0; i < upstream.data.size(); ++i) {
    out.data[i] = -lambda * upstream.data[i];
  }
  return out;
}

BackwardResult backward(const ModelParams& params, const ForwardTrace& trace,
                        std::span<const std::size_t> targets,
                        std::span<const std::size_t> dataset_ids,
                        const std::vector<std::vector<std::uint8_t>>& masks,
                        int stage) {
  if (stage != 1 && stage != 2) {
    throw std::invalid_argument("backward: invalid stage " + std::to_string(stage));
  }

  BackwardResult result;
  result.grads = zero_grads(params);

  // Classification path.
  const LossOutput cls = dataset_aware_loss(trace.class_logits, targets, masks);
  result.loss_cls = cls.loss;

  Matrix grad_embed;  // dL/d embeddings
  if (params.margin.angular) {
    AngularLogitsGrad g = angular_logits_backward(
        trace.embeddings, params.class_w, targets, params.margin, cls.grad_logits);
    result.grads.class_w = std::move(g.grad_w);
    grad_embed = std::move(g.grad_x);
  } else {
    LinearLogitsGrad g = linear_logits_backward(trace.embeddings, params.class_w,
                                                !params.class_b.empty(),
                                                cls.grad_logits);
    result.grads.class_w = std::move(g.grad_w);
    result.grads.class_b = std::move(g.grad_b);
    grad_embed = std::move(g.grad_x);
  }

  // Domain path: the head always trains on the domain loss; the embedder sees
  // it only in stage 2, through the reversal layer.
  if (params.has_domain_head()) {
    const LossOutput dom = domain_loss(trace.domain_logits, dataset_ids);
    result.loss_d = dom.loss;
    result.has_domain_loss = true;
    LinearLogitsGrad g = linear_logits_backward(trace.embeddings, params.domain_w,
                                                true, dom.grad_logits);
    result.grads.domain_w = std::move(g.grad_w);
    result.grads.domain_b = std::move(g.grad_b);
    if (stage == 2) {
      axpy(1.0, grl_backward(g.grad_x, params.lambda), grad_embed);
    }
  }

  // Embedder backward; hidden layers carry the ReLU derivative.
  const std::size_t num_layers = params.embed_layers.size();
  Matrix delta = std::move(grad_embed);  // dL/d act[l]
  for (std::size_t l = num_layers; l-- > 0;) {
    if (l + 1 < num_layers) {
      const Matrix& z = trace.pre_acts[l];
      for (std::size_t i = 0; i < delta.data.size(); ++i) {
        if (z.data[i] <= 0.0) delta.data[i] = 0.0;
      }
    }
    const Matrix& prev = l == 0 ? trace.input : trace.acts[l - 1];
    result.grads.embed_layers[l].w = matmul_tn(delta, prev);
    result.grads.embed_layers[l].b = col_sums(delta);
    if (l > 0) delta = matmul(delta, params.embed_layers[l].w);
  }

  return result;
}

}  // namespace dail
