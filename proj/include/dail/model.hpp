#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dail/losses.hpp"
#include "dail/matrix.hpp"

namespace dail {

/// One affine layer; w is out x in.
struct LayerParams {
  Matrix w;
  std::vector<double> b;
};

/// Shape blueprint for the three sub-networks. layer_dims lists the output
/// widths of the embedding layers; an empty list means the identity embedder
/// (embeddings = raw input).
struct ModelConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> layer_dims;  // hidden widths..., embedding dim
  std::size_t num_classes = 0;
  std::size_t num_datasets = 0;
  MarginSpec margin;
  double lambda = 0.0;
  bool with_domain_head = false;

  std::size_t embed_dim() const {
    return layer_dims.empty() ? input_dim : layer_dims.back();
  }
  void validate() const;
};

/// All learnable parameters: the embedding MLP, the classification head and
/// (optionally) the dataset classifier head. class_b is used only with a
/// linear (non-angular) margin; angular heads are bias-free.
struct ModelParams {
  std::vector<LayerParams> embed_layers;
  Matrix class_w;                // C x d
  std::vector<double> class_b;   // empty when margin.angular
  Matrix domain_w;               // K x d, empty when no domain head
  std::vector<double> domain_b;
  MarginSpec margin;
  double lambda = 0.0;

  bool has_domain_head() const { return domain_w.rows > 0; }
};

/// Gradients (same shapes as the corresponding ModelParams pieces).
struct ModelGrads {
  std::vector<LayerParams> embed_layers;
  Matrix class_w;
  std::vector<double> class_b;
  Matrix domain_w;
  std::vector<double> domain_b;
};

/// Backprop cache: per-layer pre-activations and activations plus the head
/// outputs. acts.back() are the embeddings when layers exist.
struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> pre_acts;
  std::vector<Matrix> acts;
  Matrix embeddings;
  Matrix class_logits;
  Matrix domain_logits;
};

/// Glorot-uniform weights; embedding-layer biases draw from the same range
/// (an exactly-zero embedding would make the angular normalization singular)
/// while head biases start at zero. The domain head draws from its own seeded
/// stream so the embedder/classifier initialization is identical whether or
/// not a domain head exists.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Zero-filled gradient (or momentum) buffers matching params.
ModelGrads zero_grads(const ModelParams& params);

/// Hidden layers apply affine then ReLU; the final layer is affine only.
ForwardTrace embed_forward(const ModelParams& params, const Matrix& x);

/// Fills trace.class_logits (angular or linear per the margin spec) and
/// trace.domain_logits (affine map; identity in the forward direction as far
/// as the GRL is concerned). Domain logits stay empty without a domain head.
void heads_forward(const ModelParams& params, ForwardTrace& trace,
                   std::span<const std::size_t> targets);

/// The gradient reversal step: exactly -lambda * upstream, elementwise.
/// The forward counterpart is the identity.
Matrix grl_backward(const Matrix& upstream, double lambda);

struct BackwardResult {
  ModelGrads grads;
  double loss_cls = 0.0;
  double loss_d = 0.0;     // meaningful only when has_domain_loss
  bool has_domain_loss = false;
};

/// Full analytic backward for one batch.
/// Stage 1: the embedder is supervised by the classification loss only; the
/// domain head trains on the domain loss with embeddings treated as fixed.
/// Stage 2: the domain-loss gradient additionally reaches the embedder
/// through the gradient reversal layer (scaled by -lambda).
BackwardResult backward(const ModelParams& params, const ForwardTrace& trace,
                        std::span<const std::size_t> targets,
                        std::span<const std::size_t> dataset_ids,
                        const std::vector<std::vector<std::uint8_t>>& masks,
                        int stage);

}  // namespace dail
