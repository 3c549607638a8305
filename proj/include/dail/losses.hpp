#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dail/matrix.hpp"

namespace dail {

/// Angular-margin parameterization. The target-class logit is
///   s * (cos(min(m1*theta + m2, pi)) - m3)
/// and every other logit is s * cos(theta_j), with theta the angle between
/// the normalized embedding and the normalized class weight row. Covers:
///   (1, 0,  0)  plain normalized softmax (identity margin)
///   (m1,0,  0)  multiplicative angular margin
///   (1, m2, 0)  additive angular margin
///   (1, 0, m3)  additive cosine margin
/// and combined settings of all three. When angular is false the margins are
/// ignored and logits are the plain affine map W x + b.
struct MarginSpec {
  double m1 = 1.0;   // multiplicative angular margin; > 0 (values < 1 allowed
                     // for combined-margin settings)
  double m2 = 0.0;   // additive angular margin, radians
  double m3 = 0.0;   // additive cosine margin
  double s = 1.0;    // logit scale; > 0 when angular
  bool angular = false;

  static MarginSpec linear() { return MarginSpec{}; }
  static MarginSpec identity_angular(double s = 1.0) {
    return MarginSpec{1.0, 0.0, 0.0, s, true};
  }
  static MarginSpec arcface(double s = 64.0, double m = 0.5) {
    return MarginSpec{1.0, m, 0.0, s, true};
  }
  static MarginSpec cosface(double s = 64.0, double m = 0.35) {
    return MarginSpec{1.0, 0.0, m, s, true};
  }
  static MarginSpec sphereface(double m = 1.35, double s = 64.0) {
    return MarginSpec{m, 0.0, 0.0, s, true};
  }
  static MarginSpec combined(double m1, double m2, double m3, double s = 64.0) {
    return MarginSpec{m1, m2, m3, s, true};
  }

  bool is_identity() const { return m1 == 1.0 && m2 == 0.0 && m3 == 0.0; }
  void validate() const;
};

/// Loss value plus its gradient with respect to the logits.
struct LossOutput {
  double loss = 0.0;
  Matrix grad_logits;
};

/// logits[i][j] = W_j . x_i + b_j. x is N x d, W is C x d, b has length C
/// (empty means no bias).
Matrix linear_logits(const Matrix& x, const Matrix& w, std::span<const double> b);

/// Angular-margin logits, no bias. Rows of x and w are L2-normalized
/// internally; cosines are clamped to [-1+1e-7, 1-1e-7] before arccos.
/// The margin applies only to each sample's target column.
Matrix angular_logits(const Matrix& x, const Matrix& w,
                      std::span<const std::size_t> targets, const MarginSpec& spec);

/// Dataset-aware softmax cross-entropy: per sample, the softmax normalizer
/// runs over that sample's active classes only. grad_logits[i][j] is
/// (p_ij - 1{j==target_i}) / N for active j and exactly zero for inactive j,
/// which is the property that stops repulsive gradients from reaching
/// other-dataset classes. With all-ones masks this is the plain softmax loss.
LossOutput dataset_aware_loss(const Matrix& logits,
                              std::span<const std::size_t> targets,
                              const std::vector<std::vector<std::uint8_t>>& masks);

/// Mean softmax cross-entropy of the dataset classifier head over K datasets.
LossOutput domain_loss(const Matrix& domain_logits,
                       std::span<const std::size_t> dataset_ids);

/// Backward of linear_logits: accumulates nothing, returns fresh gradients.
/// grad_b is left empty when b was empty.
struct LinearLogitsGrad {
  Matrix grad_x;
  Matrix grad_w;
  std::vector<double> grad_b;
};
LinearLogitsGrad linear_logits_backward(const Matrix& x, const Matrix& w,
                                        bool has_bias, const Matrix& grad_logits);

/// Backward of angular_logits. Entries clamped in the forward pass (cosine
/// clamp or m1*theta+m2 >= pi) propagate zero gradient.
struct AngularLogitsGrad {
  Matrix grad_x;
  Matrix grad_w;
};
AngularLogitsGrad angular_logits_backward(const Matrix& x, const Matrix& w,
                                          std::span<const std::size_t> targets,
                                          const MarginSpec& spec,
                                          const Matrix& grad_logits);

}  // namespace dail
