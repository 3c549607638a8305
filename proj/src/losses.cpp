#include "dail/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dail/numerics.hpp"

namespace dail {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCosClamp = 1.0 - 1e-7;
constexpr double kNormEps = 1e-12;

void check_targets(std::span<const std::size_t> targets, std::size_t n,
                   std::size_t num_classes, const char* what) {
  if (targets.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) +
                                " labels, got " + std::to_string(targets.size()));
  }
  for (std::size_t t : targets) {
    if (t >= num_classes) {
      throw std::invalid_argument(std::string(what) + ": label " + std::to_string(t) +
                                  " out of range [0, " + std::to_string(num_classes) +
                                  ")");
    }
  }
}

}  // namespace

void MarginSpec::validate() const {
  if (m1 <= 0.0) throw std::invalid_argument("MarginSpec: m1 must be > 0");
  if (m2 < 0.0) throw std::invalid_argument("MarginSpec: m2 must be >= 0");
  if (m3 < 0.0) throw std::invalid_argument("MarginSpec: m3 must be >= 0");
  if (angular && s <= 0.0) {
    throw std::invalid_argument("MarginSpec: s must be > 0 when angular");
  }
}

Matrix linear_logits(const Matrix& x, const Matrix& w, std::span<const double> b) {
  if (x.cols != w.cols) {
    throw std::invalid_argument("linear_logits: embedding dim " +
                                std::to_string(x.cols) + " != weight dim " +
                                std::to_string(w.cols));
  }
  if (!b.empty() && b.size() != w.rows) {
    throw std::invalid_argument("linear_logits: bias length " +
                                std::to_string(b.size()) + " != class count " +
                                std::to_string(w.rows));
  }
  Matrix logits = matmul_nt(x, w);
  if (!b.empty()) add_row_vector(logits, b);
  return logits;
}

Matrix angular_logits(const Matrix& x, const Matrix& w,
                      std::span<const std::size_t> targets, const MarginSpec& spec) {
  if (!spec.angular) {
    throw std::invalid_argument("angular_logits: spec is not angular");
  }
  spec.validate();
  if (x.cols != w.cols) {
    throw std::invalid_argument("angular_logits: embedding dim " +
                                std::to_string(x.cols) + " != weight dim " +
                                std::to_string(w.cols));
  }
  check_targets(targets, x.rows, w.rows, "angular_logits");

  const Matrix xn = l2_normalize_rows(x, kNormEps);
  const Matrix wn = l2_normalize_rows(w, kNormEps);

  Matrix logits(x.rows, w.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < w.rows; ++j) {
      double c = dot(xn.row(i), wn.row(j));
      c = std::min(std::max(c, -kCosClamp), kCosClamp);
      if (j == targets[i]) {
        const double theta = std::acos(c);
        const double psi = std::min(spec.m1 * theta + spec.m2, kPi);
        logits.at(i, j) = spec.s * (std::cos(psi) - spec.m3);
      } else {
        logits.at(i, j) = spec.s * c;
      }
    }
  }
  return logits;
}

LossOutput dataset_aware_loss(const Matrix& logits,
                              std::span<const std::size_t> targets,
                              const std::vector<std::vector<std::uint8_t>>& masks) {
  const std::size_t n = logits.rows;
  const std::size_t c = logits.cols;
  if (n == 0) throw std::invalid_argument("dataset_aware_loss: empty batch");
  check_targets(targets, n, c, "dataset_aware_loss");
  if (masks.size() != n) {
    throw std::invalid_argument("dataset_aware_loss: expected " + std::to_string(n) +
                                " masks, got " + std::to_string(masks.size()));
  }

  LossOutput out;
  out.grad_logits = Matrix::zeros(n, c);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mask = masks[i];
    if (mask.size() != c) {
      throw std::invalid_argument("dataset_aware_loss: mask " + std::to_string(i) +
                                  " has length " + std::to_string(mask.size()) +
                                  ", expected " + std::to_string(c));
    }
    if (!mask[targets[i]]) {
      throw std::invalid_argument("dataset_aware_loss: target masked out (sample " +
                                  std::to_string(i) + ")");
    }
    const std::vector<double> lp = masked_log_softmax(logits.row(i), mask);
    total -= lp[targets[i]];
    for (std::size_t j = 0; j < c; ++j) {
      if (!mask[j]) continue;  // inactive classes receive exactly zero gradient
      const double p = std::exp(lp[j]);
      out.grad_logits.at(i, j) =
          (p - (j == targets[i] ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

LossOutput domain_loss(const Matrix& domain_logits,
                       std::span<const std::size_t> dataset_ids) {
  const std::size_t n = domain_logits.rows;
  const std::size_t k = domain_logits.cols;
  if (n == 0) throw std::invalid_argument("domain_loss: empty batch");
  check_targets(dataset_ids, n, k, "domain_loss");

  LossOutput out;
  out.grad_logits = Matrix::zeros(n, k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = domain_logits.row(i);
    if (!all_finite(row)) {
      throw std::invalid_argument("domain_loss: non-finite logit");
    }
    double max = row[0];
    for (double v : row) max = std::max(max, v);
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - max);
    const double lse = max + std::log(sum);
    total += lse - row[dataset_ids[i]];
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(row[j] - lse);
      out.grad_logits.at(i, j) =
          (p - (j == dataset_ids[i] ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

LinearLogitsGrad linear_logits_backward(const Matrix& x, const Matrix& w,
                                        bool has_bias, const Matrix& grad_logits) {
  if (grad_logits.rows != x.rows || grad_logits.cols != w.rows) {
    throw std::invalid_argument("linear_logits_backward: gradient shape mismatch");
  }
  LinearLogitsGrad g;
  g.grad_x = matmul(grad_logits, w);       // N x d
  g.grad_w = matmul_tn(grad_logits, x);    // C x d
  if (has_bias) g.grad_b = col_sums(grad_logits);
  return g;
}

AngularLogitsGrad angular_logits_backward(const Matrix& x, const Matrix& w,
                                          std::span<const std::size_t> targets,
                                          const MarginSpec& spec,
                                          const Matrix& grad_logits) {
  if (!spec.angular) {
    throw std::invalid_argument("angular_logits_backward: spec is not angular");
  }
  if (grad_logits.rows != x.rows || grad_logits.cols != w.rows) {
    throw std::invalid_argument("angular_logits_backward: gradient shape mismatch");
  }
  check_targets(targets, x.rows, w.rows, "angular_logits_backward");

  const Matrix xn = l2_normalize_rows(x, kNormEps);
  const Matrix wn = l2_normalize_rows(w, kNormEps);

  AngularLogitsGrad g;
  g.grad_x = Matrix::zeros(x.rows, x.cols);
  g.grad_w = Matrix::zeros(w.rows, w.cols);

  for (std::size_t i = 0; i < x.rows; ++i) {
    const double nx = l2_norm(x.row(i));
    for (std::size_t j = 0; j < w.rows; ++j) {
      const double upstream = grad_logits.at(i, j);
      if (upstream == 0.0) continue;

      const double c_raw = dot(xn.row(i), wn.row(j));
      // Clamped entries (and a target pushed past pi) carry zero gradient.
      double slope;  // d logit / d cos
      if (c_raw <= -kCosClamp || c_raw >= kCosClamp) {
        slope = 0.0;
      } else if (j == targets[i]) {
        const double theta = std::acos(c_raw);
        const double psi = spec.m1 * theta + spec.m2;
        slope = psi < kPi
                    ? spec.s * spec.m1 * std::sin(psi) / std::sqrt(1.0 - c_raw * c_raw)
                    : 0.0;
      } else {
        slope = spec.s;
      }
      if (slope == 0.0) continue;

      const double t = upstream * slope;
      const double nw = l2_norm(w.row(j));
      for (std::size_t d = 0; d < x.cols; ++d) {
        if (nx >= kNormEps) {
          g.grad_x.at(i, d) += t * (wn.at(j, d) - c_raw * xn.at(i, d)) / nx;
        } else {
          g.grad_x.at(i, d) += t * wn.at(j, d) / kNormEps;
        }
        if (nw >= kNormEps) {
          g.grad_w.at(j, d) += t * (xn.at(i, d) - c_raw * wn.at(j, d)) / nw;
        } else {
          g.grad_w.at(j, d) += t * xn.at(i, d) / kNormEps;
        }
      }
    }
  }
  return g;
}

}  // namespace dail
