#include "dail/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dail {

std::vector<double> masked_log_softmax(std::span<const double> logits,
                                       std::span<const std::uint8_t> mask) {
  if (mask.size() != logits.size()) {
    throw std::invalid_argument("masked_log_softmax: mask length " +
                                std::to_string(mask.size()) + " != logits length " +
                                std::to_string(logits.size()));
  }
  if (!all_finite(logits)) {
    throw std::invalid_argument("masked_log_softmax: non-finite logit");
  }

  double max = -std::numeric_limits<double>::infinity();
  bool any_active = false;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (mask[j]) {
      any_active = true;
      if (logits[j] > max) max = logits[j];
    }
  }
  if (!any_active) throw std::invalid_argument("masked_log_softmax: empty active set");

  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (mask[j]) sum += std::exp(logits[j] - max);
  }
  const double lse = max + std::log(sum);

  std::vector<double> out(logits.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (mask[j]) out[j] = logits[j] - lse;
  }
  return out;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const std::vector<std::uint8_t> ones(logits.size(), 1);
  return masked_log_softmax(logits, ones);
}

Matrix l2_normalize_rows(const Matrix& m, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("l2_normalize_rows: eps must be > 0");
  Matrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double norm = std::max(l2_norm(m.row(i)), eps);
    for (std::size_t j = 0; j < m.cols; ++j) out.at(i, j) = m.at(i, j) / norm;
  }
  return out;
}

std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> theta, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be > 0");
  std::vector<double> point(theta.begin(), theta.end());
  std::vector<double> grad(theta.size(), 0.0);
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    const double fp = f(point);
    point[i] = saved - h;
    const double fm = f(point);
    point[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::runtime_error("finite_diff_grad: non-finite function value");
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

double relative_error(std::span<const double> a, std::span<const double> b,
                      double floor) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("relative_error: length mismatch");
  }
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    diff += d * d;
  }
  const double denom = std::max(l2_norm(a) + l2_norm(b), floor);
  return std::sqrt(diff) / denom;
}

}  // namespace dail
