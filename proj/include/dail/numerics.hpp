#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dail/matrix.hpp"

namespace dail {

/// Log-softmax of one logit row restricted to the active entries of a binary
/// mask. Active outputs are log-probabilities (their exps sum to 1); inactive
/// entries are set to -infinity as an "ignore" sentinel. Log-sum-exp is
/// computed with max subtraction over the active set only, so inactive
/// entries can never contaminate the result.
///
/// Throws on an all-zero mask ("empty active set"), on mask/logit length
/// mismatch, and on non-finite input.
std::vector<double> masked_log_softmax(std::span<const double> logits,
                                       std::span<const std::uint8_t> mask);

/// Unmasked numerically stable log-softmax.
std::vector<double> log_softmax(std::span<const double> logits);

/// Each output row = row / max(||row||_2, eps). eps must be positive.
Matrix l2_normalize_rows(const Matrix& m, double eps = 1e-12);

/// Central-difference gradient estimate of a scalar function:
/// g_i = (f(theta + h e_i) - f(theta - h e_i)) / (2h).
/// Throws if f evaluates to a non-finite value.
std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> theta, double h);

/// ||a - b|| / max(||a|| + ||b||, floor); the relative error measure used by
/// every gradient check in the test and gradcheck suites.
double relative_error(std::span<const double> a, std::span<const double> b,
                      double floor = 1e-12);

}  // namespace dail
