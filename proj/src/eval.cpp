#include "dail/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dail/losses.hpp"
#include "dail/numerics.hpp"
#include "dail/trainer.hpp"

namespace dail {

std::pair<double, double> verification_accuracy(
    const Matrix& embeddings, const std::vector<VerificationPair>& pairs) {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (const auto& pair : pairs) {
    if (pair.a >= embeddings.rows || pair.b >= embeddings.rows) {
      throw std::invalid_argument("verification_accuracy: pair index out of range");
    }
    (pair.same_identity ? n_pos : n_neg)++;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument(
        "verification_accuracy: need at least one positive and one negative pair");
  }

  const Matrix normed = l2_normalize_rows(embeddings);
  struct Scored {
    double sim;
    bool positive;
  };
  std::vector<Scored> scored;
  scored.reserve(pairs.size());
  for (const auto& pair : pairs) {
    scored.push_back({dot(normed.row(pair.a), normed.row(pair.b)), pair.same_identity});
  }
  std::sort(scored.begin(), scored.end(),
            [](const Scored& a, const Scored& b) { return a.sim < b.sim; });

  // Walk candidate thresholds in increasing order: -inf, midpoints between
  // distinct consecutive similarities, +inf. Prediction is sim >= t.
  // With i pairs below the threshold, correct = negatives among the first i
  // plus positives among the rest. Ties keep the smaller threshold.
  const std::size_t total = scored.size();
  std::size_t pos_above = n_pos;
  std::size_t neg_below = 0;
  std::size_t best_correct = pos_above;  // t = -inf: everything "same"
  double best_threshold = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= total; ++i) {
    if (scored[i - 1].positive) {
      pos_above--;
    } else {
      neg_below++;
    }
    double threshold;
    if (i == total) {
      threshold = std::numeric_limits<double>::infinity();
    } else if (scored[i - 1].sim < scored[i].sim) {
      threshold = 0.5 * (scored[i - 1].sim + scored[i].sim);
    } else {
      continue;  // duplicate similarity; no separating threshold here
    }
    const std::size_t correct = neg_below + pos_above;
    if (correct > best_correct) {
      best_correct = correct;
      best_threshold = threshold;
    }
  }
  return {static_cast<double>(best_correct) / static_cast<double>(total),
          best_threshold};
}

double domain_probe(const Matrix& embeddings,
                    std::span<const std::size_t> dataset_ids, Prng& prng) {
  const std::size_t n = embeddings.rows;
  if (dataset_ids.size() != n) {
    throw std::invalid_argument("domain_probe: label count mismatch");
  }
  std::size_t num_datasets = 0;
  for (std::size_t k : dataset_ids) num_datasets = std::max(num_datasets, k + 1);
  std::vector<std::size_t> present(num_datasets, 0);
  for (std::size_t k : dataset_ids) present[k] = 1;
  if (std::accumulate(present.begin(), present.end(), std::size_t{0}) < 2) {
    throw std::invalid_argument("domain_probe: single dataset");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  prng.shuffle(order);
  const std::size_t n_train = (n * 7) / 10;
  if (n_train == 0 || n_train == n) {
    throw std::invalid_argument("domain_probe: too few samples for a 70/30 split");
  }

  Matrix x_train(n_train, embeddings.cols);
  std::vector<std::size_t> y_train;
  for (std::size_t i = 0; i < n_train; ++i) {
    for (std::size_t j = 0; j < embeddings.cols; ++j) {
      x_train.at(i, j) = embeddings.at(order[i], j);
    }
    y_train.push_back(dataset_ids[order[i]]);
  }

  // Fresh affine softmax head from zeros; convex, so 500 full-batch steps
  // with the trainer's default optimizer settle it.
  const TrainConfig defaults;
  const double lr = defaults.base_lr;
  const double momentum = defaults.momentum;
  Matrix w(num_datasets, embeddings.cols);
  std::vector<double> b(num_datasets, 0.0);
  Matrix w_buf(num_datasets, embeddings.cols);
  std::vector<double> b_buf(num_datasets, 0.0);
  for (int step = 0; step < 500; ++step) {
    const Matrix logits = linear_logits(x_train, w, b);
    const LossOutput out = domain_loss(logits, y_train);
    const LinearLogitsGrad grads =
        linear_logits_backward(x_train, w, true, out.grad_logits);
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      w_buf.data[i] = momentum * w_buf.data[i] + grads.grad_w.data[i];
      w.data[i] -= lr * w_buf.data[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      b_buf[i] = momentum * b_buf[i] + grads.grad_b[i];
      b[i] -= lr * b_buf[i];
    }
  }

  std::size_t correct = 0;
  for (std::size_t i = n_train; i < n; ++i) {
    const auto row = embeddings.row(order[i]);
    std::size_t arg = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < num_datasets; ++k) {
      const double logit = dot(row, w.row(k)) + b[k];
      if (logit > best) {
        best = logit;
        arg = k;
      }
    }
    if (arg == dataset_ids[order[i]]) correct++;
  }
  return static_cast<double>(correct) / static_cast<double>(n - n_train);
}

std::pair<double, double> overlap_consistency(const Matrix& embeddings,
                                              const SyntheticCorpus& corpus,
                                              std::span<const std::size_t> rows,
                                              Prng& prng,
                                              std::size_t n_cross_pairs) {
  if (rows.size() != embeddings.rows) {
    throw std::invalid_argument("overlap_consistency: rows/embeddings mismatch");
  }
  for (std::size_t idx : rows) {
    if (idx >= corpus.samples.size()) {
      throw std::invalid_argument("overlap_consistency: sample index out of range");
    }
  }
  const Matrix normed = l2_normalize_rows(embeddings);

  double same_sum = 0.0;
  std::size_t same_count = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Sample& si = corpus.samples[rows[i]];
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const Sample& sj = corpus.samples[rows[j]];
      if (si.global_identity == sj.global_identity && si.dataset_id != sj.dataset_id) {
        same_sum += dot(normed.row(i), normed.row(j));
        same_count++;
      }
    }
  }
  if (same_count == 0) {
    throw std::invalid_argument(
        "overlap_consistency: no shared identities across datasets");
  }

  bool two_identities = false;
  for (std::size_t i = 1; i < rows.size() && !two_identities; ++i) {
    two_identities = corpus.samples[rows[i]].global_identity !=
                     corpus.samples[rows[0]].global_identity;
  }
  if (!two_identities) {
    throw std::invalid_argument(
        "overlap_consistency: no different-identity pairs available");
  }
  double cross_sum = 0.0;
  for (std::size_t accepted = 0; accepted < n_cross_pairs;) {
    const std::size_t i = prng.below(rows.size());
    const std::size_t j = prng.below(rows.size());
    if (i == j || corpus.samples[rows[i]].global_identity ==
                      corpus.samples[rows[j]].global_identity) {
      continue;
    }
    cross_sum += dot(normed.row(i), normed.row(j));
    accepted++;
  }
  return {same_sum / static_cast<double>(same_count),
          cross_sum / static_cast<double>(n_cross_pairs)};
}

}  // namespace dail
