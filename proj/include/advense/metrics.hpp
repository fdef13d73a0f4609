#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "advense/error.hpp"
#include "advense/ranking.hpp"

namespace advense {

enum class EvalMetric { pr_auc, prec_at_n };

inline std::string to_string(EvalMetric m) {
  return m == EvalMetric::pr_auc ? "pr_auc" : "prec_at_n";
}

inline EvalMetric eval_metric_from_string(const std::string& s) {
  if (s == "pr_auc" || s == "pr-auc") return EvalMetric::pr_auc;
  if (s == "prec_at_n" || s == "prec-at-n") return EvalMetric::prec_at_n;
  throw ConfigError("unknown metric '" + s + "' (expected pr-auc or prec-at-n)");
}

namespace detail {

inline void require_scores_labels(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw InputError("scores and labels have different lengths: " + std::to_string(scores.size()) + " vs " +
                     std::to_string(labels.size()));
  if (scores.size() < 2) throw InputError("need at least 2 observations");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw InputError("non-finite score at index " + std::to_string(i));
    if (labels[i] != 0 && labels[i] != 1) throw InputError("labels must be 0 or 1");
  }
}

// Descending-score order with the same tie rule the rank transformation
// uses: ties broken by ascending index.
inline std::vector<int> descending_order(std::span<const double> scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)]; });
  return order;
}

}  // namespace detail

/// Average precision: mean of precision@k over the positions k where a true
/// anomaly appears in the descending-score order.
inline double pr_auc(std::span<const double> scores, std::span<const int> labels) {
  detail::require_scores_labels(scores, labels);
  const int positives = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0 || positives == static_cast<int>(labels.size()))
    throw InputError("pr_auc: labels must contain both classes");
  const auto order = detail::descending_order(scores);
  int tp = 0;
  double ap = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[static_cast<std::size_t>(order[k])] == 1) {
      ++tp;
      ap += static_cast<double>(tp) / static_cast<double>(k + 1);
    }
  }
  return ap / positives;
}

/// Fraction of true anomalies among the top-(#anomalies) ranked observations.
inline double prec_at_n(std::span<const double> scores, std::span<const int> labels) {
  detail::require_scores_labels(scores, labels);
  const int positives = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) throw InputError("prec_at_n: labels must contain at least one anomaly");
  const auto order = detail::descending_order(scores);
  int hits = 0;
  for (int k = 0; k < positives; ++k) hits += labels[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
  return static_cast<double>(hits) / positives;
}

inline double evaluate_metric(EvalMetric metric, std::span<const double> scores, std::span<const int> labels) {
  return metric == EvalMetric::pr_auc ? pr_auc(scores, labels) : prec_at_n(scores, labels);
}

namespace detail {

// Fractional ranks (ties get the average position), ascending order.
inline std::vector<double> fractional_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[static_cast<std::size_t>(order[j + 1])] == v[static_cast<std::size_t>(order[i])]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[static_cast<std::size_t>(order[t])] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

/// Spearman's rho: Pearson correlation of the fractional-rank transforms.
inline double spearman(std::span<const double> v1, std::span<const double> v2) {
  if (v1.size() != v2.size())
    throw InputError("spearman: vectors have different lengths: " + std::to_string(v1.size()) + " vs " +
                     std::to_string(v2.size()));
  if (v1.size() < 3) throw InputError("spearman: need at least 3 values");
  for (std::size_t i = 0; i < v1.size(); ++i) {
    if (!std::isfinite(v1[i]) || !std::isfinite(v2[i]))
      throw InputError("spearman: non-finite value at index " + std::to_string(i));
  }
  const auto r1 = detail::fractional_ranks(v1);
  const auto r2 = detail::fractional_ranks(v2);
  const double n = static_cast<double>(r1.size());
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    m1 += r1[i];
    m2 += r2[i];
  }
  m1 /= n;
  m2 /= n;
  double cov = 0.0;
  double var1 = 0.0;
  double var2 = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    cov += (r1[i] - m1) * (r2[i] - m2);
    var1 += (r1[i] - m1) * (r1[i] - m1);
    var2 += (r2[i] - m2) * (r2[i] - m2);
  }
  if (var1 <= 0.0 || var2 <= 0.0) throw InputError("spearman: zero variance input");
  return cov / std::sqrt(var1 * var2);
}

/// Arithmetic mean of per-model metric values (the "Average Score" baseline).
inline double average_score(std::span<const double> values) {
  if (values.empty()) throw InputError("average_score: need at least one value");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

/// Randomly-Sampled Prediction Score: per trial, each observation's rank is
/// drawn from a uniformly random model; the composite rank list is evaluated
/// with the supervised metric and results are averaged over trials.
inline double rsps(const RankMatrix& rm, std::span<const int> labels, EvalMetric metric, std::uint64_t seed,
                   int trials = 30) {
  if (trials < 1) throw InputError("rsps: trials must be >= 1");
  if (static_cast<int>(labels.size()) != rm.n()) throw InputError("rsps: labels length does not match rank matrix");
  const int n = rm.n();
  const int models = rm.num_models();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, models - 1);
  std::vector<double> composite(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (int i = 0; i < n; ++i)
      composite[static_cast<std::size_t>(i)] = -static_cast<double>(rm.column(pick(rng))[static_cast<std::size_t>(i)]);
    acc += evaluate_metric(metric, composite, labels);
  }
  return acc / trials;
}

inline double rsps(const ScoreMatrix& scores, EvalMetric metric, std::uint64_t seed, int trials = 30) {
  if (!scores.labels) throw InputError("rsps: score matrix has no labels");
  return rsps(RankMatrix::from_scores(scores), *scores.labels, metric, seed, trials);
}

}  // namespace advense
