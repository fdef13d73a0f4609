#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "advense/error.hpp"

namespace advense {

/// Column-oriented matrix of raw anomaly scores, one column per candidate
/// detector. Higher score = more anomalous.
struct ScoreMatrix {
  std::vector<std::string> ids;               // length n, unique
  std::vector<std::string> model_names;       // length N
  std::vector<std::vector<double>> columns;   // N columns, each length n
  std::optional<std::vector<int>> labels;     // 0/1 per observation, 1 = anomaly

  int n() const { return static_cast<int>(ids.size()); }
  int num_models() const { return static_cast<int>(model_names.size()); }

  const std::vector<double>& column(int m) const { return columns[static_cast<std::size_t>(m)]; }

  int model_index(const std::string& name) const {
    for (int m = 0; m < num_models(); ++m) {
      if (model_names[static_cast<std::size_t>(m)] == name) return m;
    }
    throw InputError("score matrix has no model named '" + name + "'");
  }

  void validate() const {
    if (n() < 2) throw InputError("score matrix needs at least 2 observations, got " + std::to_string(n()));
    if (num_models() < 1) throw InputError("score matrix needs at least 1 model column");
    if (columns.size() != model_names.size())
      throw InputError("score matrix has " + std::to_string(columns.size()) + " columns but " +
                       std::to_string(model_names.size()) + " model names");
    for (int m = 0; m < num_models(); ++m) {
      const auto& col = columns[static_cast<std::size_t>(m)];
      if (static_cast<int>(col.size()) != n())
        throw InputError("column '" + model_names[static_cast<std::size_t>(m)] + "' has length " +
                         std::to_string(col.size()) + ", expected " + std::to_string(n()));
      for (int i = 0; i < n(); ++i) {
        if (!std::isfinite(col[static_cast<std::size_t>(i)]))
          throw InputError("non-finite score in column '" + model_names[static_cast<std::size_t>(m)] +
                           "' at index " + std::to_string(i));
      }
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
      if (!seen.insert(id).second) throw InputError("duplicate observation id '" + id + "'");
    }
    if (labels) {
      if (static_cast<int>(labels->size()) != n())
        throw InputError("label column has length " + std::to_string(labels->size()) + ", expected " +
                         std::to_string(n()));
      for (int v : *labels) {
        if (v != 0 && v != 1) throw InputError("labels must be 0 or 1, got " + std::to_string(v));
      }
    }
  }
};

/// Rank transformation: rank 1 goes to the largest score (most anomalous),
/// ties broken by ascending original index, so the output is always a
/// permutation of 1..n.
inline std::vector<int> rank_scores(std::span<const double> scores) {
  const int n = static_cast<int>(scores.size());
  if (n < 2) throw InputError("rank_scores: need at least 2 values, got " + std::to_string(n));
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(scores[static_cast<std::size_t>(i)]))
      throw InputError("rank_scores: non-finite value at index " + std::to_string(i));
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  std::vector<int> ranks(static_cast<std::size_t>(n));
  for (int pos = 0; pos < n; ++pos) ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos + 1;
  return ranks;
}

inline void validate_rank_permutation(std::span<const int> ranks) {
  const int n = static_cast<int>(ranks.size());
  if (n < 2) throw InputError("rank vector needs at least 2 entries, got " + std::to_string(n));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const int r = ranks[static_cast<std::size_t>(i)];
    if (r < 1 || r > n)
      throw InputError("rank " + std::to_string(r) + " at index " + std::to_string(i) + " outside [1, " +
                       std::to_string(n) + "]");
    if (seen[static_cast<std::size_t>(r - 1)]++)
      throw InputError("duplicate rank " + std::to_string(r) + " at index " + std::to_string(i));
  }
}

/// Per-model ranked anomaly lists; every column is a permutation of 1..n.
struct RankMatrix {
  std::vector<std::vector<int>> columns;

  int n() const { return columns.empty() ? 0 : static_cast<int>(columns.front().size()); }
  int num_models() const { return static_cast<int>(columns.size()); }
  const std::vector<int>& column(int m) const { return columns[static_cast<std::size_t>(m)]; }

  static RankMatrix from_scores(const ScoreMatrix& scores) {
    scores.validate();
    RankMatrix rm;
    rm.columns.reserve(scores.columns.size());
    for (const auto& col : scores.columns) rm.columns.push_back(rank_scores(col));
    return rm;
  }

  static RankMatrix from_columns(std::vector<std::vector<int>> cols) {
    if (cols.empty()) throw InputError("rank matrix needs at least 1 column");
    const std::size_t n = cols.front().size();
    for (const auto& c : cols) {
      if (c.size() != n) throw InputError("rank matrix columns have unequal lengths");
      validate_rank_permutation(c);
    }
    return RankMatrix{std::move(cols)};
  }

  /// Column subset (indices into this matrix); columns are already validated.
  RankMatrix restricted(std::span<const int> indices) const {
    RankMatrix rm;
    rm.columns.reserve(indices.size());
    for (int idx : indices) {
      if (idx < 0 || idx >= num_models())
        throw InputError("model index " + std::to_string(idx) + " outside [0, " + std::to_string(num_models()) + ")");
      rm.columns.push_back(columns[static_cast<std::size_t>(idx)]);
    }
    return rm;
  }
};

/// Parameters of the rank-index -> rank-cluster partition. Four clusters:
/// 1 = highest-confidence outliers, 2 = lowest-confidence outliers,
/// 3 = lowest-confidence inliers, 4 = highest-confidence inliers.
struct ClusterConfig {
  double eta = 0.05;     // assumed contamination fraction
  double gamma1 = 0.5;   // in [0.25, 0.5]
  double gamma2 = 3.0;   // in [3, 5]
  static constexpr int num_clusters = 4;
};

struct ClusterBounds {
  int b1 = 0;  // cluster 1 = [1, b1]
  int b2 = 0;  // cluster 2 = [b1+1, b2]
  int b3 = 0;  // cluster 3 = [b2+1, b3], cluster 4 = [b3+1, n]
  int n = 0;
};

inline ClusterBounds cluster_bounds(int n, const ClusterConfig& cfg) {
  if (n < 2) throw ConfigError("cluster partition needs n >= 2, got " + std::to_string(n));
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0))
    throw ConfigError("cluster.eta must lie in (0, 1), got " + std::to_string(cfg.eta));
  if (cfg.gamma1 < 0.25 || cfg.gamma1 > 0.5)
    throw ConfigError("cluster.gamma1 must lie in [0.25, 0.5], got " + std::to_string(cfg.gamma1));
  if (cfg.gamma2 < 3.0 || cfg.gamma2 > 5.0)
    throw ConfigError("cluster.gamma2 must lie in [3, 5], got " + std::to_string(cfg.gamma2));
  const int b1 = static_cast<int>(std::ceil(cfg.eta * cfg.gamma1 * n));
  const int b2 = static_cast<int>(std::ceil(cfg.eta * n));
  const int b3 = static_cast<int>(std::ceil(cfg.eta * n * cfg.gamma2));
  if (!(1 <= b1 && b1 < b2 && b2 < b3 && b3 < n))
    throw ConfigError("cluster boundaries collide for n=" + std::to_string(n) + " (b1=" + std::to_string(b1) +
                      ", b2=" + std::to_string(b2) + ", b3=" + std::to_string(b3) +
                      "); adjust eta/gamma1/gamma2");
  return ClusterBounds{b1, b2, b3, n};
}

namespace detail {
inline int cluster_of_unchecked(int rank, const ClusterBounds& b) {
  if (rank <= b.b1) return 1;
  if (rank <= b.b2) return 2;
  if (rank <= b.b3) return 3;
  return 4;
}
}  // namespace detail

inline int cluster_of_bounds(int rank, const ClusterBounds& b) {
  if (rank < 1 || rank > b.n)
    throw InputError("rank " + std::to_string(rank) + " outside [1, " + std::to_string(b.n) + "]");
  return detail::cluster_of_unchecked(rank, b);
}

inline int cluster_of(int rank, int n, const ClusterConfig& cfg) {
  return cluster_of_bounds(rank, cluster_bounds(n, cfg));
}

inline std::array<int, 4> cluster_sizes_bounds(const ClusterBounds& b) {
  return {b.b1, b.b2 - b.b1, b.b3 - b.b2, b.n - b.b3};
}

inline std::array<int, 4> cluster_sizes(int n, const ClusterConfig& cfg) {
  return cluster_sizes_bounds(cluster_bounds(n, cfg));
}

}  // namespace advense
