#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "advense/error.hpp"

namespace advense {

using FeatureMatrix = std::vector<std::vector<double>>;  // n rows x d features

enum class DetectorKind { knn_dist, mahalanobis, histogram, pca_residual, lof_lite };

inline std::string to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::knn_dist: return "knn_dist";
    case DetectorKind::mahalanobis: return "mahalanobis";
    case DetectorKind::histogram: return "histogram";
    case DetectorKind::pca_residual: return "pca_residual";
    case DetectorKind::lof_lite: return "lof_lite";
  }
  throw ConfigError("unknown detector kind");
}

inline DetectorKind detector_kind_from_string(const std::string& s) {
  if (s == "knn_dist") return DetectorKind::knn_dist;
  if (s == "mahalanobis") return DetectorKind::mahalanobis;
  if (s == "histogram") return DetectorKind::histogram;
  if (s == "pca_residual") return DetectorKind::pca_residual;
  if (s == "lof_lite") return DetectorKind::lof_lite;
  throw ConfigError("unknown detector kind '" + s + "'");
}

struct DetectorSpec {
  std::string name;
  DetectorKind kind = DetectorKind::knn_dist;
  int k = 15;          // knn_dist / lof_lite neighbors, in [3, 50]
  int bins = 16;       // histogram bins per dimension, in [5, 64]
  int components = 2;  // pca_residual components, in [1, d]
};

namespace detail {

inline void require_features(const FeatureMatrix& x) {
  if (x.size() < 2) throw InputError("detector needs at least 2 observations");
  const std::size_t d = x.front().size();
  if (d == 0) throw InputError("detector needs at least 1 feature");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != d) throw InputError("feature rows have unequal lengths at row " + std::to_string(i));
    for (double v : x[i]) {
      if (!std::isfinite(v)) throw InputError("non-finite feature at row " + std::to_string(i));
    }
  }
}

struct KnnProfile {
  std::vector<double> mean_kdist;          // mean distance to the k nearest neighbors
  std::vector<std::vector<int>> neighbors; // the k nearest neighbor indices
};

inline KnnProfile knn_profile(const FeatureMatrix& x, int k) {
  const int n = static_cast<int>(x.size());
  const int d = static_cast<int>(x.front().size());
  KnnProfile prof;
  prof.mean_kdist.resize(static_cast<std::size_t>(n));
  prof.neighbors.resize(static_cast<std::size_t>(n));
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int f = 0; f < d; ++f) {
        const double diff = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)] -
                            x[static_cast<std::size_t>(j)][static_cast<std::size_t>(f)];
        s += diff * diff;
      }
      dist[static_cast<std::size_t>(j)] = {s, j};
    }
    dist[static_cast<std::size_t>(i)].first = std::numeric_limits<double>::infinity();  // exclude self
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    double sum = 0.0;
    auto& nb = prof.neighbors[static_cast<std::size_t>(i)];
    nb.resize(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) {
      sum += std::sqrt(dist[static_cast<std::size_t>(t)].first);
      nb[static_cast<std::size_t>(t)] = dist[static_cast<std::size_t>(t)].second;
    }
    prof.mean_kdist[static_cast<std::size_t>(i)] = sum / k;
  }
  return prof;
}

inline std::vector<double> column_means(const FeatureMatrix& x) {
  const std::size_t d = x.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& row : x)
    for (std::size_t f = 0; f < d; ++f) mean[f] += row[f];
  for (auto& m : mean) m /= static_cast<double>(x.size());
  return mean;
}

inline std::vector<std::vector<double>> covariance(const FeatureMatrix& x, const std::vector<double>& mean) {
  const std::size_t n = x.size();
  const std::size_t d = mean.size();
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& row : x) {
    for (std::size_t a = 0; a < d; ++a) {
      const double da = row[a] - mean[a];
      for (std::size_t b = a; b < d; ++b) cov[a][b] += da * (row[b] - mean[b]);
    }
  }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      cov[a][b] /= static_cast<double>(n - 1);
      cov[b][a] = cov[a][b];
    }
  return cov;
}

// In-place Cholesky, lower triangle; false when the matrix is not positive
// definite.
inline bool cholesky(std::vector<std::vector<double>>& a) {
  const std::size_t d = a.size();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (std::size_t t = 0; t < j; ++t) s -= a[i][t] * a[j][t];
      if (i == j) {
        if (s <= 0.0) return false;
        a[i][i] = std::sqrt(s);
      } else {
        a[i][j] = s / a[j][j];
      }
    }
    for (std::size_t j = i + 1; j < d; ++j) a[i][j] = 0.0;
  }
  return true;
}

inline double mahalanobis_sq(const std::vector<std::vector<double>>& chol, const std::vector<double>& diff) {
  // Solve L y = diff; the squared Mahalanobis distance is |y|^2.
  const std::size_t d = diff.size();
  std::vector<double> y(d);
  for (std::size_t i = 0; i < d; ++i) {
    double s = diff[i];
    for (std::size_t t = 0; t < i; ++t) s -= chol[i][t] * y[t];
    y[i] = s / chol[i][i];
  }
  double out = 0.0;
  for (double v : y) out += v * v;
  return out;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix; eigenpairs sorted
// by descending eigenvalue. Sufficient for the d <= 64 feature spaces the
// harness works with.
inline void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& values,
                         std::vector<std::vector<double>>& vectors) {
  const std::size_t d = a.size();
  vectors.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) vectors[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-22) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < d; ++i) {
          const double aip = a[i][p];
          const double aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double api = a[p][i];
          const double aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double vip = vectors[i][p];
          const double viq = vectors[i][q];
          vectors[i][p] = c * vip - s * viq;
          vectors[i][q] = s * vip + c * viq;
        }
      }
    }
  }
  values.resize(d);
  for (std::size_t i = 0; i < d; ++i) values[i] = a[i][i];
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
  std::vector<double> sorted_values(d);
  std::vector<std::vector<double>> sorted_vectors(d, std::vector<double>(d));
  for (std::size_t t = 0; t < d; ++t) {
    sorted_values[t] = values[order[t]];
    for (std::size_t i = 0; i < d; ++i) sorted_vectors[i][t] = vectors[i][order[t]];
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
}

}  // namespace detail

/// Runs one detector over the feature matrix. Scores are finite, higher =
/// more anomalous, and deterministic (the seed is accepted for interface
/// uniformity; none of the native detectors draws random numbers).
/// Mahalanobis falls back to a ridge-regularized covariance when the sample
/// covariance is singular, appending a note to `warnings` if provided.
inline std::vector<double> run_detector(const DetectorSpec& spec, const FeatureMatrix& x, std::uint64_t seed = 0,
                                        std::vector<std::string>* warnings = nullptr) {
  (void)seed;
  detail::require_features(x);
  const int n = static_cast<int>(x.size());
  const int d = static_cast<int>(x.front().size());

  switch (spec.kind) {
    case DetectorKind::knn_dist: {
      if (spec.k < 3 || spec.k > 50) throw ConfigError("knn_dist: k must lie in [3, 50], got " + std::to_string(spec.k));
      if (spec.k >= n) throw InputError("knn_dist: k=" + std::to_string(spec.k) + " needs more than k observations");
      return detail::knn_profile(x, spec.k).mean_kdist;
    }
    case DetectorKind::lof_lite: {
      if (spec.k < 3 || spec.k > 50) throw ConfigError("lof_lite: k must lie in [3, 50], got " + std::to_string(spec.k));
      if (spec.k >= n) throw InputError("lof_lite: k=" + std::to_string(spec.k) + " needs more than k observations");
      const auto prof = detail::knn_profile(x, spec.k);
      std::vector<double> scores(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        double ratio = 0.0;
        for (int j : prof.neighbors[static_cast<std::size_t>(i)]) {
          const double nb = prof.mean_kdist[static_cast<std::size_t>(j)];
          ratio += prof.mean_kdist[static_cast<std::size_t>(i)] / std::max(nb, 1e-12);
        }
        scores[static_cast<std::size_t>(i)] = ratio / spec.k;
      }
      return scores;
    }
    case DetectorKind::mahalanobis: {
      const auto mean = detail::column_means(x);
      auto cov = detail::covariance(x, mean);
      double trace = 0.0;
      for (int f = 0; f < d; ++f) trace += cov[static_cast<std::size_t>(f)][static_cast<std::size_t>(f)];
      double ridge = std::max(1e-12, 1e-9 * trace / d);
      auto chol = cov;
      int attempts = 0;
      while (!detail::cholesky(chol)) {
        if (++attempts > 12) throw InputError("mahalanobis: covariance could not be regularized");
        for (int f = 0; f < d; ++f) cov[static_cast<std::size_t>(f)][static_cast<std::size_t>(f)] += ridge;
        if (warnings)
          warnings->push_back(spec.name + ": singular covariance, added ridge " + std::to_string(ridge));
        ridge *= 10.0;
        chol = cov;
      }
      std::vector<double> scores(static_cast<std::size_t>(n));
      std::vector<double> diff(static_cast<std::size_t>(d));
      for (int i = 0; i < n; ++i) {
        for (int f = 0; f < d; ++f)
          diff[static_cast<std::size_t>(f)] = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)] - mean[static_cast<std::size_t>(f)];
        scores[static_cast<std::size_t>(i)] = detail::mahalanobis_sq(chol, diff);
      }
      return scores;
    }
    case DetectorKind::histogram: {
      if (spec.bins < 5 || spec.bins > 64)
        throw ConfigError("histogram: bins must lie in [5, 64], got " + std::to_string(spec.bins));
      std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
      for (int f = 0; f < d; ++f) {
        double lo = x[0][static_cast<std::size_t>(f)];
        double hi = lo;
        for (int i = 1; i < n; ++i) {
          lo = std::min(lo, x[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)]);
          hi = std::max(hi, x[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)]);
        }
        if (hi <= lo) continue;  // constant feature carries no signal
        const double width = (hi - lo) / spec.bins;
        std::vector<int> counts(static_cast<std::size_t>(spec.bins), 0);
        auto bin_of = [&](double v) {
          return std::clamp(static_cast<int>((v - lo) / width), 0, spec.bins - 1);
        };
        for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(bin_of(x[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)]))];
        for (int i = 0; i < n; ++i) {
          const double p = static_cast<double>(counts[static_cast<std::size_t>(bin_of(x[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)]))]) / n;
          scores[static_cast<std::size_t>(i)] += -std::log(p + 1e-12);
        }
      }
      return scores;
    }
    case DetectorKind::pca_residual: {
      if (spec.components < 1) throw ConfigError("pca_residual: components must be >= 1");
      if (spec.components > d)
        throw ConfigError("pca_residual: components=" + std::to_string(spec.components) + " exceeds dimensionality d=" +
                          std::to_string(d));
      const auto mean = detail::column_means(x);
      const auto cov = detail::covariance(x, mean);
      std::vector<double> values;
      std::vector<std::vector<double>> vectors;
      detail::jacobi_eigen(cov, values, vectors);
      std::vector<double> scores(static_cast<std::size_t>(n));
      std::vector<double> diff(static_cast<std::size_t>(d));
      for (int i = 0; i < n; ++i) {
        double norm_sq = 0.0;
        for (int f = 0; f < d; ++f) {
          diff[static_cast<std::size_t>(f)] = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)] - mean[static_cast<std::size_t>(f)];
          norm_sq += diff[static_cast<std::size_t>(f)] * diff[static_cast<std::size_t>(f)];
        }
        double proj_sq = 0.0;
        for (int c = 0; c < spec.components; ++c) {
          double p = 0.0;
          for (int f = 0; f < d; ++f) p += diff[static_cast<std::size_t>(f)] * vectors[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)];
          proj_sq += p * p;
        }
        scores[static_cast<std::size_t>(i)] = std::max(norm_sq - proj_sq, 0.0);
      }
      return scores;
    }
  }
  throw ConfigError("unknown detector kind");
}

/// The stock pool used when no detector spec file is given: five detector
/// families swept over parameters, heterogeneous enough for the subset
/// search to have real choices.
inline std::vector<DetectorSpec> default_pool() {
  std::vector<DetectorSpec> pool;
  for (int k : {5, 15, 35}) pool.push_back({"knn_k" + std::to_string(k), DetectorKind::knn_dist, k, 16, 2});
  for (int k : {5, 15, 35}) pool.push_back({"lof_k" + std::to_string(k), DetectorKind::lof_lite, k, 16, 2});
  pool.push_back({"maha", DetectorKind::mahalanobis, 15, 16, 2});
  for (int b : {8, 16, 32}) pool.push_back({"hist_b" + std::to_string(b), DetectorKind::histogram, 15, b, 2});
  for (int c : {2, 4}) pool.push_back({"pca_c" + std::to_string(c), DetectorKind::pca_residual, 15, 16, c});
  return pool;
}

}  // namespace advense
