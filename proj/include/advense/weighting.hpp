#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "advense/error.hpp"
#include "advense/ranking.hpp"

namespace advense {

/// Parameters of the two observation-distinctiveness weighting families:
/// an exponential scheme that upweights strong predicted outliers
/// (delta_w, b) and a plateaued Subbotin-style bell that upweights
/// non-extreme inliers (mu, sigma, lambda).
struct WeightProfile {
  double delta_w = 1.5;  // outlier scale, in [1.01, 2]
  double b = 4.0;        // outlier sharpness, in [2, 10]
  double mu = 0.6;       // plateau center fraction, in [0.5, 0.75]
  double sigma = 0.2;    // plateau width fraction, in [0.1, 0.3]
  double lambda = 4.0;   // plateau flatness, in [2, 10]

  void validate() const {
    if (delta_w < 1.01 || delta_w > 2.0)
      throw ConfigError("weight.delta must lie in [1.01, 2], got " + std::to_string(delta_w));
    if (b < 2.0 || b > 10.0) throw ConfigError("weight.b must lie in [2, 10], got " + std::to_string(b));
    if (mu < 0.5 || mu > 0.75) throw ConfigError("weight.mu must lie in [0.5, 0.75], got " + std::to_string(mu));
    if (sigma < 0.1 || sigma > 0.3)
      throw ConfigError("weight.sigma must lie in [0.1, 0.3], got " + std::to_string(sigma));
    if (lambda < 2.0 || lambda > 10.0)
      throw ConfigError("weight.lambda must lie in [2, 10], got " + std::to_string(lambda));
  }
};

/// exp(-(i / (delta_w * ceil(eta*n)))^b): strictly decreasing in the
/// aggregated rank index i, close to 1 only for strong predicted outliers.
inline double outlier_weight(double i, int n, double eta, const WeightProfile& profile) {
  if (!(std::isfinite(i) && i > 0.0)) throw InputError("outlier_weight: rank index must be positive and finite");
  if (n < 2) throw InputError("outlier_weight: n must be >= 2");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("outlier_weight: eta must lie in (0, 1)");
  const double scale = profile.delta_w * std::ceil(eta * n);
  return std::exp(-std::pow(i / scale, profile.b));
}

/// exp(-(|i - n*mu| / (n*sigma))^lambda): plateau of width ~n*sigma centered
/// at n*mu; lambda controls how flat the top is.
inline double inlier_weight(double i, int n, const WeightProfile& profile) {
  if (!(std::isfinite(i) && i > 0.0)) throw InputError("inlier_weight: rank index must be positive and finite");
  if (n < 2) throw InputError("inlier_weight: n must be >= 2");
  return std::exp(-std::pow(std::abs(i - n * profile.mu) / (n * profile.sigma), profile.lambda));
}

/// Harmonic mean of per-model ranks; biased towards the smallest (most
/// anomalous) rank, so one strong vote keeps the aggregate small.
inline double harmonic_aggregate(std::span<const double> ranks) {
  if (ranks.empty()) throw InputError("harmonic_aggregate: need at least one rank");
  double inv_sum = 0.0;
  for (double r : ranks) {
    if (!(std::isfinite(r) && r >= 1.0))
      throw InputError("harmonic_aggregate: ranks must be finite and >= 1, got " + std::to_string(r));
    inv_sum += 1.0 / r;
  }
  return static_cast<double>(ranks.size()) / inv_sum;
}

inline double harmonic_aggregate(std::span<const int> ranks) {
  if (ranks.empty()) throw InputError("harmonic_aggregate: need at least one rank");
  double inv_sum = 0.0;
  for (int r : ranks) {
    if (r < 1) throw InputError("harmonic_aggregate: ranks must be >= 1, got " + std::to_string(r));
    inv_sum += 1.0 / static_cast<double>(r);
  }
  return static_cast<double>(ranks.size()) / inv_sum;
}

/// Pair combiner: biases the combined weight towards the more anomalous
/// (higher-weighted) observation of the pair.
inline double pair_weight(double w_i, double w_j) {
  if (!(w_i >= 0.0 && w_i <= 1.0 && w_j >= 0.0 && w_j <= 1.0))
    throw InputError("pair_weight: weights must lie in [0, 1]");
  return std::max(w_i, w_j);
}

namespace detail {
inline double harmonic_row(const RankMatrix& rm, int i) {
  double inv_sum = 0.0;
  for (const auto& col : rm.columns) inv_sum += 1.0 / static_cast<double>(col[static_cast<std::size_t>(i)]);
  return static_cast<double>(rm.num_models()) / inv_sum;
}
}  // namespace detail

/// Multi-model outlier distinctiveness of observation i: weight is high when
/// at least one model ranked i near the top.
inline double multi_model_weight_outlier(int i, const RankMatrix& rm, double eta, const WeightProfile& profile) {
  if (i < 0 || i >= rm.n()) throw InputError("multi_model_weight_outlier: index out of range");
  return outlier_weight(detail::harmonic_row(rm, i), rm.n(), eta, profile);
}

/// Multi-model inlier distinctiveness of observation i: weight is high only
/// when no model found i anomalous and no model found it an extreme inlier.
inline double multi_model_weight_inlier(int i, const RankMatrix& rm, const WeightProfile& profile) {
  if (i < 0 || i >= rm.n()) throw InputError("multi_model_weight_inlier: index out of range");
  return inlier_weight(detail::harmonic_row(rm, i), rm.n(), profile);
}

inline std::vector<double> multi_model_outlier_weights(const RankMatrix& rm, double eta,
                                                       const WeightProfile& profile) {
  std::vector<double> w(static_cast<std::size_t>(rm.n()));
  for (int i = 0; i < rm.n(); ++i)
    w[static_cast<std::size_t>(i)] = outlier_weight(detail::harmonic_row(rm, i), rm.n(), eta, profile);
  return w;
}

inline std::vector<double> multi_model_inlier_weights(const RankMatrix& rm, const WeightProfile& profile) {
  std::vector<double> w(static_cast<std::size_t>(rm.n()));
  for (int i = 0; i < rm.n(); ++i)
    w[static_cast<std::size_t>(i)] = inlier_weight(detail::harmonic_row(rm, i), rm.n(), profile);
  return w;
}

}  // namespace advense
