#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "advense/detectors.hpp"
#include "advense/error.hpp"

namespace advense {

enum class SyntheticMode { organic, merged_class };

inline SyntheticMode synthetic_mode_from_string(const std::string& s) {
  if (s == "organic") return SyntheticMode::organic;
  if (s == "merged_class") return SyntheticMode::merged_class;
  throw ConfigError("unknown synthetic mode '" + s + "' (expected organic or merged_class)");
}

struct Dataset {
  FeatureMatrix features;  // n x d
  std::vector<int> labels;  // 1 = anomaly
  double contamination = 0.0;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(features.size()); }
  int d() const { return features.empty() ? 0 : static_cast<int>(features.front().size()); }
};

/// Seeded synthetic benchmark data.
///   organic: Gaussian-mixture inliers plus uniform outliers drawn from an
///     inflated bounding box — anomalies have no class structure of their own.
///   merged_class: two well-separated Gaussian classes with the minority
///     class labeled anomalous — both classes have clear structure.
inline Dataset gen_synthetic(SyntheticMode mode, int n, int d, double contamination, std::uint64_t seed) {
  if (n < 100) throw InputError("gen_synthetic: n must be >= 100, got " + std::to_string(n));
  if (d < 1) throw InputError("gen_synthetic: d must be >= 1, got " + std::to_string(d));
  if (!(contamination > 0.0 && contamination < 0.5))
    throw InputError("gen_synthetic: contamination must lie in (0, 0.5), got " + std::to_string(contamination));
  const int n_anom = static_cast<int>(std::llround(contamination * n));
  if (n_anom < 1) throw InputError("gen_synthetic: contamination too small for n, would yield 0 anomalies");
  const int n_inlier = n - n_anom;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  FeatureMatrix features;
  features.reserve(static_cast<std::size_t>(n));
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));

  if (mode == SyntheticMode::organic) {
    // Anisotropic Gaussian mixture plus a couple of pure-noise dimensions:
    // the anomalies are low-density points inside the data envelope, so
    // detector quality genuinely spreads instead of saturating.
    constexpr int kComponents = 5;
    const int noise_dims = d >= 6 ? 2 : (d >= 4 ? 1 : 0);
    std::vector<std::vector<double>> centers(kComponents, std::vector<double>(static_cast<std::size_t>(d)));
    std::vector<std::vector<double>> sigma(kComponents, std::vector<double>(static_cast<std::size_t>(d)));
    std::uniform_real_distribution<double> center_dist(-4.0, 4.0);
    std::uniform_real_distribution<double> spread_dist(0.4, 1.6);
    for (int c = 0; c < kComponents; ++c) {
      for (int f = 0; f < d; ++f) {
        centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)] = center_dist(rng);
        sigma[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)] = spread_dist(rng);
      }
    }
    std::uniform_int_distribution<int> pick(0, kComponents - 1);
    for (int i = 0; i < n_inlier; ++i) {
      const int c = pick(rng);
      std::vector<double> row(static_cast<std::size_t>(d));
      for (int f = 0; f < d; ++f)
        row[static_cast<std::size_t>(f)] = centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)] +
                                           sigma[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)] * gauss(rng);
      features.push_back(std::move(row));
      labels.push_back(0);
    }
    // Outliers: uniform over the inlier bounding box, mildly inflated.
    std::vector<double> lo(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
    for (const auto& row : features) {
      for (int f = 0; f < d; ++f) {
        lo[static_cast<std::size_t>(f)] = std::min(lo[static_cast<std::size_t>(f)], row[static_cast<std::size_t>(f)]);
        hi[static_cast<std::size_t>(f)] = std::max(hi[static_cast<std::size_t>(f)], row[static_cast<std::size_t>(f)]);
      }
    }
    constexpr double kInflate = 1.05;
    for (int i = 0; i < n_anom; ++i) {
      std::vector<double> row(static_cast<std::size_t>(d));
      for (int f = 0; f < d; ++f) {
        const double center = 0.5 * (lo[static_cast<std::size_t>(f)] + hi[static_cast<std::size_t>(f)]);
        const double half = 0.5 * (hi[static_cast<std::size_t>(f)] - lo[static_cast<std::size_t>(f)]) * kInflate;
        std::uniform_real_distribution<double> box(center - half, center + half);
        row[static_cast<std::size_t>(f)] = box(rng);
      }
      features.push_back(std::move(row));
      labels.push_back(1);
    }
    // Signal-free dimensions shared by inliers and outliers alike.
    for (int f = d - noise_dims; f < d; ++f) {
      for (auto& row : features) row[static_cast<std::size_t>(f)] = 3.0 * gauss(rng);
    }
  } else {
    // Two Gaussians separated by ~6 units along a random direction.
    std::vector<double> direction(static_cast<std::size_t>(d));
    double norm = 0.0;
    for (int f = 0; f < d; ++f) {
      direction[static_cast<std::size_t>(f)] = gauss(rng);
      norm += direction[static_cast<std::size_t>(f)] * direction[static_cast<std::size_t>(f)];
    }
    norm = std::sqrt(std::max(norm, 1e-12));
    for (auto& v : direction) v = v / norm * 3.0;
    for (int i = 0; i < n_inlier; ++i) {
      std::vector<double> row(static_cast<std::size_t>(d));
      for (int f = 0; f < d; ++f) row[static_cast<std::size_t>(f)] = -direction[static_cast<std::size_t>(f)] + gauss(rng);
      features.push_back(std::move(row));
      labels.push_back(0);
    }
    for (int i = 0; i < n_anom; ++i) {
      std::vector<double> row(static_cast<std::size_t>(d));
      for (int f = 0; f < d; ++f) row[static_cast<std::size_t>(f)] = direction[static_cast<std::size_t>(f)] + gauss(rng);
      features.push_back(std::move(row));
      labels.push_back(1);
    }
  }

  // Seeded shuffle so anomalies are not clustered at the tail.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Dataset ds;
  ds.features.resize(static_cast<std::size_t>(n));
  ds.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ds.features[static_cast<std::size_t>(i)] = std::move(features[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    ds.labels[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }
  ds.contamination = static_cast<double>(n_anom) / n;
  ds.seed = seed;
  return ds;
}

}  // namespace advense
