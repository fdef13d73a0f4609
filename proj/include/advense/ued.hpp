#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advense/error.hpp"
#include "advense/ranking.hpp"
#include "advense/weighting.hpp"

namespace advense {

enum class RankInverseScheme { multiplicative, cosine, logarithmic };

inline std::string to_string(RankInverseScheme s) {
  switch (s) {
    case RankInverseScheme::multiplicative: return "multiplicative";
    case RankInverseScheme::cosine: return "cosine";
    case RankInverseScheme::logarithmic: return "logarithmic";
  }
  throw ConfigError("unknown rank-inverse scheme");
}

inline RankInverseScheme rank_inverse_scheme_from_string(const std::string& s) {
  if (s == "multiplicative") return RankInverseScheme::multiplicative;
  if (s == "cosine") return RankInverseScheme::cosine;
  if (s == "logarithmic") return RankInverseScheme::logarithmic;
  throw ConfigError("unknown rank-inverse scheme '" + s + "' (expected multiplicative, cosine or logarithmic)");
}

/// Unsupervised Ensemble Divergence of one candidate model against an
/// ensemble's aggregated prediction. 1 = candidate matches the aggregate.
struct UEDReport {
  std::string model_name;
  double ued = 0.0;
  double n_norm = 0.0;  // (C-1) * sum_i c_i * w_i; recorded for auditability
  RankInverseScheme scheme = RankInverseScheme::multiplicative;
  std::vector<std::string> ensemble_members;
  // Per-observation (distance, confidence, weight) triples when requested.
  std::optional<std::vector<std::array<double, 3>>> per_observation;
};

/// Per-observation cluster distance |beta(r_model[i]) - beta(r_ensemble[i])|,
/// an integer in {0, 1, 2, 3}.
inline std::vector<int> fuzzy_distance(std::span<const int> r_model, std::span<const int> r_ensemble,
                                       const ClusterConfig& cluster_cfg) {
  if (r_model.size() != r_ensemble.size())
    throw InputError("fuzzy_distance: rank vectors have different lengths: " + std::to_string(r_model.size()) +
                     " vs " + std::to_string(r_ensemble.size()));
  validate_rank_permutation(r_model);
  validate_rank_permutation(r_ensemble);
  const int n = static_cast<int>(r_model.size());
  const ClusterBounds bounds = cluster_bounds(n, cluster_cfg);
  std::vector<int> d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    d[static_cast<std::size_t>(i)] =
        std::abs(detail::cluster_of_unchecked(r_model[static_cast<std::size_t>(i)], bounds) -
                 detail::cluster_of_unchecked(r_ensemble[static_cast<std::size_t>(i)], bounds));
  }
  return d;
}

/// Ensemble confidence on observation i: unanimity of member ranks measured
/// as total deviation from the (lower) median rank, mapped to [0, 1].
inline double confidence(int i, const RankMatrix& ensemble) {
  const int models = ensemble.num_models();
  if (models < 2) throw InputError("confidence: need at least 2 ensemble members");
  if (i < 0 || i >= ensemble.n()) throw InputError("confidence: index out of range");
  std::vector<int> row(static_cast<std::size_t>(models));
  for (int m = 0; m < models; ++m) row[static_cast<std::size_t>(m)] = ensemble.column(m)[static_cast<std::size_t>(i)];
  std::nth_element(row.begin(), row.begin() + (models - 1) / 2, row.end());
  const int median = row[static_cast<std::size_t>((models - 1) / 2)];
  double dev = 0.0;
  for (int m = 0; m < models; ++m)
    dev += std::abs(static_cast<double>(ensemble.column(m)[static_cast<std::size_t>(i)] - median));
  const double denom = static_cast<double>(ensemble.n() - 1) * static_cast<double>(models / 2);
  return std::clamp(1.0 - dev / denom, 0.0, 1.0);
}

inline std::vector<double> confidence_all(const RankMatrix& ensemble) {
  std::vector<double> c(static_cast<std::size_t>(ensemble.n()));
  for (int i = 0; i < ensemble.n(); ++i) c[static_cast<std::size_t>(i)] = confidence(i, ensemble);
  return c;
}

/// Strictly decreasing weight of an aggregated rank index: top ranks matter
/// most when judging an anomaly detector.
inline double rank_inverse_weight(double i_agg, int n, RankInverseScheme scheme) {
  if (!(std::isfinite(i_agg) && i_agg >= 1.0))
    throw InputError("rank_inverse_weight: aggregated rank must be >= 1");
  if (n < 2) throw InputError("rank_inverse_weight: n must be >= 2");
  switch (scheme) {
    case RankInverseScheme::cosine:
      return std::cos((std::numbers::pi / 2.0) * (i_agg - 1.0) / (static_cast<double>(n) - 1.0));
    case RankInverseScheme::logarithmic:
      return 1.0 / std::log2(i_agg + 1.0);
    case RankInverseScheme::multiplicative:
      return 1.0 / i_agg;
  }
  throw ConfigError("unknown rank-inverse scheme");
}

namespace detail {

// score = sum(d*c*w); N_norm = (C-1) * sum(c*w), the maximum attainable
// score, which pins the result to [0, 1].
inline std::pair<double, double> ued_from_terms(std::span<const double> d, std::span<const double> c,
                                                std::span<const double> w) {
  if (d.size() != c.size() || d.size() != w.size()) throw InputError("ued_from_terms: length mismatch");
  double score = 0.0;
  double cw = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    score += d[i] * c[i] * w[i];
    cw += c[i] * w[i];
  }
  const double n_norm = static_cast<double>(ClusterConfig::num_clusters - 1) * cw;
  if (n_norm <= 0.0) throw InputError("ued: normalization factor is zero (all confidence-weight products vanish)");
  return {1.0 - score / n_norm, n_norm};
}

}  // namespace detail

/// Algorithm: per observation, combine the cluster distance between the
/// candidate and the re-ranked aggregate, the ensemble's confidence, and a
/// rank-inverse weight of the harmonic mean of the two ranks.
inline UEDReport ued_score(const std::string& candidate_name, std::span<const int> r_candidate,
                           const RankMatrix& ensemble, std::span<const std::string> member_names,
                           std::span<const int> aggregated_ranks, const ClusterConfig& cluster_cfg,
                           RankInverseScheme scheme = RankInverseScheme::multiplicative,
                           bool keep_per_observation = false) {
  for (const auto& name : member_names) {
    if (name == candidate_name)
      throw InputError("ued_score: candidate '" + candidate_name + "' is an ensemble member");
  }
  if (static_cast<int>(member_names.size()) != ensemble.num_models())
    throw InputError("ued_score: member name count does not match ensemble columns");
  if (r_candidate.size() != aggregated_ranks.size() || ensemble.n() != static_cast<int>(r_candidate.size()))
    throw InputError("ued_score: rank vectors cover different observation counts");
  validate_rank_permutation(aggregated_ranks);

  const int n = static_cast<int>(r_candidate.size());
  const auto dist = fuzzy_distance(r_candidate, aggregated_ranks, cluster_cfg);
  const auto conf = confidence_all(ensemble);

  std::vector<double> d(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    d[static_cast<std::size_t>(i)] = static_cast<double>(dist[static_cast<std::size_t>(i)]);
    const std::array<int, 2> pair_ranks{r_candidate[static_cast<std::size_t>(i)],
                                        aggregated_ranks[static_cast<std::size_t>(i)]};
    w[static_cast<std::size_t>(i)] = rank_inverse_weight(harmonic_aggregate(std::span<const int>(pair_ranks)), n, scheme);
  }

  const auto [value, n_norm] = detail::ued_from_terms(d, conf, w);
  UEDReport report;
  report.model_name = candidate_name;
  report.ued = value;
  report.n_norm = n_norm;
  report.scheme = scheme;
  report.ensemble_members.assign(member_names.begin(), member_names.end());
  if (keep_per_observation) {
    std::vector<std::array<double, 3>> triples(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      triples[static_cast<std::size_t>(i)] = {d[static_cast<std::size_t>(i)], conf[static_cast<std::size_t>(i)],
                                              w[static_cast<std::size_t>(i)]};
    report.per_observation = std::move(triples);
  }
  return report;
}

}  // namespace advense
