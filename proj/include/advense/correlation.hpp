#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advense/error.hpp"
#include "advense/pairs.hpp"
#include "advense/ranking.hpp"
#include "advense/weighting.hpp"

namespace advense {

enum class PairRelation { concordant, discordant, neutral };

/// Result of one correlation computation. `value` is clamped to [0, 1];
/// `raw_value` keeps the unclamped number so reports stay auditable when the
/// multi-way normalization can leave the unit interval (M > 20).
struct CorrelationResult {
  double value = 0.0;
  double raw_value = 0.0;
  std::uint64_t pairs_evaluated = 0;
  bool subsampled = false;
  std::optional<std::uint64_t> seed;
};

/// Relaxation of within-cluster exact-rank comparisons: two ranks in the same
/// cluster are treated as interchangeable when they differ by at most
/// delta_relax * cluster_size.
struct RelaxationConfig {
  double delta_relax = 0.1;

  void validate() const {
    if (!(delta_relax >= 0.0 && delta_relax <= 1.0))
      throw ConfigError("relax.delta must lie in [0, 1], got " + std::to_string(delta_relax));
  }
};

namespace detail {

inline void require_same_length(std::span<const int> r1, std::span<const int> r2) {
  if (r1.size() != r2.size())
    throw InputError("rank vectors have different lengths: " + std::to_string(r1.size()) + " vs " +
                     std::to_string(r2.size()));
}

inline CorrelationResult make_result(double raw, const PairSet& ps) {
  CorrelationResult res;
  res.raw_value = raw;
  res.value = std::clamp(raw, 0.0, 1.0);
  res.pairs_evaluated = ps.size();
  res.subsampled = ps.subsampled();
  res.seed = ps.seed();
  return res;
}

inline void require_weights(std::span<const double> weights, int n) {
  if (static_cast<int>(weights.size()) != n)
    throw InputError("weight vector has length " + std::to_string(weights.size()) + ", expected " +
                     std::to_string(n));
  for (int i = 0; i < n; ++i) {
    const double w = weights[static_cast<std::size_t>(i)];
    if (!(w >= 0.0 && w <= 1.0))
      throw InputError("weight at index " + std::to_string(i) + " outside [0, 1]");
  }
}

// Per-cluster relaxation bands, delta_relax * cluster_size, indexed by
// cluster id - 1.
inline std::array<double, 4> relaxation_bands(const ClusterBounds& bounds, const RelaxationConfig& relax) {
  const auto sizes = cluster_sizes_bounds(bounds);
  std::array<double, 4> band{};
  for (int c = 0; c < 4; ++c) band[static_cast<std::size_t>(c)] = relax.delta_relax * sizes[static_cast<std::size_t>(c)];
  return band;
}

inline std::vector<std::int8_t> cluster_table(std::span<const int> ranks, const ClusterBounds& bounds) {
  std::vector<std::int8_t> cl(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i)
    cl[i] = static_cast<std::int8_t>(cluster_of_unchecked(ranks[i], bounds));
  return cl;
}

}  // namespace detail

/// Fraction of concordant pairs between two ranked lists (the [0, 1] form of
/// Kendall's tau for tie-free permutations).
inline CorrelationResult kendall_exact_two(std::span<const int> r1, std::span<const int> r2,
                                           const PairSet* sample = nullptr, int threads = 1) {
  detail::require_same_length(r1, r2);
  validate_rank_permutation(r1);
  validate_rank_permutation(r2);
  const int n = static_cast<int>(r1.size());
  const PairSet ps = sample ? *sample : PairSet::all(n);
  if (ps.n() != n) throw InputError("pair set built for n=" + std::to_string(ps.n()) + ", ranks have n=" + std::to_string(n));

  const auto sums = reduce_pair_terms(ps, threads, [&](int i, int j) {
    const bool concordant = ((r1[static_cast<std::size_t>(i)] < r1[static_cast<std::size_t>(j)]) ==
                             (r2[static_cast<std::size_t>(i)] < r2[static_cast<std::size_t>(j)]));
    return std::pair<double, double>{concordant ? 1.0 : 0.0, 1.0};
  });
  return detail::make_result(sums.corr / sums.weight, ps);
}

/// Cluster-level pair relation between two lists: discordant only when the
/// cluster orderings strictly oppose each other; a zero sign on either side
/// (shared cluster in one list) counts as concordant.
inline PairRelation pair_relation_cluster(int r1_i, int r1_j, int r2_i, int r2_j, const ClusterBounds& bounds) {
  const int s1 = cluster_of_bounds(r1_i, bounds) - cluster_of_bounds(r1_j, bounds);
  const int s2 = cluster_of_bounds(r2_i, bounds) - cluster_of_bounds(r2_j, bounds);
  if (s1 != 0 && s2 != 0 && ((s1 < 0) != (s2 < 0))) return PairRelation::discordant;
  return PairRelation::concordant;
}

/// Weighted fuzzy two-way correlation: concordance measured on rank clusters
/// rather than rank indices, each pair weighted by the more distinctive of
/// its two observations.
inline CorrelationResult fuzzy_weighted_two(std::span<const int> r1, std::span<const int> r2,
                                            const ClusterConfig& cluster_cfg, std::span<const double> weights,
                                            const PairSet* sample = nullptr, int threads = 1) {
  detail::require_same_length(r1, r2);
  validate_rank_permutation(r1);
  validate_rank_permutation(r2);
  const int n = static_cast<int>(r1.size());
  detail::require_weights(weights, n);
  const ClusterBounds bounds = cluster_bounds(n, cluster_cfg);
  const PairSet ps = sample ? *sample : PairSet::all(n);
  if (ps.n() != n) throw InputError("pair set built for n=" + std::to_string(ps.n()) + ", ranks have n=" + std::to_string(n));

  const auto cl1 = detail::cluster_table(r1, bounds);
  const auto cl2 = detail::cluster_table(r2, bounds);
  const auto sums = reduce_pair_terms(ps, threads, [&](int i, int j) {
    const double w = std::max(weights[static_cast<std::size_t>(i)], weights[static_cast<std::size_t>(j)]);
    const int s1 = cl1[static_cast<std::size_t>(i)] - cl1[static_cast<std::size_t>(j)];
    const int s2 = cl2[static_cast<std::size_t>(i)] - cl2[static_cast<std::size_t>(j)];
    const bool discordant = (s1 != 0 && s2 != 0 && ((s1 < 0) != (s2 < 0)));
    return std::pair<double, double>{discordant ? 0.0 : w, w};
  });
  if (sums.weight <= 0.0) throw InputError("fuzzy_weighted_two: all pair weights are zero");
  return detail::make_result(sums.corr / sums.weight, ps);
}

/// Combined cluster/exact pair relation between two lists. An observation
/// whose cluster changes between the lists makes the pair discordant; pairs
/// in distinct shared clusters are concordant; pairs sharing one cluster in
/// both lists compare exact ranks with the relaxation band applied to the
/// second list's gap.
inline PairRelation pair_relation_rc(int i, int j, std::span<const int> r1, std::span<const int> r2,
                                     const ClusterConfig& cluster_cfg, const RelaxationConfig& relax) {
  detail::require_same_length(r1, r2);
  if (i == j) throw InputError("pair_relation_rc: indices must differ");
  const int n = static_cast<int>(r1.size());
  if (i < 0 || i >= n || j < 0 || j >= n) throw InputError("pair_relation_rc: index out of range");
  relax.validate();
  const ClusterBounds bounds = cluster_bounds(n, cluster_cfg);

  const int c1i = cluster_of_bounds(r1[static_cast<std::size_t>(i)], bounds);
  const int c2i = cluster_of_bounds(r2[static_cast<std::size_t>(i)], bounds);
  const int c1j = cluster_of_bounds(r1[static_cast<std::size_t>(j)], bounds);
  const int c2j = cluster_of_bounds(r2[static_cast<std::size_t>(j)], bounds);
  if (c1i != c2i || c1j != c2j) return PairRelation::discordant;
  if (c1i != c1j) return PairRelation::concordant;

  const auto band = detail::relaxation_bands(bounds, relax);
  const int d1 = r1[static_cast<std::size_t>(i)] - r1[static_cast<std::size_t>(j)];
  const int d2 = r2[static_cast<std::size_t>(i)] - r2[static_cast<std::size_t>(j)];
  if (std::abs(static_cast<double>(d2)) <= band[static_cast<std::size_t>(c1i - 1)]) return PairRelation::concordant;
  return ((d1 < 0) == (d2 < 0)) ? PairRelation::concordant : PairRelation::discordant;
}

/// Multi-way exact correlation: per pair, the largest subset of models that
/// orders the pair the same way; normalized so all-agree -> 1 and a maximal
/// split -> 0.
inline CorrelationResult multiway_exact(const RankMatrix& rm, std::span<const double> weights,
                                        const PairSet* sample = nullptr, int threads = 1) {
  const int models = rm.num_models();
  if (models < 2) throw InputError("multiway_exact: need at least 2 models, got " + std::to_string(models));
  const int n = rm.n();
  detail::require_weights(weights, n);
  const PairSet ps = sample ? *sample : PairSet::all(n);
  if (ps.n() != n) throw InputError("pair set built for n=" + std::to_string(ps.n()) + ", ranks have n=" + std::to_string(n));

  // Observation-major layout so each pair touches two contiguous rows.
  std::vector<int> rank_om(static_cast<std::size_t>(n) * static_cast<std::size_t>(models));
  for (int m = 0; m < models; ++m) {
    const auto& col = rm.column(m);
    for (int i = 0; i < n; ++i)
      rank_om[static_cast<std::size_t>(i) * static_cast<std::size_t>(models) + static_cast<std::size_t>(m)] =
          col[static_cast<std::size_t>(i)];
  }

  const double denom_factor = static_cast<double>(models - (models + 1) / 2);
  const auto sums = reduce_pair_terms(ps, threads, [&](int i, int j) {
    const int* ri = &rank_om[static_cast<std::size_t>(i) * static_cast<std::size_t>(models)];
    const int* rj = &rank_om[static_cast<std::size_t>(j) * static_cast<std::size_t>(models)];
    int smaller = 0;
    for (int m = 0; m < models; ++m) smaller += (ri[m] < rj[m]);
    const int max_rel = std::max(smaller, models - smaller);
    const double w = std::max(weights[static_cast<std::size_t>(i)], weights[static_cast<std::size_t>(j)]);
    return std::pair<double, double>{static_cast<double>(models - max_rel) * w, w};
  });
  if (sums.weight <= 0.0) throw InputError("multiway_exact: all pair weights are zero");
  return detail::make_result(1.0 - sums.corr / (sums.weight * denom_factor), ps);
}

/// Multi-way fuzzy correlation: per pair, models vote into cluster-pair
/// cells; models sharing a cluster vote into within-cluster smaller/bigger
/// counters with a relaxation band, and the largest vote count is the
/// largest concordant set.
inline CorrelationResult multiway_fuzzy(const RankMatrix& rm, const ClusterConfig& cluster_cfg,
                                        const RelaxationConfig& relax, std::span<const double> weights,
                                        const PairSet* sample = nullptr, int threads = 1) {
  const int models = rm.num_models();
  if (models < 2) throw InputError("multiway_fuzzy: need at least 2 models, got " + std::to_string(models));
  relax.validate();
  const int n = rm.n();
  detail::require_weights(weights, n);
  const ClusterBounds bounds = cluster_bounds(n, cluster_cfg);
  const PairSet ps = sample ? *sample : PairSet::all(n);
  if (ps.n() != n) throw InputError("pair set built for n=" + std::to_string(ps.n()) + ", ranks have n=" + std::to_string(n));

  const auto band = detail::relaxation_bands(bounds, relax);
  std::vector<int> rank_om(static_cast<std::size_t>(n) * static_cast<std::size_t>(models));
  std::vector<std::int8_t> clus_om(static_cast<std::size_t>(n) * static_cast<std::size_t>(models));
  for (int m = 0; m < models; ++m) {
    const auto& col = rm.column(m);
    for (int i = 0; i < n; ++i) {
      const std::size_t at = static_cast<std::size_t>(i) * static_cast<std::size_t>(models) + static_cast<std::size_t>(m);
      rank_om[at] = col[static_cast<std::size_t>(i)];
      clus_om[at] = static_cast<std::int8_t>(detail::cluster_of_unchecked(col[static_cast<std::size_t>(i)], bounds));
    }
  }

  // Largest attainable concordant-set bound: 2*C within-cluster counters
  // plus C^2 - C cross-cluster cells = C + C^2 slots.
  constexpr int kCells = ClusterConfig::num_clusters + ClusterConfig::num_clusters * ClusterConfig::num_clusters;
  const double denom_factor = static_cast<double>(models - (models + kCells - 1) / kCells);

  const auto sums = reduce_pair_terms(ps, threads, [&](int i, int j) {
    const int* ri = &rank_om[static_cast<std::size_t>(i) * static_cast<std::size_t>(models)];
    const int* rj = &rank_om[static_cast<std::size_t>(j) * static_cast<std::size_t>(models)];
    const std::int8_t* ci = &clus_om[static_cast<std::size_t>(i) * static_cast<std::size_t>(models)];
    const std::int8_t* cj = &clus_om[static_cast<std::size_t>(j) * static_cast<std::size_t>(models)];

    int smaller[4] = {0, 0, 0, 0};
    int bigger[4] = {0, 0, 0, 0};
    int equal[4][4] = {{0}};
    for (int m = 0; m < models; ++m) {
      const int a = ci[m];
      const int b = cj[m];
      if (a != b) {
        ++equal[a - 1][b - 1];
      } else {
        const int gap = ri[m] - rj[m];
        if (std::abs(static_cast<double>(gap)) <= band[static_cast<std::size_t>(a - 1)]) {
          ++smaller[a - 1];
          ++bigger[a - 1];
        } else if (gap < 0) {
          ++smaller[a - 1];
        } else {
          ++bigger[a - 1];
        }
      }
    }
    int max_rel = 0;
    for (int c = 0; c < 4; ++c) {
      max_rel = std::max(max_rel, smaller[c]);
      max_rel = std::max(max_rel, bigger[c]);
      for (int c2 = 0; c2 < 4; ++c2) max_rel = std::max(max_rel, equal[c][c2]);
    }
    const double w = std::max(weights[static_cast<std::size_t>(i)], weights[static_cast<std::size_t>(j)]);
    return std::pair<double, double>{static_cast<double>(models - max_rel) * w, w};
  });
  if (sums.weight <= 0.0) throw InputError("multiway_fuzzy: all pair weights are zero");
  return detail::make_result(1.0 - sums.corr / (sums.weight * denom_factor), ps);
}

}  // namespace advense
