#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "advense/correlation.hpp"
#include "advense/error.hpp"
#include "advense/pairs.hpp"
#include "advense/ranking.hpp"
#include "advense/weighting.hpp"

namespace advense {

/// One candidate subset's two agreement scores: fuzzy correlation weighted
/// toward strong outliers and exact correlation weighted toward non-extreme
/// inliers. High fuzzy + low exact = Accurately Diverse.
struct SubsetScore {
  std::vector<std::string> members;  // distinct, sorted by name
  std::vector<int> member_indices;   // indices into the scored matrix, aligned with members
  CorrelationResult fuzzy;
  CorrelationResult exact;
};

struct SelectionConfig {
  int ensemble_size = 5;
  int top_k = 10;
  std::uint64_t budget = 100000;        // max subsets enumerated exhaustively
  std::uint64_t pairs_budget = 200000;  // 0 = evaluate every pair
};

struct EnsembleReport {
  std::vector<SubsetScore> ranked_subsets;  // heuristic order; front = selected
  SubsetScore selected;
  std::vector<int> aggregated_ranks;  // permutation of 1..n
  std::vector<std::string> ids;

  ClusterConfig cluster;
  WeightProfile weights;
  RelaxationConfig relax;
  SelectionConfig selection;
  std::uint64_t seed = 0;
  std::string enumeration_mode;  // "exhaustive" or "sampled"
  std::uint64_t subsets_evaluated = 0;
};

/// Arithmetic-mean rank aggregation followed by re-ranking: the observation
/// with the smallest mean rank comes out ranked 1.
inline std::vector<int> aggregate_predictions(const std::vector<std::vector<int>>& member_ranks) {
  if (member_ranks.empty()) throw InputError("aggregate_predictions: need at least one member");
  const std::size_t n = member_ranks.front().size();
  for (const auto& col : member_ranks) {
    if (col.size() != n) throw InputError("aggregate_predictions: member rank lengths differ");
    validate_rank_permutation(col);
  }
  std::vector<double> neg_mean(n, 0.0);
  for (const auto& col : member_ranks) {
    for (std::size_t i = 0; i < n; ++i) neg_mean[i] -= static_cast<double>(col[i]);
  }
  for (auto& v : neg_mean) v /= static_cast<double>(member_ranks.size());
  return rank_scores(neg_mean);
}

inline std::vector<int> aggregate_predictions(const RankMatrix& rm) { return aggregate_predictions(rm.columns); }

/// Scores one subset of models. Both metrics run on the same pair set so
/// subset comparisons are not confounded by sampling noise.
inline SubsetScore score_subset(const RankMatrix& full, const std::vector<std::string>& model_names,
                                std::vector<int> member_indices, const ClusterConfig& cluster_cfg,
                                const RelaxationConfig& relax, const WeightProfile& profile, const PairSet& pairs,
                                int threads = 1) {
  if (member_indices.size() < 2) throw InputError("score_subset: need at least 2 members");
  std::sort(member_indices.begin(), member_indices.end(), [&](int a, int b) {
    return model_names[static_cast<std::size_t>(a)] < model_names[static_cast<std::size_t>(b)];
  });
  for (std::size_t k = 1; k < member_indices.size(); ++k) {
    if (member_indices[k] == member_indices[k - 1]) throw InputError("score_subset: duplicate member");
  }
  SubsetScore s;
  s.member_indices = member_indices;
  for (int idx : member_indices) s.members.push_back(model_names[static_cast<std::size_t>(idx)]);

  const RankMatrix sub = full.restricted(member_indices);
  const auto outlier_w = multi_model_outlier_weights(sub, cluster_cfg.eta, profile);
  const auto inlier_w = multi_model_inlier_weights(sub, profile);
  s.fuzzy = multiway_fuzzy(sub, cluster_cfg, relax, outlier_w, &pairs, threads);
  s.exact = multiway_exact(sub, inlier_w, &pairs, threads);
  return s;
}

namespace detail {

inline bool fuzzy_order(const SubsetScore& a, const SubsetScore& b) {
  if (a.fuzzy.value != b.fuzzy.value) return a.fuzzy.value > b.fuzzy.value;
  if (a.exact.value != b.exact.value) return a.exact.value < b.exact.value;
  return a.members < b.members;
}

inline bool exact_order(const SubsetScore& a, const SubsetScore& b) {
  if (a.exact.value != b.exact.value) return a.exact.value < b.exact.value;
  if (a.fuzzy.value != b.fuzzy.value) return a.fuzzy.value > b.fuzzy.value;
  return a.members < b.members;
}

inline std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  std::uint64_t result = 1;
  for (int t = 1; t <= k; ++t) {
    result = result * static_cast<std::uint64_t>(n - k + t);
    result /= static_cast<std::uint64_t>(t);
    if (result > cap) return cap + 1;
  }
  return result;
}

inline std::vector<std::vector<int>> enumerate_combinations(std::span<const int> universe, int k) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(universe.size());
  std::vector<int> pick(static_cast<std::size_t>(k));
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    std::vector<int> combo(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) combo[static_cast<std::size_t>(t)] = universe[static_cast<std::size_t>(pick[static_cast<std::size_t>(t)])];
    out.push_back(std::move(combo));
    int pos = k - 1;
    while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (int t = pos + 1; t < k; ++t) pick[static_cast<std::size_t>(t)] = pick[static_cast<std::size_t>(t - 1)] + 1;
  }
  return out;
}

}  // namespace detail

/// Heuristic over an already-scored candidate list: sort by fuzzy
/// descending, keep the top_k, and among those pick the lowest exact
/// correlation. Returns the ranked list with the winner in front.
inline std::vector<SubsetScore> rank_by_heuristic(std::vector<SubsetScore> scored, int top_k) {
  if (scored.empty()) throw InputError("rank_by_heuristic: no subsets scored");
  if (top_k < 1) throw InputError("rank_by_heuristic: top_k must be >= 1");
  std::sort(scored.begin(), scored.end(), detail::fuzzy_order);
  const auto head = scored.begin() + std::min<std::ptrdiff_t>(top_k, static_cast<std::ptrdiff_t>(scored.size()));
  std::sort(scored.begin(), head, detail::exact_order);
  return scored;
}

/// The mirror-image heuristic used for the worst-ensemble contrast: lowest
/// fuzzy first, then the highest exact among the bottom_k.
inline SubsetScore select_bottom(std::vector<SubsetScore> scored, int bottom_k) {
  if (scored.empty()) throw InputError("select_bottom: no subsets scored");
  std::sort(scored.begin(), scored.end(), [](const SubsetScore& a, const SubsetScore& b) {
    if (a.fuzzy.value != b.fuzzy.value) return a.fuzzy.value < b.fuzzy.value;
    if (a.exact.value != b.exact.value) return a.exact.value > b.exact.value;
    return a.members < b.members;
  });
  const auto head = scored.begin() + std::min<std::ptrdiff_t>(bottom_k, static_cast<std::ptrdiff_t>(scored.size()));
  std::sort(scored.begin(), head, [](const SubsetScore& a, const SubsetScore& b) {
    if (a.exact.value != b.exact.value) return a.exact.value > b.exact.value;
    if (a.fuzzy.value != b.fuzzy.value) return a.fuzzy.value < b.fuzzy.value;
    return a.members < b.members;
  });
  return scored.front();
}

/// Searches size-M subsets of the detector pool for the most Accurately
/// Diverse ensemble and aggregates the winner's predictions. Exhaustive when
/// C(N, M) fits the budget, otherwise seeded subset sampling plus greedy
/// single-swap improvement of the fuzzy score. Deterministic per seed and
/// invariant to the column order of the input matrix.
inline EnsembleReport select_ensembles(const ScoreMatrix& scores, const SelectionConfig& sel,
                                       const ClusterConfig& cluster_cfg, const RelaxationConfig& relax,
                                       const WeightProfile& profile, std::uint64_t seed, int threads = 1) {
  scores.validate();
  profile.validate();
  relax.validate();
  if (sel.ensemble_size < 2) throw InputError("select_ensembles: ensemble size must be >= 2");
  if (sel.top_k < 1) throw InputError("select_ensembles: top_k must be >= 1");
  const int n_models = scores.num_models();
  const int m_size = sel.ensemble_size;
  if (n_models < m_size)
    throw InputError("select_ensembles: " + std::to_string(n_models) + " models available but ensemble size is " +
                     std::to_string(m_size));

  const RankMatrix rm = RankMatrix::from_scores(scores);
  const int n = rm.n();
  const PairSet pairs = (sel.pairs_budget == 0 || sel.pairs_budget >= detail::pair_count(n))
                            ? PairSet::all(n)
                            : PairSet::sample(n, sel.pairs_budget, seed);

  // Canonical column order (sorted by model name) keeps every downstream
  // choice independent of the file's column order.
  std::vector<int> canonical(static_cast<std::size_t>(n_models));
  std::iota(canonical.begin(), canonical.end(), 0);
  std::sort(canonical.begin(), canonical.end(), [&](int a, int b) {
    return scores.model_names[static_cast<std::size_t>(a)] < scores.model_names[static_cast<std::size_t>(b)];
  });

  EnsembleReport report;
  const std::uint64_t exhaustive_count = detail::binomial_capped(n_models, m_size, sel.budget);
  std::vector<std::vector<int>> candidates;
  if (exhaustive_count <= sel.budget) {
    report.enumeration_mode = "exhaustive";
    candidates = detail::enumerate_combinations(canonical, m_size);
  } else {
    report.enumeration_mode = "sampled";
    std::mt19937_64 rng(seed);
    std::set<std::vector<int>> seen;
    std::vector<int> pool = canonical;
    const std::uint64_t want = sel.budget;
    std::uint64_t attempts = 0;
    while (seen.size() < want && attempts < want * 4) {
      ++attempts;
      // Partial Fisher-Yates draw of m_size distinct canonical positions.
      std::vector<int> draw = pool;
      for (int t = 0; t < m_size; ++t) {
        std::uniform_int_distribution<int> dist(t, n_models - 1);
        std::swap(draw[static_cast<std::size_t>(t)], draw[static_cast<std::size_t>(dist(rng))]);
      }
      std::vector<int> combo(draw.begin(), draw.begin() + m_size);
      std::sort(combo.begin(), combo.end());
      seen.insert(std::move(combo));
    }
    candidates.assign(seen.begin(), seen.end());
  }

  std::vector<SubsetScore> scored(candidates.size());
  {
    const int workers = std::max(1, std::min(resolve_threads(threads), static_cast<int>(candidates.size())));
    auto run_range = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k)
        scored[k] = score_subset(rm, scores.model_names, candidates[k], cluster_cfg, relax, profile, pairs, 1);
    };
    if (workers == 1) {
      run_range(0, candidates.size());
    } else {
      std::vector<std::thread> ts;
      for (int w = 0; w < workers; ++w) {
        const std::size_t lo = candidates.size() * static_cast<std::size_t>(w) / static_cast<std::size_t>(workers);
        const std::size_t hi = candidates.size() * static_cast<std::size_t>(w + 1) / static_cast<std::size_t>(workers);
        ts.emplace_back(run_range, lo, hi);
      }
      for (auto& t : ts) t.join();
    }
  }

  if (report.enumeration_mode == "sampled") {
    // Greedy refinement: repeatedly swap one member for the non-member that
    // most improves the fuzzy score.
    auto best = std::min_element(scored.begin(), scored.end(), detail::fuzzy_order);
    std::vector<int> current = best->member_indices;
    std::set<std::vector<int>> evaluated;
    for (const auto& s : scored) {
      auto key = s.member_indices;
      std::sort(key.begin(), key.end());
      evaluated.insert(key);
    }
    double current_fuzzy = best->fuzzy.value;
    const int max_rounds = 64;
    for (int round = 0; round < max_rounds; ++round) {
      SubsetScore best_swap;
      bool improved = false;
      for (std::size_t out = 0; out < current.size(); ++out) {
        for (int cand : canonical) {
          if (std::find(current.begin(), current.end(), cand) != current.end()) continue;
          std::vector<int> trial = current;
          trial[out] = cand;
          std::sort(trial.begin(), trial.end());
          if (!evaluated.insert(trial).second) continue;
          SubsetScore ts = score_subset(rm, scores.model_names, trial, cluster_cfg, relax, profile, pairs, threads);
          scored.push_back(ts);
          if (ts.fuzzy.value > current_fuzzy && (!improved || detail::fuzzy_order(ts, best_swap))) {
            best_swap = ts;
            improved = true;
          }
        }
      }
      if (!improved) break;
      current = best_swap.member_indices;
      std::sort(current.begin(), current.end());
      current_fuzzy = best_swap.fuzzy.value;
    }
  }

  report.subsets_evaluated = scored.size();
  report.ranked_subsets = rank_by_heuristic(std::move(scored), sel.top_k);
  report.selected = report.ranked_subsets.front();

  std::vector<std::vector<int>> member_cols;
  for (int idx : report.selected.member_indices) member_cols.push_back(rm.column(idx));
  report.aggregated_ranks = aggregate_predictions(member_cols);
  report.ids = scores.ids;
  report.cluster = cluster_cfg;
  report.weights = profile;
  report.relax = relax;
  report.selection = sel;
  report.seed = seed;
  return report;
}

}  // namespace advense
