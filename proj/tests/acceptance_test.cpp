// Acceptance suite: one test per release criterion, each printing a
// [PASS]/[FAIL] line. Identity and bound suites run over randomized inputs;
// the desk-scale claims run the full pipeline on five seeded synthetic
// datasets with the stock 12-detector pool.

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <vector>

#include "advense/advense.hpp"

using namespace advense;

namespace {

constexpr double kTol = 1e-12;

void report_line(const char* name) {
  std::printf("[%s] %s\n", ::testing::Test::HasFailure() ? "FAIL" : "PASS", name);
  std::fflush(stdout);
}

std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 1);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

std::vector<int> reversed(const std::vector<int>& r) {
  std::vector<int> out(r.size());
  const int n = static_cast<int>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = n + 1 - r[i];
  return out;
}

ClusterConfig wide_cfg() {
  // Valid for every n >= 5.
  ClusterConfig cfg;
  cfg.eta = 0.25;
  cfg.gamma1 = 0.5;
  cfg.gamma2 = 3.0;
  return cfg;
}

ClusterConfig desk_cfg() {
  ClusterConfig cfg;
  cfg.eta = 0.05;
  cfg.gamma1 = 0.5;
  cfg.gamma2 = 3.0;
  return cfg;
}

std::vector<double> neg_ranks(const std::vector<int>& r) {
  std::vector<double> s(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) s[i] = -static_cast<double>(r[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Desk-scale pipeline runs shared by the three directional criteria.
// ---------------------------------------------------------------------------
struct DeskScaleRun {
  double ensemble_pr = 0.0;
  double as = 0.0;
  double rsps_value = 0.0;
  double bottom_pr = 0.0;
  double spearman_mult = 0.0;
  double spearman_cosine = 0.0;
  std::size_t candidates = 0;
};

struct DeskScale {
  std::vector<DeskScaleRun> runs;
  double elapsed_seconds = 0.0;
};

DeskScaleRun run_desk_scale(std::uint64_t seed) {
  const ClusterConfig cluster = desk_cfg();
  const RelaxationConfig relax;
  const WeightProfile profile;
  SelectionConfig sel;
  sel.ensemble_size = 5;
  sel.top_k = 10;
  sel.pairs_budget = 200000;

  const auto ds = gen_synthetic(SyntheticMode::organic, 2000, 8, 0.05, seed);
  ScoreMatrix sm;
  for (int i = 0; i < ds.n(); ++i) sm.ids.push_back(std::to_string(i + 1));
  sm.labels = ds.labels;
  for (const auto& spec : default_pool()) {
    sm.model_names.push_back(spec.name);
    sm.columns.push_back(run_detector(spec, ds.features));
  }

  DeskScaleRun out;
  const auto report = select_ensembles(sm, sel, cluster, relax, profile, seed, 0);
  out.ensemble_pr = pr_auc(neg_ranks(report.aggregated_ranks), ds.labels);

  std::vector<double> pool_pr;
  for (int m = 0; m < sm.num_models(); ++m) pool_pr.push_back(pr_auc(sm.column(m), ds.labels));
  out.as = average_score(pool_pr);
  out.rsps_value = rsps(sm, EvalMetric::pr_auc, seed, 30);

  const auto rm = RankMatrix::from_scores(sm);
  const auto bottom = select_bottom(report.ranked_subsets, sel.top_k);
  std::vector<std::vector<int>> bottom_cols;
  for (int idx : bottom.member_indices) bottom_cols.push_back(rm.column(idx));
  out.bottom_pr = pr_auc(neg_ranks(aggregate_predictions(bottom_cols)), ds.labels);

  // Candidate set for the evaluation claim: the seven non-member pool
  // columns, eight extra parameter sweeps, and three noise blends of a pool
  // member, all label-free constructions.
  ScoreMatrix cand = sm;
  const std::vector<DetectorSpec> extras = {
      {"x_knn8", DetectorKind::knn_dist, 8, 16, 2},      {"x_knn25", DetectorKind::knn_dist, 25, 16, 2},
      {"x_lof10", DetectorKind::lof_lite, 10, 16, 2},    {"x_lof50", DetectorKind::lof_lite, 50, 16, 2},
      {"x_hist5", DetectorKind::histogram, 5, 5, 2},     {"x_hist64", DetectorKind::histogram, 5, 64, 2},
      {"x_pca6", DetectorKind::pca_residual, 5, 16, 6},  {"x_pca7", DetectorKind::pca_residual, 5, 16, 7}};
  for (const auto& spec : extras) {
    cand.model_names.push_back(spec.name);
    cand.columns.push_back(run_detector(spec, ds.features));
  }
  std::mt19937_64 rng(seed * 7 + 1);
  std::uniform_real_distribution<double> noise(0.0, 1.0);
  const auto& base_ranks = rm.column(1);
  for (double alpha : {0.3, 0.6, 0.9}) {
    std::vector<double> col(static_cast<std::size_t>(ds.n()));
    for (int i = 0; i < ds.n(); ++i)
      col[static_cast<std::size_t>(i)] =
          (1.0 - alpha) * (-static_cast<double>(base_ranks[static_cast<std::size_t>(i)]) / ds.n()) +
          alpha * noise(rng);
    cand.model_names.push_back("x_blend" + std::to_string(static_cast<int>(alpha * 10)));
    cand.columns.push_back(std::move(col));
  }

  const auto crm = RankMatrix::from_scores(cand);
  std::vector<int> member_idx;
  for (const auto& name : report.selected.members) member_idx.push_back(cand.model_index(name));
  const auto ensemble = crm.restricted(member_idx);
  std::vector<double> pr_vec;
  std::vector<double> ued_mult;
  std::vector<double> ued_cos;
  for (int m = 0; m < cand.num_models(); ++m) {
    const auto& name = cand.model_names[static_cast<std::size_t>(m)];
    if (std::find(report.selected.members.begin(), report.selected.members.end(), name) !=
        report.selected.members.end())
      continue;
    pr_vec.push_back(pr_auc(cand.column(m), ds.labels));
    ued_mult.push_back(ued_score(name, crm.column(m), ensemble, report.selected.members, report.aggregated_ranks,
                                 cluster, RankInverseScheme::multiplicative)
                           .ued);
    ued_cos.push_back(ued_score(name, crm.column(m), ensemble, report.selected.members, report.aggregated_ranks,
                                cluster, RankInverseScheme::cosine)
                          .ued);
  }
  out.candidates = pr_vec.size();
  out.spearman_mult = spearman(pr_vec, ued_mult);
  out.spearman_cosine = spearman(pr_vec, ued_cos);
  return out;
}

const DeskScale& desk_scale() {
  static const DeskScale cached = [] {
    DeskScale ds;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t seed : {101, 102, 103, 104, 105}) ds.runs.push_back(run_desk_scale(seed));
    ds.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return ds;
  }();
  return cached;
}

}  // namespace

// ---------------------------------------------------------------------------
// Criterion 1: metric identities on 1000 randomized cases each, exact to
// 1e-12, under 30 seconds.
// ---------------------------------------------------------------------------
TEST(Acceptance, MetricIdentitySuite) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  const ClusterConfig cfg = wide_cfg();
  const RelaxationConfig relax;
  const WeightProfile profile;

  for (int t = 0; t < 1000; ++t) {
    const int n = 5 + static_cast<int>(rng() % 56);
    const auto r = random_permutation(n, rng);
    ASSERT_NEAR(kendall_exact_two(r, r).value, 1.0, kTol);
    ASSERT_NEAR(kendall_exact_two(r, reversed(r)).value, 0.0, kTol);
  }

  for (int t = 0; t < 1000; ++t) {
    const int n = 5 + static_cast<int>(rng() % 56);
    const int m = 2 + static_cast<int>(rng() % 5);
    const auto r = random_permutation(n, rng);
    std::vector<std::vector<int>> cols(static_cast<std::size_t>(m), r);
    const auto rm = RankMatrix::from_columns(cols);
    const std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    ASSERT_NEAR(multiway_fuzzy(rm, cfg, relax, w).value, 1.0, kTol);
    ASSERT_NEAR(multiway_exact(rm, w).value, 1.0, kTol);
  }

  // Joint observation permutation leaves every metric unchanged.
  for (int t = 0; t < 1000; ++t) {
    const int n = 5 + static_cast<int>(rng() % 40);
    const int m = 3;
    std::vector<std::vector<int>> cols;
    for (int c = 0; c < m; ++c) cols.push_back(random_permutation(n, rng));
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto apply = [&](const std::vector<int>& v) {
      std::vector<int> out(v.size());
      for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
      return out;
    };
    std::vector<std::vector<int>> moved;
    for (const auto& c : cols) moved.push_back(apply(c));

    const auto rm = RankMatrix::from_columns(cols);
    const auto rm2 = RankMatrix::from_columns(moved);
    const auto wo = multi_model_outlier_weights(rm, cfg.eta, profile);
    const auto wo2 = multi_model_outlier_weights(rm2, cfg.eta, profile);
    const auto wi = multi_model_inlier_weights(rm, profile);
    const auto wi2 = multi_model_inlier_weights(rm2, profile);

    ASSERT_NEAR(kendall_exact_two(cols[0], cols[1]).value, kendall_exact_two(moved[0], moved[1]).value, kTol);
    ASSERT_NEAR(fuzzy_weighted_two(cols[0], cols[1], cfg, wo).value,
                fuzzy_weighted_two(moved[0], moved[1], cfg, wo2).value, kTol);
    ASSERT_NEAR(multiway_exact(rm, wi).value, multiway_exact(rm2, wi2).value, kTol);
    ASSERT_NEAR(multiway_fuzzy(rm, cfg, relax, wo).value, multiway_fuzzy(rm2, cfg, relax, wo2).value, kTol);
  }

  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(elapsed, 30.0);
  report_line("metric identity suite (1000 randomized cases each, 1e-12)");
}

// ---------------------------------------------------------------------------
// Criterion 2: oracle equivalences.
// ---------------------------------------------------------------------------
TEST(Acceptance, OracleEquivalence) {
  std::mt19937_64 rng(2025);
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + static_cast<int>(rng() % 28);
    const auto r1 = random_permutation(n, rng);
    const auto r2 = random_permutation(n, rng);
    const std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    ASSERT_NEAR(multiway_exact(RankMatrix::from_columns({r1, r2}), w).value, kendall_exact_two(r1, r2).value,
                kTol);
  }

  // Committed hand-execution value of the M=3, n=8 fixture (two identity
  // columns plus one reversed; eta=0.25, delta_relax=0.5, stock profile).
  const std::vector<std::vector<int>> cols{{1, 2, 3, 4, 5, 6, 7, 8}, {1, 2, 3, 4, 5, 6, 7, 8},
                                           {8, 7, 6, 5, 4, 3, 2, 1}};
  ClusterConfig cfg = wide_cfg();
  RelaxationConfig relax;
  relax.delta_relax = 0.5;
  const auto rm = RankMatrix::from_columns(cols);
  const auto w = multi_model_outlier_weights(rm, cfg.eta, WeightProfile{});
  constexpr double kGolden = 0.51017914713192936;
  EXPECT_NEAR(multiway_fuzzy(rm, cfg, relax, w).value, kGolden, kTol);
  report_line("oracle equivalence (M=2 reduction x100; golden hand execution)");
}

// ---------------------------------------------------------------------------
// Criterion 3: the published discordance examples under cluster semantics.
// ---------------------------------------------------------------------------
TEST(Acceptance, ClusterDiscordanceExamples) {
  ClusterConfig cfg;
  cfg.eta = 0.1;
  cfg.gamma1 = 0.5;
  cfg.gamma2 = 3.0;
  const auto bounds = cluster_bounds(100, cfg);
  EXPECT_EQ(pair_relation_cluster(5, 6, 22, 21, bounds), PairRelation::concordant);
  EXPECT_EQ(pair_relation_cluster(5, 21, 22, 3, bounds), PairRelation::discordant);
  report_line("cluster discordance examples ((i,j) concordant, (i*,j*) discordant)");
}

// ---------------------------------------------------------------------------
// Criterion 4: the selected ensemble beats the average single model.
// ---------------------------------------------------------------------------
TEST(Acceptance, SelectedEnsembleBeatsAverageModel) {
  const auto& ds = desk_scale();
  int wins_as = 0;
  int wins_rsps = 0;
  double mean_ens = 0.0;
  double mean_rsps = 0.0;
  for (const auto& run : ds.runs) {
    wins_as += run.ensemble_pr > run.as;
    wins_rsps += run.ensemble_pr > run.rsps_value;
    mean_ens += run.ensemble_pr / ds.runs.size();
    mean_rsps += run.rsps_value / ds.runs.size();
    std::printf("  seed run: ensemble=%.3f AS=%.3f RSPS=%.3f\n", run.ensemble_pr, run.as, run.rsps_value);
  }
  EXPECT_GE(wins_as, 4);
  EXPECT_GE(wins_rsps, 4);
  EXPECT_GE(mean_ens, 1.10 * mean_rsps);
  EXPECT_LT(ds.elapsed_seconds, 600.0);
  report_line("desk-scale selection beats AS and RSPS (>=4/5, mean margin >=10%, <10min)");
}

// ---------------------------------------------------------------------------
// Criterion 5: top-vs-bottom ensemble gap.
// ---------------------------------------------------------------------------
TEST(Acceptance, TopBeatsBottomEnsemble) {
  const auto& ds = desk_scale();
  int wins = 0;
  double mean_top = 0.0;
  double mean_bottom = 0.0;
  for (const auto& run : ds.runs) {
    wins += run.ensemble_pr > run.bottom_pr;
    mean_top += run.ensemble_pr / ds.runs.size();
    mean_bottom += run.bottom_pr / ds.runs.size();
  }
  std::printf("  top mean=%.3f bottom mean=%.3f wins=%d/5\n", mean_top, mean_bottom, wins);
  EXPECT_GE(wins, 4);
  EXPECT_GT(mean_top, mean_bottom);
  report_line("top ensemble outperforms bottom ensemble (>=4/5)");
}

// ---------------------------------------------------------------------------
// Criterion 6: UED tracks PR AUC over non-member candidates.
// ---------------------------------------------------------------------------
TEST(Acceptance, UedTracksSupervisedMetric) {
  const auto& ds = desk_scale();
  double mean_mult = 0.0;
  double mean_cos = 0.0;
  for (const auto& run : ds.runs) {
    EXPECT_GE(run.candidates, 10u);
    mean_mult += run.spearman_mult / ds.runs.size();
    mean_cos += run.spearman_cosine / ds.runs.size();
    std::printf("  spearman: multiplicative=%.3f cosine=%.3f (candidates=%zu)\n", run.spearman_mult,
                run.spearman_cosine, run.candidates);
  }
  EXPECT_GE(mean_mult, 0.6);
  EXPECT_GE(mean_mult, mean_cos - 0.05);
  report_line("UED/PR-AUC Spearman >=0.6 mean; multiplicative >= cosine - 0.05");
}

// ---------------------------------------------------------------------------
// Criterion 7: performance and subsampling accuracy.
// ---------------------------------------------------------------------------
TEST(Acceptance, PerformanceAndSubsampling) {
  const ClusterConfig cfg = desk_cfg();
  const RelaxationConfig relax;
  const WeightProfile profile;
  std::mt19937_64 rng(4242);

  {
    const int n = 2000;
    std::vector<std::vector<int>> cols;
    for (int c = 0; c < 5; ++c) cols.push_back(random_permutation(n, rng));
    const auto rm = RankMatrix::from_columns(cols);
    const auto w = multi_model_outlier_weights(rm, cfg.eta, profile);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = multiway_fuzzy(rm, cfg, relax, w, nullptr, 1);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  exhaustive fuzzyM n=2000 M=5: %.3fs over %llu pairs\n", elapsed,
                static_cast<unsigned long long>(res.pairs_evaluated));
    EXPECT_EQ(res.pairs_evaluated, 1999000u);
    EXPECT_LT(elapsed, 10.0);

    const double threaded = multiway_fuzzy(rm, cfg, relax, w, nullptr, 2).value;
    EXPECT_NEAR(res.value, threaded, kTol);
  }

  for (std::uint64_t seed : {11, 12, 13}) {
    const int n = 2000;
    std::vector<std::vector<int>> cols;
    for (int c = 0; c < 5; ++c) cols.push_back(random_permutation(n, rng));
    const auto rm = RankMatrix::from_columns(cols);
    const auto w = multi_model_outlier_weights(rm, cfg.eta, profile);
    const double exact = multiway_fuzzy(rm, cfg, relax, w).value;
    const auto sample = subsample_pairs(n, detail::pair_count(n) / 10, seed);
    const double est = multiway_fuzzy(rm, cfg, relax, w, &sample).value;
    std::printf("  10%% budget seed %llu: exact=%.5f estimate=%.5f\n", static_cast<unsigned long long>(seed),
                exact, est);
    EXPECT_NEAR(est, exact, 0.02);
  }
  report_line("exhaustive fuzzyM <10s; 10% budget within 0.02; threads agree to 1e-12");
}

// ---------------------------------------------------------------------------
// Criterion 8: UED bounds and monotonicity.
// ---------------------------------------------------------------------------
TEST(Acceptance, UedBoundsAndMonotonicity) {
  std::mt19937_64 rng(2026);
  const ClusterConfig cfg = wide_cfg();
  for (int t = 0; t < 1000; ++t) {
    const int n = 20 + static_cast<int>(rng() % 130);
    const int m = 2 + static_cast<int>(rng() % 5);
    std::vector<std::vector<int>> cols;
    for (int c = 0; c < m; ++c) cols.push_back(random_permutation(n, rng));
    const auto rm = RankMatrix::from_columns(cols);
    const auto agg = aggregate_predictions(rm);
    const auto cand = random_permutation(n, rng);
    std::vector<std::string> names;
    for (int c = 0; c < m; ++c) names.push_back("m" + std::to_string(c));
    const auto scheme = static_cast<RankInverseScheme>(t % 3);
    const auto rep = ued_score("cand", cand, rm, names, agg, cfg, scheme);
    ASSERT_GE(rep.ued, 0.0);
    ASSERT_LE(rep.ued, 1.0);
  }

  // Aggregate of the ensemble scores exactly 1.
  for (int t = 0; t < 20; ++t) {
    const int n = 50 + static_cast<int>(rng() % 100);
    std::vector<std::vector<int>> cols;
    for (int c = 0; c < 3; ++c) cols.push_back(random_permutation(n, rng));
    const auto rm = RankMatrix::from_columns(cols);
    const auto agg = aggregate_predictions(rm);
    const std::vector<std::string> names3{"a", "b", "c"};
    ASSERT_EQ(ued_score("agg", agg, rm, names3, agg, cfg).ued, 1.0);
  }

  // Cluster-swap probe: 20 seeded fixtures, unanimous ensembles, k = 1..8
  // disjoint cross-cluster swaps; the score never increases with k.
  ClusterConfig mid;
  mid.eta = 0.1;
  mid.gamma1 = 0.5;
  mid.gamma2 = 3.0;
  for (int fixture = 0; fixture < 20; ++fixture) {
    const int n = 100;
    const auto base = random_permutation(n, rng);
    const auto rm = RankMatrix::from_columns({base, base, base});
    const auto agg = aggregate_predictions(rm);
    const auto bounds = cluster_bounds(n, mid);
    std::vector<std::pair<int, int>> swaps;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n && swaps.size() < 8; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        if (cluster_of_bounds(agg[static_cast<std::size_t>(i)], bounds) !=
            cluster_of_bounds(agg[static_cast<std::size_t>(j)], bounds)) {
          swaps.emplace_back(i, j);
          used[static_cast<std::size_t>(i)] = used[static_cast<std::size_t>(j)] = 1;
          break;
        }
      }
    }
    ASSERT_GE(swaps.size(), 4u);
    auto cand = agg;
    double prev = 1.0 + kTol;
    for (const auto& [i, j] : swaps) {
      std::swap(cand[static_cast<std::size_t>(i)], cand[static_cast<std::size_t>(j)]);
      const std::vector<std::string> names3{"a", "b", "c"};
      const double u = ued_score("cand", cand, rm, names3, agg, mid).ued;
      ASSERT_LE(u, prev + kTol);
      prev = u;
    }
  }
  report_line("UED in [0,1] x1000; UED(aggregate)=1 exactly; swap probe non-increasing x20");
}
