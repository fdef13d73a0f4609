#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "advense/config.hpp"
#include "advense/io.hpp"
#include "advense/json_io.hpp"

using advense::ConfigError;
using advense::InputError;
using advense::RunConfig;
using advense::ScoreMatrix;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("advense_io_" + std::to_string(::getpid()) + "_" +
                                                     ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

ScoreMatrix sample_matrix(bool with_labels) {
  ScoreMatrix sm;
  sm.ids = {"a", "b", "c", "d"};
  sm.model_names = {"m1", "m2"};
  sm.columns = {{0.5, -1.25, 3.75, 2.0}, {10.0, 20.0, 30.0, 40.0}};
  if (with_labels) sm.labels = std::vector<int>{0, 1, 0, 0};
  return sm;
}

}  // namespace

using IoTest = TempDir;

TEST_F(IoTest, ScoreMatrixRoundTrip) {
  for (bool labels : {false, true}) {
    const auto sm = sample_matrix(labels);
    advense::write_score_matrix(path("m.csv"), sm);
    const auto back = advense::read_score_matrix(path("m.csv"));
    EXPECT_EQ(back.ids, sm.ids);
    EXPECT_EQ(back.model_names, sm.model_names);
    EXPECT_EQ(back.columns, sm.columns);
    EXPECT_EQ(back.labels, sm.labels);
  }
}

TEST_F(IoTest, MissingFileNamesPath) {
  try {
    advense::read_score_matrix(path("absent.csv"));
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("absent.csv"), std::string::npos);
  }
}

TEST_F(IoTest, HeaderAndFieldValidation) {
  {
    std::ofstream out(path("bad_header.csv"));
    out << "name,m1\nx,1.0\n";
  }
  EXPECT_THROW(advense::read_score_matrix(path("bad_header.csv")), InputError);
  {
    std::ofstream out(path("bad_value.csv"));
    out << "id,m1,m2\na,1.0,2.0\nb,oops,3.0\nc,2.0,4.0\n";
  }
  try {
    advense::read_score_matrix(path("bad_value.csv"));
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("oops"), std::string::npos);
    EXPECT_NE(msg.find("row 3"), std::string::npos);
  }
  {
    std::ofstream out(path("short_row.csv"));
    out << "id,m1,m2\na,1.0\n";
  }
  EXPECT_THROW(advense::read_score_matrix(path("short_row.csv")), InputError);
}

TEST_F(IoTest, DatasetRoundTrip) {
  const auto ds = advense::gen_synthetic(advense::SyntheticMode::organic, 120, 3, 0.1, 5);
  advense::write_dataset(path("d.csv"), ds);
  const auto back = advense::read_features(path("d.csv"));
  ASSERT_TRUE(back.labels.has_value());
  EXPECT_EQ(back.labels->size(), static_cast<std::size_t>(ds.n()));
  EXPECT_EQ(back.features.size(), static_cast<std::size_t>(ds.n()));
  // %.12g serialization round-trips to 12 significant digits
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(back.features[static_cast<std::size_t>(i)][0], ds.features[static_cast<std::size_t>(i)][0],
                std::abs(ds.features[static_cast<std::size_t>(i)][0]) * 1e-11 + 1e-11);
  }
}

TEST_F(IoTest, ConfigFileParsing) {
  {
    std::ofstream out(path("run.conf"));
    out << "# comment line\n"
        << "cluster.eta = 0.1\n"
        << "weight.lambda = 6\n"
        << "selection.size = 4\n"
        << "ued.scheme = cosine\n"
        << "seed = 99\n";
  }
  RunConfig cfg;
  advense::apply_config(cfg, advense::parse_config_file(path("run.conf")));
  EXPECT_DOUBLE_EQ(cfg.cluster.eta, 0.1);
  EXPECT_DOUBLE_EQ(cfg.weights.lambda, 6.0);
  EXPECT_EQ(cfg.selection.ensemble_size, 4);
  EXPECT_EQ(cfg.ued_scheme, advense::RankInverseScheme::cosine);
  EXPECT_EQ(cfg.seed, 99u);

  {
    std::ofstream out(path("bad.conf"));
    out << "cluster.unknown = 1\n";
  }
  RunConfig cfg2;
  try {
    advense::apply_config(cfg2, advense::parse_config_file(path("bad.conf")));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("cluster.unknown"), std::string::npos);
  }
  {
    std::ofstream out(path("nonnum.conf"));
    out << "cluster.eta = fast\n";
  }
  RunConfig cfg3;
  EXPECT_THROW(advense::apply_config(cfg3, advense::parse_config_file(path("nonnum.conf"))), ConfigError);
}

TEST_F(IoTest, EnsembleReportJsonRoundTrip) {
  std::mt19937_64 rng(3);
  ScoreMatrix sm;
  const int n = 60;
  for (int c = 0; c < 4; ++c) {
    sm.model_names.push_back("m" + std::to_string(c));
    std::vector<double> col(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : col) v = u(rng);
    sm.columns.push_back(col);
  }
  for (int i = 0; i < n; ++i) sm.ids.push_back("o" + std::to_string(i));

  advense::ClusterConfig cluster;
  cluster.eta = 0.1;
  advense::SelectionConfig sel;
  sel.ensemble_size = 3;
  sel.pairs_budget = 0;
  const auto report =
      advense::select_ensembles(sm, sel, cluster, advense::RelaxationConfig{}, advense::WeightProfile{}, 17);

  advense::write_json_file(path("report.json"), advense::to_json(report));
  const auto back = advense::ensemble_report_from_json(advense::read_json_file(path("report.json")));
  EXPECT_EQ(back.selected.members, report.selected.members);
  EXPECT_EQ(back.aggregated_ranks, report.aggregated_ranks);
  EXPECT_EQ(back.ids, report.ids);
  EXPECT_EQ(back.seed, report.seed);
  EXPECT_EQ(back.enumeration_mode, report.enumeration_mode);
  EXPECT_EQ(back.ranked_subsets.size(), report.ranked_subsets.size());
  EXPECT_NEAR(back.selected.fuzzy.value, report.selected.fuzzy.value, 1e-11);

  // Serialization is byte-stable.
  const auto dump1 = advense::dump_json(advense::to_json(report));
  const auto dump2 = advense::dump_json(advense::to_json(back));
  EXPECT_EQ(dump1, dump2);
}

TEST_F(IoTest, UedReportJsonRoundTrip) {
  advense::UEDReport r;
  r.model_name = "cand";
  r.ued = 0.123456789012345;
  r.n_norm = 42.5;
  r.scheme = advense::RankInverseScheme::logarithmic;
  r.ensemble_members = {"a", "b"};
  r.per_observation = std::vector<std::array<double, 3>>{{1.0, 0.5, 0.25}, {0.0, 1.0, 1.0}};
  advense::write_json_file(path("ued.json"), advense::to_json(r));
  const auto back = advense::ued_report_from_json(advense::read_json_file(path("ued.json")));
  EXPECT_EQ(back.model_name, r.model_name);
  EXPECT_NEAR(back.ued, r.ued, 1e-11);
  EXPECT_EQ(back.scheme, r.scheme);
  EXPECT_EQ(back.ensemble_members, r.ensemble_members);
  ASSERT_TRUE(back.per_observation.has_value());
  EXPECT_EQ(back.per_observation->size(), 2u);
}

TEST_F(IoTest, SelectionIsLabelBlind) {
  std::mt19937_64 rng(5);
  ScoreMatrix sm;
  const int n = 80;
  for (int c = 0; c < 5; ++c) {
    sm.model_names.push_back("m" + std::to_string(c));
    std::vector<double> col(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : col) v = u(rng);
    sm.columns.push_back(col);
  }
  for (int i = 0; i < n; ++i) sm.ids.push_back("o" + std::to_string(i));

  ScoreMatrix labeled = sm;
  labeled.labels = std::vector<int>(static_cast<std::size_t>(n), 0);
  (*labeled.labels)[0] = 1;

  advense::ClusterConfig cluster;
  cluster.eta = 0.1;
  advense::SelectionConfig sel;
  sel.ensemble_size = 3;
  sel.pairs_budget = 0;
  const auto blind =
      advense::select_ensembles(sm, sel, cluster, advense::RelaxationConfig{}, advense::WeightProfile{}, 7);
  const auto with_labels =
      advense::select_ensembles(labeled, sel, cluster, advense::RelaxationConfig{}, advense::WeightProfile{}, 7);
  EXPECT_EQ(blind.selected.members, with_labels.selected.members);
  EXPECT_EQ(blind.aggregated_ranks, with_labels.aggregated_ranks);
}

TEST(RoundSig12, TrimsMantissa) {
  EXPECT_EQ(advense::detail::round_sig12(0.0), 0.0);
  const double rounded = advense::detail::round_sig12(0.123456789012345678);
  EXPECT_NEAR(rounded, 0.123456789012, 1e-15);
  // Idempotent.
  EXPECT_EQ(advense::detail::round_sig12(rounded), rounded);
}
