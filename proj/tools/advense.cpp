// advense: Accurately-Diverse ensemble selection and unsupervised model
// evaluation for anomaly detectors.
//
// Pipeline: gen-data -> score -> rank -> correlate/select -> predict/ued ->
// evaluate. Every randomized step takes a seed and embeds it in its output;
// JSON outputs have sorted keys and 12-significant-digit floats so reruns
// are byte-identical.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "advense/advense.hpp"
#include "advense/json_io.hpp"

namespace {

using advense::ClusterConfig;
using advense::ConfigError;
using advense::InputError;
using advense::RunConfig;

// --config on the command line wins over the ADVENSE_CONFIG env var. The
// path is pre-scanned so file values become defaults that explicit flags
// then override.
std::optional<std::string> find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  if (const char* env = std::getenv("ADVENSE_CONFIG"); env && *env) return std::string(env);
  return std::nullopt;
}

void add_cluster_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--eta", cfg.cluster.eta, "assumed contamination fraction");
  cmd->add_option("--gamma1", cfg.cluster.gamma1, "cluster-1 width factor, in [0.25, 0.5]");
  cmd->add_option("--gamma2", cfg.cluster.gamma2, "cluster-3 width factor, in [3, 5]");
}

void add_weight_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--weight-delta", cfg.weights.delta_w, "outlier weighting scale");
  cmd->add_option("--weight-b", cfg.weights.b, "outlier weighting sharpness");
  cmd->add_option("--weight-mu", cfg.weights.mu, "inlier plateau center fraction");
  cmd->add_option("--weight-sigma", cfg.weights.sigma, "inlier plateau width fraction");
  cmd->add_option("--weight-lambda", cfg.weights.lambda, "inlier plateau flatness");
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "config file (flat dotted keys); also via ADVENSE_CONFIG");
  cmd->add_option("--seed", cfg.seed, "seed for every randomized step");
  cmd->add_option("--threads", cfg.threads, "worker threads for pair kernels (0 = hardware)");
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Detector spec files: one detector per line, `name kind [k=..] [bins=..]
// [components=..]`, '#' comments.
std::vector<advense::DetectorSpec> parse_detector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("could not open detector spec file '" + path + "'");
  std::vector<advense::DetectorSpec> specs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::stringstream ss(line);
    std::string name;
    if (!(ss >> name) || name.front() == '#') continue;
    std::string kind;
    if (!(ss >> kind))
      throw ConfigError("detector line " + std::to_string(lineno) + " needs `name kind [params]`: '" + line + "'");
    advense::DetectorSpec spec;
    spec.name = name;
    spec.kind = advense::detector_kind_from_string(kind);
    std::string param;
    while (ss >> param) {
      const auto eq = param.find('=');
      if (eq == std::string::npos)
        throw ConfigError("detector parameter '" + param + "' at line " + std::to_string(lineno) +
                          " is not key=value");
      const std::string key = param.substr(0, eq);
      const int value = std::stoi(param.substr(eq + 1));
      if (key == "k") spec.k = value;
      else if (key == "bins") spec.bins = value;
      else if (key == "components") spec.components = value;
      else throw ConfigError("unknown detector parameter '" + key + "' at line " + std::to_string(lineno));
    }
    for (const auto& other : specs) {
      if (other.name == spec.name) throw InputError("duplicate detector name '" + spec.name + "'");
    }
    specs.push_back(spec);
  }
  if (specs.empty()) throw InputError("detector spec file '" + path + "' defines no detectors");
  return specs;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
  if (!out_path.empty()) advense::write_json_file(out_path, j);
  std::cout << advense::dump_json(j);
}

// Weights used by each metric mode: cluster-level metrics upweight strong
// outliers, index-level metrics upweight non-extreme inliers.
struct CorrelateArgs {
  std::string scores_path;
  std::string metric = "fuzzyM";
  std::string models_csv;
  std::uint64_t pairs_budget = 0;
  std::string out_path;
};

int run_correlate(const CorrelateArgs& args, const RunConfig& cfg) {
  auto sm = advense::read_score_matrix(args.scores_path);
  std::vector<int> selected;
  if (!args.models_csv.empty()) {
    for (const auto& name : split_on(args.models_csv, ',')) selected.push_back(sm.model_index(name));
  } else {
    for (int m = 0; m < sm.num_models(); ++m) selected.push_back(m);
  }
  const bool two_way = args.metric == "exact2" || args.metric == "fuzzy2";
  if (two_way && selected.size() != 2)
    throw InputError("metric " + args.metric + " needs exactly 2 models; pass --models a,b (matrix has " +
                     std::to_string(sm.num_models()) + ")");
  if (!two_way && selected.size() < 2) throw InputError("metric " + args.metric + " needs at least 2 models");

  const auto full = advense::RankMatrix::from_scores(sm);
  const auto rm = full.restricted(selected);
  const int n = rm.n();
  cfg.weights.validate();
  cfg.relax.validate();

  const auto pairs = (args.pairs_budget == 0 || args.pairs_budget >= advense::detail::pair_count(n))
                         ? advense::PairSet::all(n)
                         : advense::PairSet::sample(n, args.pairs_budget, cfg.seed);

  advense::CorrelationResult res;
  if (args.metric == "exact2") {
    res = advense::kendall_exact_two(rm.column(0), rm.column(1), &pairs, cfg.threads);
  } else if (args.metric == "fuzzy2") {
    const auto w = advense::multi_model_outlier_weights(rm, cfg.cluster.eta, cfg.weights);
    res = advense::fuzzy_weighted_two(rm.column(0), rm.column(1), cfg.cluster, w, &pairs, cfg.threads);
  } else if (args.metric == "exactM") {
    const auto w = advense::multi_model_inlier_weights(rm, cfg.weights);
    res = advense::multiway_exact(rm, w, &pairs, cfg.threads);
  } else if (args.metric == "fuzzyM") {
    if (rm.num_models() > 20)
      std::cerr << "warning: " << rm.num_models()
                << " models exceed the 20-slot concordant-set bound; raw value may leave [0, 1]\n";
    const auto w = advense::multi_model_outlier_weights(rm, cfg.cluster.eta, cfg.weights);
    res = advense::multiway_fuzzy(rm, cfg.cluster, cfg.relax, w, &pairs, cfg.threads);
  } else {
    throw ConfigError("unknown metric '" + args.metric + "' (expected exact2, fuzzy2, exactM or fuzzyM)");
  }

  nlohmann::json j = advense::to_json(res);
  j["metric"] = args.metric;
  emit(j, args.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accurately-Diverse ensembles of anomaly detectors: unsupervised model selection (subset search over "
               "rank-correlation criteria) and unsupervised model evaluation (ensemble-divergence scoring)"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  try {
    if (auto path = find_config_path(argc, argv)) {
      config_path = *path;
      advense::apply_config(cfg, advense::parse_config_file(*path));
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  // ---- gen-data -----------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "generate a seeded synthetic dataset CSV");
  std::string gen_mode = "organic";
  int gen_n = 2000;
  int gen_d = 8;
  double gen_contamination = 0.05;
  std::string gen_out;
  gen->add_option("--mode", gen_mode, "organic or merged_class");
  gen->add_option("--n", gen_n, "observations");
  gen->add_option("--d", gen_d, "features");
  gen->add_option("--contamination", gen_contamination, "anomaly fraction in (0, 0.5)");
  gen->add_option("--out", gen_out, "output CSV path")->required();
  add_common_flags(gen, cfg, config_path);
  gen->callback([&] {
    const auto ds = advense::gen_synthetic(advense::synthetic_mode_from_string(gen_mode), gen_n, gen_d,
                                           gen_contamination, cfg.seed);
    advense::write_dataset(gen_out, ds);
    nlohmann::json j;
    j["mode"] = gen_mode;
    j["n"] = ds.n();
    j["d"] = ds.d();
    j["anomalies"] = static_cast<int>(std::count(ds.labels.begin(), ds.labels.end(), 1));
    j["contamination"] = advense::detail::round_sig12(ds.contamination);
    j["seed"] = cfg.seed;
    j["out"] = gen_out;
    std::cout << advense::dump_json(j);
  });

  // ---- score --------------------------------------------------------------
  auto* score = app.add_subcommand("score", "run a detector pool over a dataset CSV, writing a score matrix");
  std::string score_data;
  std::string score_out;
  std::string score_detectors;
  score->add_option("--data", score_data, "dataset CSV (id,features...[,label])")->required();
  score->add_option("--out", score_out, "score matrix CSV to write")->required();
  score->add_option("--detectors", score_detectors, "detector spec file (default: built-in 12-detector pool)");
  add_common_flags(score, cfg, config_path);
  score->callback([&] {
    const auto ff = advense::read_features(score_data);
    const auto pool = score_detectors.empty() ? advense::default_pool() : parse_detector_file(score_detectors);
    advense::ScoreMatrix sm;
    sm.ids = ff.ids;
    sm.labels = ff.labels;
    std::vector<std::string> warnings;
    for (const auto& spec : pool) {
      sm.model_names.push_back(spec.name);
      sm.columns.push_back(advense::run_detector(spec, ff.features, cfg.seed, &warnings));
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    advense::write_score_matrix(score_out, sm);
    nlohmann::json j;
    j["models"] = sm.model_names;
    j["n"] = sm.n();
    j["seed"] = cfg.seed;
    j["out"] = score_out;
    std::cout << advense::dump_json(j);
  });

  // ---- rank ---------------------------------------------------------------
  auto* rank = app.add_subcommand("rank", "rank-transform a score matrix (rank 1 = most anomalous)");
  std::string rank_scores_path;
  std::string rank_out;
  rank->add_option("--scores", rank_scores_path, "score matrix CSV")->required();
  rank->add_option("--out", rank_out, "rank matrix CSV to write")->required();
  add_common_flags(rank, cfg, config_path);
  rank->callback([&] {
    const auto sm = advense::read_score_matrix(rank_scores_path);
    const auto rm = advense::RankMatrix::from_scores(sm);
    advense::write_rank_matrix(rank_out, sm, rm);
    nlohmann::json j;
    j["models"] = sm.model_names;
    j["n"] = sm.n();
    j["out"] = rank_out;
    std::cout << advense::dump_json(j);
  });

  // ---- correlate ------------------------------------------------------------
  auto* corr = app.add_subcommand("correlate", "compute one agreement metric over a score matrix");
  CorrelateArgs corr_args;
  corr->add_option("--scores", corr_args.scores_path, "score matrix CSV")->required();
  corr->add_option("--metric", corr_args.metric, "exact2, fuzzy2, exactM or fuzzyM");
  corr->add_option("--models", corr_args.models_csv, "comma-separated model names (default: all columns)");
  corr->add_option("--pairs-budget", corr_args.pairs_budget, "max observation pairs (0 = all)");
  corr->add_option("--out", corr_args.out_path, "also write the JSON here");
  add_cluster_flags(corr, cfg);
  add_weight_flags(corr, cfg);
  corr->add_option("--delta-relax", cfg.relax.delta_relax, "within-cluster relaxation fraction");
  add_common_flags(corr, cfg, config_path);
  corr->callback([&] { run_correlate(corr_args, cfg); });

  // ---- select ---------------------------------------------------------------
  auto* select = app.add_subcommand("select", "search model subsets for the most Accurately-Diverse ensemble");
  std::string select_scores;
  std::string select_out;
  std::string select_pred_out;
  select->add_option("--scores", select_scores, "score matrix CSV")->required();
  select->add_option("--out", select_out, "ensemble report JSON to write")->required();
  select->add_option("--pred-out", select_pred_out, "aggregated prediction CSV (id,rank)");
  select->add_option("--ensemble-size", cfg.selection.ensemble_size, "models per ensemble (M)");
  select->add_option("--top-k", cfg.selection.top_k, "fuzzy-ranked candidates kept for the exact tie-break");
  select->add_option("--budget", cfg.selection.budget, "max subsets enumerated before sampling kicks in");
  select->add_option("--pairs-budget", cfg.selection.pairs_budget, "observation pairs per metric (0 = all)");
  add_cluster_flags(select, cfg);
  add_weight_flags(select, cfg);
  select->add_option("--delta-relax", cfg.relax.delta_relax, "within-cluster relaxation fraction");
  add_common_flags(select, cfg, config_path);
  select->callback([&] {
    const auto sm = advense::read_score_matrix(select_scores);
    const auto report =
        advense::select_ensembles(sm, cfg.selection, cfg.cluster, cfg.relax, cfg.weights, cfg.seed, cfg.threads);
    advense::write_json_file(select_out, advense::to_json(report));
    if (!select_pred_out.empty()) advense::write_predictions(select_pred_out, report.ids, report.aggregated_ranks);
    nlohmann::json j;
    j["selected"] = report.selected.members;
    j["fuzzy"] = advense::detail::round_sig12(report.selected.fuzzy.value);
    j["exact"] = advense::detail::round_sig12(report.selected.exact.value);
    j["subsets_evaluated"] = report.subsets_evaluated;
    j["enumeration_mode"] = report.enumeration_mode;
    j["seed"] = cfg.seed;
    j["out"] = select_out;
    std::cout << advense::dump_json(j);
  });

  // ---- predict ---------------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "re-emit the aggregated ranks stored in an ensemble report");
  std::string predict_report;
  std::string predict_out;
  predict->add_option("--report", predict_report, "ensemble report JSON")->required();
  predict->add_option("--out", predict_out, "prediction CSV (id,rank)")->required();
  add_common_flags(predict, cfg, config_path);
  predict->callback([&] {
    const auto report = advense::ensemble_report_from_json(advense::read_json_file(predict_report));
    advense::write_predictions(predict_out, report.ids, report.aggregated_ranks);
    nlohmann::json j;
    j["n"] = report.ids.size();
    j["members"] = report.selected.members;
    j["out"] = predict_out;
    std::cout << advense::dump_json(j);
  });

  // ---- ued ---------------------------------------------------------------
  auto* ued = app.add_subcommand("ued", "Unsupervised Ensemble Divergence of candidates vs a stored ensemble");
  std::string ued_scores;
  std::string ued_report_path;
  std::string ued_candidate;
  std::string ued_scheme = "multiplicative";
  bool ued_all = false;
  bool ued_per_obs = false;
  std::string ued_out;
  ued->add_option("--scores", ued_scores, "score matrix CSV holding members and candidates")->required();
  ued->add_option("--ensemble-report", ued_report_path, "report written by `select`")->required();
  ued->add_option("--candidate", ued_candidate, "candidate model name");
  ued->add_flag("--all-candidates", ued_all, "score every non-member column");
  ued->add_option("--scheme", ued_scheme, "multiplicative, cosine or logarithmic");
  ued->add_flag("--per-observation", ued_per_obs, "include (distance, confidence, weight) triples");
  ued->add_option("--out", ued_out, "also write the JSON here");
  add_cluster_flags(ued, cfg);
  add_common_flags(ued, cfg, config_path);
  ued->callback([&] {
    if (ued_candidate.empty() == !ued_all)
      throw InputError("pass exactly one of --candidate <name> or --all-candidates");
    const auto sm = advense::read_score_matrix(ued_scores);
    const auto report = advense::ensemble_report_from_json(advense::read_json_file(ued_report_path));
    if (sm.ids != report.ids)
      throw InputError("score matrix observations do not match the ensemble report (different ids)");
    const auto rm = advense::RankMatrix::from_scores(sm);
    std::vector<int> member_idx;
    for (const auto& name : report.selected.members) member_idx.push_back(sm.model_index(name));
    const auto ensemble = rm.restricted(member_idx);
    const auto scheme = advense::rank_inverse_scheme_from_string(ued_scheme);

    auto score_one = [&](const std::string& name) {
      return advense::ued_score(name, rm.column(sm.model_index(name)), ensemble, report.selected.members,
                                report.aggregated_ranks, cfg.cluster, scheme, ued_per_obs);
    };

    if (ued_all) {
      std::vector<std::string> candidates;
      for (const auto& name : sm.model_names) {
        if (std::find(report.selected.members.begin(), report.selected.members.end(), name) ==
            report.selected.members.end())
          candidates.push_back(name);
      }
      std::sort(candidates.begin(), candidates.end());
      if (candidates.empty()) throw InputError("every column of the score matrix is an ensemble member");
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& name : candidates) arr.push_back(advense::to_json(score_one(name)));
      emit(arr, ued_out);
    } else {
      emit(advense::to_json(score_one(ued_candidate)), ued_out);
    }
  });

  // ---- evaluate ---------------------------------------------------------------
  auto* eval = app.add_subcommand("evaluate", "supervised evaluation of a labeled score matrix");
  std::string eval_scores;
  std::string eval_metric = "pr-auc";
  bool eval_as = false;
  bool eval_rsps = false;
  int eval_trials = 30;
  std::string eval_spearman_path;
  std::string eval_out;
  eval->add_option("--scores", eval_scores, "score matrix CSV with a label column")->required();
  eval->add_option("--metric", eval_metric, "pr-auc or prec-at-n");
  eval->add_flag("--as", eval_as, "include the Average Score baseline");
  eval->add_flag("--rsps", eval_rsps, "include the Randomly-Sampled Prediction Score baseline");
  eval->add_option("--trials", eval_trials, "RSPS trials");
  eval->add_option("--spearman-against", eval_spearman_path,
                   "UED report JSON (array) to correlate with the metric values");
  eval->add_option("--out", eval_out, "also write the JSON here");
  add_common_flags(eval, cfg, config_path);
  eval->callback([&] {
    const auto sm = advense::read_score_matrix(eval_scores);
    if (!sm.labels) throw InputError("evaluate needs a label column in '" + eval_scores + "'");
    const auto metric = advense::eval_metric_from_string(eval_metric);
    nlohmann::json j;
    j["metric"] = advense::to_string(metric);
    j["models"] = sm.model_names;
    std::vector<double> values;
    for (int m = 0; m < sm.num_models(); ++m)
      values.push_back(advense::evaluate_metric(metric, sm.column(m), *sm.labels));
    nlohmann::json vals = nlohmann::json::array();
    for (double v : values) vals.push_back(advense::detail::round_sig12(v));
    j["values"] = std::move(vals);
    if (eval_as) j["average_score"] = advense::detail::round_sig12(advense::average_score(values));
    if (eval_rsps) {
      j["rsps"] = {{"value", advense::detail::round_sig12(advense::rsps(sm, metric, cfg.seed, eval_trials))},
                   {"trials", eval_trials},
                   {"seed", cfg.seed}};
    }
    if (!eval_spearman_path.empty()) {
      const auto ued_json = advense::read_json_file(eval_spearman_path);
      if (!ued_json.is_array()) throw InputError("--spearman-against expects a JSON array of UED reports");
      std::vector<double> metric_vec;
      std::vector<double> ued_vec;
      std::vector<std::string> matched;
      for (const auto& item : ued_json) {
        const auto rep = advense::ued_report_from_json(item);
        const int idx = sm.model_index(rep.model_name);
        metric_vec.push_back(values[static_cast<std::size_t>(idx)]);
        ued_vec.push_back(rep.ued);
        matched.push_back(rep.model_name);
      }
      j["spearman_against"] = {{"path", eval_spearman_path},
                               {"candidates", matched},
                               {"value", advense::detail::round_sig12(advense::spearman(metric_vec, ued_vec))}};
    }
    emit(j, eval_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
