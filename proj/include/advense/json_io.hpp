#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advense/correlation.hpp"
#include "advense/ensemble.hpp"
#include "advense/error.hpp"
#include "advense/ued.hpp"

namespace advense {

namespace detail {

// Round to 12 significant digits before serializing; nlohmann's dump then
// prints the shortest round-trip form, giving byte-stable diffs.
inline double round_sig12(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace detail

inline nlohmann::json to_json(const CorrelationResult& r) {
  nlohmann::json j;
  j["value"] = detail::round_sig12(r.value);
  j["raw_value"] = detail::round_sig12(r.raw_value);
  j["pairs_evaluated"] = r.pairs_evaluated;
  j["subsampled"] = r.subsampled;
  if (r.seed) j["seed"] = *r.seed;
  else j["seed"] = nullptr;
  return j;
}

inline CorrelationResult correlation_from_json(const nlohmann::json& j) {
  CorrelationResult r;
  r.value = j.at("value").get<double>();
  r.raw_value = j.at("raw_value").get<double>();
  r.pairs_evaluated = j.at("pairs_evaluated").get<std::uint64_t>();
  r.subsampled = j.at("subsampled").get<bool>();
  if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

inline nlohmann::json to_json(const SubsetScore& s) {
  nlohmann::json j;
  j["members"] = s.members;
  j["fuzzy"] = to_json(s.fuzzy);
  j["exact"] = to_json(s.exact);
  return j;
}

inline SubsetScore subset_from_json(const nlohmann::json& j) {
  SubsetScore s;
  s.members = j.at("members").get<std::vector<std::string>>();
  s.fuzzy = correlation_from_json(j.at("fuzzy"));
  s.exact = correlation_from_json(j.at("exact"));
  return s;
}

inline nlohmann::json to_json(const EnsembleReport& r) {
  nlohmann::json j;
  j["selected"] = to_json(r.selected);
  nlohmann::json subsets = nlohmann::json::array();
  for (const auto& s : r.ranked_subsets) subsets.push_back(to_json(s));
  j["ranked_subsets"] = std::move(subsets);
  j["aggregated_ranks"] = r.aggregated_ranks;
  j["ids"] = r.ids;
  j["config"] = {
      {"cluster", {{"eta", detail::round_sig12(r.cluster.eta)},
                   {"gamma1", detail::round_sig12(r.cluster.gamma1)},
                   {"gamma2", detail::round_sig12(r.cluster.gamma2)}}},
      {"weight", {{"delta", detail::round_sig12(r.weights.delta_w)},
                  {"b", detail::round_sig12(r.weights.b)},
                  {"mu", detail::round_sig12(r.weights.mu)},
                  {"sigma", detail::round_sig12(r.weights.sigma)},
                  {"lambda", detail::round_sig12(r.weights.lambda)}}},
      {"relax", {{"delta", detail::round_sig12(r.relax.delta_relax)}}},
      {"selection", {{"size", r.selection.ensemble_size},
                     {"top_k", r.selection.top_k},
                     {"budget", r.selection.budget},
                     {"pairs_budget", r.selection.pairs_budget}}},
  };
  j["seed"] = r.seed;
  j["enumeration_mode"] = r.enumeration_mode;
  j["subsets_evaluated"] = r.subsets_evaluated;
  return j;
}

inline EnsembleReport ensemble_report_from_json(const nlohmann::json& j) {
  EnsembleReport r;
  r.selected = subset_from_json(j.at("selected"));
  for (const auto& s : j.at("ranked_subsets")) r.ranked_subsets.push_back(subset_from_json(s));
  r.aggregated_ranks = j.at("aggregated_ranks").get<std::vector<int>>();
  r.ids = j.at("ids").get<std::vector<std::string>>();
  const auto& cfg = j.at("config");
  r.cluster.eta = cfg.at("cluster").at("eta").get<double>();
  r.cluster.gamma1 = cfg.at("cluster").at("gamma1").get<double>();
  r.cluster.gamma2 = cfg.at("cluster").at("gamma2").get<double>();
  r.weights.delta_w = cfg.at("weight").at("delta").get<double>();
  r.weights.b = cfg.at("weight").at("b").get<double>();
  r.weights.mu = cfg.at("weight").at("mu").get<double>();
  r.weights.sigma = cfg.at("weight").at("sigma").get<double>();
  r.weights.lambda = cfg.at("weight").at("lambda").get<double>();
  r.relax.delta_relax = cfg.at("relax").at("delta").get<double>();
  r.selection.ensemble_size = cfg.at("selection").at("size").get<int>();
  r.selection.top_k = cfg.at("selection").at("top_k").get<int>();
  r.selection.budget = cfg.at("selection").at("budget").get<std::uint64_t>();
  r.selection.pairs_budget = cfg.at("selection").at("pairs_budget").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.enumeration_mode = j.at("enumeration_mode").get<std::string>();
  r.subsets_evaluated = j.at("subsets_evaluated").get<std::uint64_t>();
  return r;
}

inline nlohmann::json to_json(const UEDReport& r) {
  nlohmann::json j;
  j["model_name"] = r.model_name;
  j["ued"] = detail::round_sig12(r.ued);
  j["n_norm"] = detail::round_sig12(r.n_norm);
  j["n_norm_rule"] = "(C-1) * sum(confidence * weight)";
  j["scheme"] = to_string(r.scheme);
  j["ensemble_members"] = r.ensemble_members;
  if (r.per_observation) {
    nlohmann::json triples = nlohmann::json::array();
    for (const auto& t : *r.per_observation)
      triples.push_back({detail::round_sig12(t[0]), detail::round_sig12(t[1]), detail::round_sig12(t[2])});
    j["per_observation"] = std::move(triples);
  } else {
    j["per_observation"] = nullptr;
  }
  return j;
}

inline UEDReport ued_report_from_json(const nlohmann::json& j) {
  UEDReport r;
  r.model_name = j.at("model_name").get<std::string>();
  r.ued = j.at("ued").get<double>();
  r.n_norm = j.at("n_norm").get<double>();
  r.scheme = rank_inverse_scheme_from_string(j.at("scheme").get<std::string>());
  r.ensemble_members = j.at("ensemble_members").get<std::vector<std::string>>();
  if (!j.at("per_observation").is_null()) {
    std::vector<std::array<double, 3>> triples;
    for (const auto& t : j.at("per_observation"))
      triples.push_back({t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()});
    r.per_observation = std::move(triples);
  }
  return r;
}

/// Deterministic serialization: keys sorted (nlohmann's object is a sorted
/// map), two-space indent, trailing newline.
inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("could not open '" + path + "' for writing");
  out << dump_json(j);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("could not open JSON file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("could not parse JSON file '" + path + "': " + e.what());
  }
  return j;
}

}  // namespace advense
