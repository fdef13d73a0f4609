#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "advense/correlation.hpp"
#include "advense/ensemble.hpp"
#include "advense/error.hpp"
#include "advense/ranking.hpp"
#include "advense/ued.hpp"
#include "advense/weighting.hpp"

namespace advense {

/// Everything a pipeline run needs; config-file keys map 1:1 onto fields and
/// command-line flags override them.
struct RunConfig {
  ClusterConfig cluster;
  WeightProfile weights;
  RelaxationConfig relax;
  SelectionConfig selection;
  RankInverseScheme ued_scheme = RankInverseScheme::multiplicative;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
};

namespace detail {

inline double config_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has non-numeric value '" + value + "'");
  }
}

inline std::int64_t config_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has non-integer value '" + value + "'");
  }
}

}  // namespace detail

inline void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "cluster.eta") cfg.cluster.eta = detail::config_double(key, value);
    else if (key == "cluster.gamma1") cfg.cluster.gamma1 = detail::config_double(key, value);
    else if (key == "cluster.gamma2") cfg.cluster.gamma2 = detail::config_double(key, value);
    else if (key == "weight.delta") cfg.weights.delta_w = detail::config_double(key, value);
    else if (key == "weight.b") cfg.weights.b = detail::config_double(key, value);
    else if (key == "weight.mu") cfg.weights.mu = detail::config_double(key, value);
    else if (key == "weight.sigma") cfg.weights.sigma = detail::config_double(key, value);
    else if (key == "weight.lambda") cfg.weights.lambda = detail::config_double(key, value);
    else if (key == "relax.delta") cfg.relax.delta_relax = detail::config_double(key, value);
    else if (key == "selection.size") cfg.selection.ensemble_size = static_cast<int>(detail::config_int(key, value));
    else if (key == "selection.top_k") cfg.selection.top_k = static_cast<int>(detail::config_int(key, value));
    else if (key == "selection.budget") cfg.selection.budget = static_cast<std::uint64_t>(detail::config_int(key, value));
    else if (key == "selection.pairs_budget")
      cfg.selection.pairs_budget = static_cast<std::uint64_t>(detail::config_int(key, value));
    else if (key == "ued.scheme") cfg.ued_scheme = rank_inverse_scheme_from_string(value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::config_int(key, value));
    else if (key == "threads") cfg.threads = static_cast<int>(detail::config_int(key, value));
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace advense
