#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "advense/error.hpp"
#include "advense/ranking.hpp"
#include "advense/synthetic.hpp"

namespace advense {

namespace detail {

inline std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("could not parse number '" + s + "' in " + context);
  }
}

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace detail

/// Reads the score-matrix CSV contract: header `id,<model_1>,...,<model_N>[,label]`,
/// one row per observation.
inline ScoreMatrix read_score_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("could not open score matrix file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("score matrix file '" + path + "' is empty");
  auto header = detail::split_csv_line(detail::trim(line));
  if (header.size() < 2 || header.front() != "id")
    throw InputError("score matrix header must start with 'id', got '" + line + "'");
  const bool has_label = header.back() == "label";
  const std::size_t n_models = header.size() - 1 - (has_label ? 1 : 0);
  if (n_models < 1) throw InputError("score matrix file '" + path + "' has no model columns");

  ScoreMatrix sm;
  sm.model_names.assign(header.begin() + 1, header.begin() + 1 + static_cast<std::ptrdiff_t>(n_models));
  sm.columns.assign(n_models, {});
  std::vector<int> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto fields = detail::split_csv_line(trimmed);
    if (fields.size() != header.size())
      throw InputError("row " + std::to_string(row) + " of '" + path + "' has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(header.size()));
    sm.ids.push_back(fields.front());
    for (std::size_t m = 0; m < n_models; ++m)
      sm.columns[m].push_back(detail::parse_double(fields[m + 1], "row " + std::to_string(row) + " of '" + path + "'"));
    if (has_label) {
      const double v = detail::parse_double(fields.back(), "label at row " + std::to_string(row) + " of '" + path + "'");
      labels.push_back(static_cast<int>(v));
    }
  }
  if (has_label) sm.labels = std::move(labels);
  sm.validate();
  return sm;
}

inline void write_score_matrix(const std::string& path, const ScoreMatrix& sm) {
  sm.validate();
  std::ofstream out(path);
  if (!out) throw InputError("could not open '" + path + "' for writing");
  out << "id";
  for (const auto& name : sm.model_names) out << ',' << name;
  if (sm.labels) out << ",label";
  out << '\n';
  for (int i = 0; i < sm.n(); ++i) {
    out << sm.ids[static_cast<std::size_t>(i)];
    for (const auto& col : sm.columns) out << ',' << detail::format_g12(col[static_cast<std::size_t>(i)]);
    if (sm.labels) out << ',' << (*sm.labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

/// Writes the same contract with integer rank values.
inline void write_rank_matrix(const std::string& path, const ScoreMatrix& sm, const RankMatrix& rm) {
  std::ofstream out(path);
  if (!out) throw InputError("could not open '" + path + "' for writing");
  out << "id";
  for (const auto& name : sm.model_names) out << ',' << name;
  if (sm.labels) out << ",label";
  out << '\n';
  for (int i = 0; i < sm.n(); ++i) {
    out << sm.ids[static_cast<std::size_t>(i)];
    for (const auto& col : rm.columns) out << ',' << col[static_cast<std::size_t>(i)];
    if (sm.labels) out << ',' << (*sm.labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

struct FeatureFile {
  std::vector<std::string> ids;
  FeatureMatrix features;
  std::optional<std::vector<int>> labels;
};

/// Reads a dataset CSV: header `id,<feature_1>,...,<feature_d>[,label]`.
inline FeatureFile read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("could not open dataset file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset file '" + path + "' is empty");
  auto header = detail::split_csv_line(detail::trim(line));
  if (header.size() < 2 || header.front() != "id")
    throw InputError("dataset header must start with 'id', got '" + line + "'");
  const bool has_label = header.back() == "label";
  const std::size_t n_features = header.size() - 1 - (has_label ? 1 : 0);
  if (n_features < 1) throw InputError("dataset file '" + path + "' has no feature columns");

  FeatureFile ff;
  std::vector<int> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto fields = detail::split_csv_line(trimmed);
    if (fields.size() != header.size())
      throw InputError("row " + std::to_string(row) + " of '" + path + "' has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(header.size()));
    ff.ids.push_back(fields.front());
    std::vector<double> feats(n_features);
    for (std::size_t f = 0; f < n_features; ++f)
      feats[f] = detail::parse_double(fields[f + 1], "row " + std::to_string(row) + " of '" + path + "'");
    ff.features.push_back(std::move(feats));
    if (has_label)
      labels.push_back(static_cast<int>(detail::parse_double(fields.back(), "label at row " + std::to_string(row))));
  }
  if (ff.ids.size() < 2) throw InputError("dataset file '" + path + "' needs at least 2 rows");
  if (has_label) ff.labels = std::move(labels);
  return ff;
}

inline void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw InputError("could not open '" + path + "' for writing");
  out << "id";
  for (int f = 0; f < ds.d(); ++f) out << ",f" << (f + 1);
  out << ",label\n";
  for (int i = 0; i < ds.n(); ++i) {
    out << (i + 1);
    for (int f = 0; f < ds.d(); ++f)
      out << ',' << detail::format_g12(ds.features[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)]);
    out << ',' << ds.labels[static_cast<std::size_t>(i)] << '\n';
  }
}

inline void write_predictions(const std::string& path, const std::vector<std::string>& ids,
                              const std::vector<int>& ranks) {
  if (ids.size() != ranks.size()) throw InputError("write_predictions: ids and ranks differ in length");
  std::ofstream out(path);
  if (!out) throw InputError("could not open '" + path + "' for writing");
  out << "id,rank\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << ranks[i] << '\n';
}

/// Flat dotted-key config files: `cluster.eta = 0.05`, one key per line,
/// `#` comments.
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("could not open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not 'key = value': '" + trimmed + "'");
    const std::string key = detail::trim(trimmed.substr(0, eq));
    const std::string value = detail::trim(trimmed.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has an empty key");
    out[key] = value;
  }
  return out;
}

}  // namespace advense
