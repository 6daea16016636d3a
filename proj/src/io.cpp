/*
 * Copyright (c) 2026 The cgof Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cgof/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cgof/error.hpp"

namespace cgof {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && trim(field).empty()) {
      quoted = true;
      was_quoted = true;
      field.clear();
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) fail(ErrorKind::data_error, "unterminated quote on line " + std::to_string(line_no));
  fields.push_back(was_quoted ? field : trim(field));
  return fields;
}

Json bound_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double bound_from_json(const Json& v) {
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    fail(ErrorKind::invalid_argument, "unknown bound sentinel '" + s + "'");
  }
  if (!v.is_number()) fail(ErrorKind::invalid_argument, "cell bound must be a number or sentinel");
  return v.get<double>();
}

// Collects schema problems so one error can list every offending field.
class FieldReader {
 public:
  FieldReader(const Json& doc, std::string prefix, std::vector<std::string>& problems)
      : doc_(doc), prefix_(std::move(prefix)), problems_(problems) {
    if (!doc_.is_object()) problems_.push_back(label("") + ": expected an object");
  }

  bool has(const char* key) const { return doc_.is_object() && doc_.contains(key); }

  template <typename T>
  void read(const char* key, T& out, bool required = false) {
    if (!has(key)) {
      if (required) problems_.push_back(label(key) + ": missing");
      return;
    }
    try {
      const Json& v = doc_.at(key);
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned()) throw std::invalid_argument("expected a nonnegative integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      problems_.push_back(label(key) + ": " + e.what());
    }
  }

  template <typename F>
  void parse(const char* key, F&& convert, bool required = false) {
    std::string text;
    if (!has(key)) {
      if (required) problems_.push_back(label(key) + ": missing");
      return;
    }
    read(key, text);
    if (text.empty()) return;
    try {
      convert(text);
    } catch (const Error& e) {
      problems_.push_back(label(key) + ": " + e.what());
    }
  }

  void reject_unknown(std::initializer_list<const char*> known) {
    if (!doc_.is_object()) return;
    for (const auto& [key, value] : doc_.items()) {
      if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
        problems_.push_back(label(key.c_str()) + ": unknown field");
      }
    }
  }

  const Json& at(const char* key) const { return doc_.at(key); }

  std::string label(const char* key) const {
    if (prefix_.empty()) return key;
    if (*key == '\0') return prefix_;
    return prefix_ + "." + key;
  }

 private:
  const Json& doc_;
  std::string prefix_;
  std::vector<std::string>& problems_;
};

[[noreturn]] void schema_error(const std::vector<std::string>& problems) {
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  " + p;
  fail(ErrorKind::invalid_argument, msg);
}

Json stat_names(const std::vector<StatKind>& stats) {
  Json out = Json::array();
  for (StatKind s : stats) out.push_back(std::string(to_string(s)));
  return out;
}

void read_test_fields(FieldReader& f, TestConfig& config, std::vector<std::string>& problems,
                      std::vector<std::string>& stat_names_out) {
  f.read("model", config.model);
  f.parse("estimator",
          [&](const std::string& s) { config.estimator = estimator_kind_from_string(s); });
  f.read("theta", config.theta);
  f.read("L", config.L);
  if (config.L < 1) problems.push_back(f.label("L") + ": must be >= 1");
  if (f.has("partition")) {
    FieldReader pf(f.at("partition"), f.label("partition"), problems);
    pf.parse("rule",
             [&](const std::string& s) { config.partition.rule = partition_rule_from_string(s); });
    pf.read("T", config.partition.T);
    pf.read("r", config.partition.r);
    pf.read("seed", config.partition.seed);
    pf.read("equal_depth", config.partition.equal_depth);
    pf.read("cuts", config.partition.cuts);
    if (pf.has("cells")) {
      try {
        config.partition.fixed =
            std::make_shared<const Partition>(partition_from_json(f.at("partition")));
        config.partition.rule = PartitionRule::fixed;
      } catch (const Error& e) {
        problems.push_back(pf.label("cells") + ": " + e.what());
      }
    }
    pf.reject_unknown({"rule", "T", "r", "seed", "equal_depth", "cuts", "cells", "origin", "k"});
  }
  if (f.has("stats")) {
    try {
      stat_names_out = f.at("stats").get<std::vector<std::string>>();
    } catch (const std::exception& e) {
      problems.push_back(f.label("stats") + ": " + e.what());
    }
  }
  f.parse("df_policy",
          [&](const std::string& s) { config.df_convention = df_convention_from_string(s); });
  if (f.has("optimizer")) {
    FieldReader of(f.at("optimizer"), f.label("optimizer"), problems);
    of.read("max_iterations", config.optimizer.max_iterations);
    of.read("tolerance", config.optimizer.tolerance);
    of.read("restarts", config.optimizer.restarts);
    of.read("seed", config.optimizer.seed);
    of.reject_unknown({"max_iterations", "tolerance", "restarts", "seed"});
  }
}

void resolve_stats(TestConfig& config, const std::vector<std::string>& names,
                   std::vector<std::string>& problems, const std::string& label) {
  if (names.empty()) return;
  config.stats.clear();
  for (const auto& name : names) {
    try {
      config.stats.push_back(resolve_stat(name, config.estimator));
    } catch (const Error& e) {
      problems.push_back(label + ": " + e.what());
    }
  }
}

Json optimizer_to_json(const OptimizerConfig& o) {
  Json j;
  j["max_iterations"] = o.max_iterations;
  j["tolerance"] = o.tolerance;
  j["restarts"] = o.restarts;
  j["seed"] = o.seed;
  return j;
}

Json partition_spec_to_json(const PartitionSpec& p) {
  Json j;
  j["rule"] = std::string(to_string(p.rule));
  switch (p.rule) {
    case PartitionRule::grid:
      j["T"] = p.T;
      if (!p.cuts.empty()) j["cuts"] = p.cuts;
      break;
    case PartitionRule::gessaman:
      j["T"] = p.T;
      break;
    case PartitionRule::rtp:
      j["T"] = p.T;
      j["r"] = p.r;
      j["seed"] = p.seed;
      j["equal_depth"] = p.equal_depth;
      break;
    case PartitionRule::fixed:
      if (p.fixed) {
        const Json cells = partition_to_json(*p.fixed);
        for (const auto& [key, value] : cells.items()) j[key] = value;
        j["rule"] = "fixed";
      }
      break;
  }
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t CsvFrame::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    fail(ErrorKind::data_error, "column '" + std::string(name) + "' not found in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvFrame::numeric_column(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> values(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string& cell = rows[i][c];
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    // Row numbers count the header as line 1.
    const std::string where =
        "row " + std::to_string(i + 2) + ", column '" + std::string(name) + "'";
    if (cell.empty() || ec != std::errc() || ptr != end) {
      fail(ErrorKind::data_error, "non-numeric value '" + cell + "' at " + where);
    }
    if (!std::isfinite(v)) fail(ErrorKind::data_error, "non-finite value '" + cell + "' at " + where);
    values[i] = v;
  }
  return values;
}

CsvFrame parse_csv(std::string_view text) {
  CsvFrame frame;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") {
      line.remove_prefix(3);
    }
    if (trim(line).empty()) {
      if (pos > text.size()) break;
      continue;
    }
    auto fields = split_csv_line(line, line_no);
    if (frame.header.empty()) {
      frame.header = std::move(fields);
      continue;
    }
    if (fields.size() != frame.header.size()) {
      fail(ErrorKind::data_error, "line " + std::to_string(line_no) + " has " +
                                      std::to_string(fields.size()) + " fields, header has " +
                                      std::to_string(frame.header.size()));
    }
    frame.rows.push_back(std::move(fields));
  }
  if (frame.header.empty()) fail(ErrorKind::data_error, "input is empty (no header row)");
  if (frame.rows.empty()) fail(ErrorKind::data_error, "input has a header but no data rows");
  return frame;
}

CsvFrame read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::data_error, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::vector<double> covariate_matrix(const CsvFrame& frame,
                                     const std::vector<std::string>& x_cols) {
  if (x_cols.empty()) fail(ErrorKind::invalid_argument, "at least one covariate column is required");
  const std::size_t n = frame.rows.size();
  const std::size_t k = x_cols.size();
  std::vector<double> x(n * k);
  for (std::size_t d = 0; d < k; ++d) {
    const std::vector<double> col = frame.numeric_column(x_cols[d]);
    for (std::size_t i = 0; i < n; ++i) x[i * k + d] = col[i];
  }
  return x;
}

Dataset dataset_from_csv(const CsvFrame& frame, std::string_view y_col,
                         const std::vector<std::string>& x_cols) {
  std::vector<double> y = frame.numeric_column(y_col);
  std::vector<double> x = covariate_matrix(frame, x_cols);
  return Dataset(std::move(y), std::move(x), x_cols.size());
}

// ---------------------------------------------------------------------------

Json partition_to_json(const Partition& partition) {
  Json doc;
  doc["origin"] = std::string(to_string(partition.origin()));
  doc["k"] = partition.k();
  if (partition.T()) doc["T"] = *partition.T();
  if (partition.r()) doc["r"] = *partition.r();
  if (partition.seed()) doc["seed"] = *partition.seed();
  if (partition.origin() == PartitionOrigin::rtp) doc["equal_depth"] = partition.equal_depth();
  Json cells = Json::array();
  for (const Cell& c : partition.cells()) {
    Json lower = Json::array();
    Json upper = Json::array();
    for (double v : c.lower) lower.push_back(bound_to_json(v));
    for (double v : c.upper) upper.push_back(bound_to_json(v));
    cells.push_back(Json{{"lower", std::move(lower)}, {"upper", std::move(upper)}});
  }
  doc["cells"] = std::move(cells);
  return doc;
}

Partition partition_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("cells") || !doc.at("cells").is_array()) {
    fail(ErrorKind::invalid_argument, "partition document needs a 'cells' array");
  }
  std::vector<Cell> cells;
  for (const Json& c : doc.at("cells")) {
    if (!c.is_object() || !c.contains("lower") || !c.contains("upper") ||
        !c.at("lower").is_array() || !c.at("upper").is_array()) {
      fail(ErrorKind::invalid_argument, "each cell needs 'lower' and 'upper' arrays");
    }
    Cell cell;
    for (const Json& v : c.at("lower")) cell.lower.push_back(bound_from_json(v));
    for (const Json& v : c.at("upper")) cell.upper.push_back(bound_from_json(v));
    cells.push_back(std::move(cell));
  }
  if (cells.empty()) fail(ErrorKind::invalid_argument, "partition document has no cells");
  const std::size_t k = doc.contains("k") ? doc.at("k").get<std::size_t>() : cells[0].lower.size();
  PartitionOrigin origin = PartitionOrigin::fixed;
  if (doc.contains("origin")) origin = partition_origin_from_string(doc.at("origin").get<std::string>());
  Partition p(std::move(cells), k, origin);
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> T;
  std::optional<std::size_t> r;
  if (doc.contains("seed")) seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("T")) T = doc.at("T").get<std::size_t>();
  if (doc.contains("r")) r = doc.at("r").get<std::size_t>();
  const bool equal_depth = doc.contains("equal_depth") && doc.at("equal_depth").get<bool>();
  return partition_with_metadata(std::move(p), seed, T, r, equal_depth);
}

Json partition_document(const Partition& partition, const Covariates& x) {
  Json doc = partition_to_json(partition);
  const std::vector<std::size_t> counts = partition.counts(x);
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  doc["n"] = x.n();
  doc["J"] = partition.size();
  doc["counts"] = counts;
  Json balance;
  balance["min"] = *lo;
  balance["max"] = *hi;
  balance["max_minus_min"] = *hi - *lo;
  if (*lo > 0) {
    balance["max_over_min"] = static_cast<double>(*hi) / static_cast<double>(*lo);
  } else {
    balance["max_over_min"] = nullptr;
  }
  if (partition.T()) {
    // RTP guarantee: max - min <= 1 + (T - 1) min.
    balance["bound"] = 1 + (*partition.T() - 1) * *lo;
  }
  doc["balance"] = std::move(balance);
  return doc;
}

// ---------------------------------------------------------------------------

Json test_config_to_json(const TestConfig& config) {
  Json j;
  j["model"] = config.model;
  j["estimator"] = std::string(to_string(config.estimator));
  if (!config.theta.empty()) j["theta"] = config.theta;
  j["L"] = config.L;
  j["partition"] = partition_spec_to_json(config.partition);
  j["stats"] = stat_names(config.stats);
  j["df_policy"] = std::string(to_string(config.df_convention));
  j["optimizer"] = optimizer_to_json(config.optimizer);
  return j;
}

TestConfig test_config_from_json(const Json& doc) {
  std::vector<std::string> problems;
  TestConfig config;
  FieldReader f(doc, "", problems);
  std::vector<std::string> names;
  read_test_fields(f, config, problems, names);
  f.reject_unknown({"model", "estimator", "theta", "L", "partition", "stats", "df_policy",
                    "optimizer", "data"});
  resolve_stats(config, names, problems, "stats");
  if (!problems.empty()) schema_error(problems);
  return config;
}

Json test_report_document(const TestConfig& config, const TestOutcome& outcome,
                          const Json& data_description) {
  Json doc;
  Json cfg = test_config_to_json(config);
  if (!data_description.is_null()) cfg["data"] = data_description;
  doc["config"] = std::move(cfg);

  Json estimate;
  estimate["estimator"] = std::string(to_string(config.estimator));
  estimate["theta"] = outcome.theta;
  doc["estimate"] = std::move(estimate);

  doc["partition"] = partition_to_json(outcome.partition);

  const ContingencyTable& t = outcome.table;
  Json table;
  Json O = Json::array();
  for (std::size_t l = 0; l < t.L(); ++l) {
    Json row = Json::array();
    for (std::size_t j = 0; j < t.J(); ++j) row.push_back(t.observed(l, j));
    O.push_back(std::move(row));
  }
  table["O"] = std::move(O);
  table["column_counts"] = t.column_counts();
  table["widths"] = t.widths();
  table["n"] = t.n();
  doc["table"] = std::move(table);

  Json results = Json::array();
  for (const TestReport& r : outcome.reports) {
    Json item;
    item["kind"] = std::string(to_string(r.kind));
    item["value"] = r.value;
    if (r.df_interval) {
      item["df_interval"] = {r.df_interval->first, r.df_interval->second};
    } else {
      item["df"] = r.df;
    }
    if (r.p_interval) {
      item["p_interval"] = {r.p_interval->first, r.p_interval->second};
    } else {
      item["p"] = r.p_value;
    }
    item["estimator"] = std::string(to_string(r.estimator));
    item["warnings"] = r.warnings;
    results.push_back(std::move(item));
  }
  doc["results"] = std::move(results);

  Json seeds;
  if (config.partition.rule == PartitionRule::rtp) seeds["partition"] = config.partition.seed;
  seeds["optimizer"] = config.optimizer.seed;
  doc["seeds"] = std::move(seeds);
  doc["version"] = std::string(kVersion);
  return doc;
}

// ---------------------------------------------------------------------------

Json sim_config_to_json(const SimConfig& config) {
  Json j;
  Json dgp;
  dgp["family"] = std::string(to_string(config.dgp.family));
  dgp["params"] = config.dgp.true_params;
  dgp["covariates"] = std::string(to_string(config.dgp.covariates));
  dgp["k"] = config.dgp.k;
  dgp["n"] = config.dgp.n;
  j["dgp"] = std::move(dgp);
  const Json test = test_config_to_json(config.test);
  for (const auto& [key, value] : test.items()) j[key] = value;
  j["levels"] = config.levels;
  j["replications"] = config.replications;
  j["seed"] = config.master_seed;
  j["threads"] = config.threads;
  return j;
}

SimConfig sim_config_from_json(const Json& doc) {
  std::vector<std::string> problems;
  SimConfig config;
  FieldReader f(doc, "", problems);
  if (!f.has("dgp")) {
    problems.push_back("dgp: missing");
  } else {
    FieldReader d(f.at("dgp"), "dgp", problems);
    d.parse("family", [&](const std::string& s) { config.dgp.family = dgp_family_from_string(s); },
            true);
    d.read("params", config.dgp.true_params, true);
    d.parse("covariates",
            [&](const std::string& s) { config.dgp.covariates = covariate_law_from_string(s); });
    d.read("k", config.dgp.k, true);
    d.read("n", config.dgp.n, true);
    d.reject_unknown({"family", "params", "covariates", "k", "n"});
  }
  std::vector<std::string> names;
  read_test_fields(f, config.test, problems, names);
  f.read("levels", config.levels);
  f.read("replications", config.replications, true);
  f.read("seed", config.master_seed, true);
  f.read("threads", config.threads);
  f.reject_unknown({"dgp", "model", "estimator", "theta", "L", "partition", "stats", "df_policy",
                    "optimizer", "levels", "replications", "seed", "threads"});
  resolve_stats(config.test, names, problems, "stats");
  if (problems.empty()) {
    try {
      config.validate();
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) schema_error(problems);
  return config;
}

Json sim_result_document(const SimConfig& config, const SimResult& result) {
  Json doc;
  doc["config"] = sim_config_to_json(config);
  doc["replications"] = result.replications;
  doc["completed"] = result.completed;
  Json per_stat = Json::array();
  for (const StatSummary& s : result.per_stat) {
    for (const LevelResult& lr : s.levels) {
      Json item;
      item["kind"] = std::string(to_string(s.kind));
      item["level"] = lr.level;
      item["rejections"] = lr.rejections;
      item["rate"] = lr.rate;
      item["mc_se"] = lr.mc_se;
      item["liberal_rejections"] = lr.liberal_rejections;
      item["liberal_rate"] = lr.liberal_rate;
      item["mean_stat"] = s.mean_stat;
      item["var_stat"] = s.var_stat;
      item["mean_df"] = s.mean_df;
      item["ks_uniform"] = s.ks_uniform;
      per_stat.push_back(std::move(item));
    }
  }
  doc["per_stat"] = std::move(per_stat);
  Json failures = Json::array();
  for (const Failure& f : result.failures) {
    failures.push_back(Json{{"rep_index", f.rep_index}, {"reason", f.reason}, {"message", f.message}});
  }
  doc["failures"] = std::move(failures);
  doc["version"] = std::string(kVersion);
  return doc;
}

}  // namespace cgof
