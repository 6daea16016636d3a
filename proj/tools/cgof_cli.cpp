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

// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cgof/cgof.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitComputation = 4;

struct DatasetDeleter {
  void operator()(cgof_dataset* d) const { cgof_dataset_destroy(d); }
};
struct PartitionDeleter {
  void operator()(cgof_partition* p) const { cgof_partition_destroy(p); }
};
using DatasetPtr = std::unique_ptr<cgof_dataset, DatasetDeleter>;
using PartitionPtr = std::unique_ptr<cgof_partition, PartitionDeleter>;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { cgof_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

class CommandError {
 public:
  CommandError(int code, std::string message) : code_(code), message_(std::move(message)) {}
  int code() const { return code_; }
  const std::string& message() const { return message_; }

 private:
  int code_;
  std::string message_;
};

void check(cgof_status status) {
  if (status == CGOF_OK) return;
  int code = kExitComputation;
  if (status == CGOF_ERROR_USAGE) code = kExitUsage;
  if (status == CGOF_ERROR_DATA) code = kExitData;
  throw CommandError(code, cgof_last_error());
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_theta(const std::string& text) {
  std::vector<double> theta;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      theta.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CommandError(kExitUsage, "--theta: '" + item + "' is not a number");
    }
  }
  return theta;
}

std::string read_file(const std::string& path, int code_on_error) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError(code_on_error, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_document(const std::string& path, const std::string& doc) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError(kExitUsage, "cannot write '" + path + "'");
  out << doc << '\n';
}

DatasetPtr load_dataset(const std::string& path, const std::string* y,
                        const std::vector<std::string>& x_cols) {
  std::vector<const char*> names;
  for (const auto& c : x_cols) names.push_back(c.c_str());
  cgof_dataset* raw = nullptr;
  check(cgof_dataset_read_csv(path.c_str(), y ? y->c_str() : nullptr, names.data(), names.size(),
                              &raw));
  return DatasetPtr(raw);
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void print_report_table(const Json& report) {
  std::cout << std::left << std::setw(14) << "stat" << std::setw(14) << "value" << std::setw(12)
            << "df" << "p\n";
  for (const Json& r : report.at("results")) {
    std::string df;
    std::string p;
    if (r.contains("df_interval")) {
      df = "[" + std::to_string(r["df_interval"][0].get<long>()) + "," +
           std::to_string(r["df_interval"][1].get<long>()) + "]";
      p = "[" + format_number(r["p_interval"][0].get<double>()) + ", " +
          format_number(r["p_interval"][1].get<double>()) + "]";
    } else {
      df = std::to_string(r["df"].get<long>());
      p = format_number(r["p"].get<double>());
    }
    std::cout << std::setw(14) << r["kind"].get<std::string>() << std::setw(14)
              << format_number(r["value"].get<double>()) << std::setw(12) << df << p << '\n';
    for (const Json& w : r.at("warnings")) {
      std::cout << "  warning: " << w.get<std::string>() << '\n';
    }
  }
}

void print_simulation_table(const Json& result) {
  std::cout << std::left << std::setw(14) << "stat" << std::setw(8) << "level" << std::setw(12)
            << "rejections" << std::setw(10) << "rate" << std::setw(14) << "mc_se"
            << "mean_stat\n";
  for (const Json& s : result.at("per_stat")) {
    std::cout << std::setw(14) << s["kind"].get<std::string>() << std::setw(8)
              << format_number(s["level"].get<double>()) << std::setw(12)
              << s["rejections"].get<std::size_t>() << std::setw(10)
              << format_number(s["rate"].get<double>()) << std::setw(14)
              << format_number(s["mc_se"].get<double>())
              << format_number(s["mean_stat"].get<double>()) << '\n';
  }
  const auto& failures = result.at("failures");
  if (!failures.empty()) std::cout << failures.size() << " replication(s) failed\n";
}

struct TestOptions {
  std::string data;
  std::string y;
  std::string x;
  std::string model = "gaussian_linear";
  std::string estimator = "raw";
  std::string theta;
  std::size_t L = 4;
  std::string partition = "rtp";
  std::string partition_file;
  std::size_t T = 2;
  std::size_t r = 1;
  std::uint64_t seed = 0;
  std::string df_policy = "conditional";
  std::string stats = "pearson,lr,wald";
  std::string out;
  std::string format = "table";
};

int cmd_test(const TestOptions& o) {
  const std::vector<std::string> x_cols = split_list(o.x);
  if (x_cols.empty()) throw CommandError(kExitUsage, "--x needs at least one column");

  Json config;
  config["model"] = o.model;
  config["estimator"] = o.estimator;
  if (!o.theta.empty()) config["theta"] = parse_theta(o.theta);
  config["L"] = o.L;
  PartitionPtr fixed;
  if (o.partition == "fixed") {
    if (o.partition_file.empty()) throw CommandError(kExitUsage, "--partition fixed needs --partition-file");
    const std::string text = read_file(o.partition_file, kExitData);
    cgof_partition* raw = nullptr;
    check(cgof_partition_from_json(text.c_str(), &raw));
    fixed.reset(raw);
    config["partition"] = Json{{"rule", "fixed"}};
  } else {
    config["partition"] = Json{{"rule", o.partition}, {"T", o.T}, {"r", o.r}, {"seed", o.seed}};
  }
  config["stats"] = split_list(o.stats);
  config["df_policy"] = o.df_policy;
  config["optimizer"] = Json{{"seed", o.seed}};
  config["data"] = Json{{"path", o.data}, {"y", o.y}, {"x", x_cols}};

  DatasetPtr data = load_dataset(o.data, &o.y, x_cols);
  OwnedString report;
  check(cgof_run_test(data.get(), config.dump().c_str(), fixed.get(), &report.ptr));
  const std::string doc = report.str();
  write_document(o.out, doc);
  if (o.format == "json") {
    std::cout << doc << '\n';
  } else {
    print_report_table(Json::parse(doc));
  }
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& format) {
  const std::string text = read_file(config_path, kExitUsage);
  OwnedString result;
  check(cgof_simulate(text.c_str(), &result.ptr));
  const std::string doc = result.str();
  write_document(out_path, doc);
  if (format == "json") {
    std::cout << doc << '\n';
  } else {
    print_simulation_table(Json::parse(doc));
  }
  return kExitOk;
}

struct PartitionOptions {
  std::string data;
  std::string x;
  std::string rule = "rtp";
  std::size_t T = 2;
  std::size_t r = 1;
  std::uint64_t seed = 0;
  bool equal_depth = false;
  std::string out;
};

int cmd_partition(const PartitionOptions& o) {
  const std::vector<std::string> x_cols = split_list(o.x);
  if (x_cols.empty()) throw CommandError(kExitUsage, "--x needs at least one column");
  DatasetPtr data = load_dataset(o.data, nullptr, x_cols);
  cgof_partition* raw = nullptr;
  check(cgof_partition_build(data.get(), o.rule.c_str(), o.T, o.r, o.seed, o.equal_depth ? 1 : 0,
                             &raw));
  PartitionPtr partition(raw);
  OwnedString doc;
  check(cgof_partition_document(partition.get(), data.get(), &doc.ptr));
  const std::string text = doc.str();
  write_document(o.out, text);
  const Json parsed = Json::parse(text);
  const Json& balance = parsed.at("balance");
  std::cout << "cells: " << parsed.at("J").get<std::size_t>() << '\n'
            << "counts:";
  for (const Json& c : parsed.at("counts")) std::cout << ' ' << c.get<std::size_t>();
  std::cout << "\nmin: " << balance.at("min").get<std::size_t>()
            << "  max: " << balance.at("max").get<std::size_t>()
            << "  max-min: " << balance.at("max_minus_min").get<std::size_t>() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chi-square goodness-of-fit tests for conditional distributions"};
  app.set_version_flag("--version", std::string(cgof_version()));
  app.require_subcommand(1);

  TestOptions test;
  auto* test_cmd = app.add_subcommand("test", "Run a specification test on CSV data");
  test_cmd->add_option("--data", test.data, "CSV file with a header row")->required();
  test_cmd->add_option("--y", test.y, "Response column")->required();
  test_cmd->add_option("--x", test.x, "Comma-separated covariate columns")->required();
  test_cmd->add_option("--model", test.model, "gaussian_linear | exponential_regression")
      ->capture_default_str();
  test_cmd->add_option("--estimator", test.estimator, "known | raw | grouped")
      ->check(CLI::IsMember({"known", "raw", "grouped"}))
      ->capture_default_str();
  test_cmd->add_option("--theta", test.theta, "Comma-separated parameters (known) or start");
  test_cmd->add_option("--L", test.L, "Number of intervals for the transformed response")
      ->capture_default_str();
  test_cmd->add_option("--partition", test.partition, "grid | gessaman | rtp | fixed")
      ->check(CLI::IsMember({"grid", "gessaman", "rtp", "fixed"}))
      ->capture_default_str();
  test_cmd->add_option("--partition-file", test.partition_file,
                       "Partition document for --partition fixed");
  test_cmd->add_option("--T", test.T, "Split arity")->capture_default_str();
  test_cmd->add_option("--r", test.r, "RTP splits per axis")->capture_default_str();
  test_cmd->add_option("--seed", test.seed, "Seed for the partition and optimizer")
      ->capture_default_str();
  test_cmd->add_option("--df-policy", test.df_policy, "conditional | unconditional")
      ->check(CLI::IsMember({"conditional", "unconditional"}))
      ->capture_default_str();
  test_cmd->add_option("--stats", test.stats, "Comma-separated statistics")->capture_default_str();
  test_cmd->add_option("--out", test.out, "Write the report document here");
  test_cmd->add_option("--format", test.format, "table | json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  std::string sim_config;
  std::string sim_out;
  std::string sim_format = "table";
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo size/power experiment");
  sim_cmd->add_option("--config", sim_config, "Simulation config document (JSON)")->required();
  sim_cmd->add_option("--out", sim_out, "Write the result document here");
  sim_cmd->add_option("--format", sim_format, "table | json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  PartitionOptions part;
  auto* part_cmd = app.add_subcommand("partition", "Build a covariate partition");
  part_cmd->add_option("--data", part.data, "CSV file with a header row")->required();
  part_cmd->add_option("--x", part.x, "Comma-separated covariate columns")->required();
  part_cmd->add_option("--rule", part.rule, "gessaman | rtp | grid")
      ->check(CLI::IsMember({"gessaman", "rtp", "grid"}))
      ->capture_default_str();
  part_cmd->add_option("--T", part.T, "Split arity")->capture_default_str();
  part_cmd->add_option("--r", part.r, "RTP splits per axis")->capture_default_str();
  part_cmd->add_option("--seed", part.seed, "RTP seed")->capture_default_str();
  part_cmd->add_flag("--equal-depth", part.equal_depth, "Reshape the axis multiset to T^q cells");
  part_cmd->add_option("--out", part.out, "Write the partition document here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*test_cmd) return cmd_test(test);
    if (*sim_cmd) return cmd_simulate(sim_config, sim_out, sim_format);
    if (*part_cmd) return cmd_partition(part);
  } catch (const CommandError& e) {
    std::cerr << "error: " << e.message() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitUsage;
}
