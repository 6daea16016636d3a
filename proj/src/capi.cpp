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

#include "cgof/cgof.h"

#include <cstring>
#include <new>
#include <string>

#include "cgof/error.hpp"
#include "cgof/io.hpp"
#include "cgof/pipeline.hpp"

struct cgof_dataset {
  cgof::Dataset data;
};

struct cgof_partition {
  cgof::Partition partition;
};

namespace {

thread_local std::string g_last_error;

cgof_status status_of(cgof::ErrorKind kind) {
  switch (cgof::category_of(kind)) {
    case cgof::ErrorCategory::usage: return CGOF_ERROR_USAGE;
    case cgof::ErrorCategory::data: return CGOF_ERROR_DATA;
    case cgof::ErrorCategory::computation: return CGOF_ERROR_COMPUTATION;
  }
  return CGOF_ERROR_INTERNAL;
}

template <typename F>
cgof_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return CGOF_OK;
  } catch (const cgof::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return CGOF_ERROR_USAGE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CGOF_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CGOF_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CGOF_ERROR_INTERNAL;
  }
}

cgof_status null_pointer(const char* what) {
  g_last_error = std::string("null pointer: ") + what;
  return CGOF_ERROR_NULL_POINTER;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* cgof_version(void) { return cgof::kVersion.data(); }

const char* cgof_last_error(void) { return g_last_error.c_str(); }

void cgof_string_free(char* str) { delete[] str; }

cgof_status cgof_dataset_create(const double* y, const double* x, size_t n, size_t k,
                                cgof_dataset** out) {
  if (y == nullptr || x == nullptr || out == nullptr) return null_pointer("dataset arrays");
  return guarded([&] {
    cgof::Dataset data(std::vector<double>(y, y + n), std::vector<double>(x, x + n * k), k);
    *out = new cgof_dataset{std::move(data)};
  });
}

cgof_status cgof_dataset_read_csv(const char* path, const char* y_column,
                                  const char* const* x_columns, size_t k, cgof_dataset** out) {
  if (path == nullptr || x_columns == nullptr || out == nullptr) return null_pointer("csv input");
  return guarded([&] {
    std::vector<std::string> cols;
    for (size_t d = 0; d < k; ++d) {
      if (x_columns[d] == nullptr) cgof::fail(cgof::ErrorKind::invalid_argument, "null column name");
      cols.emplace_back(x_columns[d]);
    }
    const cgof::CsvFrame frame = cgof::read_csv(path);
    if (y_column != nullptr) {
      *out = new cgof_dataset{cgof::dataset_from_csv(frame, y_column, cols)};
    } else {
      std::vector<double> x = cgof::covariate_matrix(frame, cols);
      std::vector<double> y(frame.rows.size(), 0.0);
      *out = new cgof_dataset{cgof::Dataset(std::move(y), std::move(x), cols.size())};
    }
  });
}

cgof_status cgof_dataset_shape(const cgof_dataset* data, size_t* n, size_t* k) {
  if (data == nullptr || n == nullptr || k == nullptr) return null_pointer("dataset");
  *n = data->data.n();
  *k = data->data.k();
  return CGOF_OK;
}

void cgof_dataset_destroy(cgof_dataset* data) { delete data; }

cgof_status cgof_partition_build(const cgof_dataset* data, const char* rule, size_t T, size_t r,
                                 uint64_t seed, int equal_depth, cgof_partition** out) {
  if (data == nullptr || rule == nullptr || out == nullptr) return null_pointer("partition input");
  return guarded([&] {
    cgof::PartitionSpec spec;
    spec.rule = cgof::partition_rule_from_string(rule);
    if (spec.rule == cgof::PartitionRule::fixed) {
      cgof::fail(cgof::ErrorKind::invalid_argument, "use cgof_partition_from_json for fixed cells");
    }
    spec.T = T;
    spec.r = r;
    spec.seed = seed;
    spec.equal_depth = equal_depth != 0;
    *out = new cgof_partition{cgof::build_partition(cgof::Covariates(data->data), spec)};
  });
}

cgof_status cgof_partition_from_json(const char* json, cgof_partition** out) {
  if (json == nullptr || out == nullptr) return null_pointer("partition json");
  return guarded([&] {
    *out = new cgof_partition{cgof::partition_from_json(cgof::Json::parse(json))};
  });
}

cgof_status cgof_partition_to_json(const cgof_partition* partition, char** json) {
  if (partition == nullptr || json == nullptr) return null_pointer("partition");
  return guarded([&] { *json = copy_string(cgof::partition_to_json(partition->partition).dump(2)); });
}

cgof_status cgof_partition_document(const cgof_partition* partition, const cgof_dataset* data,
                                    char** json) {
  if (partition == nullptr || data == nullptr || json == nullptr) return null_pointer("partition");
  return guarded([&] {
    const cgof::Json doc =
        cgof::partition_document(partition->partition, cgof::Covariates(data->data));
    *json = copy_string(doc.dump(2));
  });
}

cgof_status cgof_partition_size(const cgof_partition* partition, size_t* cells) {
  if (partition == nullptr || cells == nullptr) return null_pointer("partition");
  *cells = partition->partition.size();
  return CGOF_OK;
}

cgof_status cgof_partition_locate(const cgof_partition* partition, const double* x_row, size_t k,
                                  size_t* cell) {
  if (partition == nullptr || x_row == nullptr || cell == nullptr) return null_pointer("locate");
  return guarded([&] {
    if (k != partition->partition.k()) {
      cgof::fail(cgof::ErrorKind::invalid_argument, "point dimension does not match partition");
    }
    *cell = partition->partition.locate(std::span<const double>(x_row, k));
  });
}

void cgof_partition_destroy(cgof_partition* partition) { delete partition; }

cgof_status cgof_run_test(const cgof_dataset* data, const char* config_json,
                          const cgof_partition* fixed, char** report_json) {
  if (data == nullptr || config_json == nullptr || report_json == nullptr) {
    return null_pointer("test input");
  }
  return guarded([&] {
    const cgof::Json doc = cgof::Json::parse(config_json);
    cgof::TestConfig config = cgof::test_config_from_json(doc);
    if (fixed != nullptr) {
      config.partition.rule = cgof::PartitionRule::fixed;
      config.partition.fixed = std::make_shared<const cgof::Partition>(fixed->partition);
    }
    const cgof::TestOutcome outcome = cgof::run_specification_test(data->data, config);
    const cgof::Json data_description = doc.contains("data") ? doc.at("data") : cgof::Json();
    *report_json =
        copy_string(cgof::test_report_document(config, outcome, data_description).dump(2));
  });
}

cgof_status cgof_simulate(const char* config_json, char** result_json) {
  if (config_json == nullptr || result_json == nullptr) return null_pointer("simulation input");
  return guarded([&] {
    const cgof::SimConfig config = cgof::sim_config_from_json(cgof::Json::parse(config_json));
    const cgof::SimResult result = cgof::run_experiment(config);
    *result_json = copy_string(cgof::sim_result_document(config, result).dump(2));
  });
}

}  // extern "C"
