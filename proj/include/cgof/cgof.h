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

#ifndef CGOF_CGOF_H
#define CGOF_CGOF_H

/*
 * C interface to the cgof library: chi-square goodness-of-fit tests for
 * conditional distribution specifications.
 *
 * Objects are opaque handles released with the matching *_destroy call.
 * Every function returns a cgof_status; on failure, cgof_last_error() returns
 * a message describing the most recent error on the calling thread.
 * Strings returned through char** outputs are owned by the caller and must
 * be released with cgof_string_free().
 *
 * Cell indices are 0-based.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CGOF_BUILDING_LIBRARY)
#    define CGOF_API __declspec(dllexport)
#  else
#    define CGOF_API __declspec(dllimport)
#  endif
#else
#  define CGOF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cgof_status {
  CGOF_OK = 0,
  CGOF_ERROR_USAGE = 1,       /* invalid argument or configuration */
  CGOF_ERROR_DATA = 2,        /* unreadable or malformed input data */
  CGOF_ERROR_COMPUTATION = 3, /* numerical or estimation failure */
  CGOF_ERROR_NULL_POINTER = 4,
  CGOF_ERROR_INTERNAL = 5
} cgof_status;

typedef struct cgof_dataset cgof_dataset;
typedef struct cgof_partition cgof_partition;

CGOF_API const char *cgof_version(void);
CGOF_API const char *cgof_last_error(void);
CGOF_API void cgof_string_free(char *str);

/* Datasets ---------------------------------------------------------------- */

/* Copies y (length n) and row-major x (n * k). */
CGOF_API cgof_status cgof_dataset_create(const double *y, const double *x, size_t n, size_t k,
                                         cgof_dataset **out);

/* Reads a CSV file with a header row. y_column may be NULL when only the
 * covariates are needed (responses are then set to zero). */
CGOF_API cgof_status cgof_dataset_read_csv(const char *path, const char *y_column,
                                           const char *const *x_columns, size_t k,
                                           cgof_dataset **out);

CGOF_API cgof_status cgof_dataset_shape(const cgof_dataset *data, size_t *n, size_t *k);
CGOF_API void cgof_dataset_destroy(cgof_dataset *data);

/* Partitions -------------------------------------------------------------- */

/* rule: "gessaman", "rtp", or "grid" (T equal-width intervals per axis). */
CGOF_API cgof_status cgof_partition_build(const cgof_dataset *data, const char *rule, size_t T,
                                          size_t r, uint64_t seed, int equal_depth,
                                          cgof_partition **out);
CGOF_API cgof_status cgof_partition_from_json(const char *json, cgof_partition **out);
CGOF_API cgof_status cgof_partition_to_json(const cgof_partition *partition, char **json);

/* Serialization plus per-cell counts and balance diagnostics for `data`. */
CGOF_API cgof_status cgof_partition_document(const cgof_partition *partition,
                                             const cgof_dataset *data, char **json);

CGOF_API cgof_status cgof_partition_size(const cgof_partition *partition, size_t *cells);
CGOF_API cgof_status cgof_partition_locate(const cgof_partition *partition, const double *x_row,
                                           size_t k, size_t *cell);
CGOF_API void cgof_partition_destroy(cgof_partition *partition);

/* Tests and simulations --------------------------------------------------- */

/* Runs a specification test. config_json follows the report "config" schema
 * (model, estimator, theta, L, partition, stats, df_policy, optimizer, data).
 * `fixed` overrides the partition rule when non-NULL. The report document is
 * written to *report_json. */
CGOF_API cgof_status cgof_run_test(const cgof_dataset *data, const char *config_json,
                                   const cgof_partition *fixed, char **report_json);

/* Runs a Monte Carlo experiment described by config_json and writes the
 * simulation result document to *result_json. */
CGOF_API cgof_status cgof_simulate(const char *config_json, char **result_json);

#ifdef __cplusplus
}
#endif

#endif /* CGOF_CGOF_H */
