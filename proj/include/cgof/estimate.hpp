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

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cgof/model.hpp"
#include "cgof/partition.hpp"
#include "cgof/stats.hpp"
#include "cgof/tabulate.hpp"

namespace cgof {

struct OptimizerConfig {
  std::size_t max_iterations = 500;
  double tolerance = 1e-9;
  std::size_t restarts = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Least squares for beta, sigma = sqrt(RSS / n).
/// Throws singular_design for a rank-deficient design and degenerate_fit
/// (carrying the estimate) when RSS is zero.
ParamVector mle_gaussian_linear(const Dataset& data);

/// Raw-data MLE by BHHH ascent with backtracking line search. Scale parameters
/// are optimized on the log scale; convergence is declared when the sup-norm of
/// the average-log-likelihood gradient (in those coordinates) is below
/// cfg.tolerance. `objective_trace`, when given, receives the average
/// log-likelihood after every accepted iterate (starting with init).
ParamVector mle_numeric(const ConditionalModel& model, const Dataset& data,
                        std::span<const double> init, const OptimizerConfig& cfg,
                        std::vector<double>* objective_trace = nullptr);

/// Pearson statistic of the cross-classification at theta; +inf when theta is
/// outside the parameter space or the table has an empty column.
double min_chisq_objective(const ConditionalModel& model, const Dataset& data, const UGrid& grid,
                           const Partition& partition, std::span<const double> theta);

/// Grouped estimator: Nelder-Mead on min_chisq_objective with seeded restarts.
/// Never returns a point worse than init.
ParamVector min_chisq_estimate(const ConditionalModel& model, const Dataset& data,
                               const UGrid& grid, const Partition& partition,
                               std::span<const double> init, const OptimizerConfig& cfg);

/// (1/n) sum_i s_i s_i'.
Eigen::MatrixXd fisher_information_estimate(const ConditionalModel& model, const Dataset& data,
                                            std::span<const double> theta);

/// Negative average Hessian of the log-likelihood, by central differences of
/// the score; symmetrized.
Eigen::MatrixXd observed_information_estimate(const ConditionalModel& model, const Dataset& data,
                                              std::span<const double> theta);

}  // namespace cgof
