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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgof/model.hpp"
#include "cgof/partition.hpp"
#include "cgof/tabulate.hpp"

namespace cgof {

enum class StatKind { pearson, lm, lr, neyman, wald_null, wald_raw_mle };

std::string_view to_string(StatKind kind) noexcept;
StatKind stat_kind_from_string(std::string_view text);

enum class EstimatorKind { known, raw_mle, min_chisq };

std::string_view to_string(EstimatorKind kind) noexcept;
EstimatorKind estimator_kind_from_string(std::string_view text);

enum class DfConvention { conditional, unconditional };

std::string_view to_string(DfConvention c) noexcept;
DfConvention df_convention_from_string(std::string_view text);

/// conditional: J(L-1) - p_adjust; unconditional: JL - 1 - p_adjust.
struct DfPolicy {
  DfConvention convention = DfConvention::conditional;
  std::size_t p_adjust = 0;

  long base_df(std::size_t L, std::size_t J) const noexcept {
    const auto cells = static_cast<long>(L * J);
    return convention == DfConvention::conditional ? cells - static_cast<long>(J) : cells - 1;
  }
  long df(std::size_t L, std::size_t J) const noexcept {
    return base_df(L, J) - static_cast<long>(p_adjust);
  }
};

struct TestReport {
  StatKind kind = StatKind::pearson;
  double value = 0.0;
  EstimatorKind estimator = EstimatorKind::known;
  long df = 0;
  std::optional<std::pair<long, long>> df_interval;
  double p_value = 1.0;
  std::optional<std::pair<double, double>> p_interval;
  std::vector<std::string> warnings;

  /// Upper end of the p-value bracket, or the point p-value.
  double conservative_p() const noexcept { return p_interval ? p_interval->second : p_value; }
  double liberal_p() const noexcept { return p_interval ? p_interval->first : p_value; }
};

// Table statistics. All need every column count N_j > 0.

double pearson_stat(const ContingencyTable& table);

/// Lagrange multiplier form; coincides with Pearson on this table.
double lm_stat(const ContingencyTable& table);

/// G^2 with the 0 log 0 = 0 convention.
double lr_stat(const ContingencyTable& table);

/// Modified chi-square; needs every O_lj > 0.
double neyman_stat(const ContingencyTable& table);

bool has_zero_cell(const ContingencyTable& table) noexcept;

struct QuadForm {
  double value = 0.0;
  std::size_t rank = 0;
  std::vector<std::string> warnings;
};

/// n d' (diag(p0) - p0 p0')^+ d with d = O/n - p0 and p0_lj = |U_l| q_j.
QuadForm wald_null_quadform(const ContingencyTable& table);

/// Estimate of C = Cov(cell indicators, score) used by wald_raw_mle.
enum class WaldAdjustment {
  none,             // C = 0: the unadjusted within-column multinomial covariance
  cdf_gradient,     // C_(lj) = (1/n) sum_{x_i in A_j} [dF(Q_l)/dtheta - dF(Q_{l-1})/dtheta]
  score_indicator,  // C_(lj) = (1/n) sum_i (1{i in D_lj} - w_l 1{x_i in A_j}) s(i)
};

/// Wald form at the raw-data MLE; rank is the effective degrees of freedom.
///
/// d = O/n - |U_l| q_j, evaluated on cells built from the transform at theta.
/// Its covariance estimate is the within-column multinomial covariance
/// q_j (diag(w) - w w') minus C I^{-1} C'. Q_l is the conditional quantile at
/// threshold l. The gradient form pairs with the observed information (negative
/// mean Hessian); the indicator form pairs with the outer-product information.
/// Both share a limit; the gradient form is much less noisy at moderate n.
QuadForm wald_raw_mle(const ContingencyTable& table, const ConditionalModel& model,
                      std::span<const double> theta, const Dataset& data, const UGrid& grid,
                      const Partition& partition,
                      WaldAdjustment adjustment = WaldAdjustment::cdf_gradient);

/// Upper tail of chi-square with df degrees of freedom.
double chisq_sf(double x, long df);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Inputs required by wald_raw_mle inside run_test.
struct RawMleContext {
  const ConditionalModel* model = nullptr;
  std::span<const double> theta;
  const Dataset* data = nullptr;
  const UGrid* grid = nullptr;
  const Partition* partition = nullptr;
};

struct EstimatorContext {
  EstimatorKind estimator = EstimatorKind::known;
  const RawMleContext* raw = nullptr;
};

TestReport run_test(StatKind kind, const ContingencyTable& table, const DfPolicy& policy,
                    const EstimatorContext& context = {});

}  // namespace cgof
