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

#include "cgof/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cgof/error.hpp"
#include "cgof/estimate.hpp"

namespace cgof {

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kNegativeEigenTolerance = -1e-8;

void require_positive_columns(const ContingencyTable& table) {
  for (std::size_t j = 0; j < table.J(); ++j) {
    if (table.column_counts()[j] <= 0) {
      fail(ErrorKind::empty_cell, "covariate cell " + std::to_string(j + 1) + " is empty");
    }
  }
}

Eigen::VectorXd discrepancy(const ContingencyTable& table) {
  const auto n = static_cast<double>(table.n());
  Eigen::VectorXd d(table.L() * table.J());
  for (std::size_t l = 0; l < table.L(); ++l) {
    for (std::size_t j = 0; j < table.J(); ++j) {
      d[l * table.J() + j] =
          static_cast<double>(table.observed(l, j)) / n - table.widths()[l] * table.q_hat()[j];
    }
  }
  return d;
}

// n d' S^+ d through the symmetric eigendecomposition of S.
QuadForm pseudo_quadform(const Eigen::MatrixXd& cov, const Eigen::VectorXd& d, double n) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    fail(ErrorKind::covariance_construction, "eigendecomposition failed");
  }
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  QuadForm out;
  if (lambda.size() == 0) return out;
  if (lambda.minCoeff() < kNegativeEigenTolerance) {
    fail(ErrorKind::covariance_construction,
         "covariance estimate has eigenvalue " + std::to_string(lambda.minCoeff()));
  }
  const double lambda_max = lambda.maxCoeff();
  if (lambda_max <= 0.0) return out;
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * d;
  double value = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] > kRankTolerance * lambda_max) {
      value += proj[i] * proj[i] / lambda[i];
      ++out.rank;
    }
  }
  out.value = std::max(0.0, n * value);
  return out;
}

// Lower regularized gamma by its power series; valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by the modified Lentz continued fraction; x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  return std::exp(log_prefactor) * h;
}

}  // namespace

std::string_view to_string(StatKind kind) noexcept {
  switch (kind) {
    case StatKind::pearson: return "pearson";
    case StatKind::lm: return "lm";
    case StatKind::lr: return "lr";
    case StatKind::neyman: return "neyman";
    case StatKind::wald_null: return "wald_null";
    case StatKind::wald_raw_mle: return "wald_raw_mle";
  }
  return "pearson";
}

StatKind stat_kind_from_string(std::string_view text) {
  if (text == "pearson") return StatKind::pearson;
  if (text == "lm") return StatKind::lm;
  if (text == "lr") return StatKind::lr;
  if (text == "neyman") return StatKind::neyman;
  if (text == "wald_null") return StatKind::wald_null;
  if (text == "wald_raw_mle") return StatKind::wald_raw_mle;
  fail(ErrorKind::invalid_argument, "unknown statistic '" + std::string(text) + "'");
}

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::known: return "known";
    case EstimatorKind::raw_mle: return "raw_mle";
    case EstimatorKind::min_chisq: return "min_chisq";
  }
  return "known";
}

EstimatorKind estimator_kind_from_string(std::string_view text) {
  if (text == "known") return EstimatorKind::known;
  if (text == "raw_mle" || text == "raw") return EstimatorKind::raw_mle;
  if (text == "min_chisq" || text == "grouped") return EstimatorKind::min_chisq;
  fail(ErrorKind::invalid_argument, "unknown estimator '" + std::string(text) + "'");
}

std::string_view to_string(DfConvention c) noexcept {
  return c == DfConvention::conditional ? "conditional" : "unconditional";
}

DfConvention df_convention_from_string(std::string_view text) {
  if (text == "conditional") return DfConvention::conditional;
  if (text == "unconditional") return DfConvention::unconditional;
  fail(ErrorKind::invalid_argument, "unknown df policy '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

double pearson_stat(const ContingencyTable& table) {
  require_positive_columns(table);
  // Extended-precision accumulation keeps X2 and the score form of LM within
  // an ulp of each other on large tables.
  long double x2 = 0.0L;
  for (std::size_t l = 0; l < table.L(); ++l) {
    for (std::size_t j = 0; j < table.J(); ++j) {
      const long double e = table.expected(l, j);
      const long double r = static_cast<long double>(table.observed(l, j)) - e;
      x2 += r * r / e;
    }
  }
  return static_cast<double>(x2);
}

double lm_stat(const ContingencyTable& table) {
  require_positive_columns(table);
  // Per column, the score of the multinomial log-likelihood at the restricted
  // probabilities w is O_l / w_l - N_j (summed against the constraint); its
  // quadratic form in the inverse information diag(w)/N_j gives
  // sum_l (O_l - N_j w_l)^2 / (N_j w_l).
  long double lm = 0.0L;
  for (std::size_t j = 0; j < table.J(); ++j) {
    const auto nj = static_cast<long double>(table.column_counts()[j]);
    long double column = 0.0L;
    for (std::size_t l = 0; l < table.L(); ++l) {
      const long double w = table.widths()[l];
      const long double score = (static_cast<long double>(table.observed(l, j)) - nj * w) / w;
      column += score * score * w;
    }
    lm += column / nj;
  }
  return static_cast<double>(lm);
}

double lr_stat(const ContingencyTable& table) {
  require_positive_columns(table);
  double g2 = 0.0;
  for (std::size_t l = 0; l < table.L(); ++l) {
    for (std::size_t j = 0; j < table.J(); ++j) {
      const auto o = static_cast<double>(table.observed(l, j));
      if (o > 0.0) g2 += o * std::log(o / table.expected(l, j));
    }
  }
  return std::max(0.0, 2.0 * g2);
}

double neyman_stat(const ContingencyTable& table) {
  require_positive_columns(table);
  double stat = 0.0;
  for (std::size_t l = 0; l < table.L(); ++l) {
    for (std::size_t j = 0; j < table.J(); ++j) {
      const auto o = static_cast<double>(table.observed(l, j));
      if (o <= 0.0) {
        fail(ErrorKind::empty_cell, "neyman statistic needs positive counts; cell (" +
                                        std::to_string(l + 1) + "," + std::to_string(j + 1) +
                                        ") is empty");
      }
      const double r = o - table.expected(l, j);
      stat += r * r / o;
    }
  }
  return stat;
}

bool has_zero_cell(const ContingencyTable& table) noexcept {
  return std::any_of(table.observed().begin(), table.observed().end(),
                     [](std::int64_t o) { return o == 0; });
}

QuadForm wald_null_quadform(const ContingencyTable& table) {
  require_positive_columns(table);
  const std::size_t cells = table.L() * table.J();
  Eigen::VectorXd p0(cells);
  for (std::size_t l = 0; l < table.L(); ++l) {
    for (std::size_t j = 0; j < table.J(); ++j) {
      p0[l * table.J() + j] = table.widths()[l] * table.q_hat()[j];
    }
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd(p0.asDiagonal()) - p0 * p0.transpose();
  QuadForm out = pseudo_quadform(cov, discrepancy(table), static_cast<double>(table.n()));
  if (out.rank + 1 < cells) {
    out.warnings.push_back("null covariance rank " + std::to_string(out.rank) +
                           " below the structural rank " + std::to_string(cells - 1));
  }
  return out;
}

QuadForm wald_raw_mle(const ContingencyTable& table, const ConditionalModel& model,
                      std::span<const double> theta, const Dataset& data, const UGrid& grid,
                      const Partition& partition, WaldAdjustment adjustment) {
  require_positive_columns(table);
  if (static_cast<std::size_t>(table.n()) != data.n() || table.L() != grid.size() ||
      table.J() != partition.size()) {
    fail(ErrorKind::invalid_argument, "table does not match data, grid, or partition");
  }
  const std::size_t L = table.L();
  const std::size_t J = table.J();
  const std::size_t cells = L * J;
  const auto n = static_cast<double>(data.n());
  const std::vector<double>& w = table.widths();

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(cells, cells);
  for (std::size_t j = 0; j < J; ++j) {
    const double q = table.q_hat()[j];
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t m = 0; m < L; ++m) {
        cov(l * J + j, m * J + j) = q * ((l == m ? w[l] : 0.0) - w[l] * w[m]);
      }
    }
  }

  if (adjustment != WaldAdjustment::none) {
    const std::size_t p = model.param_dim();
    const Covariates x(data);
    std::vector<std::size_t> cell_of;
    if (adjustment == WaldAdjustment::score_indicator) {
      cell_of = classify_observations(rosenblatt(model, theta, data), x, grid, partition);
    }
    const std::vector<double>& t = grid.thresholds();

    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(cells, p);
    Eigen::VectorXd s(p);
    Eigen::VectorXd g_prev(p);
    Eigen::VectorXd g_next(p);
    for (std::size_t i = 0; i < data.n(); ++i) {
      const auto xi = data.x_row(i);
      model.score(data.y()[i], xi, theta, std::span<double>(s.data(), p));
      if (!s.allFinite()) {
        fail(ErrorKind::model_evaluation, "non-finite score at row " + std::to_string(i + 1));
      }
      info.noalias() += s * s.transpose();
      if (adjustment == WaldAdjustment::score_indicator) {
        const std::size_t flat = cell_of[i];
        const std::size_t j = flat % J;
        c.row(flat) += s.transpose();
        for (std::size_t l = 0; l < L; ++l) c.row(l * J + j) -= w[l] * s.transpose();
        continue;
      }
      const std::size_t j = partition.locate(xi);
      g_prev.setZero();
      for (std::size_t l = 0; l < L; ++l) {
        if (l + 1 < L) {
          const double q = model.quantile(t[l + 1], xi, theta);
          model.cdf_gradient(q, xi, theta, std::span<double>(g_next.data(), p));
          if (!g_next.allFinite()) {
            fail(ErrorKind::model_evaluation,
                 "non-finite cdf gradient at row " + std::to_string(i + 1));
          }
        } else {
          g_next.setZero();
        }
        c.row(l * J + j) += (g_next - g_prev).transpose();
        g_prev = g_next;
      }
    }
    c /= n;
    if (adjustment == WaldAdjustment::cdf_gradient) {
      info = observed_information_estimate(model, data, theta);
    } else {
      info /= n;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> info_eig(info);
    const Eigen::VectorXd& mu = info_eig.eigenvalues();
    if (mu.size() > 0 && !(mu.minCoeff() > 1e-12 * std::max(1.0, mu.maxCoeff()))) {
      fail(ErrorKind::singular_information, "estimated information matrix is singular");
    }
    const Eigen::MatrixXd info_inv = info_eig.eigenvectors() * mu.cwiseInverse().asDiagonal() *
                                     info_eig.eigenvectors().transpose();
    cov -= c * info_inv * c.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
  }

  return pseudo_quadform(cov, discrepancy(table), n);
}

// ---------------------------------------------------------------------------

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) fail(ErrorKind::invalid_argument, "gamma_q needs a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_fraction(a, x), 0.0, 1.0);
}

double chisq_sf(double x, long df) {
  if (!(x >= 0.0)) fail(ErrorKind::invalid_argument, "chi-square statistic must be >= 0");
  if (df < 1) fail(ErrorKind::invalid_argument, "chi-square df must be >= 1");
  return gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

// ---------------------------------------------------------------------------

TestReport run_test(StatKind kind, const ContingencyTable& table, const DfPolicy& policy,
                    const EstimatorContext& context) {
  TestReport report;
  report.kind = kind;
  report.estimator = context.estimator;

  long effective_df = 0;
  switch (kind) {
    case StatKind::pearson: report.value = pearson_stat(table); break;
    case StatKind::lm: report.value = lm_stat(table); break;
    case StatKind::lr:
      report.value = lr_stat(table);
      if (has_zero_cell(table)) {
        report.warnings.push_back("zero observed cell: G^2 asymptotics need all counts positive");
      }
      break;
    case StatKind::neyman: report.value = neyman_stat(table); break;
    case StatKind::wald_null: {
      QuadForm q = wald_null_quadform(table);
      report.value = q.value;
      report.warnings = std::move(q.warnings);
      break;
    }
    case StatKind::wald_raw_mle: {
      const RawMleContext* raw = context.raw;
      if (raw == nullptr || raw->model == nullptr || raw->data == nullptr || raw->grid == nullptr ||
          raw->partition == nullptr) {
        fail(ErrorKind::invalid_argument, "wald_raw_mle needs the raw-MLE context");
      }
      QuadForm q = wald_raw_mle(table, *raw->model, raw->theta, *raw->data, *raw->grid,
                                *raw->partition);
      report.value = q.value;
      effective_df = static_cast<long>(q.rank);
      report.warnings = std::move(q.warnings);
      break;
    }
  }

  if (table.L() == 1) {
    report.warnings.push_back("degenerate grid (L=1): statistics are identically zero");
    report.value = 0.0;
    report.df = 0;
    report.p_value = 1.0;
    return report;
  }

  if (kind == StatKind::wald_raw_mle) {
    if (effective_df < 1) fail(ErrorKind::invalid_df, "wald covariance has rank 0");
    report.df = effective_df;
    report.p_value = chisq_sf(report.value, effective_df);
    return report;
  }

  const long hi = policy.base_df(table.L(), table.J());
  const long lo = policy.df(table.L(), table.J());
  const bool bracket = context.estimator == EstimatorKind::raw_mle &&
                       (kind == StatKind::pearson || kind == StatKind::lm || kind == StatKind::lr);
  if (bracket) {
    if (lo < 1) {
      fail(ErrorKind::invalid_df, "degrees of freedom " + std::to_string(lo) +
                                      " after adjusting for estimated parameters");
    }
    report.df = hi;
    report.df_interval = {lo, hi};
    const double p_lo = chisq_sf(report.value, lo);
    const double p_hi = chisq_sf(report.value, hi);
    report.p_interval = {p_lo, p_hi};
    report.p_value = p_hi;
    return report;
  }

  long df = lo;
  if (context.estimator == EstimatorKind::raw_mle) {
    // Neyman / null-covariance Wald at the raw MLE: bracket not applied, the
    // unadjusted df is the conservative end.
    df = hi;
    report.warnings.push_back("raw-MLE estimate: df not adjusted for estimated parameters");
  }
  if (df < 1) {
    fail(ErrorKind::invalid_df, "degrees of freedom " + std::to_string(df) +
                                    " after adjusting for estimated parameters");
  }
  report.df = df;
  report.p_value = chisq_sf(report.value, df);
  return report;
}

}  // namespace cgof
