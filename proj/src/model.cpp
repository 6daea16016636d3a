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

#include "cgof/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>
#include <numbers>

#include "cgof/error.hpp"

namespace cgof {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

void check_theta_size(const ConditionalModel& model, std::span<const double> theta) {
  if (theta.size() != model.param_dim()) {
    fail(ErrorKind::invalid_parameter,
         std::string(model.name()) + ": expected " + std::to_string(model.param_dim()) +
             " parameters, got " + std::to_string(theta.size()));
  }
  for (double t : theta) {
    if (!std::isfinite(t)) fail(ErrorKind::invalid_parameter, "non-finite parameter value");
  }
}

void check_covariates(const ConditionalModel& model, const Dataset& data) {
  if (data.k() != model.covariate_dim()) {
    fail(ErrorKind::invalid_argument,
         std::string(model.name()) + " expects " + std::to_string(model.covariate_dim()) +
             " covariates, data has " + std::to_string(data.k()));
  }
}

}  // namespace

Dataset::Dataset(std::vector<double> y, std::vector<double> x_row_major, std::size_t k)
    : y_(std::move(y)), x_(std::move(x_row_major)), k_(k) {
  if (y_.empty()) fail(ErrorKind::data_error, "dataset needs at least one observation");
  if (k_ == 0) fail(ErrorKind::data_error, "dataset needs at least one covariate");
  if (x_.size() != y_.size() * k_) {
    fail(ErrorKind::data_error, "covariate matrix has " + std::to_string(x_.size()) +
                                    " entries, expected " + std::to_string(y_.size() * k_));
  }
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (!std::isfinite(y_[i])) {
      fail(ErrorKind::data_error, "non-finite response at row " + std::to_string(i + 1));
    }
  }
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i])) {
      fail(ErrorKind::data_error, "non-finite covariate at row " + std::to_string(i / k_ + 1) +
                                      ", column " + std::to_string(i % k_ + 1));
    }
  }
}

// ---------------------------------------------------------------------------

double ConditionalModel::quantile(double t, std::span<const double> x,
                                  std::span<const double> theta) const {
  if (!(t > 0.0 && t < 1.0)) fail(ErrorKind::invalid_argument, "quantile level must be in (0,1)");
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; cdf(lo, x, theta) >= t; ++i) {
    if (i > 1100) fail(ErrorKind::model_evaluation, "quantile: cannot bracket from below");
    lo *= 2.0;
  }
  for (int i = 0; cdf(hi, x, theta) < t; ++i) {
    if (i > 1100) fail(ErrorKind::model_evaluation, "quantile: cannot bracket from above");
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (cdf(mid, x, theta) < t ? lo : hi) = mid;
  }
  return hi;
}

void ConditionalModel::cdf_gradient(double y, std::span<const double> x,
                                    std::span<const double> theta, std::span<double> out) const {
  std::vector<double> t(theta.begin(), theta.end());
  for (std::size_t m = 0; m < t.size(); ++m) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta[m]));
    t[m] = theta[m] + h;
    const double up = cdf(y, x, t);
    t[m] = theta[m] - h;
    const double down = cdf(y, x, t);
    t[m] = theta[m];
    out[m] = (up - down) / (2.0 * h);
  }
}

// ---------------------------------------------------------------------------

GaussianLinearModel::GaussianLinearModel(std::size_t k) : k_(k) {
  if (k == 0) fail(ErrorKind::invalid_argument, "gaussian_linear needs k >= 1");
}

void GaussianLinearModel::check_params(std::span<const double> theta) const {
  check_theta_size(*this, theta);
  if (theta[k_ + 1] < kMinSigma) {
    fail(ErrorKind::invalid_parameter, "gaussian_linear: sigma must be >= 1e-12");
  }
}

double GaussianLinearModel::mean(std::span<const double> x,
                                 std::span<const double> theta) const noexcept {
  double mu = theta[0];
  for (std::size_t d = 0; d < k_; ++d) mu += theta[d + 1] * x[d];
  return mu;
}

double GaussianLinearModel::cdf(double y, std::span<const double> x,
                                std::span<const double> theta) const {
  return std_normal_cdf((y - mean(x, theta)) / theta[k_ + 1]);
}

double GaussianLinearModel::log_density(double y, std::span<const double> x,
                                        std::span<const double> theta) const {
  const double sigma = theta[k_ + 1];
  const double z = (y - mean(x, theta)) / sigma;
  return -kLogSqrt2Pi - std::log(sigma) - 0.5 * z * z;
}

void GaussianLinearModel::score(double y, std::span<const double> x,
                                std::span<const double> theta, std::span<double> out) const {
  const double sigma = theta[k_ + 1];
  const double r = y - mean(x, theta);
  const double r_over_s2 = r / (sigma * sigma);
  out[0] = r_over_s2;
  for (std::size_t d = 0; d < k_; ++d) out[d + 1] = r_over_s2 * x[d];
  out[k_ + 1] = (r * r_over_s2 - 1.0) / sigma;
}

double GaussianLinearModel::quantile(double t, std::span<const double> x,
                                     std::span<const double> theta) const {
  return mean(x, theta) + theta[k_ + 1] * std_normal_quantile(t);
}

void GaussianLinearModel::cdf_gradient(double y, std::span<const double> x,
                                       std::span<const double> theta,
                                       std::span<double> out) const {
  const double sigma = theta[k_ + 1];
  const double z = (y - mean(x, theta)) / sigma;
  const double phi = std::exp(-0.5 * z * z - kLogSqrt2Pi) / sigma;
  out[0] = -phi;
  for (std::size_t d = 0; d < k_; ++d) out[d + 1] = -phi * x[d];
  out[k_ + 1] = -phi * z;
}

// ---------------------------------------------------------------------------

ExponentialRegressionModel::ExponentialRegressionModel(std::size_t k) : k_(k) {
  if (k == 0) fail(ErrorKind::invalid_argument, "exponential_regression needs k >= 1");
}

void ExponentialRegressionModel::check_params(std::span<const double> theta) const {
  check_theta_size(*this, theta);
}

double ExponentialRegressionModel::log_rate(std::span<const double> x,
                                            std::span<const double> theta) const noexcept {
  double eta = theta[0];
  for (std::size_t d = 0; d < k_; ++d) eta += theta[d + 1] * x[d];
  return eta;
}

double ExponentialRegressionModel::cdf(double y, std::span<const double> x,
                                       std::span<const double> theta) const {
  if (y <= 0.0) return 0.0;
  return -std::expm1(-std::exp(log_rate(x, theta)) * y);
}

double ExponentialRegressionModel::log_density(double y, std::span<const double> x,
                                               std::span<const double> theta) const {
  if (y < 0.0) return -std::numeric_limits<double>::infinity();
  const double eta = log_rate(x, theta);
  return eta - std::exp(eta) * y;
}

void ExponentialRegressionModel::score(double y, std::span<const double> x,
                                       std::span<const double> theta,
                                       std::span<double> out) const {
  const double g = 1.0 - std::exp(log_rate(x, theta)) * y;
  out[0] = g;
  for (std::size_t d = 0; d < k_; ++d) out[d + 1] = g * x[d];
}

double ExponentialRegressionModel::quantile(double t, std::span<const double> x,
                                            std::span<const double> theta) const {
  if (!(t > 0.0 && t < 1.0)) fail(ErrorKind::invalid_argument, "quantile level must be in (0,1)");
  return -std::log1p(-t) / std::exp(log_rate(x, theta));
}

void ExponentialRegressionModel::cdf_gradient(double y, std::span<const double> x,
                                              std::span<const double> theta,
                                              std::span<double> out) const {
  double g = 0.0;
  if (y > 0.0) {
    const double ry = std::exp(log_rate(x, theta)) * y;
    g = std::exp(-ry) * ry;
  }
  out[0] = g;
  for (std::size_t d = 0; d < k_; ++d) out[d + 1] = g * x[d];
}

// ---------------------------------------------------------------------------

std::unique_ptr<ConditionalModel> make_model(std::string_view id, std::size_t k) {
  if (id == "gaussian_linear") return std::make_unique<GaussianLinearModel>(k);
  if (id == "exponential_regression") return std::make_unique<ExponentialRegressionModel>(k);
  fail(ErrorKind::invalid_argument, "unknown model '" + std::string(id) + "'");
}

double std_normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::invalid_argument, "normal quantile needs 0 < p < 1");
  // Acklam's rational approximation, then two Halley refinements.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double e = std_normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

std::vector<double> rosenblatt(const ConditionalModel& model, std::span<const double> theta,
                               const Dataset& data) {
  model.check_params(theta);
  check_covariates(model, data);
  std::vector<double> v(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double value = model.cdf(data.y()[i], data.x_row(i), theta);
    if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
      fail(ErrorKind::model_evaluation, std::string(model.name()) +
                                            ": conditional cdf not in [0,1] at row " +
                                            std::to_string(i + 1));
    }
    v[i] = value;
  }
  return v;
}

double log_likelihood(const ConditionalModel& model, std::span<const double> theta,
                      const Dataset& data) {
  model.check_params(theta);
  check_covariates(model, data);
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    total += model.log_density(data.y()[i], data.x_row(i), theta);
  }
  return total;
}

}  // namespace cgof
