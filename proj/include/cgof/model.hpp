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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cgof {

/// Responses paired with row-major covariates. Construction validates shape
/// and finiteness, so a Dataset is always usable as-is.
class Dataset {
 public:
  Dataset(std::vector<double> y, std::vector<double> x_row_major, std::size_t k);

  std::size_t n() const noexcept { return y_.size(); }
  std::size_t k() const noexcept { return k_; }

  const std::vector<double>& y() const noexcept { return y_; }
  const std::vector<double>& x() const noexcept { return x_; }

  std::span<const double> x_row(std::size_t i) const noexcept {
    return {x_.data() + i * k_, k_};
  }

  double x(std::size_t i, std::size_t d) const noexcept { return x_[i * k_ + d]; }

 private:
  std::vector<double> y_;
  std::vector<double> x_;
  std::size_t k_;
};

using ParamVector = std::vector<double>;

/// Parametric family for the conditional law of Y given X = x.
///
/// Implementations must keep cdf nondecreasing in y, and score must be the
/// theta-gradient of log_density. Evaluation functions assume theta already
/// passed check_params; rosenblatt() and log_likelihood() enforce that.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  virtual std::string_view name() const noexcept = 0;
  virtual std::size_t covariate_dim() const noexcept = 0;
  virtual std::size_t param_dim() const noexcept = 0;

  /// Throws Error(invalid_parameter) when theta is outside the parameter space.
  virtual void check_params(std::span<const double> theta) const = 0;

  virtual double cdf(double y, std::span<const double> x, std::span<const double> theta) const = 0;
  virtual double log_density(double y, std::span<const double> x,
                             std::span<const double> theta) const = 0;
  virtual void score(double y, std::span<const double> x, std::span<const double> theta,
                     std::span<double> out) const = 0;

  /// Parameters constrained to be positive; optimizers work on their logarithm.
  virtual bool is_scale_param(std::size_t /*index*/) const noexcept { return false; }

  /// Smallest y with cdf(y) >= t, for t in (0, 1). The default brackets and bisects.
  virtual double quantile(double t, std::span<const double> x,
                          std::span<const double> theta) const;
  /// Gradient of cdf(y | x; theta) in theta. The default uses central differences.
  virtual void cdf_gradient(double y, std::span<const double> x, std::span<const double> theta,
                            std::span<double> out) const;
};

/// Y = beta_0 + beta' x + sigma * e, e ~ N(0, 1); theta = (beta_0..beta_k, sigma).
class GaussianLinearModel final : public ConditionalModel {
 public:
  static constexpr double kMinSigma = 1e-12;

  explicit GaussianLinearModel(std::size_t k);

  std::string_view name() const noexcept override { return "gaussian_linear"; }
  std::size_t covariate_dim() const noexcept override { return k_; }
  std::size_t param_dim() const noexcept override { return k_ + 2; }
  void check_params(std::span<const double> theta) const override;
  double cdf(double y, std::span<const double> x, std::span<const double> theta) const override;
  double log_density(double y, std::span<const double> x,
                     std::span<const double> theta) const override;
  void score(double y, std::span<const double> x, std::span<const double> theta,
             std::span<double> out) const override;
  bool is_scale_param(std::size_t index) const noexcept override { return index == k_ + 1; }
  double quantile(double t, std::span<const double> x,
                  std::span<const double> theta) const override;
  void cdf_gradient(double y, std::span<const double> x, std::span<const double> theta,
                    std::span<double> out) const override;

 private:
  double mean(std::span<const double> x, std::span<const double> theta) const noexcept;
  std::size_t k_;
};

/// Y | x ~ Exponential(rate = exp(beta_0 + beta' x)); theta = (beta_0..beta_k).
class ExponentialRegressionModel final : public ConditionalModel {
 public:
  explicit ExponentialRegressionModel(std::size_t k);

  std::string_view name() const noexcept override { return "exponential_regression"; }
  std::size_t covariate_dim() const noexcept override { return k_; }
  std::size_t param_dim() const noexcept override { return k_ + 1; }
  void check_params(std::span<const double> theta) const override;
  double cdf(double y, std::span<const double> x, std::span<const double> theta) const override;
  double log_density(double y, std::span<const double> x,
                     std::span<const double> theta) const override;
  void score(double y, std::span<const double> x, std::span<const double> theta,
             std::span<double> out) const override;
  double quantile(double t, std::span<const double> x,
                  std::span<const double> theta) const override;
  void cdf_gradient(double y, std::span<const double> x, std::span<const double> theta,
                    std::span<double> out) const override;

 private:
  double log_rate(std::span<const double> x, std::span<const double> theta) const noexcept;
  std::size_t k_;
};

/// Builds a built-in family by id ("gaussian_linear", "exponential_regression").
std::unique_ptr<ConditionalModel> make_model(std::string_view id, std::size_t k);

double std_normal_cdf(double z) noexcept;

/// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p);

/// V_i = F(y_i | x_i; theta), in input order.
std::vector<double> rosenblatt(const ConditionalModel& model, std::span<const double> theta,
                               const Dataset& data);

double log_likelihood(const ConditionalModel& model, std::span<const double> theta,
                      const Dataset& data);

}  // namespace cgof
