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

#include "cgof/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cgof/error.hpp"
#include "cgof/rng.hpp"

namespace cgof {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

// Maps between model parameters and unconstrained optimizer coordinates.
struct Reparam {
  const ConditionalModel& model;

  std::vector<double> to_free(std::span<const double> theta) const {
    std::vector<double> u(theta.begin(), theta.end());
    for (std::size_t m = 0; m < u.size(); ++m) {
      if (model.is_scale_param(m)) u[m] = std::log(u[m]);
    }
    return u;
  }

  std::vector<double> to_model(std::span<const double> u) const {
    std::vector<double> theta(u.begin(), u.end());
    for (std::size_t m = 0; m < theta.size(); ++m) {
      if (model.is_scale_param(m)) theta[m] = std::exp(theta[m]);
    }
    return theta;
  }
};

double average_loglik(const ConditionalModel& model, const Dataset& data,
                      std::span<const double> theta) {
  try {
    const double ll = log_likelihood(model, theta, data) / static_cast<double>(data.n());
    return std::isnan(ll) ? -std::numeric_limits<double>::infinity() : ll;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_parameter) return -std::numeric_limits<double>::infinity();
    throw;
  }
}

// Gradient and BHHH matrix of the average log-likelihood in free coordinates.
void free_gradient(const ConditionalModel& model, const Dataset& data,
                   std::span<const double> theta, Eigen::VectorXd& grad, Eigen::MatrixXd& bhhh) {
  const std::size_t p = model.param_dim();
  grad = Eigen::VectorXd::Zero(p);
  bhhh = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd s(p);
  for (std::size_t i = 0; i < data.n(); ++i) {
    model.score(data.y()[i], data.x_row(i), theta, std::span<double>(s.data(), p));
    for (std::size_t m = 0; m < p; ++m) {
      if (model.is_scale_param(m)) s[m] *= theta[m];
    }
    grad += s;
    bhhh.noalias() += s * s.transpose();
  }
  const auto n = static_cast<double>(data.n());
  grad /= n;
  bhhh /= n;
}

// Central-difference Hessian of the average log-likelihood in free
// coordinates. Returns false when a perturbed point is not evaluable.
bool free_hessian(const ConditionalModel& model, const Dataset& data, const Reparam& reparam,
                  const std::vector<double>& u, Eigen::MatrixXd& hess) {
  const std::size_t p = u.size();
  hess.resize(p, p);
  Eigen::VectorXd g_up;
  Eigen::VectorXd g_down;
  Eigen::MatrixXd unused;
  for (std::size_t m = 0; m < p; ++m) {
    const double h = 1e-5 * std::max(1.0, std::abs(u[m]));
    std::vector<double> up = u;
    std::vector<double> down = u;
    up[m] += h;
    down[m] -= h;
    try {
      free_gradient(model, data, reparam.to_model(up), g_up, unused);
      free_gradient(model, data, reparam.to_model(down), g_down, unused);
    } catch (const Error&) {
      return false;
    }
    hess.col(static_cast<Eigen::Index>(m)) = (g_up - g_down) / (2.0 * h);
  }
  hess = 0.5 * (hess + hess.transpose()).eval();
  return hess.allFinite();
}

class NelderMead {
 public:
  template <typename F>
  static std::pair<std::vector<double>, double> minimize(F&& f, std::vector<double> start,
                                                         const std::vector<double>& step,
                                                         std::size_t max_iterations,
                                                         double tolerance) {
    const std::size_t dim = start.size();
    std::vector<std::vector<double>> pts(dim + 1, start);
    for (std::size_t m = 0; m < dim; ++m) pts[m + 1][m] += step[m];
    std::vector<double> vals(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) vals[i] = f(pts[i]);

    std::vector<std::size_t> order(dim + 1);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[dim - (dim > 0 ? 1 : 0)];

      double diameter = 0.0;
      for (std::size_t i = 0; i <= dim; ++i) {
        for (std::size_t m = 0; m < dim; ++m) {
          diameter = std::max(diameter, std::abs(pts[i][m] - pts[best][m]));
        }
      }
      if (diameter < tolerance) break;

      std::vector<double> centroid(dim, 0.0);
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == worst) continue;
        for (std::size_t m = 0; m < dim; ++m) centroid[m] += pts[i][m] / static_cast<double>(dim);
      }
      auto along = [&](double t) {
        std::vector<double> q(dim);
        for (std::size_t m = 0; m < dim; ++m) q[m] = centroid[m] + t * (pts[worst][m] - centroid[m]);
        return q;
      };

      std::vector<double> reflected = along(-1.0);
      const double f_reflected = f(reflected);
      if (f_reflected < vals[best]) {
        std::vector<double> expanded = along(-2.0);
        const double f_expanded = f(expanded);
        if (f_expanded < f_reflected) {
          pts[worst] = std::move(expanded);
          vals[worst] = f_expanded;
        } else {
          pts[worst] = std::move(reflected);
          vals[worst] = f_reflected;
        }
        continue;
      }
      if (f_reflected < vals[second]) {
        pts[worst] = std::move(reflected);
        vals[worst] = f_reflected;
        continue;
      }
      const bool outside = f_reflected < vals[worst];
      std::vector<double> contracted = along(outside ? -0.5 : 0.5);
      const double f_contracted = f(contracted);
      if (f_contracted < (outside ? f_reflected : vals[worst])) {
        pts[worst] = std::move(contracted);
        vals[worst] = f_contracted;
        continue;
      }
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == best) continue;
        for (std::size_t m = 0; m < dim; ++m) pts[i][m] = pts[best][m] + 0.5 * (pts[i][m] - pts[best][m]);
        vals[i] = f(pts[i]);
      }
    }
    const auto best = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[best], vals[best]};
  }
};

}  // namespace

void OptimizerConfig::validate() const {
  if (!(tolerance > 0.0)) fail(ErrorKind::invalid_argument, "optimizer tolerance must be > 0");
  if (restarts < 1) fail(ErrorKind::invalid_argument, "optimizer restarts must be >= 1");
}

ParamVector mle_gaussian_linear(const Dataset& data) {
  const std::size_t n = data.n();
  const std::size_t k = data.k();
  if (n < k + 2) {
    fail(ErrorKind::insufficient_data, "gaussian_linear MLE needs n >= k + 2 = " +
                                           std::to_string(k + 2));
  }
  Eigen::MatrixXd design(n, k + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (std::size_t d = 0; d < k; ++d) design(i, d + 1) = data.x(i, d);
    y[i] = data.y()[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(k + 1)) {
    fail(ErrorKind::singular_design, "design matrix (1, x) is rank deficient");
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - design * beta;
  const double sigma = std::sqrt(resid.squaredNorm() / static_cast<double>(n));

  ParamVector theta(beta.data(), beta.data() + beta.size());
  theta.push_back(sigma);
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (!(sigma >= GaussianLinearModel::kMinSigma * scale)) {
    throw EstimationError(ErrorKind::degenerate_fit, "residual sum of squares is zero", theta);
  }
  return theta;
}

ParamVector mle_numeric(const ConditionalModel& model, const Dataset& data,
                        std::span<const double> init, const OptimizerConfig& cfg,
                        std::vector<double>* objective_trace) {
  cfg.validate();
  model.check_params(init);
  const Reparam reparam{model};
  const std::size_t p = model.param_dim();

  std::vector<double> theta(init.begin(), init.end());
  std::vector<double> u = reparam.to_free(theta);
  double f = average_loglik(model, data, theta);
  if (!std::isfinite(f)) {
    fail(ErrorKind::invalid_start, "log-likelihood is not finite at the starting point");
  }
  if (objective_trace != nullptr) objective_trace->assign(1, f);

  Eigen::VectorXd grad;
  Eigen::MatrixXd bhhh;
  free_gradient(model, data, theta, grad, bhhh);
  for (std::size_t iter = 0;; ++iter) {
    if (!grad.allFinite()) {
      throw EstimationError(ErrorKind::model_evaluation, "non-finite score", theta);
    }
    if (grad.lpNorm<Eigen::Infinity>() <= cfg.tolerance) return theta;
    if (iter >= cfg.max_iterations) {
      throw EstimationError(ErrorKind::convergence_failure,
                            "no convergence after " + std::to_string(cfg.max_iterations) +
                                " iterations",
                            theta);
    }

    // Newton step where the Hessian is negative definite, BHHH otherwise.
    Eigen::VectorXd direction;
    Eigen::MatrixXd hess;
    if (free_hessian(model, data, reparam, u, hess)) {
      const Eigen::LLT<Eigen::MatrixXd> llt(-hess);
      if (llt.info() == Eigen::Success) direction = llt.solve(grad);
    }
    if (direction.size() == 0 || !direction.allFinite()) direction = bhhh.ldlt().solve(grad);
    double slope = grad.dot(direction);
    if (!direction.allFinite() || !(slope > 0.0)) {
      direction = grad;
      slope = grad.squaredNorm();
    }
    // The predicted gain is below what the summed objective can resolve.
    if (slope <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f))) {
      return theta;
    }

    bool accepted = false;
    std::vector<double> u_new(p);
    std::vector<double> theta_new;
    double f_new = f;
    Eigen::VectorXd grad_new;
    Eigen::MatrixXd bhhh_new;
    double step = 1.0;
    for (int h = 0; h < kMaxHalvings && !accepted; ++h, step *= 0.5) {
      for (std::size_t m = 0; m < p; ++m) u_new[m] = u[m] + step * direction[m];
      theta_new = reparam.to_model(u_new);
      f_new = average_loglik(model, data, theta_new);
      if (std::isfinite(f_new) && f_new >= f + kArmijo * step * slope) accepted = true;
    }
    if (!accepted) {
      // Round-off floor: a full step that does not lower the objective and
      // shrinks the gradient is still progress.
      for (std::size_t m = 0; m < p; ++m) u_new[m] = u[m] + direction[m];
      theta_new = reparam.to_model(u_new);
      f_new = average_loglik(model, data, theta_new);
      if (std::isfinite(f_new) && f_new >= f) {
        free_gradient(model, data, theta_new, grad_new, bhhh_new);
        accepted = grad_new.allFinite() &&
                   grad_new.lpNorm<Eigen::Infinity>() < grad.lpNorm<Eigen::Infinity>();
      }
      if (!accepted) {
        throw EstimationError(ErrorKind::convergence_failure, "line search found no improvement",
                              theta);
      }
    } else {
      free_gradient(model, data, theta_new, grad_new, bhhh_new);
    }
    u = u_new;
    theta = std::move(theta_new);
    f = f_new;
    grad = std::move(grad_new);
    bhhh = std::move(bhhh_new);
    if (objective_trace != nullptr) objective_trace->push_back(f);
  }
}

double min_chisq_objective(const ConditionalModel& model, const Dataset& data, const UGrid& grid,
                           const Partition& partition, std::span<const double> theta) {
  try {
    const std::vector<double> v = rosenblatt(model, theta, data);
    return pearson_stat(cross_classify(v, Covariates(data), grid, partition));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_parameter || e.kind() == ErrorKind::model_evaluation ||
        e.kind() == ErrorKind::empty_cell) {
      return std::numeric_limits<double>::infinity();
    }
    throw;
  }
}

ParamVector min_chisq_estimate(const ConditionalModel& model, const Dataset& data,
                               const UGrid& grid, const Partition& partition,
                               std::span<const double> init, const OptimizerConfig& cfg) {
  cfg.validate();
  model.check_params(init);
  const Reparam reparam{model};
  const std::size_t p = model.param_dim();

  auto objective = [&](const std::vector<double>& u) {
    return min_chisq_objective(model, data, grid, partition, reparam.to_model(u));
  };

  const double init_value = min_chisq_objective(model, data, grid, partition, init);
  if (!std::isfinite(init_value)) {
    fail(ErrorKind::invalid_start, "minimum chi-square objective is not finite at the start");
  }
  const std::vector<double> u0 = reparam.to_free(init);

  // Search scale per free coordinate: the standard error implied by the
  // outer-product information at the start, or 1/sqrt(n) when unavailable.
  const double n = static_cast<double>(data.n());
  std::vector<double> se(p, 1.0 / std::sqrt(n));
  try {
    Eigen::VectorXd grad;
    Eigen::MatrixXd bhhh;
    free_gradient(model, data, init, grad, bhhh);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(bhhh);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    if (eig.info() == Eigen::Success && lambda.minCoeff() > 1e-10 * lambda.maxCoeff()) {
      const Eigen::MatrixXd cov = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() *
                                  eig.eigenvectors().transpose();
      for (std::size_t m = 0; m < p; ++m) {
        const double v = cov(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        if (std::isfinite(v) && v > 0.0) se[m] = std::sqrt(v / n);
      }
    }
  } catch (const Error&) {
    // Keep the default scale.
  }

  struct Candidate {
    std::vector<double> u;
    double value;
  };
  std::vector<Candidate> candidates{{u0, init_value}};
  auto consider = [&](std::vector<double> u) {
    const double value = objective(u);
    if (std::isfinite(value)) candidates.push_back({std::move(u), value});
  };

  // Global phase: fine axis scans to +-4 standard errors (plateaus of the
  // objective are O(1/n) wide) and random probes.
  for (std::size_t m = 0; m < p; ++m) {
    for (int k = -200; k <= 200; ++k) {
      if (k == 0) continue;
      std::vector<double> u = u0;
      u[m] += 0.02 * k * se[m];
      consider(std::move(u));
    }
  }
  CounterRng rng(cfg.seed);
  CounterRng probes = rng.substream(0);
  for (std::size_t t = 0; t < 16 * p; ++t) {
    std::vector<double> u = u0;
    for (std::size_t m = 0; m < p; ++m) u[m] += 1.5 * se[m] * probes.normal();
    consider(std::move(u));
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  candidates.resize(std::min<std::size_t>(candidates.size(), 4));

  // Local phase: compass search with halving steps from each leading
  // candidate, then simplex restarts around the best point.
  std::vector<double> u_best = u0;
  double best_value = init_value;
  for (Candidate& c : candidates) {
    for (double h = 0.16; h >= 0.001; h *= 0.5) {
      bool improved = true;
      for (std::size_t sweep = 0; improved && sweep < cfg.max_iterations; ++sweep) {
        improved = false;
        for (std::size_t m = 0; m < p && !improved; ++m) {
          for (double sign : {1.0, -1.0}) {
            std::vector<double> trial = c.u;
            trial[m] += sign * h * se[m];
            const double value = objective(trial);
            if (value < c.value) {
              c.value = value;
              c.u = std::move(trial);
              improved = true;
              break;
            }
          }
        }
      }
    }
    if (c.value < best_value) {
      best_value = c.value;
      u_best = c.u;
    }
  }

  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    CounterRng stream = rng.substream(r + 1);
    std::vector<double> start = u_best;
    std::vector<double> step(p);
    for (std::size_t m = 0; m < p; ++m) {
      step[m] = 0.5 * se[m] * (r == 0 ? 1.0 : 2.0);
      if (r > 0) start[m] += 0.5 * se[m] * stream.normal();
    }
    auto [u, value] = NelderMead::minimize(objective, start, step, cfg.max_iterations,
                                           1e-3 * *std::min_element(se.begin(), se.end()));
    if (value < best_value) {
      best_value = value;
      u_best = u;
    }
  }
  return reparam.to_model(u_best);
}

Eigen::MatrixXd fisher_information_estimate(const ConditionalModel& model, const Dataset& data,
                                            std::span<const double> theta) {
  model.check_params(theta);
  const std::size_t p = model.param_dim();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd s(p);
  for (std::size_t i = 0; i < data.n(); ++i) {
    model.score(data.y()[i], data.x_row(i), theta, std::span<double>(s.data(), p));
    if (!s.allFinite()) {
      fail(ErrorKind::model_evaluation, "non-finite score at row " + std::to_string(i + 1));
    }
    info.noalias() += s * s.transpose();
  }
  info /= static_cast<double>(data.n());
  return info;
}

Eigen::MatrixXd observed_information_estimate(const ConditionalModel& model, const Dataset& data,
                                              std::span<const double> theta) {
  model.check_params(theta);
  const std::size_t p = model.param_dim();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
  std::vector<double> t(theta.begin(), theta.end());
  Eigen::VectorXd up(p);
  Eigen::VectorXd down(p);
  for (std::size_t m = 0; m < p; ++m) {
    double h = 1e-5 * std::max(1.0, std::abs(theta[m]));
    if (model.is_scale_param(m)) h = std::min(h, 0.5 * theta[m]);
    for (std::size_t i = 0; i < data.n(); ++i) {
      t[m] = theta[m] + h;
      model.score(data.y()[i], data.x_row(i), t, std::span<double>(up.data(), p));
      t[m] = theta[m] - h;
      model.score(data.y()[i], data.x_row(i), t, std::span<double>(down.data(), p));
      t[m] = theta[m];
      info.col(m) -= (up - down) / (2.0 * h);
    }
  }
  if (!info.allFinite()) fail(ErrorKind::model_evaluation, "non-finite observed information");
  info /= static_cast<double>(data.n());
  return 0.5 * (info + info.transpose());
}

}  // namespace cgof
