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

#include "cgof/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "cgof/error.hpp"

namespace cgof {

namespace {

constexpr double kMaxFailureFraction = 0.05;
constexpr std::uint64_t kPartitionStream = 0x7265e;

std::size_t param_count(DgpFamily family, std::size_t k) {
  return family == DgpFamily::exponential_regression ? k + 1 : k + 2;
}

std::size_t cell_count(const SimConfig& cfg) {
  const PartitionSpec& p = cfg.test.partition;
  const std::size_t k = cfg.dgp.k;
  switch (p.rule) {
    case PartitionRule::grid: {
      if (p.cuts.empty()) {
        std::size_t J = 1;
        for (std::size_t d = 0; d < k; ++d) J *= p.T;
        return J;
      }
      std::size_t J = 1;
      for (const auto& c : p.cuts) J *= c.size() + 1;
      return J;
    }
    case PartitionRule::gessaman: {
      std::size_t J = 1;
      for (std::size_t d = 0; d < k; ++d) J *= p.T;
      return J;
    }
    case PartitionRule::rtp:
      return p.equal_depth ? 1 + AxisMultiset::equal_depth(k, p.r, p.T).total() * (p.T - 1)
                           : rtp_cell_count(k, p.r, p.T);
    case PartitionRule::fixed:
      return p.fixed ? p.fixed->size() : 0;
  }
  return 0;
}

}  // namespace

std::string_view to_string(DgpFamily family) noexcept {
  switch (family) {
    case DgpFamily::gaussian_linear: return "gaussian_linear";
    case DgpFamily::gaussian_heteroskedastic: return "gaussian_heteroskedastic";
    case DgpFamily::exponential_regression: return "exponential_regression";
  }
  return "gaussian_linear";
}

DgpFamily dgp_family_from_string(std::string_view text) {
  if (text == "gaussian_linear") return DgpFamily::gaussian_linear;
  if (text == "gaussian_heteroskedastic") return DgpFamily::gaussian_heteroskedastic;
  if (text == "exponential_regression") return DgpFamily::exponential_regression;
  fail(ErrorKind::invalid_argument, "unknown dgp family '" + std::string(text) + "'");
}

std::string_view to_string(CovariateLaw law) noexcept {
  return law == CovariateLaw::uniform ? "uniform" : "normal";
}

CovariateLaw covariate_law_from_string(std::string_view text) {
  if (text == "uniform") return CovariateLaw::uniform;
  if (text == "normal") return CovariateLaw::normal;
  fail(ErrorKind::invalid_argument, "unknown covariate law '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

void DgpSpec::validate() const {
  if (k < 1) fail(ErrorKind::invalid_argument, "dgp needs k >= 1");
  if (n < 1) fail(ErrorKind::invalid_argument, "dgp needs n >= 1");
  const std::size_t p = param_count(family, k);
  if (true_params.size() != p) {
    fail(ErrorKind::invalid_argument, std::string(to_string(family)) + " with k=" +
                                          std::to_string(k) + " needs " + std::to_string(p) +
                                          " parameters");
  }
  for (double t : true_params) {
    if (!std::isfinite(t)) fail(ErrorKind::invalid_argument, "dgp parameters must be finite");
  }
  if (family != DgpFamily::exponential_regression && true_params.back() < 0.0) {
    fail(ErrorKind::invalid_argument, "dgp sigma must be >= 0");
  }
}

Dataset DgpSpec::simulate(CounterRng& rng) const {
  std::vector<double> x(n * k);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = x.data() + i * k;
    for (std::size_t d = 0; d < k; ++d) {
      row[d] = covariates == CovariateLaw::uniform ? rng.uniform(-1.0, 1.0) : rng.normal();
    }
    double eta = true_params[0];
    for (std::size_t d = 0; d < k; ++d) eta += true_params[d + 1] * row[d];
    switch (family) {
      case DgpFamily::gaussian_linear:
        y[i] = eta + true_params[k + 1] * rng.normal();
        break;
      case DgpFamily::gaussian_heteroskedastic:
        y[i] = eta + true_params[k + 1] * (1.0 + std::abs(row[0])) * rng.normal();
        break;
      case DgpFamily::exponential_regression:
        y[i] = rng.exponential() / std::exp(eta);
        break;
    }
  }
  return Dataset(std::move(y), std::move(x), k);
}

std::vector<double> DgpSpec::covariate_quantiles(std::size_t T) const {
  std::vector<double> q;
  for (std::size_t g = 1; g < T; ++g) {
    const double p = static_cast<double>(g) / static_cast<double>(T);
    q.push_back(covariates == CovariateLaw::uniform ? -1.0 + 2.0 * p : std_normal_quantile(p));
  }
  return q;
}

void SimConfig::validate() const {
  dgp.validate();
  if (replications < 1) fail(ErrorKind::invalid_argument, "replications must be >= 1");
  if (levels.empty()) fail(ErrorKind::invalid_argument, "at least one nominal level is required");
  for (double a : levels) {
    if (!(a > 0.0 && a < 1.0)) fail(ErrorKind::invalid_argument, "levels must lie in (0,1)");
  }
  if (test.stats.empty()) fail(ErrorKind::invalid_argument, "at least one statistic is required");
  if (test.L < 1) fail(ErrorKind::invalid_argument, "L must be >= 1");
  test.optimizer.validate();
  const auto model = make_model(test.model, dgp.k);
  if (test.estimator == EstimatorKind::known && !test.theta.empty()) {
    if (test.theta.size() != model->param_dim()) {
      fail(ErrorKind::invalid_argument, "theta has the wrong length for " + test.model);
    }
  }
  if (test.estimator == EstimatorKind::known && test.theta.empty() &&
      param_count(dgp.family, dgp.k) != model->param_dim()) {
    fail(ErrorKind::invalid_argument, "known estimator needs theta for this model/dgp pair");
  }
}

// ---------------------------------------------------------------------------

std::uint64_t replication_partition_seed(std::uint64_t master_seed, std::size_t rep_index) {
  return CounterRng(master_seed).substream(rep_index).substream(kPartitionStream).next_u64();
}

ReplicationOutcome run_replication(const SimConfig& cfg, std::size_t rep_index) {
  ReplicationOutcome out;
  out.rep_index = rep_index;
  out.partition_seed = replication_partition_seed(cfg.master_seed, rep_index);
  try {
    CounterRng rng = CounterRng(cfg.master_seed).substream(rep_index);
    const Dataset data = cfg.dgp.simulate(rng);

    TestConfig test = cfg.test;
    test.partition.seed = out.partition_seed;
    if (test.partition.rule == PartitionRule::grid && test.partition.cuts.empty()) {
      test.partition.cuts.assign(cfg.dgp.k, cfg.dgp.covariate_quantiles(test.partition.T));
    }
    if (test.estimator == EstimatorKind::known && test.theta.empty()) {
      test.theta = cfg.dgp.true_params;
    }
    test.optimizer.seed = CounterRng(cfg.master_seed).substream(rep_index).next_u64();

    const TestOutcome result = run_specification_test(data, test);
    out.theta = result.theta;
    for (const TestReport& r : result.reports) {
      StatOutcome s;
      s.kind = r.kind;
      s.value = r.value;
      s.df = r.df;
      s.df_interval = r.df_interval;
      s.p = r.conservative_p();
      s.p_interval = r.p_interval;
      out.stats.push_back(s);
    }
    out.ok = true;
  } catch (const Error& e) {
    out.ok = false;
    out.reason = std::string(to_string(e.kind()));
    out.message = e.what();
    out.stats.clear();
  }
  return out;
}

std::vector<ReplicationOutcome> run_replications(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t R = cfg.replications;
  std::vector<ReplicationOutcome> outcomes(R);
  std::size_t workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  workers = std::clamp<std::size_t>(workers, 1, R);
  if (workers == 1) {
    for (std::size_t r = 0; r < R; ++r) outcomes[r] = run_replication(cfg, r);
    return outcomes;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < R; r = next++) outcomes[r] = run_replication(cfg, r);
    });
  }
  for (auto& t : pool) t.join();
  return outcomes;
}

double ks_distance_uniform(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto m = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double u = std::clamp(values[i], 0.0, 1.0);
    d = std::max(d, std::max(static_cast<double>(i + 1) / m - u, u - static_cast<double>(i) / m));
  }
  return d;
}

std::pair<double, double> binomial_band_99(double level, std::size_t replications) {
  constexpr double z = 2.5758293035489004;
  const double half = z * std::sqrt(level * (1.0 - level) / static_cast<double>(replications));
  return {level - half, level + half};
}

SimResult aggregate(const SimConfig& cfg, std::vector<ReplicationOutcome> outcomes) {
  std::sort(outcomes.begin(), outcomes.end(),
            [](const auto& a, const auto& b) { return a.rep_index < b.rep_index; });
  SimResult result;
  result.replications = outcomes.size();
  for (const auto& o : outcomes) {
    if (o.ok) {
      ++result.completed;
    } else {
      result.failures.push_back({o.rep_index, o.reason, o.message});
    }
  }
  if (static_cast<double>(result.failures.size()) >
      kMaxFailureFraction * static_cast<double>(result.replications)) {
    const Failure& first = result.failures.front();
    fail(ErrorKind::experiment_invalid,
         std::to_string(result.failures.size()) + " of " + std::to_string(result.replications) +
             " replications failed (first: replication " + std::to_string(first.rep_index) +
             ", " + first.reason + ": " + first.message + ")");
  }

  for (std::size_t s = 0; s < cfg.test.stats.size(); ++s) {
    StatSummary summary;
    summary.kind = cfg.test.stats[s];
    std::vector<double> values;
    std::vector<double> p_hi;
    std::vector<double> p_lo;
    double df_sum = 0.0;
    for (const auto& o : outcomes) {
      if (!o.ok) continue;
      const StatOutcome& st = o.stats[s];
      values.push_back(st.value);
      p_hi.push_back(st.p);
      p_lo.push_back(st.p_interval ? st.p_interval->first : st.p);
      df_sum += static_cast<double>(st.df);
    }
    summary.count = values.size();
    if (summary.count > 0) {
      const auto m = static_cast<double>(summary.count);
      summary.mean_stat = std::accumulate(values.begin(), values.end(), 0.0) / m;
      double ss = 0.0;
      for (double v : values) ss += (v - summary.mean_stat) * (v - summary.mean_stat);
      summary.var_stat = summary.count > 1 ? ss / (m - 1.0) : 0.0;
      summary.mean_df = df_sum / m;
      summary.ks_uniform = ks_distance_uniform(p_hi);
    }
    for (double level : cfg.levels) {
      LevelResult lr;
      lr.level = level;
      lr.rejections = static_cast<std::size_t>(
          std::count_if(p_hi.begin(), p_hi.end(), [&](double p) { return p < level; }));
      lr.liberal_rejections = static_cast<std::size_t>(
          std::count_if(p_lo.begin(), p_lo.end(), [&](double p) { return p < level; }));
      if (summary.count > 0) {
        const auto m = static_cast<double>(summary.count);
        lr.rate = static_cast<double>(lr.rejections) / m;
        lr.liberal_rate = static_cast<double>(lr.liberal_rejections) / m;
        lr.mc_se = std::sqrt(lr.rate * (1.0 - lr.rate) / m);
      }
      summary.levels.push_back(lr);
    }
    result.per_stat.push_back(std::move(summary));
  }
  return result;
}

SimResult run_experiment(const SimConfig& cfg) { return aggregate(cfg, run_replications(cfg)); }

std::vector<DfCalibration> calibrate_df(const SimConfig& cfg, const SimResult& result,
                                        std::size_t J) {
  const auto model = make_model(cfg.test.model, cfg.dgp.k);
  const std::size_t p = cfg.test.estimator == EstimatorKind::known ? 0 : model->param_dim();
  const std::size_t L = cfg.test.L;
  std::vector<DfCalibration> out;
  for (const StatSummary& s : result.per_stat) {
    DfCalibration c;
    c.kind = s.kind;
    c.mean = s.mean_stat;
    c.se = s.count > 0 ? std::sqrt(s.var_stat / static_cast<double>(s.count)) : 0.0;
    c.df_conditional = static_cast<double>(J * (L - 1)) - static_cast<double>(p);
    c.df_unconditional = static_cast<double>(J * L - 1) - static_cast<double>(p);
    c.df_reported = s.mean_df;
    out.push_back(c);
  }
  return out;
}

std::vector<DfCalibration> calibrate_df(const SimConfig& cfg) {
  const SimResult result = run_experiment(cfg);
  return calibrate_df(cfg, result, cell_count(cfg));
}

}  // namespace cgof
