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

// Acceptance harness: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. All randomness derives from fixed seeds.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cgof/mc.hpp"
#include "cgof/model.hpp"
#include "cgof/partition.hpp"
#include "cgof/rng.hpp"
#include "cgof/stats.hpp"
#include "cgof/tabulate.hpp"
#include "oracle.hpp"

namespace {

using namespace cgof;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kMasterSeed = 20261018;
constexpr double kBandLo = 0.037;
constexpr double kBandHi = 0.063;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

const LevelResult& at_level(const StatSummary& s, double level) {
  for (const LevelResult& l : s.levels) {
    if (std::abs(l.level - level) < 1e-12) return l;
  }
  throw std::runtime_error("level not simulated");
}

const StatSummary& summary_of(const SimResult& r, StatKind kind) {
  for (const StatSummary& s : r.per_stat) {
    if (s.kind == kind) return s;
  }
  throw std::runtime_error("statistic not simulated");
}

bool in_band(double rate) { return rate >= kBandLo && rate <= kBandHi; }

// Gaussian-linear null with k = 2, n = 500, L = 4 and RTP(T=2, r=2), so J = 5.
SimConfig null_experiment(EstimatorKind estimator, std::vector<StatKind> stats) {
  SimConfig c;
  c.dgp.family = DgpFamily::gaussian_linear;
  c.dgp.true_params = {1.0, 0.5, -0.3, 1.0};
  c.dgp.k = 2;
  c.dgp.n = 500;
  c.test.model = "gaussian_linear";
  c.test.estimator = estimator;
  c.test.L = 4;
  c.test.partition.rule = PartitionRule::rtp;
  c.test.partition.T = 2;
  c.test.partition.r = 2;
  c.test.stats = std::move(stats);
  c.levels = {0.05};
  c.replications = 2000;
  c.master_seed = kMasterSeed;
  c.threads = 0;
  return c;
}

// --------------------------------------------------------------------------

Verdict identities() {
  CounterRng rng(kMasterSeed + 1);
  double worst_lm = 0.0;
  double worst_wald = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t L = 2 + rng.uniform_index(7);
    const std::size_t J = 1 + rng.uniform_index(8);
    std::vector<std::int64_t> o(L * J);
    for (auto& e : o) e = 1 + static_cast<std::int64_t>(rng.uniform_index(200));
    const ContingencyTable t(L, J, o, balanced_grid(L).widths());
    const double x2 = pearson_stat(t);
    worst_lm = std::max(worst_lm, std::abs(lm_stat(t) - x2));
    worst_wald = std::max(worst_wald, std::abs(wald_null_quadform(t).value - x2));
  }
  return {worst_lm <= 1e-12 && worst_wald <= 1e-8,
          "max |LM-X2| = " + fmt(worst_lm) + ", max |W-X2| = " + fmt(worst_wald)};
}

std::vector<double> distinct_points(std::size_t n, std::size_t k, CounterRng& rng) {
  std::vector<double> x(n * k);
  for (std::size_t d = 0; d < k; ++d) {
    for (std::size_t i = 0; i < n; ++i) x[i * k + d] = rng.normal();
  }
  return x;
}

Verdict partition_bounds() {
  CounterRng rng(kMasterSeed + 2);
  std::size_t gessaman_worst = 0;
  bool count_ok = true;
  // Violations of max <= T min + 1 per T in {2, 3, 4}, and of the
  // integer-rounding bound max <= T min + T - 1.
  std::size_t stated_runs[3] = {0, 0, 0};
  std::size_t stated_bad[3] = {0, 0, 0};
  std::size_t rounding_bad = 0;
  std::size_t equal_depth_worst = 0;
  for (int run = 0; run < 200; ++run) {
    const std::size_t k = 1 + rng.uniform_index(3);
    const std::size_t T = 2 + rng.uniform_index(3);
    const std::size_t n = 100 + rng.uniform_index(400);
    const std::vector<double> x = distinct_points(n, k, rng);
    const Covariates cov(x, n, k);

    const auto g = gessaman_partition(cov, T).counts(cov);
    const auto [glo, ghi] = std::minmax_element(g.begin(), g.end());
    gessaman_worst = std::max(gessaman_worst, *ghi - *glo);

    const std::size_t r = 1 + rng.uniform_index(3);
    const Partition p = rtp_partition(cov, RtpOptions{T, r, rng.next_u64(), false});
    count_ok = count_ok && p.size() == rtp_cell_count(k, r, T);
    const auto c = p.counts(cov);
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    ++stated_runs[T - 2];
    if (*hi > T * *lo + 1) ++stated_bad[T - 2];
    if (*hi > T * *lo + T - 1) ++rounding_bad;
  }
  // Equal-depth shapes with k r = (T^q - 1) / (T - 1).
  const std::size_t shapes[][3] = {{3, 1, 2}, {1, 3, 2}, {2, 2, 3}, {1, 7, 2}};
  for (int run = 0; run < 200; ++run) {
    const auto& s = shapes[run % 4];
    const std::size_t n = 200 + rng.uniform_index(300);
    const std::vector<double> x = distinct_points(n, s[0], rng);
    const Covariates cov(x, n, s[0]);
    const auto c = rtp_partition(cov, RtpOptions{s[2], s[1], rng.next_u64(), true}).counts(cov);
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    equal_depth_worst = std::max(equal_depth_worst, *hi - *lo);
  }
  std::string stated = "rtp max <= T*min+1 violations:";
  for (std::size_t t = 0; t < 3; ++t) {
    stated += " T=" + std::to_string(t + 2) + " " + std::to_string(stated_bad[t]) + "/" +
              std::to_string(stated_runs[t]);
  }
  const bool rtp_ok = stated_bad[0] + stated_bad[1] + stated_bad[2] == 0;
  return {gessaman_worst <= 1 && count_ok && rtp_ok && equal_depth_worst <= 1,
          "gessaman max-min " + std::to_string(gessaman_worst) + ", rtp J formula " +
              (count_ok ? "ok" : "violated") + ", " + stated +
              " (max <= T*min+T-1 violations: " + std::to_string(rounding_bad) +
              "), equal-depth max-min " + std::to_string(equal_depth_worst)};
}

Verdict chisq_accuracy() {
  double worst = 0.0;
  std::vector<double> xs;
  for (double x = 0.1; x <= 100.0 + 1e-9; x *= 1.25) xs.push_back(x);
  xs.push_back(100.0);
  for (double x : xs) {
    for (long df = 1; df <= 30; ++df) {
      worst = std::max(worst, std::abs(chisq_sf(x, df) -
                                       testing::chisq_sf_by_quadrature(x, static_cast<double>(df))));
    }
  }
  const double spot = chisq_sf(3.8415, 1);
  return {worst <= 1e-8 && std::abs(spot - 0.05) <= 1e-4,
          "max abs error " + fmt(worst) + " over " + std::to_string(xs.size() * 30) +
              " points, Q(3.8415, 1) = " + fmt(spot, 8)};
}

Verdict known_theta_size(SimResult& out) {
  const SimConfig c =
      null_experiment(EstimatorKind::known, {StatKind::pearson, StatKind::lr, StatKind::wald_null});
  out = run_experiment(c);
  bool ok = true;
  std::string detail;
  for (const StatSummary& s : out.per_stat) {
    const double rate = at_level(s, 0.05).rate;
    ok = ok && in_band(rate);
    detail += std::string(to_string(s.kind)) + " " + fmt(rate) + "  ";
  }
  return {ok, detail + "(band [0.037, 0.063], R = 2000)"};
}

Verdict grouping_neutrality(const SimResult& rtp) {
  SimConfig c = null_experiment(EstimatorKind::known, {StatKind::pearson, StatKind::lr,
                                                       StatKind::wald_null});
  c.test.partition.rule = PartitionRule::grid;
  c.test.partition.T = 2;
  const SimResult grid = run_experiment(c);
  bool ok = true;
  std::string detail;
  for (const StatSummary& g : grid.per_stat) {
    const LevelResult& a = at_level(g, 0.05);
    const LevelResult& b = at_level(summary_of(rtp, g.kind), 0.05);
    const double pooled = std::sqrt(a.mc_se * a.mc_se + b.mc_se * b.mc_se);
    const bool stat_ok = in_band(a.rate) && in_band(b.rate) &&
                         std::abs(a.rate - b.rate) <= 3.0 * pooled;
    ok = ok && stat_ok;
    detail += std::string(to_string(g.kind)) + " grid " + fmt(a.rate) + " vs rtp " + fmt(b.rate) +
              " (3 SE " + fmt(3.0 * pooled, 3) + ")  ";
  }
  return {ok, detail};
}

Verdict raw_wald(const SimConfig& cfg, const SimResult& result) {
  const LevelResult& l = at_level(summary_of(result, StatKind::wald_raw_mle), 0.05);
  const auto cal = calibrate_df(cfg, result, rtp_cell_count(2, 2, 2));
  const DfCalibration* w = nullptr;
  for (const DfCalibration& d : cal) {
    if (d.kind == StatKind::wald_raw_mle) w = &d;
  }
  const bool cal_ok = w && std::abs(w->mean - w->df_reported) <= 3.0 * w->se;
  return {l.rate >= 0.030 && l.rate <= 0.070 && cal_ok,
          "rate " + fmt(l.rate) + " (band [0.030, 0.070]); mean stat " + fmt(w ? w->mean : 0) +
              " vs effective df " + fmt(w ? w->df_reported : 0) + " (3 SE " +
              fmt(w ? 3.0 * w->se : 0, 3) + ")"};
}

Verdict chernoff_lehmann(const SimResult& result) {
  const LevelResult& l = at_level(summary_of(result, StatKind::pearson), 0.05);
  return {l.rate <= kBandHi && l.liberal_rate >= kBandLo,
          "conservative (df J(L-1)) rate " + fmt(l.rate) + " <= 0.063, liberal (df J(L-1)-p) rate " +
              fmt(l.liberal_rate) + " >= 0.037"};
}

// Normal covariates and RTP(T=3, r=1) so each cell spans a range of |x1|.
SimConfig power_experiment(DgpFamily family) {
  SimConfig c = null_experiment(EstimatorKind::raw_mle, {StatKind::pearson});
  c.dgp.family = family;
  c.dgp.covariates = CovariateLaw::normal;
  c.test.partition.T = 3;
  c.test.partition.r = 1;
  c.replications = 400;
  return c;
}

Verdict power() {
  const SimResult alt = run_experiment(power_experiment(DgpFamily::gaussian_heteroskedastic));
  const SimResult null = run_experiment(power_experiment(DgpFamily::gaussian_linear));
  const double p = at_level(summary_of(alt, StatKind::pearson), 0.05).rate;
  const double s = at_level(summary_of(null, StatKind::pearson), 0.05).rate;
  return {p >= 0.20 && p > s, "power " + fmt(p) + " vs null size " + fmt(s) + " (R = 400 each)"};
}

// --------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CGOF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict determinism() {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("cgof_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  DgpSpec dgp;
  dgp.true_params = {1.0, 0.5, -0.3, 1.0};
  dgp.k = 2;
  dgp.n = 400;
  CounterRng rng(kMasterSeed + 9);
  const Dataset data = dgp.simulate(rng);
  {
    std::ofstream csv(dir / "data.csv");
    csv.precision(17);
    csv << "y,x1,x2\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
      csv << data.y()[i] << ',' << data.x()[i * 2] << ',' << data.x()[i * 2 + 1] << '\n';
    }
    std::ofstream sim(dir / "sim.json");
    sim << R"({"dgp": {"family": "gaussian_linear", "params": [1, 0.5, -0.3, 1], "k": 2, "n": 300},
              "model": "gaussian_linear", "estimator": "raw_mle", "L": 4,
              "partition": {"rule": "rtp", "T": 2, "r": 2}, "stats": ["pearson", "lr", "wald"],
              "replications": 20, "seed": 99, "threads": 2})";
  }
  const std::string test_args = "test --data " + (dir / "data.csv").string() +
                                " --y y --x x1,x2 --partition rtp --T 2 --r 2 --seed 7 --out ";
  const std::string sim_args = "simulate --config " + (dir / "sim.json").string() + " --out ";
  bool ok = true;
  ok = ok && run_cli(test_args + (dir / "t1.json").string()) == 0;
  ok = ok && run_cli(test_args + (dir / "t2.json").string()) == 0;
  ok = ok && run_cli(sim_args + (dir / "s1.json").string()) == 0;
  ok = ok && run_cli(sim_args + (dir / "s2.json").string()) == 0;
  const std::string t1 = slurp(dir / "t1.json");
  const std::string s1 = slurp(dir / "s1.json");
  const bool test_same = ok && !t1.empty() && t1 == slurp(dir / "t2.json");
  const bool sim_same = ok && !s1.empty() && s1 == slurp(dir / "s2.json");
  std::filesystem::remove_all(dir);
  return {test_same && sim_same, std::string("test report ") + (test_same ? "identical" : "differs") +
                                     ", simulate report " + (sim_same ? "identical" : "differs")};
}

Verdict rosenblatt_uniformity() {
  DgpSpec dgp;
  dgp.true_params = {1.0, 0.5, -0.3, 1.0};
  dgp.k = 2;
  dgp.n = 10000;
  const GaussianLinearModel model(2);
  const double n = static_cast<double>(dgp.n);
  // 1% point of the Kolmogorov distribution with the usual finite-n correction.
  const double critical = 1.6276 / (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
  int below = 0;
  double worst = 0.0;
  const CounterRng master(kMasterSeed + 10);
  for (int run = 0; run < 100; ++run) {
    CounterRng rng = master.substream(static_cast<std::uint64_t>(run));
    const Dataset data = dgp.simulate(rng);
    const double d = ks_distance_uniform(rosenblatt(model, dgp.true_params, data));
    worst = std::max(worst, d);
    if (d < critical) ++below;
  }
  return {below >= 99, std::to_string(below) + "/100 runs below " + fmt(critical) +
                           " (largest distance " + fmt(worst) + ")"};
}

}  // namespace

// Usage: cgof_acceptance [--expect-fail N]...
// Every criterion is always evaluated and reported. The exit status is 0 only
// when the failing criteria are exactly the ones named with --expect-fail.
int main(int argc, char** argv) {
  std::set<int> expected_failures;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--expect-fail" && i + 1 < argc) {
      expected_failures.insert(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: cgof_acceptance [--expect-fail N]...\n";
      return 2;
    }
  }
  int failures = 0;
  std::set<int> failed;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Verdict()>& f) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (limit_s > 0.0 && secs > limit_s) {
      v.pass = false;
      v.detail += "; runtime over " + fmt(limit_s) + " s";
    }
    if (!v.pass) {
      ++failures;
      failed.insert(id);
    }
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " -- "
              << v.detail << " [" << fmt(secs, 3) << " s]" << std::endl;
  };

  SimResult known_rtp;
  const SimConfig raw_cfg =
      null_experiment(EstimatorKind::raw_mle, {StatKind::pearson, StatKind::wald_raw_mle});
  SimResult raw;
  bool raw_done = false;
  auto raw_result = [&]() -> const SimResult& {
    if (!raw_done) {
      raw = run_experiment(raw_cfg);
      raw_done = true;
    }
    return raw;
  };

  report(1, "trinity identities", 10.0, identities);
  report(2, "partition balance bounds", 30.0, partition_bounds);
  report(3, "chi-square tail accuracy", 10.0, chisq_accuracy);
  report(4, "size at known theta", 120.0, [&] { return known_theta_size(known_rtp); });
  report(5, "grid versus RTP neutrality", 0.0, [&] { return grouping_neutrality(known_rtp); });
  report(6, "raw-MLE Wald size", 0.0, [&] { return raw_wald(raw_cfg, raw_result()); });
  report(7, "Pearson df bracket at raw MLE", 0.0, [&] { return chernoff_lehmann(raw_result()); });
  report(8, "power against heteroskedasticity", 120.0, power);
  report(9, "deterministic reports", 0.0, determinism);
  report(10, "transform uniformity", 0.0, rosenblatt_uniformity);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  if (!expected_failures.empty()) {
    std::cout << "expected failures:";
    for (int id : expected_failures) std::cout << ' ' << id;
    std::cout << (failed == expected_failures ? " (matched)" : " (mismatch)") << std::endl;
  }
  return failed == expected_failures ? 0 : 1;
}
