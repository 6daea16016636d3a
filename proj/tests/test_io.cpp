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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "cgof/error.hpp"
#include "cgof/io.hpp"
#include "cgof/rng.hpp"

namespace cgof {
namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::invalid_argument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(Csv, ParsesHeaderQuotesAndLineEndings) {
  const CsvFrame f = parse_csv("\xEF\xBB\xBFy,\"x 1\",x2\r\n1.5,2,3\r\n\r\n-4,\"5\",6e-1\n");
  ASSERT_EQ(f.header, (std::vector<std::string>{"y", "x 1", "x2"}));
  ASSERT_EQ(f.rows.size(), 2u);
  EXPECT_EQ(f.numeric_column("x2"), (std::vector<double>{3.0, 0.6}));
  const Dataset d = dataset_from_csv(f, "y", {"x 1", "x2"});
  EXPECT_EQ(d.n(), 2u);
  EXPECT_EQ(d.k(), 2u);
  EXPECT_EQ(d.y()[1], -4.0);
}

TEST(Csv, Errors) {
  EXPECT_EQ(kind_of([] { parse_csv(""); }), ErrorKind::data_error);
  EXPECT_EQ(kind_of([] { parse_csv("y,x\n"); }), ErrorKind::data_error);
  EXPECT_EQ(kind_of([] { parse_csv("y,x\n1,2,3\n"); }), ErrorKind::data_error);
  const CsvFrame f = parse_csv("y,x\n1,2\n3,abc\n");
  const std::string msg = message_of([&] { f.numeric_column("x"); });
  EXPECT_NE(msg.find("abc"), std::string::npos);
  EXPECT_NE(msg.find("row 3"), std::string::npos);
  EXPECT_NE(message_of([&] { f.column("z"); }).find("z"), std::string::npos);
  EXPECT_EQ(kind_of([&] { f.column("z"); }), ErrorKind::data_error);
  EXPECT_EQ(kind_of([] { parse_csv("y,x\n1,nan\n").numeric_column("x"); }), ErrorKind::data_error);
  EXPECT_EQ(kind_of([] { read_csv("/nonexistent/file.csv"); }), ErrorKind::data_error);
}

TEST(PartitionJson, RoundTripIsBitExact) {
  CounterRng rng(4);
  std::vector<double> x(300 * 2);
  for (double& v : x) v = rng.normal() * 1e-3 + 1.0 / 3.0;
  const Covariates cov(x, 300, 2);
  const Partition p = rtp_partition(cov, RtpOptions{3, 2, 99, false});
  const std::string text = partition_to_json(p).dump();
  const Partition q = partition_from_json(Json::parse(text));
  ASSERT_EQ(p.size(), q.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    EXPECT_EQ(p.cells()[j].lower, q.cells()[j].lower);
    EXPECT_EQ(p.cells()[j].upper, q.cells()[j].upper);
  }
  EXPECT_EQ(p.counts(cov), q.counts(cov));
  EXPECT_EQ(q.seed(), std::optional<std::uint64_t>(99));
  EXPECT_EQ(q.origin(), PartitionOrigin::rtp);
  EXPECT_EQ(partition_to_json(q).dump(), text);
}

TEST(PartitionJson, InfiniteBoundsSurvive) {
  const Partition p = grid_partition({{0.0}});
  const Partition q = partition_from_json(partition_to_json(p));
  EXPECT_TRUE(std::isinf(q.cells()[0].lower[0]));
  EXPECT_TRUE(std::isinf(q.cells()[1].upper[0]));
}

TEST(PartitionJson, Malformed) {
  EXPECT_THROW(partition_from_json(Json::parse("{}")), Error);
  EXPECT_THROW(partition_from_json(Json::parse(R"({"cells":[]})")), Error);
  EXPECT_THROW(partition_from_json(Json::parse(R"({"cells":[{"lower":[0]}]})")), Error);
}

TEST(PartitionDocument, CountsAndBalance) {
  std::vector<double> x(64);
  for (std::size_t i = 0; i < 64; ++i) x[i] = static_cast<double>(i);
  const Covariates cov(x, 64, 1);
  const Json doc = partition_document(gessaman_partition(cov, 2), cov);
  EXPECT_EQ(doc.at("J"), 2);
  EXPECT_EQ(doc.at("counts"), Json::parse("[32,32]"));
  EXPECT_EQ(doc.at("balance").at("max_minus_min"), 0);
}

TEST(TestConfigJson, RoundTrip) {
  TestConfig c;
  c.model = "gaussian_linear";
  c.estimator = EstimatorKind::raw_mle;
  c.L = 5;
  c.partition.rule = PartitionRule::rtp;
  c.partition.T = 3;
  c.partition.r = 2;
  c.partition.seed = 123;
  c.stats = {StatKind::pearson, StatKind::wald_raw_mle};
  const TestConfig d = test_config_from_json(test_config_to_json(c));
  EXPECT_EQ(test_config_to_json(d), test_config_to_json(c));
  EXPECT_EQ(d.stats, c.stats);
}

TEST(TestConfigJson, SchemaErrorsListEveryField) {
  const Json doc = Json::parse(R"({"L": "four", "estimator": "bogus", "colour": 1,
                                   "partition": {"rule": "rtp", "depth": 2}})");
  const std::string msg = message_of([&] { test_config_from_json(doc); });
  EXPECT_NE(msg.find("L"), std::string::npos);
  EXPECT_NE(msg.find("estimator"), std::string::npos);
  EXPECT_NE(msg.find("colour"), std::string::npos);
  EXPECT_NE(msg.find("partition.depth"), std::string::npos);
  EXPECT_EQ(kind_of([&] { test_config_from_json(doc); }), ErrorKind::invalid_argument);
}

TEST(SimConfigJson, RoundTripAndValidation) {
  const Json doc = Json::parse(R"({
    "dgp": {"family": "gaussian_linear", "params": [0, 1, 1], "k": 1, "n": 100},
    "model": "gaussian_linear", "estimator": "known", "theta": [0, 1, 1], "L": 3,
    "partition": {"rule": "gessaman", "T": 2}, "stats": ["pearson", "wald"],
    "replications": 10, "seed": 7})");
  const SimConfig c = sim_config_from_json(doc);
  EXPECT_EQ(c.test.stats, (std::vector<StatKind>{StatKind::pearson, StatKind::wald_null}));
  EXPECT_EQ(sim_config_to_json(sim_config_from_json(sim_config_to_json(c))), sim_config_to_json(c));

  Json missing = doc;
  missing.erase("seed");
  missing["dgp"].erase("n");
  const std::string msg = message_of([&] { sim_config_from_json(missing); });
  EXPECT_NE(msg.find("seed"), std::string::npos);
  EXPECT_NE(msg.find("dgp.n"), std::string::npos);
}

}  // namespace
}  // namespace cgof
