// Copyright 2026 The crsched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crsched/config.hpp"

#include <string>

#include "gtest/gtest.h"

namespace crsched {
namespace {

TEST(ConfigTest, DefaultsDescribeTheFiveSuSystem) {
  const SimConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.n, 5u);
  EXPECT_EQ(cfg.delay_bounds.back(), 45.0);
  EXPECT_EQ(cfg.interference_cap, 20.0);
  EXPECT_EQ(cfg.power_cap, 100.0);
  EXPECT_EQ(cfg.v, 100.0);
  const auto links = cfg.links();
  EXPECT_EQ(links[4].to_primary.parameter_mean(), 0.4);
  EXPECT_DOUBLE_EQ(links[4].to_primary.max(), 4.0);
  EXPECT_EQ(links[0].to_base.max(), 10.0);
  const auto rates = cfg.arrival_rates();
  EXPECT_DOUBLE_EQ(rates[2], 0.003);
}

TEST(ConfigTest, ParsesKeysCommentsAndLists) {
  const auto cfg = parse_config_string(R"(
# a three-SU system
n = 3
lambda_rule = uniform
lambda = 0.02      # per SU
delay_bounds = 50
d_last = 20
g.mean = 0.1, 0.2, 0.4
gamma.kind = constant
gamma.mean = 1
V = 10
packet_bits = 50
horizon = 1000
policy = static-priority
static_order = 3, 1, 2
log_base = e
sweep.var = V
sweep.values = 1, 10, 100
replications = 4
)");
  EXPECT_EQ(cfg.n, 3u);
  EXPECT_EQ(cfg.delay_bounds, (std::vector<double>{50, 50, 20}));
  EXPECT_EQ(cfg.arrival_rates(), (std::vector<double>{0.02, 0.02, 0.02}));
  EXPECT_EQ(cfg.links()[2].to_primary.parameter_mean(), 0.4);
  EXPECT_EQ(cfg.links()[1].to_base.kind(), GainKind::kConstant);
  EXPECT_EQ(cfg.static_order, (std::vector<std::size_t>{2, 0, 1}));
  EXPECT_EQ(cfg.log_base, LogBase::kNatural);
  EXPECT_EQ(cfg.analytics_log_base, LogBase::kNatural);
  EXPECT_EQ(cfg.sweep_var, SweepVar::kV);
  EXPECT_EQ(cfg.sweep_values.size(), 3u);
  EXPECT_EQ(cfg.replications, 4u);
}

TEST(ConfigTest, TablesAndExplicitRates) {
  const auto cfg = parse_config_string(R"(
n = 2
lambdas = 0.1, 0.3
delay_bounds = 10, 20
gamma.kind = table
gamma.table = 0.5:0.5, 1.5:0.5
g.kind = constant
g.mean = 0.1
power.kind = custom-table
power.table = 0.2:50, 100:10
)");
  EXPECT_EQ(cfg.lambda_rule, LambdaRule::kExplicit);
  EXPECT_EQ(cfg.arrival_rates(), (std::vector<double>{0.1, 0.3}));
  EXPECT_DOUBLE_EQ(cfg.links()[0].to_base.mean(), 1.0);
  EXPECT_EQ(cfg.power_policy().power(0.1), 50.0);
}

std::size_t error_line(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

TEST(ConfigTest, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("n = 5\nbogus = 1\n"), 2u);
  EXPECT_EQ(error_line("\n\nV = abc\n"), 3u);
  EXPECT_EQ(error_line("horizon = 1.5\n"), 1u);
  EXPECT_EQ(error_line("# c\nno equals sign\n"), 2u);
  EXPECT_EQ(error_line("policy = fifo\n"), 1u);
  EXPECT_EQ(error_line("log_base = 10\n"), 1u);
  try {
    parse_config_string("x = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 1: ", 0), 0u) << e.what();
  }
}

TEST(ConfigTest, ValidationRejectsBadValues) {
  EXPECT_THROW(parse_config_string("lambda = 0.3\n"), ConfigError);  // 5 * 0.3 >= 1
  EXPECT_THROW(parse_config_string("V = 0\n"), ConfigError);
  EXPECT_THROW(parse_config_string("delay_bounds = 1, 2\n"), ConfigError);
  EXPECT_THROW(parse_config_string("load = 1.2\n"), ConfigError);
  EXPECT_THROW(parse_config_string("replications = 0\n"), ConfigError);
  EXPECT_THROW(parse_config_string("static_order = 1, 1, 2, 3, 4\n"), ConfigError);
  EXPECT_THROW(parse_config_string("g.mean = -0.1\n"), ConfigError);
  EXPECT_THROW(load_config_file("/nonexistent/crsched.cfg"), ConfigError);
}

TEST(ConfigTest, TargetLoadMustBeResolved) {
  const auto cfg = parse_config_string("load = 0.5\n");
  EXPECT_THROW(cfg.arrival_rates(), std::logic_error);
  EXPECT_EQ(cfg.rate_weights(), (std::vector<double>{1, 2, 3, 4, 5}));
}

}  // namespace
}  // namespace crsched
