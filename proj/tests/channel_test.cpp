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

#include "crsched/channel.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"

namespace crsched {
namespace {

TEST(GainDistributionTest, ConstantAlwaysReturnsItsValue) {
  const auto d = GainDistribution::constant(1.0);
  EXPECT_EQ(d.quantile(1e-12), 1.0);
  EXPECT_EQ(d.quantile(1.0), 1.0);
  EXPECT_EQ(expected_gain(d), 1.0);
}

TEST(GainDistributionTest, SymmetricTwoPointTableMean) {
  const auto d = GainDistribution::table({{0.5, 0.5}, {1.5, 0.5}});
  EXPECT_DOUBLE_EQ(expected_gain(d), 1.0);
  EXPECT_EQ(d.quantile(0.25), 0.5);
  EXPECT_EQ(d.quantile(0.75), 1.5);
}

// Means of exponentials truncated at ten times the parent mean, from
// adaptive quadrature of x f(x) / F(max) at 30 digits.
TEST(GainDistributionTest, TruncatedExponentialMeanMatchesQuadrature) {
  EXPECT_NEAR(GainDistribution::truncated_exponential(0.1, 1.0).mean(),
              0.0999545980089903122, 1e-15);
  EXPECT_NEAR(GainDistribution::truncated_exponential(1.0, 10.0).mean(),
              0.999545980089903122, 1e-14);
  EXPECT_NEAR(GainDistribution::truncated_exponential(0.4).mean(), 0.399818392035961249, 1e-14);
}

TEST(GainDistributionTest, RejectsInvalidParameters) {
  EXPECT_THROW(GainDistribution::truncated_exponential(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(GainDistribution::truncated_exponential(1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(GainDistribution::table({{0.5, 0.5}, {1.5, 0.4}}), std::invalid_argument);
  EXPECT_THROW(GainDistribution::table({{-0.5, 0.5}, {1.5, 0.5}}), std::invalid_argument);
}

TEST(GainDistributionTest, QuadratureIntegratesTheLaw) {
  const auto d = GainDistribution::truncated_exponential(1.0, 10.0);
  double w = 0.0, m = 0.0;
  for (const auto& p : d.quadrature(std::vector<double>{0.2})) {
    w += p.weight;
    m += p.weight * p.value;
  }
  EXPECT_NEAR(w, 1.0, 1e-12);
  EXPECT_NEAR(m, d.mean(), 1e-10);
}

TEST(ChannelModelTest, SampleMeanMatchesTruncatedMean) {
  ChannelModel ch({{GainDistribution::constant(1.0),
                    GainDistribution::truncated_exponential(0.1, 1.0)}},
                  42);
  double sum = 0.0;
  constexpr int kDraws = 1'000'000;
  for (int t = 0; t < kDraws; ++t) sum += ch.g(0, t);
  EXPECT_NEAR(sum / kDraws, 0.0999545980089903122, 0.01 * 0.0999545980089903122);
}

TEST(ChannelModelTest, TruncationIsHard) {
  ChannelModel ch({{GainDistribution::truncated_exponential(1.0, 10.0),
                    GainDistribution::constant(1.0)}},
                  7);
  int over = 0;
  double lowest = 1.0;
  for (int t = 0; t < 10'000'000; ++t) {
    const double x = ch.gamma(0, t);
    over += x > 10.0;
    lowest = std::min(lowest, x);
  }
  EXPECT_EQ(over, 0);
  EXPECT_GT(lowest, 0.0);
}

TEST(ChannelModelTest, DeterministicAndSlotAddressable) {
  std::vector<LinkPair> links(3, {GainDistribution::truncated_exponential(1.0),
                                  GainDistribution::truncated_exponential(0.1)});
  ChannelModel a(links, 99);
  ChannelModel b(links, 99);
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const auto da = a.sample_slot(t);
    const auto db = b.sample_slot(t);
    EXPECT_EQ(da.gamma, db.gamma);
    EXPECT_EQ(da.g, db.g);
  }
  ChannelModel c(links, 100);
  EXPECT_NE(a.gamma(0, 5), c.gamma(0, 5));
}

TEST(ChannelModelTest, AddingAnSuLeavesOthersUntouched) {
  const LinkPair link{GainDistribution::truncated_exponential(1.0),
                      GainDistribution::truncated_exponential(0.1)};
  ChannelModel two({link, link}, 5);
  ChannelModel three({link, link, link}, 5);
  for (std::uint64_t t = 0; t < 100; ++t) {
    EXPECT_EQ(two.gamma(1, t), three.gamma(1, t));
    EXPECT_EQ(two.g(0, t), three.g(0, t));
  }
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

TEST(ChannelModelTest, StreamsAreUncorrelated) {
  std::vector<LinkPair> links(2, {GainDistribution::truncated_exponential(1.0),
                                  GainDistribution::truncated_exponential(0.1)});
  ChannelModel ch(links, 2024);
  constexpr int kDraws = 1'000'000;
  std::vector<double> g0(kDraws), gamma0(kDraws), gamma1(kDraws), lagged(kDraws);
  for (int t = 0; t < kDraws; ++t) {
    g0[t] = ch.g(0, t);
    gamma0[t] = ch.gamma(0, t);
    gamma1[t] = ch.gamma(1, t);
    lagged[t] = ch.gamma(0, t + 1);
  }
  EXPECT_LT(std::abs(correlation(g0, gamma0)), 0.01);
  EXPECT_LT(std::abs(correlation(gamma0, gamma1)), 0.01);
  EXPECT_LT(std::abs(correlation(gamma0, lagged)), 0.01);
}

}  // namespace
}  // namespace crsched
