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

#include "crsched/policy_baselines.hpp"

#include <vector>

#include "crsched/rng.hpp"
#include "gtest/gtest.h"

namespace crsched {
namespace {

using Q = std::vector<std::size_t>;

TEST(CsmaSelectTest, Cases) {
  EXPECT_FALSE(csma_select(Q{0, 0, 0}, 0.3).has_value());
  for (double u : {0.0, 0.4, 0.999999}) EXPECT_EQ(csma_select(Q{0, 3, 0}, u), 1u);
}

TEST(CsmaSelectTest, UniformAmongNonEmpty) {
  CounterStream s(12, StreamRole::kScheduler, 0);
  constexpr int kDraws = 100'000;
  int first = 0;
  for (int t = 0; t < kDraws; ++t) first += csma_select(Q{0, 2, 0, 5}, s.uniform(t)) == 1u;
  EXPECT_NEAR(static_cast<double>(first) / kDraws, 0.5, 0.01);
}

TEST(CncSelectTest, Cases) {
  EXPECT_EQ(cnc_select(Q{5, 2}, std::vector<double>{1.0, 1.0}), 0u);
  EXPECT_EQ(cnc_select(Q{5, 5}, std::vector<double>{1.0, 3.0}), 1u);
  EXPECT_EQ(cnc_select(Q{5, 2}, std::vector<double>{2.0, 3.0}), 0u);
  EXPECT_EQ(cnc_select(Q{3, 3}, std::vector<double>{2.0, 2.0}), 0u);
  EXPECT_EQ(cnc_select(Q{0, 1}, std::vector<double>{9.0, 0.5}), 1u);
  EXPECT_FALSE(cnc_select(Q{0, 0}, std::vector<double>{1.0, 1.0}).has_value());
}

TEST(CncSelectTest, FromChannelDraw) {
  // Same gamma; SU 1 has the smaller PU gain and so transmits at full power.
  ChannelDraw draw{{1.0, 1.0}, {0.4, 0.1}};
  const auto policy = PowerPolicy::interference_capped(100, 20);
  EXPECT_EQ(cnc_select(Q{1, 1}, draw, policy), 1u);
  EXPECT_EQ(cnc_select(Q{3, 1}, draw, policy), 0u);
}

class BaselineSchedulerTest : public ::testing::Test {
 protected:
  ChannelModel channel_{{{GainDistribution::truncated_exponential(1.0),
                          GainDistribution::truncated_exponential(0.1)},
                         {GainDistribution::truncated_exponential(1.0),
                          GainDistribution::truncated_exponential(0.4)}},
                        3};
  PowerPolicy power_ = PowerPolicy::interference_capped(100, 20);
};

TEST_F(BaselineSchedulerTest, IdleSlotSchedulesNobody) {
  const Q empty{0, 0};
  CsmaScheduler csma(power_, 1);
  CncScheduler cnc(power_);
  StaticPriorityScheduler sp(PriorityList{{1, 0}}, power_);
  for (Scheduler* s : std::initializer_list<Scheduler*>{&csma, &cnc, &sp}) {
    const auto d = s->on_slot(SlotContext{0, &channel_, empty});
    EXPECT_FALSE(d.su.has_value()) << s->name();
    EXPECT_EQ(d.power, 0.0);
  }
}

TEST_F(BaselineSchedulerTest, DecisionsRespectConstraints) {
  CsmaScheduler csma(power_, 1);
  CncScheduler cnc(power_);
  StaticPriorityScheduler sp(PriorityList{{1, 0}}, power_);
  const Q q{2, 1};
  for (Slot t = 0; t < 10000; ++t) {
    for (Scheduler* s : std::initializer_list<Scheduler*>{&csma, &cnc, &sp}) {
      const auto d = s->on_slot(SlotContext{t, &channel_, q});
      ASSERT_TRUE(d.su.has_value());
      EXPECT_LE(d.power * channel_.g(*d.su, t), 20.0 * (1 + 1e-12));
      EXPECT_LE(d.power, 100.0);
      EXPECT_DOUBLE_EQ(d.rate_bits, rate(d.power, channel_.gamma(*d.su, t)));
    }
    EXPECT_EQ(*sp.on_slot(SlotContext{t, &channel_, q}).su, 1u);
  }
}

TEST_F(BaselineSchedulerTest, CncPicksMaxWeight) {
  CncScheduler cnc(power_);
  const Q q{3, 2};
  for (Slot t = 0; t < 10000; ++t) {
    const double w0 = 3 * rate(power_.power(channel_.g(0, t)), channel_.gamma(0, t));
    const double w1 = 2 * rate(power_.power(channel_.g(1, t)), channel_.gamma(1, t));
    EXPECT_EQ(*cnc.on_slot(SlotContext{t, &channel_, q}).su, w1 > w0 ? 1u : 0u);
  }
}

}  // namespace
}  // namespace crsched
