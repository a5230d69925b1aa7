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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "crsched/policy_doic.hpp"
#include "crsched/rng.hpp"
#include "crsched/scheduler.hpp"

namespace crsched {

/// Uniform choice among non-empty buffers; `u` is uniform on [0, 1).
inline std::optional<std::size_t> csma_select(std::span<const std::size_t> queue_lengths,
                                              double u) {
  std::size_t busy = 0;
  for (std::size_t q : queue_lengths) busy += q > 0 ? 1 : 0;
  if (busy == 0) return std::nullopt;
  auto pick = static_cast<std::size_t>(u * static_cast<double>(busy));
  if (pick >= busy) pick = busy - 1;
  for (std::size_t i = 0; i < queue_lengths.size(); ++i) {
    if (queue_lengths[i] == 0) continue;
    if (pick-- == 0) return i;
  }
  return std::nullopt;
}

/// MaxWeight: argmax Q_i R_i among non-empty buffers, ties to the lower index.
inline std::optional<std::size_t> cnc_select(std::span<const std::size_t> queue_lengths,
                                             std::span<const double> rates) {
  std::optional<std::size_t> best;
  double best_w = -1.0;
  for (std::size_t i = 0; i < queue_lengths.size(); ++i) {
    if (queue_lengths[i] == 0) continue;
    const double w = static_cast<double>(queue_lengths[i]) * rates[i];
    if (w > best_w) {
      best_w = w;
      best = i;
    }
  }
  return best;
}

/// MaxWeight with rates evaluated from a full channel draw.
inline std::optional<std::size_t> cnc_select(std::span<const std::size_t> queue_lengths,
                                             const ChannelDraw& draw, const PowerPolicy& policy,
                                             LogBase base = LogBase::kTwo) {
  std::vector<double> rates(queue_lengths.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    rates[i] = rate(policy.power(draw.g[i]), draw.gamma[i], base);
  }
  return cnc_select(queue_lengths, rates);
}

class CsmaScheduler final : public Scheduler {
 public:
  CsmaScheduler(PowerPolicy power, std::uint64_t seed, LogBase base = LogBase::kTwo)
      : power_(std::move(power)), stream_(seed, StreamRole::kScheduler, 0), base_(base) {}

  std::string_view name() const override { return "csma"; }

  SlotDecision on_slot(const SlotContext& ctx) override {
    const auto su = csma_select(ctx.queue_lengths, stream_.uniform(ctx.slot));
    if (!su) return {};
    return transmit(*su, ctx, power_, base_);
  }

 private:
  PowerPolicy power_;
  CounterStream stream_;
  LogBase base_;
};

class CncScheduler final : public Scheduler {
 public:
  explicit CncScheduler(PowerPolicy power, LogBase base = LogBase::kTwo)
      : power_(std::move(power)), base_(base) {}

  std::string_view name() const override { return "cnc"; }

  SlotDecision on_slot(const SlotContext& ctx) override {
    const std::size_t n = ctx.queue_lengths.size();
    rates_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (ctx.queue_lengths[i] == 0) continue;
      rates_[i] = rate(power_.power(ctx.channel->g(i, ctx.slot)),
                       ctx.channel->gamma(i, ctx.slot), base_);
    }
    const auto su = cnc_select(ctx.queue_lengths, rates_);
    if (!su) return {};
    return transmit(*su, ctx, power_, base_);
  }

 private:
  PowerPolicy power_;
  LogBase base_;
  std::vector<double> rates_;
};

/// Fixed preemptive-resume priority list; used to validate the priority
/// delay formula.
class StaticPriorityScheduler final : public Scheduler {
 public:
  StaticPriorityScheduler(PriorityList list, PowerPolicy power, LogBase base = LogBase::kTwo)
      : list_(std::move(list)), power_(std::move(power)), base_(base) {}

  std::string_view name() const override { return "static-priority"; }

  SlotDecision on_slot(const SlotContext& ctx) override {
    const auto su = select_transmitter(list_, ctx.queue_lengths);
    if (!su) return {};
    return transmit(*su, ctx, power_, base_);
  }

 private:
  PriorityList list_;
  PowerPolicy power_;
  LogBase base_;
};

}  // namespace crsched
