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
#include <string_view>
#include <vector>

#include "crsched/channel.hpp"
#include "crsched/power.hpp"
#include "crsched/queueing.hpp"

namespace crsched {

/// What the scheduler does in one slot: at most one transmitter.
struct SlotDecision {
  std::optional<std::size_t> su;
  double power = 0.0;
  double rate_bits = 0.0;
};

/// Everything a scheduler may look at in a busy slot.
struct SlotContext {
  Slot slot = 0;
  const ChannelModel* channel = nullptr;
  std::span<const std::size_t> queue_lengths;  ///< after this slot's arrivals
};

/// One closed frame: an idle run followed by a busy run.
struct FrameRecord {
  std::uint64_t index = 0;
  Slot start = 0;
  std::uint64_t idle_len = 0;
  std::uint64_t busy_len = 0;
  /// Per SU, delays of the packets that arrived during this frame.
  std::vector<std::vector<std::uint64_t>> delays;
};

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::string_view name() const = 0;
  virtual void on_frame_start(std::uint64_t /*frame_index*/) {}
  virtual SlotDecision on_slot(const SlotContext& ctx) = 0;
  virtual void on_frame_end(const FrameRecord& /*record*/) {}
  /// Virtual queue backlogs, for policies that keep them.
  virtual std::optional<std::span<const double>> virtual_queues() const { return std::nullopt; }
};

/// Transmit decision for `su` using `policy` on this slot's gains.
inline SlotDecision transmit(std::size_t su, const SlotContext& ctx, const PowerPolicy& policy,
                             LogBase base) {
  SlotDecision d;
  d.su = su;
  d.power = policy.power(ctx.channel->g(su, ctx.slot));
  d.rate_bits = rate(d.power, ctx.channel->gamma(su, ctx.slot), base);
  return d;
}

}  // namespace crsched
