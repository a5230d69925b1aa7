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

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>

#include "crsched/rng.hpp"

namespace crsched {

using Slot = std::uint64_t;

struct Packet {
  Slot arrival_slot = 0;
  std::optional<Slot> departure_slot;
};

/// Slots spent in the buffer, counting both the arrival slot and the slot in
/// which the last bit leaves: a packet finishing in its arrival slot has
/// delay 1.
inline std::uint64_t packet_delay(const Packet& p) {
  if (!p.departure_slot) throw std::logic_error("packet has not departed");
  return *p.departure_slot - p.arrival_slot + 1;
}

struct ServiceOutcome {
  bool completed = false;
  double bits_sent = 0.0;
  Packet packet;  ///< the departed packet when completed
};

/// One SU's FIFO buffer with bit-level head-of-line service. Infinite buffer;
/// at most one arrival and at most one service call per slot.
class SuState {
 public:
  SuState(double arrival_rate, double delay_bound, double packet_bits)
      : arrival_rate_(arrival_rate), delay_bound_(delay_bound), packet_bits_(packet_bits) {
    if (!(arrival_rate >= 0.0 && arrival_rate <= 1.0)) {
      throw std::invalid_argument("arrival rate must lie in [0, 1]");
    }
    if (!(packet_bits > 0.0)) throw std::invalid_argument("packet size must be positive");
  }

  double arrival_rate() const noexcept { return arrival_rate_; }
  double delay_bound() const noexcept { return delay_bound_; }
  double packet_bits() const noexcept { return packet_bits_; }

  std::size_t size() const noexcept { return queue_.size(); }
  bool empty() const noexcept { return queue_.empty(); }
  double hol_remaining_bits() const noexcept { return queue_.empty() ? 0.0 : hol_remaining_; }
  const std::deque<Packet>& queue() const noexcept { return queue_; }

  /// Bernoulli(lambda) arrival at the start of `slot`; returns 0 or 1.
  int arrive(Slot slot, const CounterStream& stream) {
    if (!(stream.uniform(slot) < arrival_rate_)) return 0;
    push(slot);
    return 1;
  }

  /// Unconditionally enqueue a packet arriving at `slot`.
  void push(Slot slot) {
    if (queue_.empty()) hol_remaining_ = packet_bits_;
    queue_.push_back(Packet{slot, std::nullopt});
  }

  /// Transmit min(rate, remaining) bits of the HOL packet in `slot`.
  ServiceOutcome serve_bits(double rate_bits, Slot slot) {
    if (queue_.empty()) throw std::logic_error("serve_bits on an empty buffer");
    if (last_served_ == slot) throw std::logic_error("SU served twice in one slot");
    last_served_ = slot;
    ServiceOutcome out;
    out.bits_sent = std::min(std::max(rate_bits, 0.0), hol_remaining_);
    hol_remaining_ -= out.bits_sent;
    if (hol_remaining_ > 0.0) return out;
    out.completed = true;
    out.packet = queue_.front();
    out.packet.departure_slot = slot;
    queue_.pop_front();
    hol_remaining_ = queue_.empty() ? 0.0 : packet_bits_;
    return out;
  }

 private:
  double arrival_rate_;
  double delay_bound_;
  double packet_bits_;
  double hol_remaining_ = 0.0;
  Slot last_served_ = std::numeric_limits<Slot>::max();
  std::deque<Packet> queue_;
};

}  // namespace crsched
