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

// Frame-based delay-constrained scheduling: per-SU virtual delay queues drive
// a preemptive-resume priority list that is re-sorted once per frame, and the
// scheduled SU transmits at the largest interference-safe power.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "crsched/scheduler.hpp"

namespace crsched {

/// Descending-priority permutation of SU indices.
struct PriorityList {
  std::vector<std::size_t> order;
};

struct VirtualQueue {
  double y = 0.0;
  double r_current = 0.0;
};

struct DoicParams {
  double v = 100.0;
  std::vector<double> expected_service;  ///< E[s_i] under the power policy, slots
};

/// Sort by y_i / E[s_i] descending; ties go to the lower SU index.
inline PriorityList sort_priorities(std::span<const double> y,
                                    std::span<const double> expected_service) {
  if (y.size() != expected_service.size()) {
    throw std::invalid_argument("sort_priorities: size mismatch");
  }
  std::vector<double> key(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(expected_service[i] > 0.0)) {
      throw std::invalid_argument("expected service time must be positive");
    }
    key[i] = y[i] / expected_service[i];
  }
  PriorityList list;
  list.order.resize(y.size());
  std::iota(list.order.begin(), list.order.end(), std::size_t{0});
  std::stable_sort(list.order.begin(), list.order.end(),
                   [&key](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  return list;
}

/// Highest-priority SU with a non-empty buffer.
inline std::optional<std::size_t> select_transmitter(const PriorityList& list,
                                                     std::span<const std::size_t> queue_lengths) {
  for (std::size_t su : list.order) {
    if (queue_lengths[su] > 0) return su;
  }
  return std::nullopt;
}

inline std::optional<std::size_t> select_transmitter(const PriorityList& list,
                                                     const std::vector<bool>& nonempty) {
  for (std::size_t su : list.order) {
    if (nonempty[su]) return su;
  }
  return std::nullopt;
}

/// Bang-bang auxiliary target: d_i when V < y_i lambda_i, else 0.
inline double update_auxiliary(double y, double arrival_rate, double v, double delay_bound) noexcept {
  return v < y * arrival_rate ? delay_bound : 0.0;
}

/// y <- max(0, y + sum_j (W_j - r)) over the packets that arrived in the frame.
inline double update_virtual_queue(double y, std::span<const std::uint64_t> frame_delays,
                                   double r) noexcept {
  double acc = y;
  for (std::uint64_t w : frame_delays) acc += static_cast<double>(w) - r;
  return std::max(0.0, acc);
}

/// Y_i(K) / K for every frame K of a recorded trajectory.
/// y_history[K - 1] holds the backlogs after frame K closed.
inline std::vector<std::vector<double>> mean_rate_stability_series(
    std::span<const std::vector<double>> y_history) {
  std::vector<std::vector<double>> out(y_history.empty() ? 0 : y_history.front().size());
  for (auto& s : out) s.reserve(y_history.size());
  for (std::size_t k = 0; k < y_history.size(); ++k) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].push_back(y_history[k][i] / static_cast<double>(k + 1));
    }
  }
  return out;
}

class DoicScheduler final : public Scheduler {
 public:
  DoicScheduler(DoicParams params, std::vector<double> arrival_rates,
                std::vector<double> delay_bounds, PowerPolicy power, LogBase base = LogBase::kTwo)
      : params_(std::move(params)),
        arrival_rates_(std::move(arrival_rates)),
        delay_bounds_(std::move(delay_bounds)),
        power_(std::move(power)),
        base_(base),
        y_(arrival_rates_.size(), 0.0),
        r_(arrival_rates_.size(), 0.0) {
    const std::size_t n = arrival_rates_.size();
    if (!(params_.v > 0.0)) throw std::invalid_argument("V must be positive");
    if (params_.expected_service.size() != n || delay_bounds_.size() != n) {
      throw std::invalid_argument("DOIC parameter vectors disagree on N");
    }
    list_ = sort_priorities(y_, params_.expected_service);
  }

  std::string_view name() const override { return "doic"; }

  void on_frame_start(std::uint64_t) override {
    list_ = sort_priorities(y_, params_.expected_service);
  }

  SlotDecision on_slot(const SlotContext& ctx) override {
    const auto su = select_transmitter(list_, ctx.queue_lengths);
    if (!su) return {};
    return transmit(*su, ctx, power_, base_);
  }

  void on_frame_end(const FrameRecord& record) override {
    for (std::size_t i = 0; i < y_.size(); ++i) {
      r_[i] = update_auxiliary(y_[i], arrival_rates_[i], params_.v, delay_bounds_[i]);
      y_[i] = update_virtual_queue(y_[i], record.delays[i], r_[i]);
    }
  }

  std::optional<std::span<const double>> virtual_queues() const override {
    return std::span<const double>(y_);
  }

  const PriorityList& priority_list() const noexcept { return list_; }
  std::span<const double> auxiliary() const noexcept { return r_; }
  void set_virtual_queues(std::vector<double> y) { y_ = std::move(y); }

 private:
  DoicParams params_;
  std::vector<double> arrival_rates_;
  std::vector<double> delay_bounds_;
  PowerPolicy power_;
  LogBase base_;
  std::vector<double> y_;
  std::vector<double> r_;
  PriorityList list_;
};

}  // namespace crsched
