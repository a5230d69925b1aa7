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

// Slot loop: arrivals, idle/busy classification, scheduling, power, service,
// constraint audit and statistics. Time is cut into frames of one idle run
// followed by one busy run; a frame closes at the end of the slot in which the
// last buffered packet leaves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsched/channel.hpp"
#include "crsched/config.hpp"
#include "crsched/power.hpp"
#include "crsched/queueing.hpp"
#include "crsched/rng.hpp"
#include "crsched/scheduler.hpp"

namespace crsched {

class AuditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AuditLimits {
  double power_cap = 100.0;
  double interference_cap = 20.0;
  std::size_t n = 0;
};

/// Constraint check for one slot. `g` is the PU-link gain of the selected SU.
inline bool audit_slot(const SlotDecision& d, double g, const AuditLimits& lim) noexcept {
  if (!d.su) return d.power == 0.0;
  if (*d.su >= lim.n) return false;
  if (!(d.power >= 0.0) || d.power > lim.power_cap) return false;
  return d.power * g <= lim.interference_cap;
}

/// Constraint check on a full power vector: power caps, sum_i P_i g_i <= I_inst
/// and at most one transmitter.
inline bool audit_powers(std::span<const double> powers, std::span<const double> g,
                         const AuditLimits& lim) noexcept {
  double interference = 0.0;
  int transmitters = 0;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (powers[i] < 0.0 || powers[i] > lim.power_cap) return false;
    if (powers[i] != 0.0) ++transmitters;
    interference += powers[i] * g[i];
  }
  return transmitters <= 1 && interference <= lim.interference_cap;
}

struct SuReport {
  double w_bar = std::numeric_limits<double>::quiet_NaN();
  double delay_sum = 0.0;
  std::uint64_t departed = 0;        ///< measured packets that departed
  std::uint64_t arrived = 0;         ///< all arrivals, warm-up included
  std::uint64_t measured_arrived = 0;
  double q_bar = 0.0;                ///< time-average buffer length after arrivals
  double y_final = std::numeric_limits<double>::quiet_NaN();
  double y_over_k = std::numeric_limits<double>::quiet_NaN();
};

/// Per-slot record kept when full logging is on.
struct SlotLog {
  std::uint32_t arrivals = 0;  ///< bit i set when SU i received a packet
  int su = -1;
  double power = 0.0;
  double rate_bits = 0.0;
  double g = 0.0;
  double gamma = 0.0;
};

struct FrameLog {
  Slot start = 0;
  std::uint64_t idle_len = 0;
  std::uint64_t busy_len = 0;
  std::vector<double> y_after;  ///< empty for policies without virtual queues
};

struct SimReport {
  std::string policy;
  std::vector<SuReport> su;
  double sum_w = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t frames = 0;               ///< closed frames K
  std::optional<std::uint64_t> frames_to_stability;
  std::uint64_t slots = 0;
  Slot measure_start = 0;
  std::uint64_t audit_failures = 0;
  std::uint64_t undeparted = 0;           ///< packets still buffered at the end
  std::uint64_t peak_queue = 0;
  bool unstable = false;
  bool has_virtual_queues = false;
  std::vector<std::vector<double>> y_history;  ///< per closed frame, when recorded
  std::vector<SlotLog> slot_log;               ///< full log only
  std::vector<FrameLog> frame_log;             ///< full log only

  bool audit_pass() const noexcept { return audit_failures == 0; }
};

/// W_bar_i = sum of delays / count over departed packets, and their sum over SUs.
struct DelayStatistics {
  std::vector<double> w_bar;
  double sum = 0.0;
};

inline DelayStatistics delay_statistics(std::span<const std::vector<std::uint64_t>> delays) {
  DelayStatistics out;
  for (const auto& d : delays) {
    if (d.empty()) {
      out.w_bar.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double s = 0.0;
    for (auto w : d) s += static_cast<double>(w);
    out.w_bar.push_back(s / static_cast<double>(d.size()));
    out.sum += out.w_bar.back();
  }
  return out;
}

struct EngineOptions {
  bool full_log = false;
  bool record_y_history = false;
  bool throw_on_audit_failure = true;
  /// Hold off measurement until the stability proxy max_i Y_i(K) / K has
  /// dropped below the configured threshold (and warmup_frames have passed).
  bool measure_from_stability = false;
  /// With measure_from_stability: stop this many slots after measurement
  /// starts. 0 runs to the horizon.
  std::uint64_t slots_after_stability = 0;
};

/// Runs one replication of `cfg` (arrival rates already resolved) under `scheduler`.
inline SimReport run(const SimConfig& cfg, Scheduler& scheduler, const EngineOptions& opt = {}) {
  const std::size_t n = cfg.n;
  const auto rates = cfg.arrival_rates();
  if (n > 32 && opt.full_log) throw std::invalid_argument("full log supports at most 32 SUs");

  ChannelModel channel(cfg.links(), cfg.seed);
  std::vector<SuState> su;
  std::vector<CounterStream> arrival_streams;
  su.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    su.emplace_back(rates[i], cfg.delay_bounds[i], cfg.packet_bits);
    arrival_streams.emplace_back(cfg.seed, StreamRole::kArrival, i);
  }
  const AuditLimits limits{cfg.power_cap, cfg.interference_cap, n};

  SimReport rep;
  rep.policy = std::string(scheduler.name());
  rep.su.resize(n);
  std::vector<std::size_t> qlen(n, 0);
  std::vector<double> q_sum(n, 0.0);
  std::vector<std::vector<std::uint64_t>> frame_delays(n);
  std::uint64_t buffered = 0;

  std::uint64_t frame = 0;
  Slot frame_start = 0;
  std::uint64_t idle_len = 0;
  std::uint64_t busy_len = 0;
  bool measuring = cfg.warmup_frames == 0 && cfg.warmup_slots == 0 && !opt.measure_from_stability;
  rep.measure_start = 0;
  scheduler.on_frame_start(0);

  Slot t = 0;
  for (; t < cfg.horizon; ++t) {
    if (opt.slots_after_stability > 0 && measuring && opt.measure_from_stability &&
        t - rep.measure_start >= opt.slots_after_stability) {
      break;
    }
    SlotLog log;
    for (std::size_t i = 0; i < n; ++i) {
      if (su[i].arrive(t, arrival_streams[i])) {
        ++qlen[i];
        ++buffered;
        ++rep.su[i].arrived;
        if (measuring) ++rep.su[i].measured_arrived;
        log.arrivals |= 1u << (i & 31);
      }
    }
    if (buffered == 0) {
      ++idle_len;
      if (opt.full_log) rep.slot_log.push_back(log);
      continue;
    }
    if (measuring) {
      for (std::size_t i = 0; i < n; ++i) q_sum[i] += static_cast<double>(qlen[i]);
    }
    ++busy_len;

    SlotContext ctx{t, &channel, qlen};
    SlotDecision d = scheduler.on_slot(ctx);
    const double g = d.su ? channel.g(*d.su, t) : 0.0;
    if (!audit_slot(d, g, limits)) {
      ++rep.audit_failures;
      if (opt.throw_on_audit_failure) {
        throw AuditError("constraint violated in slot " + std::to_string(t) + " by policy " +
                         rep.policy);
      }
    }
    if (d.su) {
      const std::size_t s = *d.su;
      if (qlen[s] == 0) throw std::logic_error("scheduler selected an empty buffer");
      const double gamma = channel.gamma(s, t);
      d.rate_bits = rate(d.power, gamma, cfg.log_base);
      const auto out = su[s].serve_bits(d.rate_bits, t);
      if (out.completed) {
        --qlen[s];
        --buffered;
        if (out.packet.arrival_slot < frame_start) {
          throw std::logic_error("frame closure violated: packet outlived its frame");
        }
        const auto w = packet_delay(out.packet);
        frame_delays[s].push_back(w);
        if (measuring && out.packet.arrival_slot >= rep.measure_start) {
          rep.su[s].delay_sum += static_cast<double>(w);
          ++rep.su[s].departed;
        }
      }
      if (opt.full_log) {
        log.su = static_cast<int>(s);
        log.power = d.power;
        log.rate_bits = d.rate_bits;
        log.g = g;
        log.gamma = gamma;
      }
    }
    if (opt.full_log) rep.slot_log.push_back(log);

    for (std::size_t i = 0; i < n; ++i) rep.peak_queue = std::max<std::uint64_t>(rep.peak_queue, qlen[i]);
    if (rep.peak_queue > cfg.queue_cap) {
      rep.unstable = true;
      ++t;
      break;
    }

    if (buffered == 0) {
      FrameRecord record{frame, frame_start, idle_len, busy_len, std::move(frame_delays)};
      scheduler.on_frame_end(record);
      frame_delays.assign(n, {});
      ++frame;
      rep.frames = frame;
      const auto y = scheduler.virtual_queues();
      if (y) {
        rep.has_virtual_queues = true;
        if (!rep.frames_to_stability) {
          const double worst = *std::max_element(y->begin(), y->end());
          if (worst / static_cast<double>(frame) < cfg.stability_threshold) {
            rep.frames_to_stability = frame;
          }
        }
        if (opt.record_y_history || opt.full_log) rep.y_history.emplace_back(y->begin(), y->end());
      }
      if (opt.full_log) {
        rep.frame_log.push_back({frame_start, idle_len, busy_len,
                                 y ? std::vector<double>(y->begin(), y->end())
                                   : std::vector<double>{}});
      }
      frame_start = t + 1;
      idle_len = 0;
      busy_len = 0;
      if (!measuring && frame >= cfg.warmup_frames && frame_start >= cfg.warmup_slots &&
          (!opt.measure_from_stability || rep.frames_to_stability)) {
        measuring = true;
        rep.measure_start = frame_start;
      }
      if (cfg.max_frames > 0 && frame >= cfg.max_frames) {
        ++t;
        break;
      }
      scheduler.on_frame_start(frame);
    }
  }
  rep.slots = t;

  const double measured_slots =
      t > rep.measure_start && measuring ? static_cast<double>(t - rep.measure_start) : 0.0;
  double sum = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rep.su[i];
    if (r.departed > 0) {
      r.w_bar = r.delay_sum / static_cast<double>(r.departed);
      sum += r.w_bar;
      any = true;
    }
    r.q_bar = measured_slots > 0.0 ? q_sum[i] / measured_slots : 0.0;
    rep.undeparted += qlen[i];
  }
  if (any) rep.sum_w = sum;
  if (const auto y = scheduler.virtual_queues()) {
    rep.has_virtual_queues = true;
    for (std::size_t i = 0; i < n; ++i) {
      rep.su[i].y_final = (*y)[i];
      rep.su[i].y_over_k = rep.frames > 0 ? (*y)[i] / static_cast<double>(rep.frames)
                                          : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return rep;
}

}  // namespace crsched
