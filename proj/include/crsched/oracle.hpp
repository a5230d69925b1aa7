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

// Brute-force validators. Nothing here reuses the lattice convolution, the
// buffer class or the engine's frame logic; each check re-derives its answer
// from first principles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsched/analytics.hpp"
#include "crsched/channel.hpp"
#include "crsched/config.hpp"
#include "crsched/engine.hpp"
#include "crsched/power.hpp"
#include "crsched/rng.hpp"

namespace crsched {

struct MomentEstimate {
  double mean = 0.0;
  double second_moment = 0.0;
  double mean_se = 0.0;
  double second_moment_se = 0.0;
  std::size_t samples = 0;
};

/// Simulates `samples` packet transmissions: draw per-slot rates until the
/// cumulative count reaches L, and count the slots.
inline MomentEstimate mc_service_moments(const GainDistribution& gamma_dist,
                                         const GainDistribution& g_dist, const PowerPolicy& policy,
                                         double packet_bits, std::size_t samples,
                                         std::uint64_t seed = 1, LogBase base = LogBase::kTwo) {
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  SequentialStream gamma_rng(seed, StreamRole::kOracle, 0);
  SequentialStream g_rng(seed, StreamRole::kOracle, 1);
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    double sent = 0.0;
    double slots = 0.0;
    while (sent < packet_bits) {
      const double g = g_dist.quantile(g_rng.uniform_open_low());
      const double gamma = gamma_dist.quantile(gamma_rng.uniform_open_low());
      sent += std::log1p(policy.power(g) * gamma) / (base == LogBase::kTwo ? std::log(2.0) : 1.0);
      slots += 1.0;
      if (slots > 1e9) throw std::runtime_error("packet never completes");
    }
    s1 += slots;
    s2 += slots * slots;
    s3 += slots * slots * slots;
    s4 += slots * slots * slots * slots;
  }
  const double n = static_cast<double>(samples);
  MomentEstimate e;
  e.samples = samples;
  e.mean = s1 / n;
  e.second_moment = s2 / n;
  e.mean_se = std::sqrt(std::max(0.0, (e.second_moment - e.mean * e.mean) / (n - 1)));
  e.second_moment_se =
      std::sqrt(std::max(0.0, (s4 / n - e.second_moment * e.second_moment) / (n - 1)));
  return e;
}

/// Same estimator with explicit per-slot rates drawn from a discrete law.
inline MomentEstimate mc_service_moments(std::span<const WeightedPoint> rate_support,
                                         double packet_bits, std::size_t samples,
                                         std::uint64_t seed = 1) {
  SequentialStream rng(seed, StreamRole::kOracle, 2);
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    double sent = 0.0;
    double slots = 0.0;
    while (sent < packet_bits) {
      double u = rng.uniform();
      double r = rate_support.back().value;
      for (const auto& p : rate_support) {
        if (u < p.weight) {
          r = p.value;
          break;
        }
        u -= p.weight;
      }
      sent += r;
      slots += 1.0;
    }
    s1 += slots;
    s2 += slots * slots;
    s4 += slots * slots * slots * slots;
  }
  const double n = static_cast<double>(samples);
  MomentEstimate e;
  e.samples = samples;
  e.mean = s1 / n;
  e.second_moment = s2 / n;
  e.mean_se = std::sqrt(std::max(0.0, (e.second_moment - e.mean * e.mean) / (n - 1)));
  e.second_moment_se =
      std::sqrt(std::max(0.0, (s4 / n - e.second_moment * e.second_moment) / (n - 1)));
  return e;
}

struct ExactMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  std::uint64_t nodes = 0;
};

/// Exact E[s], E[s^2] by walking every rate sequence until the packet is done.
inline ExactMoments enumerate_service_time(std::span<const WeightedPoint> rate_support,
                                           double packet_bits,
                                           std::uint64_t node_budget = 10'000'000) {
  if (rate_support.empty() || rate_support.size() > 4) {
    throw std::invalid_argument("enumeration needs 1..4 support points");
  }
  if (packet_bits > 20.0) throw std::invalid_argument("enumeration limited to L <= 20");
  ExactMoments out;
  // Iterative DFS: (bits sent, slots used, path probability).
  struct Node {
    double sent;
    std::uint64_t slots;
    double prob;
  };
  std::vector<Node> stack{{0.0, 0, 1.0}};
  while (!stack.empty()) {
    const Node n = stack.back();
    stack.pop_back();
    if (++out.nodes > node_budget) throw std::runtime_error("enumeration node budget exceeded");
    if (n.sent >= packet_bits) {
      const auto s = static_cast<double>(n.slots);
      out.mean += n.prob * s;
      out.second_moment += n.prob * s * s;
      continue;
    }
    for (const auto& p : rate_support) {
      if (p.weight == 0.0) continue;
      stack.push_back({n.sent + p.value, n.slots + 1, n.prob * p.weight});
    }
  }
  return out;
}

struct ReplayVerdict {
  bool pass = true;
  std::string detail;
};

/// Recomputes buffers, delays, frames, virtual queues and statistics from a
/// full slot log, and compares them with what the engine reported. `cfg` must
/// carry the resolved arrival rates the run used.
inline ReplayVerdict replay_verify(const SimConfig& cfg, const SimReport& rep) {
  ReplayVerdict v;
  auto fail = [&v](const std::string& what) {
    if (v.pass) {
      v.pass = false;
      v.detail = what;
    }
  };
  auto close = [](double a, double b) {
    if (std::isnan(a) && std::isnan(b)) return true;
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  };

  const std::size_t n = cfg.n;
  if (rep.slot_log.size() != rep.slots) {
    fail("slot log length " + std::to_string(rep.slot_log.size()) + " != " +
         std::to_string(rep.slots));
    return v;
  }
  const auto lambdas = cfg.arrival_rates();
  const auto policy = cfg.power_policy();

  std::vector<std::deque<std::uint64_t>> buf(n);  // arrival slots
  std::vector<double> left(n, 0.0);
  std::vector<double> y(n, 0.0);
  std::vector<double> frame_sum(n, 0.0);
  std::vector<std::vector<std::uint64_t>> frame_w(n);
  std::vector<double> delay_sum(n, 0.0);
  std::vector<std::uint64_t> departed(n, 0);
  std::vector<double> q_area(n, 0.0);

  std::uint64_t frames = 0;
  std::uint64_t frame_start = 0;
  std::uint64_t idle = 0;
  std::uint64_t busy = 0;
  std::uint64_t measure_from = cfg.warmup_frames == 0 && cfg.warmup_slots == 0 ? 0 : UINT64_MAX;

  for (std::uint64_t t = 0; t < rep.slots; ++t) {
    const SlotLog& s = rep.slot_log[t];
    for (std::size_t i = 0; i < n; ++i) {
      if (s.arrivals & (1u << i)) {
        if (buf[i].empty()) left[i] = cfg.packet_bits;
        buf[i].push_back(t);
      }
    }
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total += buf[i].size();
      if (t >= measure_from) q_area[i] += static_cast<double>(buf[i].size());
    }
    if (total == 0) {
      if (s.su >= 0) fail("transmission logged in idle slot " + std::to_string(t));
      ++idle;
      continue;
    }
    ++busy;
    if (s.su >= 0) {
      const auto i = static_cast<std::size_t>(s.su);
      if (i >= n || buf[i].empty()) {
        fail("slot " + std::to_string(t) + " served an empty or unknown buffer");
        return v;
      }
      if (s.power > cfg.power_cap || s.power * s.g > cfg.interference_cap) {
        fail("slot " + std::to_string(t) + " violates a power constraint");
      }
      const double expect_rate =
          std::log1p(s.power * s.gamma) / (cfg.log_base == LogBase::kTwo ? std::log(2.0) : 1.0);
      if (std::abs(expect_rate - s.rate_bits) > 1e-9 * std::max(1.0, expect_rate)) {
        fail("slot " + std::to_string(t) + " rate does not match logged power and gain");
      }
      left[i] -= std::min(s.rate_bits, left[i]);
      if (left[i] <= 0.0) {
        const std::uint64_t a = buf[i].front();
        buf[i].pop_front();
        const std::uint64_t w = t - a + 1;
        frame_w[i].push_back(w);
        if (a >= measure_from) {
          delay_sum[i] += static_cast<double>(w);
          ++departed[i];
        }
        left[i] = buf[i].empty() ? 0.0 : cfg.packet_bits;
      }
    } else {
      // A work-conserving policy never idles a busy slot.
      fail("busy slot " + std::to_string(t) + " left unscheduled");
    }

    bool empty = true;
    for (std::size_t i = 0; i < n; ++i) empty = empty && buf[i].empty();
    if (!empty) continue;

    // Frame closes.
    if (frames >= rep.frame_log.size()) {
      fail("replay closed more frames than the engine reported");
      return v;
    }
    const FrameLog& fl = rep.frame_log[frames];
    if (fl.start != frame_start || fl.idle_len != idle || fl.busy_len != busy) {
      std::ostringstream os;
      os << "frame " << frames << " boundary mismatch: replay (" << frame_start << ", " << idle
         << ", " << busy << ") engine (" << fl.start << ", " << fl.idle_len << ", "
         << fl.busy_len << ")";
      fail(os.str());
    }
    if (rep.has_virtual_queues) {
      for (std::size_t i = 0; i < n; ++i) {
        const double r = cfg.v < y[i] * lambdas[i] ? cfg.delay_bounds[i] : 0.0;
        double acc = y[i];
        for (auto w : frame_w[i]) acc += static_cast<double>(w) - r;
        y[i] = acc > 0.0 ? acc : 0.0;
        if (fl.y_after.size() != n || !close(fl.y_after[i], y[i])) {
          fail("frame " + std::to_string(frames) + " virtual queue mismatch for SU " +
               std::to_string(i + 1));
        }
      }
    }
    for (auto& f : frame_w) f.clear();
    ++frames;
    frame_start = t + 1;
    idle = 0;
    busy = 0;
    if (measure_from == UINT64_MAX && frames >= cfg.warmup_frames && t + 1 >= cfg.warmup_slots) {
      measure_from = t + 1;
    }
  }

  if (frames != rep.frames) {
    fail("frame count: replay " + std::to_string(frames) + " engine " +
         std::to_string(rep.frames));
  }
  std::uint64_t left_over = 0;
  const double window =
      measure_from < rep.slots ? static_cast<double>(rep.slots - measure_from) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    left_over += buf[i].size();
    const auto& r = rep.su[i];
    if (departed[i] != r.departed || !close(delay_sum[i], r.delay_sum)) {
      fail("delay statistics mismatch for SU " + std::to_string(i + 1));
    }
    const double w_bar = departed[i] ? delay_sum[i] / static_cast<double>(departed[i])
                                     : std::numeric_limits<double>::quiet_NaN();
    if (!close(w_bar, r.w_bar)) fail("W_bar mismatch for SU " + std::to_string(i + 1));
    const double q_bar = window > 0.0 ? q_area[i] / window : 0.0;
    if (!close(q_bar, r.q_bar)) fail("queue average mismatch for SU " + std::to_string(i + 1));
    if (rep.has_virtual_queues && !close(y[i], r.y_final)) {
      fail("final virtual queue mismatch for SU " + std::to_string(i + 1));
    }
  }
  if (left_over != rep.undeparted) fail("undeparted packet count mismatch");
  return v;
}

struct PriorityCheck {
  std::vector<std::size_t> index_order;  ///< the y / E[s] sort
  double index_cost = 0.0;
  std::vector<std::size_t> best_order;
  double best_cost = 0.0;
  bool agrees = true;  ///< index order attains the minimum (rel. tol 1e-9)
};

/// Compares the weighted-delay cost of the y / E[s] order with the minimum
/// over all N! priority orders. Reports rather than asserts.
inline PriorityCheck exhaustive_priority_check(std::span<const double> y,
                                               std::span<const ServiceMoments> by_su,
                                               ResidualTerm residual = ResidualTerm::kHalf) {
  const std::size_t n = y.size();
  if (n > 8) throw std::invalid_argument("exhaustive priority check limited to N <= 8");
  PriorityCheck out;
  // Independent sort: selection by key, ties to the lower index.
  std::vector<bool> used(n, false);
  for (std::size_t pos = 0; pos < n; ++pos) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      if (best == n || y[i] / by_su[i].mean_slots > y[best] / by_su[best].mean_slots) best = i;
    }
    used[best] = true;
    out.index_order.push_back(best);
  }
  out.index_cost = weighted_delay_cost(y, by_su, out.index_order, residual);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  out.best_cost = std::numeric_limits<double>::infinity();
  do {
    const double c = weighted_delay_cost(y, by_su, order, residual);
    if (c < out.best_cost) {
      out.best_cost = c;
      out.best_order = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  out.agrees = out.index_cost <= out.best_cost * (1.0 + 1e-9) + 1e-12;
  return out;
}

}  // namespace crsched
