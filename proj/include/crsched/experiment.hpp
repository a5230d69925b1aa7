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

// Experiment assembly: per-SU service analytics, arrival-rate resolution,
// scheduler construction, sweeps over replications and CSV output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "crsched/analytics.hpp"
#include "crsched/config.hpp"
#include "crsched/engine.hpp"
#include "crsched/policy_baselines.hpp"
#include "crsched/policy_doic.hpp"

namespace crsched {

/// Stationary service statistics of every SU under the configured power policy.
struct ServiceAnalytics {
  std::vector<RateLaw> laws;
  std::vector<double> renewal_mean;  ///< L / E[R], slots
  std::vector<double> exact_mean;    ///< indicator-sum E[s], slots
  std::vector<double> second_moment; ///< E[s^2], slots^2

  std::vector<ServiceMoments> moments(std::span<const double> arrival_rates) const {
    std::vector<ServiceMoments> out(laws.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = {exact_mean[i], second_moment[i], arrival_rates[i] * exact_mean[i]};
    }
    return out;
  }
};

namespace detail {

inline bool same_law(const GainDistribution& a, const GainDistribution& b) {
  if (a.kind() != b.kind() || a.parameter_mean() != b.parameter_mean() || a.max() != b.max()) {
    return false;
  }
  const auto pa = a.points();
  const auto pb = b.points();
  return std::equal(pa.begin(), pa.end(), pb.begin(), pb.end(),
                    [](const WeightedPoint& x, const WeightedPoint& y) {
                      return x.value == y.value && x.weight == y.weight;
                    });
}

}  // namespace detail

/// Rate laws and service moments, computed once per distinct link pair.
inline ServiceAnalytics compute_service_analytics(const SimConfig& cfg) {
  const auto links = cfg.links();
  const auto policy = cfg.power_policy();
  ServiceAnalytics a;
  for (std::size_t i = 0; i < links.size(); ++i) {
    std::size_t same = i;
    for (std::size_t j = 0; j < i; ++j) {
      if (detail::same_law(links[i].to_base, links[j].to_base) &&
          detail::same_law(links[i].to_primary, links[j].to_primary)) {
        same = j;
        break;
      }
    }
    if (same != i) {
      a.laws.push_back(a.laws[same]);
      a.renewal_mean.push_back(a.renewal_mean[same]);
      a.exact_mean.push_back(a.exact_mean[same]);
      a.second_moment.push_back(a.second_moment[same]);
      continue;
    }
    auto law = rate_law(links[i].to_base, links[i].to_primary, policy, cfg.rate_grid,
                        cfg.analytics_log_base);
    const auto m = service_moments(law, cfg.packet_bits, 0.0);
    a.renewal_mean.push_back(mean_service_time(law, cfg.packet_bits));
    a.exact_mean.push_back(m.mean_slots);
    a.second_moment.push_back(m.second_moment_slots2);
    a.laws.push_back(std::move(law));
  }
  return a;
}

/// Replaces a target load by the base arrival rate that produces it.
inline SimConfig resolve_load(SimConfig cfg, const ServiceAnalytics& a) {
  if (!cfg.load) return cfg;
  if (cfg.lambda_rule == LambdaRule::kExplicit) {
    // Scale the explicit vector.
    const auto w = cfg.rate_weights();
    const double scale = base_rate_for_load(*cfg.load, w, a.exact_mean);
    for (auto& l : cfg.lambdas) l *= scale;
  } else {
    cfg.lambda = base_rate_for_load(*cfg.load, cfg.rate_weights(), a.exact_mean);
  }
  cfg.load.reset();
  cfg.validate();
  return cfg;
}

inline std::unique_ptr<Scheduler> make_scheduler(const SimConfig& cfg, const ServiceAnalytics& a) {
  const auto power = cfg.power_policy();
  if (cfg.policy == "doic") {
    return std::make_unique<DoicScheduler>(DoicParams{cfg.v, a.renewal_mean}, cfg.arrival_rates(),
                                           cfg.delay_bounds, power, cfg.log_base);
  }
  if (cfg.policy == "csma") return std::make_unique<CsmaScheduler>(power, cfg.seed, cfg.log_base);
  if (cfg.policy == "cnc") return std::make_unique<CncScheduler>(power, cfg.log_base);
  if (cfg.policy == "static-priority") {
    PriorityList list;
    list.order = cfg.static_order;
    if (list.order.empty()) {
      list.order.resize(cfg.n);
      std::iota(list.order.begin(), list.order.end(), std::size_t{0});
    }
    return std::make_unique<StaticPriorityScheduler>(list, power, cfg.log_base);
  }
  throw ConfigError(0, "unknown policy '" + cfg.policy + "'");
}

/// Seed of replication `r`; replication 0 uses the configured seed.
inline std::uint64_t replication_seed(std::uint64_t seed, std::size_t r) {
  return r == 0 ? seed : mix64(seed ^ mix64(0x5eedULL + r));
}

/// One (sweep point, replication) result.
struct RunResult {
  SweepVar var = SweepVar::kNone;
  double value = 0.0;
  std::size_t replication = 0;
  std::vector<double> arrival_rates;
  SimReport report;
};

inline SimConfig apply_sweep_value(SimConfig cfg, SweepVar var, double value) {
  switch (var) {
    case SweepVar::kNone: break;
    case SweepVar::kLambda:
      cfg.lambda = value;
      cfg.load.reset();
      break;
    case SweepVar::kLoad: cfg.load = value; break;
    case SweepVar::kV: cfg.v = value; break;
    case SweepVar::kLastDelayBound: cfg.delay_bounds.back() = value; break;
  }
  return cfg;
}

inline std::size_t worker_count() {
  if (const char* env = std::getenv("CRSCHED_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `jobs` calls of `fn(index)` on `workers` threads.
template <typename Fn>
void parallel_for(std::size_t jobs, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, jobs));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Every sweep point times every replication, in (point, replication) order.
inline std::vector<RunResult> run_sweep(const SimConfig& cfg, const EngineOptions& opt = {},
                                        std::size_t workers = worker_count()) {
  const auto analytics = compute_service_analytics(cfg);
  std::vector<double> values = cfg.sweep_values;
  const SweepVar var = values.empty() ? SweepVar::kNone : cfg.sweep_var;
  if (var == SweepVar::kNone) values = {0.0};

  std::vector<RunResult> results(values.size() * cfg.replications);
  parallel_for(results.size(), workers, [&](std::size_t job) {
    const std::size_t point = job / cfg.replications;
    const std::size_t r = job % cfg.replications;
    SimConfig c = resolve_load(apply_sweep_value(cfg, var, values[point]), analytics);
    c.seed = replication_seed(cfg.seed, r);
    auto sched = make_scheduler(c, analytics);
    RunResult& out = results[job];
    out.var = var;
    out.value = values[point];
    out.replication = r;
    out.arrival_rates = c.arrival_rates();
    out.report = run(c, *sched, opt);
  });
  return results;
}

namespace detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void mean_se(const std::vector<double>& xs, double& mean, double& se) {
  std::vector<double> v;
  for (double x : xs) {
    if (!std::isnan(x)) v.push_back(x);
  }
  mean = std::numeric_limits<double>::quiet_NaN();
  se = std::numeric_limits<double>::quiet_NaN();
  if (v.empty()) return;
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace detail

/// One row per (sweep point, replication, SU).
inline void write_results_csv(std::ostream& os, const std::vector<RunResult>& results) {
  using detail::num;
  os << "sweep_var,value,replication,su,W_bar,sum_W,Y_over_K_final,packets,audit_pass\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.report.su.size(); ++i) {
      const auto& s = r.report.su[i];
      os << to_string(r.var) << ',' << num(r.value) << ',' << r.replication << ',' << i + 1 << ','
         << num(s.w_bar) << ',' << num(r.report.sum_w) << ',' << num(s.y_over_k) << ','
         << s.departed << ',' << (r.report.audit_pass() ? 1 : 0) << '\n';
    }
  }
}

/// Across-replication means and standard errors per (sweep point, SU).
inline void write_summary_csv(std::ostream& os, const std::vector<RunResult>& results) {
  using detail::num;
  os << "sweep_var,value,su,lambda,W_bar_mean,W_bar_se,sum_W_mean,sum_W_se,Y_over_K_mean,"
        "packets_mean,frames_mean,replications,audit_pass\n";
  std::size_t begin = 0;
  while (begin < results.size()) {
    std::size_t end = begin;
    while (end < results.size() && results[end].value == results[begin].value) ++end;
    const std::size_t n = results[begin].report.su.size();
    std::vector<double> sums;
    std::vector<double> frames;
    bool pass = true;
    for (std::size_t k = begin; k < end; ++k) {
      sums.push_back(results[k].report.sum_w);
      frames.push_back(static_cast<double>(results[k].report.frames));
      pass = pass && results[k].report.audit_pass();
    }
    double sum_mean, sum_se, frames_mean, unused;
    detail::mean_se(sums, sum_mean, sum_se);
    detail::mean_se(frames, frames_mean, unused);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> w, y, p;
      for (std::size_t k = begin; k < end; ++k) {
        w.push_back(results[k].report.su[i].w_bar);
        y.push_back(results[k].report.su[i].y_over_k);
        p.push_back(static_cast<double>(results[k].report.su[i].departed));
      }
      double w_mean, w_se, y_mean, p_mean;
      detail::mean_se(w, w_mean, w_se);
      detail::mean_se(y, y_mean, unused);
      detail::mean_se(p, p_mean, unused);
      os << to_string(results[begin].var) << ',' << num(results[begin].value) << ',' << i + 1
         << ',' << num(results[begin].arrival_rates[i]) << ',' << num(w_mean) << ','
         << num(w_se) << ',' << num(sum_mean) << ',' << num(sum_se) << ',' << num(y_mean) << ','
         << num(p_mean) << ',' << num(frames_mean) << ',' << end - begin << ','
         << (pass ? 1 : 0) << '\n';
    }
    begin = end;
  }
}

/// Virtual-queue trajectories, one row per (sweep point, replication, frame).
inline void write_y_trace_csv(std::ostream& os, const std::vector<RunResult>& results) {
  using detail::num;
  os << "sweep_var,value,replication,frame,su,Y,Y_over_K\n";
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.report.y_history.size(); ++k) {
      for (std::size_t i = 0; i < r.report.y_history[k].size(); ++i) {
        const double y = r.report.y_history[k][i];
        os << to_string(r.var) << ',' << num(r.value) << ',' << r.replication << ',' << k + 1
           << ',' << i + 1 << ',' << num(y) << ',' << num(y / static_cast<double>(k + 1))
           << '\n';
      }
    }
  }
}

/// Human-readable record of the parameters behind a run. Values that are
/// local defaults rather than published settings are tagged "assumed".
inline void write_metadata(std::ostream& os, const SimConfig& cfg, const ServiceAnalytics& a) {
  using detail::num;
  os << "policy = " << cfg.policy << "\n";
  os << "n = " << cfg.n << "\n";
  os << "packet_bits = " << num(cfg.packet_bits) << "\n";
  os << "V = " << num(cfg.v) << "\n";
  os << "interference_cap = " << num(cfg.interference_cap) << "\n";
  os << "power_cap = " << num(cfg.power_cap) << "\n";
  os << "horizon = " << cfg.horizon << "\n";
  os << "warmup_frames = " << cfg.warmup_frames << "\n";
  os << "warmup_slots = " << cfg.warmup_slots << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "replications = " << cfg.replications << "\n";
  os << "delay_bounds =";
  for (std::size_t i = 0; i < cfg.delay_bounds.size(); ++i) {
    os << (i ? ", " : " ") << num(cfg.delay_bounds[i]);
  }
  os << "\n# assumed: delay bounds of SU 1..N-1 default to 100 slots and the low d_N to 25 "
        "slots\n";
  for (std::size_t i = 0; i < a.laws.size(); ++i) {
    os << "su" << i + 1 << ".mean_rate_bits = " << num(a.laws[i].mean())
       << "\nsu" << i + 1 << ".E_s_renewal = " << num(a.renewal_mean[i])
       << "\nsu" << i + 1 << ".E_s = " << num(a.exact_mean[i])
       << "\nsu" << i + 1 << ".E_s2 = " << num(a.second_moment[i]) << "\n";
  }
}

}  // namespace crsched
