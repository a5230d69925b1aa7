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

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crsched/channel.hpp"
#include "crsched/power.hpp"

namespace crsched {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class LambdaRule { kLinear, kUniform, kExplicit };
enum class SweepVar { kNone, kLambda, kLoad, kV, kLastDelayBound };

inline std::string_view to_string(SweepVar v) {
  switch (v) {
    case SweepVar::kNone: return "none";
    case SweepVar::kLambda: return "lambda";
    case SweepVar::kLoad: return "load";
    case SweepVar::kV: return "V";
    case SweepVar::kLastDelayBound: return "d_last";
  }
  return "?";
}

/// Per-SU description of one link's gain law. Scalars broadcast to all SUs;
/// an empty `max` means ten times the mean.
struct GainSpec {
  GainKind kind = GainKind::kTruncatedExponential;
  std::vector<double> mean;
  std::vector<double> max;
  std::vector<WeightedPoint> table;

  GainDistribution build(std::size_t su) const {
    switch (kind) {
      case GainKind::kConstant:
        return GainDistribution::constant(pick(mean, su));
      case GainKind::kDiscreteTable:
        return GainDistribution::table(table);
      case GainKind::kTruncatedExponential: {
        const double m = pick(mean, su);
        return GainDistribution::truncated_exponential(m, max.empty() ? 10.0 * m : pick(max, su));
      }
    }
    throw std::logic_error("bad gain kind");
  }

 private:
  static double pick(const std::vector<double>& v, std::size_t su) {
    if (v.empty()) throw std::invalid_argument("gain parameter list is empty");
    return v.size() == 1 ? v.front() : v.at(su);
  }
};

/// Complete description of one experiment.
///
/// Units: slots for time and delay bounds, bits for packet sizes and rates,
/// dimensionless linear units for gains and powers.
struct SimConfig {
  std::size_t n = 5;
  LambdaRule lambda_rule = LambdaRule::kLinear;
  double lambda = 0.001;           ///< base rate for the linear/uniform rules
  std::optional<double> load;      ///< target total load; resolved into `lambda`
  std::vector<double> lambdas;     ///< explicit per-SU rates
  std::vector<double> delay_bounds{100, 100, 100, 100, 45};
  GainSpec gamma{GainKind::kTruncatedExponential, {1.0}, {}, {}};
  GainSpec g{GainKind::kTruncatedExponential, {0.1, 0.1, 0.1, 0.1, 0.4}, {}, {}};
  double interference_cap = 20.0;
  double power_cap = 100.0;
  PowerKind power_kind = PowerKind::kInterferenceCapped;
  double constant_power = 0.0;
  std::vector<PowerStep> power_table;
  double v = 100.0;
  double packet_bits = 100.0;
  std::uint64_t horizon = 1'000'000;
  std::uint64_t warmup_frames = 100;
  std::uint64_t warmup_slots = 0;  ///< measurement also waits for this slot (at a frame boundary)
  std::uint64_t max_frames = 0;  ///< stop after this many closed frames; 0 = horizon only
  std::uint64_t seed = 1;
  std::string policy = "doic";
  std::vector<std::size_t> static_order;  ///< static-priority list, 0-based; empty = index order
  LogBase log_base = LogBase::kTwo;
  LogBase analytics_log_base = LogBase::kTwo;
  int rate_grid = 512;
  std::uint64_t queue_cap = 1'000'000;
  double stability_threshold = 0.05;
  SweepVar sweep_var = SweepVar::kNone;
  std::vector<double> sweep_values;
  std::size_t replications = 1;
  std::size_t mc_samples = 100'000;

  std::vector<LinkPair> links() const {
    std::vector<LinkPair> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({gamma.build(i), g.build(i)});
    return out;
  }

  PowerPolicy power_policy() const {
    switch (power_kind) {
      case PowerKind::kInterferenceCapped:
        return PowerPolicy::interference_capped(power_cap, interference_cap);
      case PowerKind::kConstant:
        return PowerPolicy::constant(constant_power, power_cap, interference_cap);
      case PowerKind::kCustomTable:
        return PowerPolicy::custom_table(power_table, power_cap, interference_cap);
    }
    throw std::logic_error("bad power kind");
  }

  /// Per-SU arrival rates; `load` must have been resolved already.
  std::vector<double> arrival_rates() const {
    if (load) throw std::logic_error("target load not resolved into arrival rates");
    std::vector<double> out(n);
    switch (lambda_rule) {
      case LambdaRule::kLinear:
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(i + 1) * lambda;
        break;
      case LambdaRule::kUniform:
        for (std::size_t i = 0; i < n; ++i) out[i] = lambda;
        break;
      case LambdaRule::kExplicit:
        out = lambdas;
        break;
    }
    return out;
  }

  /// Multiplier of the base rate for each SU (lambda_i = w_i * lambda).
  std::vector<double> rate_weights() const {
    std::vector<double> w(n, 1.0);
    if (lambda_rule == LambdaRule::kLinear) {
      for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(i + 1);
    } else if (lambda_rule == LambdaRule::kExplicit) {
      w = lambdas;
    }
    return w;
  }

  void validate() const {
    if (n < 1) throw ConfigError(0, "n must be >= 1");
    if (delay_bounds.size() != n) throw ConfigError(0, "delay_bounds needs one value per SU");
    for (double d : delay_bounds) {
      if (!(d > 0.0)) throw ConfigError(0, "delay bounds must be positive");
    }
    if (lambda_rule == LambdaRule::kExplicit && lambdas.size() != n) {
      throw ConfigError(0, "lambdas needs one value per SU");
    }
    if (!load) {
      for (double l : arrival_rates()) {
        if (!(l >= 0.0 && l < 1.0)) throw ConfigError(0, "arrival rates must lie in [0, 1)");
      }
    } else if (!(*load > 0.0 && *load < 1.0)) {
      throw ConfigError(0, "load must lie in (0, 1)");
    }
    if (!(v > 0.0)) throw ConfigError(0, "V must be positive");
    if (!(packet_bits > 0.0)) throw ConfigError(0, "packet_bits must be positive");
    if (horizon < 1) throw ConfigError(0, "horizon must be >= 1");
    if (replications < 1) throw ConfigError(0, "replications must be >= 1");
    if (rate_grid < 2) throw ConfigError(0, "rate_grid must be >= 2");
    if (!static_order.empty()) {
      std::vector<bool> seen(n, false);
      if (static_order.size() != n) throw ConfigError(0, "static_order must list every SU");
      for (std::size_t s : static_order) {
        if (s >= n || seen[s]) throw ConfigError(0, "static_order is not a permutation");
        seen[s] = true;
      }
    }
    try {
      (void)links();
      (void)power_policy();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(0, e.what());
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view s, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(line, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::uint64_t parse_uint(std::string_view s, std::size_t line) {
  const double v = parse_double(s, line);
  if (v < 0.0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
    throw ConfigError(line, "expected a non-negative integer, got '" + std::string(trim(s)) + "'");
  }
  return static_cast<std::uint64_t>(v);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<double> parse_list(std::string_view s, std::size_t line) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (auto item : split(s, ',')) out.push_back(parse_double(item, line));
  return out;
}

/// "value:probability, value:probability"
inline std::vector<WeightedPoint> parse_pairs(std::string_view s, std::size_t line) {
  std::vector<WeightedPoint> out;
  for (auto item : split(s, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw ConfigError(line, "expected value:weight pairs");
    out.push_back({parse_double(parts[0], line), parse_double(parts[1], line)});
  }
  return out;
}

inline LogBase parse_log_base(std::string_view s, std::size_t line) {
  if (s == "2") return LogBase::kTwo;
  if (s == "e" || s == "natural") return LogBase::kNatural;
  throw ConfigError(line, "log base must be 2 or e");
}

inline bool apply_gain_key(GainSpec& spec, std::string_view field, std::string_view value,
                           std::size_t line) {
  if (field == "kind") {
    try {
      spec.kind = parse_gain_kind(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(line, e.what());
    }
  } else if (field == "mean") {
    spec.mean = parse_list(value, line);
  } else if (field == "max") {
    spec.max = parse_list(value, line);
  } else if (field == "table") {
    spec.table = parse_pairs(value, line);
  } else {
    return false;
  }
  return true;
}

}  // namespace detail

/// Applies one `key = value` assignment.
inline void apply_config_key(SimConfig& cfg, std::string_view key, std::string_view value,
                             std::size_t line = 0) {
  using namespace detail;
  if (key == "n") {
    cfg.n = parse_uint(value, line);
  } else if (key == "lambda") {
    cfg.lambda = parse_double(value, line);
    cfg.load.reset();
  } else if (key == "lambda_rule") {
    if (value == "linear") cfg.lambda_rule = LambdaRule::kLinear;
    else if (value == "uniform") cfg.lambda_rule = LambdaRule::kUniform;
    else if (value == "explicit") cfg.lambda_rule = LambdaRule::kExplicit;
    else throw ConfigError(line, "lambda_rule must be linear, uniform or explicit");
  } else if (key == "lambdas") {
    cfg.lambdas = parse_list(value, line);
    cfg.lambda_rule = LambdaRule::kExplicit;
  } else if (key == "load") {
    cfg.load = parse_double(value, line);
  } else if (key == "delay_bounds") {
    auto v = parse_list(value, line);
    if (v.size() == 1) v.assign(cfg.n, v.front());
    cfg.delay_bounds = std::move(v);
  } else if (key == "d_last") {
    if (cfg.delay_bounds.empty()) throw ConfigError(line, "d_last before delay_bounds");
    cfg.delay_bounds.back() = parse_double(value, line);
  } else if (key.starts_with("gamma.")) {
    if (!apply_gain_key(cfg.gamma, key.substr(6), value, line)) {
      throw ConfigError(line, "unknown key '" + std::string(key) + "'");
    }
  } else if (key.starts_with("g.")) {
    if (!apply_gain_key(cfg.g, key.substr(2), value, line)) {
      throw ConfigError(line, "unknown key '" + std::string(key) + "'");
    }
  } else if (key == "interference_cap") {
    cfg.interference_cap = parse_double(value, line);
  } else if (key == "power_cap") {
    cfg.power_cap = parse_double(value, line);
  } else if (key == "power.kind") {
    try {
      cfg.power_kind = parse_power_kind(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(line, e.what());
    }
  } else if (key == "power.constant") {
    cfg.constant_power = parse_double(value, line);
  } else if (key == "power.table") {
    cfg.power_table.clear();
    for (const auto& p : parse_pairs(value, line)) cfg.power_table.push_back({p.value, p.weight});
  } else if (key == "V") {
    cfg.v = parse_double(value, line);
  } else if (key == "packet_bits") {
    cfg.packet_bits = parse_double(value, line);
  } else if (key == "horizon") {
    cfg.horizon = parse_uint(value, line);
  } else if (key == "warmup_frames") {
    cfg.warmup_frames = parse_uint(value, line);
  } else if (key == "warmup_slots") {
    cfg.warmup_slots = parse_uint(value, line);
  } else if (key == "max_frames") {
    cfg.max_frames = parse_uint(value, line);
  } else if (key == "seed") {
    cfg.seed = parse_uint(value, line);
  } else if (key == "policy") {
    if (value != "doic" && value != "csma" && value != "cnc" && value != "static-priority") {
      throw ConfigError(line, "policy must be doic, csma, cnc or static-priority");
    }
    cfg.policy = std::string(value);
  } else if (key == "static_order") {
    cfg.static_order.clear();
    for (double v : parse_list(value, line)) {
      if (v < 1.0) throw ConfigError(line, "static_order lists SU numbers starting at 1");
      cfg.static_order.push_back(static_cast<std::size_t>(v) - 1);
    }
  } else if (key == "log_base") {
    cfg.log_base = parse_log_base(value, line);
    cfg.analytics_log_base = cfg.log_base;
  } else if (key == "analytics.log_base") {
    cfg.analytics_log_base = parse_log_base(value, line);
  } else if (key == "rate_grid") {
    cfg.rate_grid = static_cast<int>(parse_uint(value, line));
  } else if (key == "queue_cap") {
    cfg.queue_cap = parse_uint(value, line);
  } else if (key == "stability_threshold") {
    cfg.stability_threshold = parse_double(value, line);
  } else if (key == "sweep.var") {
    if (value == "none") cfg.sweep_var = SweepVar::kNone;
    else if (value == "lambda") cfg.sweep_var = SweepVar::kLambda;
    else if (value == "load") cfg.sweep_var = SweepVar::kLoad;
    else if (value == "V") cfg.sweep_var = SweepVar::kV;
    else if (value == "d_last") cfg.sweep_var = SweepVar::kLastDelayBound;
    else throw ConfigError(line, "sweep.var must be none, lambda, load, V or d_last");
  } else if (key == "sweep.values") {
    cfg.sweep_values = parse_list(value, line);
  } else if (key == "replications") {
    cfg.replications = parse_uint(value, line);
  } else if (key == "mc_samples") {
    cfg.mc_samples = parse_uint(value, line);
  } else {
    throw ConfigError(line, "unknown key '" + std::string(key) + "'");
  }
}

/// Parses `key = value` lines on top of `base`. '#' starts a comment.
inline SimConfig parse_config(std::istream& in, SimConfig base = {}) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line, "expected key = value");
    const auto key = detail::trim(s.substr(0, eq));
    const auto value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "missing key");
    apply_config_key(base, key, value, line);
  }
  base.validate();
  return base;
}

inline SimConfig parse_config_string(std::string_view text, SimConfig base = {}) {
  std::istringstream in{std::string(text)};
  return parse_config(in, std::move(base));
}

inline SimConfig load_config_file(const std::string& path, SimConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace crsched
