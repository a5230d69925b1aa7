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
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crsched {

enum class LogBase { kTwo, kNatural };

/// Achievable rate log(1 + p*gamma), in bits/slot for base 2.
inline double rate(double power, double gamma, LogBase base = LogBase::kTwo) noexcept {
  if (power <= 0.0) return 0.0;
  const double nats = std::log1p(power * gamma);
  return base == LogBase::kTwo ? nats * 1.4426950408889634 : nats;
}

/// Largest power meeting both the per-SU cap and the instantaneous
/// interference cap: min(I_inst / g, P_max).
/// Largest power meeting both caps. I / g is stepped down by one ulp when
/// rounding would put p * g above I, so the interference cap holds exactly.
inline double optimal_power(double g, double interference_cap, double power_cap) noexcept {
  double p = interference_cap / g;
  while (p * g > interference_cap) p = std::nextafter(p, 0.0);
  return std::min(p, power_cap);
}

enum class PowerKind { kInterferenceCapped, kConstant, kCustomTable };

inline PowerKind parse_power_kind(std::string_view s) {
  if (s == "interference-capped" || s == "optimal") return PowerKind::kInterferenceCapped;
  if (s == "constant") return PowerKind::kConstant;
  if (s == "custom-table") return PowerKind::kCustomTable;
  throw std::invalid_argument("unknown power policy '" + std::string(s) + "'");
}

inline std::string_view to_string(PowerKind k) {
  switch (k) {
    case PowerKind::kInterferenceCapped: return "interference-capped";
    case PowerKind::kConstant: return "constant";
    case PowerKind::kCustomTable: return "custom-table";
  }
  return "?";
}

/// Step of a custom power table: `power` applies to g <= `g_upto`.
struct PowerStep {
  double g_upto = 0.0;
  double power = 0.0;
};

/// Maps a slot's PU-link gain to the scheduled SU's transmit power.
///
/// Only the interference-capped kind is safe by construction. The other two
/// exist to drive sensitivity runs and to exercise the engine's audit.
class PowerPolicy {
 public:
  static PowerPolicy interference_capped(double power_cap, double interference_cap) {
    PowerPolicy p(PowerKind::kInterferenceCapped, power_cap, interference_cap);
    return p;
  }
  static PowerPolicy constant(double power, double power_cap, double interference_cap) {
    PowerPolicy p(PowerKind::kConstant, power_cap, interference_cap);
    p.constant_ = power;
    return p;
  }
  static PowerPolicy custom_table(std::vector<PowerStep> steps, double power_cap,
                                  double interference_cap) {
    if (steps.empty()) throw std::invalid_argument("custom power table is empty");
    std::sort(steps.begin(), steps.end(),
              [](const PowerStep& a, const PowerStep& b) { return a.g_upto < b.g_upto; });
    PowerPolicy p(PowerKind::kCustomTable, power_cap, interference_cap);
    p.steps_ = std::move(steps);
    return p;
  }

  PowerKind kind() const noexcept { return kind_; }
  double power_cap() const noexcept { return power_cap_; }
  double interference_cap() const noexcept { return interference_cap_; }
  const std::vector<PowerStep>& steps() const noexcept { return steps_; }

  double power(double g) const noexcept {
    switch (kind_) {
      case PowerKind::kInterferenceCapped:
        return optimal_power(g, interference_cap_, power_cap_);
      case PowerKind::kConstant:
        return constant_;
      case PowerKind::kCustomTable:
        for (const auto& s : steps_) {
          if (g <= s.g_upto) return s.power;
        }
        return steps_.back().power;
    }
    return 0.0;
  }

  /// Gain values where power(g) has a kink or jump.
  std::vector<double> kinks() const {
    switch (kind_) {
      case PowerKind::kInterferenceCapped:
        return {interference_cap_ / power_cap_};
      case PowerKind::kConstant:
        return {};
      case PowerKind::kCustomTable: {
        std::vector<double> out;
        for (const auto& s : steps_) out.push_back(s.g_upto);
        return out;
      }
    }
    return {};
  }

 private:
  PowerPolicy(PowerKind kind, double power_cap, double interference_cap)
      : kind_(kind), power_cap_(power_cap), interference_cap_(interference_cap) {
    if (!(power_cap > 0.0) || !(interference_cap > 0.0)) {
      throw std::invalid_argument("P_max and I_inst must be positive");
    }
  }

  PowerKind kind_;
  double power_cap_;
  double interference_cap_;
  double constant_ = 0.0;
  std::vector<PowerStep> steps_;
};

/// Upper bound on any per-slot rate: log(1 + P_max * gamma_max).
inline double max_rate(double power_cap, double gamma_max, LogBase base = LogBase::kTwo) {
  return rate(power_cap, gamma_max, base);
}

}  // namespace crsched
