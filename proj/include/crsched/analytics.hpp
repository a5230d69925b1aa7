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
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crsched/channel.hpp"
#include "crsched/power.hpp"

namespace crsched {

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Law of the per-slot rate of one SU on the lattice {0, step, 2 step, ...}.
class RateLaw {
 public:
  RateLaw() = default;
  RateLaw(double step, std::vector<double> pmf) : step_(step), pmf_(std::move(pmf)) {
    if (!(step_ > 0.0)) throw std::invalid_argument("rate lattice step must be positive");
    if (pmf_.empty()) throw std::invalid_argument("rate law is empty");
    while (pmf_.size() > 1 && pmf_.back() == 0.0) pmf_.pop_back();
  }

  /// Places weighted values on the lattice. Off-lattice values are split
  /// between the two neighbouring nodes so that the mean is preserved exactly.
  static RateLaw from_points(std::span<const WeightedPoint> points, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("rate lattice step must be positive");
    std::vector<double> pmf(1, 0.0);
    double total = 0.0;
    auto add = [&pmf](std::size_t k, double w) {
      if (k >= pmf.size()) pmf.resize(k + 1, 0.0);
      pmf[k] += w;
    };
    for (const auto& p : points) {
      if (p.value < 0.0) throw std::invalid_argument("negative rate");
      total += p.weight;
      const double x = p.value / step;
      const double lower = std::floor(x);
      const double frac = x - lower;
      const auto k = static_cast<std::size_t>(lower);
      if (frac < 1e-9) {
        add(k, p.weight);
      } else if (frac > 1.0 - 1e-9) {
        add(k + 1, p.weight);
      } else {
        add(k, p.weight * (1.0 - frac));
        add(k + 1, p.weight * frac);
      }
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("rate law weights must sum to 1");
    }
    for (double& w : pmf) w /= total;
    return RateLaw(step, std::move(pmf));
  }

  static RateLaw point_mass(double value) {
    if (value <= 0.0) return RateLaw(1.0, {1.0});
    return RateLaw(value, {0.0, 1.0});
  }

  double step() const noexcept { return step_; }
  const std::vector<double>& pmf() const noexcept { return pmf_; }
  double value(std::size_t k) const noexcept { return static_cast<double>(k) * step_; }
  double max_value() const noexcept { return value(pmf_.size() - 1); }

  double mean() const noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < pmf_.size(); ++k) m += pmf_[k] * value(k);
    return m;
  }
  double second_moment() const noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < pmf_.size(); ++k) m += pmf_[k] * value(k) * value(k);
    return m;
  }
  double total_probability() const noexcept {
    return std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  }

  /// Same probabilities on a stretched lattice: every rate multiplied by `factor`.
  RateLaw scaled(double factor) const { return RateLaw(step_ * factor, pmf_); }

 private:
  double step_ = 1.0;
  std::vector<double> pmf_{1.0};
};

/// Law of log(1 + P(g) gamma) for independent gamma and g, discretised on a
/// uniform lattice with `grid_size` intervals over [0, R_max].
inline RateLaw rate_law(const GainDistribution& gamma_dist, const GainDistribution& g_dist,
                        const PowerPolicy& policy, int grid_size = 512,
                        LogBase base = LogBase::kTwo, int panels = 256) {
  if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
  const auto kinks = policy.kinks();
  const auto g_nodes = g_dist.quadrature(kinks, panels);
  const auto gamma_nodes = gamma_dist.quadrature({}, panels);

  std::vector<WeightedPoint> rates;
  rates.reserve(g_nodes.size() * gamma_nodes.size());
  double r_max = 0.0;
  for (const auto& gn : g_nodes) {
    const double p = policy.power(gn.value);
    for (const auto& cn : gamma_nodes) {
      const double r = rate(p, cn.value, base);
      r_max = std::max(r_max, r);
      rates.push_back({r, gn.weight * cn.weight});
    }
  }
  if (r_max <= 0.0) return RateLaw::point_mass(0.0);
  // Quadrature weights sum to one only up to rounding.
  double total = 0.0;
  for (const auto& r : rates) total += r.weight;
  for (auto& r : rates) r.weight /= total;
  return RateLaw::from_points(rates, r_max / grid_size);
}

/// Service-time moments of one class, in slots.
struct ServiceMoments {
  double mean_slots = 0.0;
  double second_moment_slots2 = 0.0;
  double rho = 0.0;

  double arrival_rate() const noexcept { return mean_slots > 0.0 ? rho / mean_slots : 0.0; }
};

/// L / E[R]: the renewal approximation of the mean service time.
inline double mean_service_time(const RateLaw& law, double packet_bits) {
  const double m = law.mean();
  if (!(m > 0.0)) throw std::domain_error("rate law has zero mean; service never completes");
  return packet_bits / m;
}

namespace detail {

// Pr[S_m lies on one of the first `nodes` lattice points], m = 0, 1, ...
// See partial_sum_survival for the horizon contract.
inline std::vector<double> partial_sum_mass_below(const RateLaw& law, std::size_t nodes,
                                                  std::size_t horizon) {
  if (!(law.mean() > 0.0)) {
    throw std::domain_error("rate law has zero mean; service never completes");
  }
  const auto& pmf = law.pmf();
  std::vector<double> cur(nodes, 0.0);
  std::vector<double> next(nodes, 0.0);
  std::vector<double> out;
  if (nodes == 0) return out;
  cur[0] = 1.0;
  std::size_t lo = 0;
  std::size_t hi = 1;  // cur is zero outside [lo, hi)
  constexpr double kDrop = 1e-300;

  const std::size_t cap = horizon > 0 ? horizon : std::size_t{1} << 24;
  double survival = 1.0;
  for (std::size_t m = 0;; ++m) {
    if (m == cap) {
      if (horizon > 0 && survival > 1e-9) {
        throw std::domain_error("service-time horizon too short: tail probability " +
                                std::to_string(survival));
      }
      break;
    }
    if (horizon == 0 && survival < 1e-16) break;
    out.push_back(survival);

    const std::size_t new_hi = std::min(nodes, hi + pmf.size() - 1);
    std::fill(next.begin() + static_cast<std::ptrdiff_t>(lo),
              next.begin() + static_cast<std::ptrdiff_t>(new_hi), 0.0);
    for (std::size_t j = lo; j < hi; ++j) {
      const double c = cur[j];
      if (c == 0.0) continue;
      const std::size_t kmax = std::min(pmf.size(), nodes - j);
      double* dst = next.data() + j;
      for (std::size_t k = 0; k < kmax; ++k) dst[k] += c * pmf[k];
    }
    std::swap(cur, next);
    hi = new_hi;
    while (lo < hi && cur[lo] < kDrop) {
      cur[lo] = 0.0;
      ++lo;
    }
    survival = 0.0;
    for (std::size_t j = lo; j < hi; ++j) survival += cur[j];
  }
  return out;
}

}  // namespace detail

/// Pr[S_m < L] for m = 0, 1, ..., where S_m is the sum of m i.i.d. rates:
/// entry m is the probability that slot m + 1 still carries bits of the
/// packet. With `horizon` > 0 exactly `horizon` terms are returned and the
/// residual Pr[S_horizon < L] must be below 1e-9; with `horizon` == 0 terms
/// are generated until the residual drops below 1e-16.
inline std::vector<double> partial_sum_survival(const RateLaw& law, double packet_bits,
                                                std::size_t horizon = 0) {
  if (!(packet_bits > 0.0)) throw std::invalid_argument("packet size must be positive");
  const auto nodes = static_cast<std::size_t>(std::ceil(packet_bits / law.step() - 1e-9));
  return detail::partial_sum_mass_below(law, nodes, horizon);
}

/// E[s] computed from the slot indicators: sum over m of Pr[S_{m-1} < L].
inline double exact_mean_service_time(const RateLaw& law, double packet_bits,
                                      std::size_t horizon = 0) {
  const auto surv = partial_sum_survival(law, packet_bits, horizon);
  double s = 0.0;
  for (double p : surv) s += p;
  return s;
}

/// E[s^2] = sum_{t1,t2} Pr[S_{max(t1,t2)-1} < L]. The double sum is
/// collapsed to a single sum over m = max(t1, t2), which has 2m - 1 pairs.
inline double second_moment_service_time(const RateLaw& law, double packet_bits,
                                         std::size_t horizon = 0) {
  const auto surv = partial_sum_survival(law, packet_bits, horizon);
  double s = 0.0;
  for (std::size_t m = 1; m <= surv.size(); ++m) {
    s += static_cast<double>(2 * m - 1) * surv[m - 1];
  }
  return s;
}

/// The same quantity as the literal double sum over t1, t2 in [1, L] with
/// the event {S_{max-1} <= L - 1}. Only meaningful for integer L and rates of
/// at least one bit on an integer lattice; kept as a cross-check.
inline double second_moment_double_sum(const RateLaw& law, int packet_bits) {
  if (packet_bits < 1) throw std::invalid_argument("packet size must be >= 1 bit");
  // Lattice nodes j with j * step <= L - 1.
  const auto nodes = static_cast<std::size_t>(
      std::floor((packet_bits - 1) / law.step() + 1e-9)) + 1;
  const auto cdf = detail::partial_sum_mass_below(law, nodes, 0);
  double s = 0.0;
  for (int t1 = 1; t1 <= packet_bits; ++t1) {
    for (int t2 = 1; t2 <= packet_bits; ++t2) {
      const auto m = static_cast<std::size_t>(std::max(t1, t2) - 1);
      s += m < cdf.size() ? cdf[m] : 0.0;
    }
  }
  return s;
}

inline ServiceMoments service_moments(const RateLaw& law, double packet_bits,
                                      double arrival_rate) {
  const auto surv = partial_sum_survival(law, packet_bits);
  ServiceMoments out;
  for (std::size_t m = 1; m <= surv.size(); ++m) {
    out.mean_slots += surv[m - 1];
    out.second_moment_slots2 += static_cast<double>(2 * m - 1) * surv[m - 1];
  }
  out.rho = arrival_rate * out.mean_slots;
  return out;
}

/// How the mean residual service term of the priority formula is scaled.
enum class ResidualTerm {
  kHalf,       ///< sum lambda E[s^2] / 2: standard M/G/1 preemptive-resume
  kAsPrinted,  ///< sum lambda E[s^2] without the factor 1/2
};

/// Mean sojourn time of the class at priority position `j` (0-based) under
/// preemptive-resume priority, `classes` ordered from highest priority.
inline double priority_delay(std::span<const ServiceMoments> classes, std::size_t j,
                             ResidualTerm residual = ResidualTerm::kHalf) {
  if (j >= classes.size()) throw std::out_of_range("priority class index");
  double higher = 0.0;  // load of classes ahead of j
  double residual_sum = 0.0;
  for (std::size_t l = 0; l < j; ++l) {
    higher += classes[l].rho;
    residual_sum += classes[l].arrival_rate() * classes[l].second_moment_slots2;
  }
  residual_sum += classes[j].arrival_rate() * classes[j].second_moment_slots2;
  if (residual == ResidualTerm::kHalf) residual_sum *= 0.5;
  const double d1 = 1.0 - higher;
  const double d2 = 1.0 - higher - classes[j].rho;
  if (!(d1 > 0.0) || !(d2 > 0.0)) {
    throw InstabilityError("priority class " + std::to_string(j) +
                           " is unstable: cumulative load >= 1");
  }
  return classes[j].mean_slots / d1 + residual_sum / (d1 * d2);
}

/// Delays of every SU under `order` (order[0] = highest priority), indexed by SU.
inline std::vector<double> priority_delays(std::span<const ServiceMoments> by_su,
                                           std::span<const std::size_t> order,
                                           ResidualTerm residual = ResidualTerm::kHalf) {
  std::vector<ServiceMoments> ordered;
  ordered.reserve(order.size());
  for (std::size_t su : order) ordered.push_back(by_su[su]);
  std::vector<double> out(by_su.size(), 0.0);
  for (std::size_t j = 0; j < order.size(); ++j) {
    out[order[j]] = priority_delay(ordered, j, residual);
  }
  return out;
}

inline double total_load(std::span<const ServiceMoments> classes) noexcept {
  double r = 0.0;
  for (const auto& c : classes) r += c.rho;
  return r;
}

/// Weighted-delay term sum_j c_{pi_j} lambda_{pi_j} W_{pi_j} for a candidate
/// priority order, with per-SU weights c (the virtual queue backlogs).
inline double weighted_delay_cost(std::span<const double> weights,
                                  std::span<const ServiceMoments> by_su,
                                  std::span<const std::size_t> order,
                                  ResidualTerm residual = ResidualTerm::kHalf) {
  const auto w = priority_delays(by_su, order, residual);
  double cost = 0.0;
  for (std::size_t i = 0; i < by_su.size(); ++i) {
    cost += weights[i] * by_su[i].arrival_rate() * w[i];
  }
  return cost;
}

/// Some static priority order whose predicted delays meet every bound scaled
/// by `margin` (< 1 asks for strict feasibility), or nullopt. Exhaustive over
/// all N! orders.
inline std::optional<std::vector<std::size_t>> feasible_priority_order(
    std::span<const ServiceMoments> by_su, std::span<const double> bounds,
    double margin = 1.0, ResidualTerm residual = ResidualTerm::kHalf) {
  std::vector<std::size_t> order(by_su.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (total_load(by_su) >= 1.0) return std::nullopt;
  do {
    const auto w = priority_delays(by_su, order, residual);
    bool ok = true;
    for (std::size_t i = 0; i < w.size() && ok; ++i) ok = w[i] <= margin * bounds[i];
    if (ok) return order;
  } while (std::next_permutation(order.begin(), order.end()));
  return std::nullopt;
}

/// Base arrival rate lambda such that sum_i weight_i * lambda * E[s_i] equals
/// the target load.
inline double base_rate_for_load(double target_load, std::span<const double> weights,
                                 std::span<const double> mean_service) {
  double per_unit = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) per_unit += weights[i] * mean_service[i];
  if (!(per_unit > 0.0)) throw std::invalid_argument("zero load per unit arrival rate");
  return target_load / per_unit;
}

}  // namespace crsched
