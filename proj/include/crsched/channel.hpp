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
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crsched/rng.hpp"

namespace crsched {

/// A value with an attached probability weight.
struct WeightedPoint {
  double value = 0.0;
  double weight = 0.0;
};

enum class GainKind { kTruncatedExponential, kDiscreteTable, kConstant };

inline std::string_view to_string(GainKind kind) {
  switch (kind) {
    case GainKind::kTruncatedExponential: return "truncated-exponential";
    case GainKind::kDiscreteTable: return "discrete-table";
    case GainKind::kConstant: return "constant";
  }
  return "?";
}

inline GainKind parse_gain_kind(std::string_view s) {
  if (s == "truncated-exponential" || s == "exponential") {
    return GainKind::kTruncatedExponential;
  }
  if (s == "discrete-table" || s == "table") return GainKind::kDiscreteTable;
  if (s == "constant") return GainKind::kConstant;
  throw std::invalid_argument("unknown gain distribution kind '" +
                              std::string(s) + "'");
}

/// Law of one link's per-slot power gain. Immutable after construction.
///
/// For the truncated exponential, `mean` is the parameter of the parent
/// exponential and `max` the truncation point; mean() returns the mean of the
/// truncated law. Samples are drawn by inverting the truncated CDF, which has
/// the same law as resampling the parent until it falls at or below `max`.
class GainDistribution {
 public:
  static GainDistribution constant(double value) {
    GainDistribution d(GainKind::kConstant, value, value);
    d.points_ = {{value, 1.0}};
    d.validate();
    return d;
  }

  static GainDistribution truncated_exponential(double mean, double max) {
    GainDistribution d(GainKind::kTruncatedExponential, mean, max);
    d.validate();
    return d;
  }

  /// Default truncation at ten times the parent mean.
  static GainDistribution truncated_exponential(double mean) {
    return truncated_exponential(mean, 10.0 * mean);
  }

  static GainDistribution table(std::vector<WeightedPoint> points) {
    if (points.empty()) {
      throw std::invalid_argument("discrete-table gain needs at least one point");
    }
    std::sort(points.begin(), points.end(),
              [](const WeightedPoint& a, const WeightedPoint& b) {
                return a.value < b.value;
              });
    double mean = 0.0;
    for (const auto& p : points) mean += p.value * p.weight;
    GainDistribution d(GainKind::kDiscreteTable, mean, points.back().value);
    d.points_ = std::move(points);
    d.validate();
    return d;
  }

  GainKind kind() const noexcept { return kind_; }
  /// Configured mean: the parent-exponential parameter for truncated laws.
  double parameter_mean() const noexcept { return mean_; }
  double max() const noexcept { return max_; }
  std::span<const WeightedPoint> points() const noexcept { return points_; }

  /// Mean of the law actually sampled (post-truncation).
  double mean() const noexcept {
    switch (kind_) {
      case GainKind::kConstant: return mean_;
      case GainKind::kDiscreteTable: {
        double m = 0.0;
        for (const auto& p : points_) m += p.value * p.weight;
        return m;
      }
      case GainKind::kTruncatedExponential: {
        const double a = max_ / mean_;
        // E[X | X <= M] = mu - M e^{-M/mu} / (1 - e^{-M/mu})
        return mean_ - max_ * std::exp(-a) / (-std::expm1(-a));
      }
    }
    return mean_;
  }

  double cdf(double x) const noexcept {
    if (x <= 0.0) return 0.0;
    if (x >= max_) return 1.0;
    switch (kind_) {
      case GainKind::kConstant: return x >= mean_ ? 1.0 : 0.0;
      case GainKind::kDiscreteTable: {
        double c = 0.0;
        for (const auto& p : points_) {
          if (p.value > x) break;
          c += p.weight;
        }
        return c;
      }
      case GainKind::kTruncatedExponential:
        return std::expm1(-x / mean_) / tail_;
    }
    return 0.0;
  }

  /// Inverse CDF for u in (0, 1]; the result lies in (0, max].
  double quantile(double u) const noexcept {
    switch (kind_) {
      case GainKind::kConstant: return mean_;
      case GainKind::kDiscreteTable: {
        double c = 0.0;
        for (const auto& p : points_) {
          c += p.weight;
          if (u <= c) return p.value;
        }
        return points_.back().value;
      }
      case GainKind::kTruncatedExponential: {
        const double x = -mean_ * std::log1p(u * tail_);
        return std::clamp(x, std::numeric_limits<double>::min(), max_);
      }
    }
    return mean_;
  }

  /// Quadrature representation of the law: points and weights such that
  /// sum w f(x) approximates E[f(X)]. Continuous laws use composite
  /// Gauss-Legendre panels over [0, max] against the density; `kinks` are gain
  /// values where the integrand is not smooth and become panel edges.
  std::vector<WeightedPoint> quadrature(std::span<const double> kinks = {},
                                        int panels = 256) const {
    if (kind_ != GainKind::kTruncatedExponential) return points_;
    std::vector<double> edges{0.0, max_};
    for (double k : kinks) {
      if (k > 0.0 && k < max_) edges.push_back(k);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    // 8-point Gauss-Legendre on [-1, 1].
    static constexpr double kNodes[4] = {0.1834346424956498, 0.5255324099163290,
                                         0.7966664774136267, 0.9602898564975363};
    static constexpr double kWeights[4] = {0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};
    const double norm = -1.0 / (mean_ * tail_);  // density is norm * exp(-x / mean)
    std::vector<WeightedPoint> out;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
      const double span = edges[s + 1] - edges[s];
      const int count = std::max(1, static_cast<int>(std::ceil(panels * span / max_)));
      const double width = span / count;
      for (int p = 0; p < count; ++p) {
        const double mid = edges[s] + (p + 0.5) * width;
        for (int q = 0; q < 4; ++q) {
          for (double sign : {-1.0, 1.0}) {
            const double x = mid + sign * kNodes[q] * 0.5 * width;
            out.push_back({x, kWeights[q] * 0.5 * width * norm * std::exp(-x / mean_)});
          }
        }
      }
    }
    return out;
  }

 private:
  GainDistribution(GainKind kind, double mean, double max)
      : kind_(kind), mean_(mean), max_(max), tail_(std::expm1(-max / mean)) {}

  void validate() const {
    if (!(mean_ > 0.0) || !std::isfinite(mean_)) {
      throw std::invalid_argument("gain mean must be positive");
    }
    if (!(max_ >= mean_) || !std::isfinite(max_)) {
      throw std::invalid_argument("gain max must be finite and >= mean");
    }
    if (kind_ == GainKind::kDiscreteTable) {
      double total = 0.0;
      for (const auto& p : points_) {
        if (!(p.value > 0.0) || p.value > max_) {
          throw std::invalid_argument("table gain support must lie in (0, max]");
        }
        if (!(p.weight >= 0.0)) {
          throw std::invalid_argument("table probabilities must be non-negative");
        }
        total += p.weight;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("table probabilities must sum to 1");
      }
    }
  }

  GainKind kind_;
  double mean_;
  double max_;
  double tail_;  // expm1(-max / mean), the negated truncated mass
  std::vector<WeightedPoint> points_;
};

inline double expected_gain(const GainDistribution& dist) noexcept {
  return dist.mean();
}

/// Gain laws of one SU: to the base station (gamma) and to the PU (g).
struct LinkPair {
  GainDistribution to_base;
  GainDistribution to_primary;
};

/// One slot's gains for every SU.
struct ChannelDraw {
  std::vector<double> gamma;
  std::vector<double> g;
};

/// Per-SU, per-link gain streams derived from one master seed. Gains for
/// (su, slot) are a pure function of the seed, so adding an SU never perturbs
/// the draws of the others and draws may be evaluated lazily.
class ChannelModel {
 public:
  ChannelModel(std::vector<LinkPair> links, std::uint64_t seed)
      : links_(std::move(links)) {
    if (links_.empty()) throw std::invalid_argument("channel needs N >= 1");
    base_streams_.reserve(links_.size());
    primary_streams_.reserve(links_.size());
    for (std::size_t i = 0; i < links_.size(); ++i) {
      base_streams_.emplace_back(seed, StreamRole::kGainToBase, i);
      primary_streams_.emplace_back(seed, StreamRole::kGainToPrimary, i);
    }
  }

  std::size_t size() const noexcept { return links_.size(); }
  const LinkPair& links(std::size_t su) const { return links_[su]; }

  double gamma(std::size_t su, std::uint64_t slot) const noexcept {
    return links_[su].to_base.quantile(base_streams_[su].uniform_open_low(slot));
  }
  double g(std::size_t su, std::uint64_t slot) const noexcept {
    return links_[su].to_primary.quantile(
        primary_streams_[su].uniform_open_low(slot));
  }

  ChannelDraw sample_slot(std::uint64_t slot) const {
    ChannelDraw d;
    d.gamma.resize(size());
    d.g.resize(size());
    for (std::size_t i = 0; i < size(); ++i) {
      d.gamma[i] = gamma(i, slot);
      d.g[i] = g(i, slot);
    }
    return d;
  }

 private:
  std::vector<LinkPair> links_;
  std::vector<CounterStream> base_streams_;
  std::vector<CounterStream> primary_streams_;
};

}  // namespace crsched
