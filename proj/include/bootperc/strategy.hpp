#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bootperc/model.hpp"
#include "bootperc/phase.hpp"

namespace bootperc {

/// What a strategy may look at before step t: t itself and the counters U(t-1), A(t-1).
struct Observation {
  std::int64_t t = 0;
  std::array<std::int64_t, 2> used{};
  std::array<std::int64_t, 2> active{};

  std::int64_t frontier(Community c) const noexcept { return active[index(c)] - used[index(c)]; }
};

/// Run-local bookkeeping of a strategy (only the hybrid rule uses it).
struct SelectionState {
  bool on_schedule = true;
  std::optional<std::int64_t> t_prime;
};

/// Piecewise-linear, component-wise non-decreasing curve starting at (0, 0), optionally
/// continued past its last sample by a straight line of slope `extension_slope`.
class SampledCurve {
 public:
  SampledCurve() = default;

  SampledCurve(std::vector<double> x1, std::vector<double> x2,
               std::optional<double> extension_slope = std::nullopt)
      : x1_(std::move(x1)), x2_(std::move(x2)), slope_(extension_slope) {
    if (x1_.empty() || x1_.size() != x2_.size()) {
      throw std::invalid_argument("SampledCurve: need matching, non-empty sample arrays");
    }
    if (x1_.front() != 0.0 || x2_.front() != 0.0) {
      throw std::invalid_argument("SampledCurve: curve must start at (0, 0)");
    }
    for (std::size_t k = 1; k < x1_.size(); ++k) {
      if (!(x1_[k] >= x1_[k - 1]) || !(x2_[k] >= x2_[k - 1])) {
        throw std::invalid_argument("SampledCurve: samples must be non-decreasing in both components");
      }
    }
    if (slope_ && !(*slope_ > 0.0)) {
      throw std::invalid_argument("SampledCurve: extension slope must be > 0");
    }
  }

  const std::vector<double>& x1() const noexcept { return x1_; }
  const std::vector<double>& x2() const noexcept { return x2_; }
  std::optional<double> extension_slope() const noexcept { return slope_; }
  bool extended() const noexcept { return slope_.has_value(); }
  double x1_end() const noexcept { return x1_.back(); }

  /// Curve value at x (right-continuous at vertical segments).
  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= x1_.back()) {
      if (x == x1_.back() || !slope_) {
        if (x > x1_.back()) throw std::domain_error("SampledCurve: x beyond the sampled range");
        return x2_.back();
      }
      return x2_.back() + *slope_ * (x - x1_.back());
    }
    const auto it = std::upper_bound(x1_.begin(), x1_.end(), x);
    const auto j = static_cast<std::size_t>(it - x1_.begin());
    const double t = (x - x1_[j - 1]) / (x1_[j] - x1_[j - 1]);
    return x2_[j - 1] + t * (x2_[j] - x2_[j - 1]);
  }

  /// inf{x >= 0 : curve(x) >= y}; +infinity when the curve never reaches y.
  double inverse(double y) const noexcept {
    if (y <= 0.0) return 0.0;
    if (y > x2_.back()) {
      if (!slope_) return std::numeric_limits<double>::infinity();
      return x1_.back() + (y - x2_.back()) / *slope_;
    }
    const auto it = std::lower_bound(x2_.begin(), x2_.end(), y);
    const auto j = static_cast<std::size_t>(it - x2_.begin());
    const double t = (y - x2_[j - 1]) / (x2_[j] - x2_[j - 1]);
    return x1_[j - 1] + t * (x1_[j] - x1_[j - 1]);
  }

 private:
  std::vector<double> x1_{0.0};
  std::vector<double> x2_{0.0};
  std::optional<double> slope_;
};

/// Default slope of the straight continuation: the curve's average slope over the last
/// decile of its x1 range, clamped to [0.1, 10].
inline double default_extension_slope(const SampledCurve& c) {
  const double end = c.x1_end();
  if (!(end > 0.0)) return 1.0;
  const double start = 0.9 * end;
  const double slope = (c(end) - c(start)) / (end - start);
  return std::clamp(slope, 0.1, 10.0);
}

/// zeta-bar: 0 on [0, x1^(0)], then the curve rho1 = rho2 up to x1^(1); with `extended`,
/// continued by a line of slope theta0 (default_extension_slope when not given).
inline SampledCurve trajectory_curve(const AsymptoticParams& a, bool extended,
                                     std::optional<double> theta0 = std::nullopt,
                                     int samples = 2048, const PhaseTolerances& tol = {}) {
  if (a.alpha1 > 1.0) {
    throw std::domain_error("trajectory_curve: alpha1 > 1 has no rho1 = rho2 curve");
  }
  const RhoField f(a);
  const CurveEndpoints ends = curve_endpoints(f, tol);
  std::vector<double> x1{0.0};
  std::vector<double> x2{0.0};
  if (ends.x1_start > 0.0) {
    x1.push_back(ends.x1_start);
    x2.push_back(0.0);
  }
  const int n = std::max(samples, 2);
  for (int k = 1; k < n; ++k) {
    const double x = k == n - 1 ? ends.x1_end
                                : ends.x1_start + (ends.x1_end - ends.x1_start) * k / (n - 1);
    const double z = std::max(zeta_curve(f, ends, x, tol), x2.back());
    if (x > x1.back() || z > x2.back()) {
      x1.push_back(std::max(x, x1.back()));
      x2.push_back(z);
    }
  }
  SampledCurve base(x1, x2);
  if (!extended) return base;
  return SampledCurve(std::move(x1), std::move(x2), theta0 ? *theta0 : default_extension_slope(base));
}

/// Integer schedule (w1(t), w2(t)), t = 0..horizon, with w1 + w2 = t and unit increments.
class DeterministicSchedule {
 public:
  DeterministicSchedule() = default;
  DeterministicSchedule(std::vector<std::int64_t> w1, std::vector<std::int64_t> w2, SampledCurve curve)
      : w1_(std::move(w1)), w2_(std::move(w2)), curve_(std::move(curve)) {}

  std::int64_t horizon() const noexcept { return static_cast<std::int64_t>(w1_.size()) - 1; }
  std::int64_t w(Community c, std::int64_t t) const {
    return (c == Community::one ? w1_ : w2_).at(static_cast<std::size_t>(t));
  }
  const std::vector<std::int64_t>& w1() const noexcept { return w1_; }
  const std::vector<std::int64_t>& w2() const noexcept { return w2_; }
  const SampledCurve& curve() const noexcept { return curve_; }

  /// Community whose prescribed count rises at step t (1 <= t <= horizon).
  Community increment(std::int64_t t) const {
    return w(Community::one, t) > w(Community::one, t - 1) ? Community::one : Community::two;
  }

  void swap_communities() noexcept { w1_.swap(w2_); }

 private:
  std::vector<std::int64_t> w1_{0};
  std::vector<std::int64_t> w2_{0};
  SampledCurve curve_;
};

/// Scales the curve is drawn against: g_i turns x into node counts, n_i caps them.
struct ScheduleScale {
  double g1 = 1.0;
  double g2 = 1.0;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
};

/// Walk v(x) = floor(x g1) + floor(curve(x) g2) event by event. Each jump of one of the two
/// floors adds one step; simultaneous jumps give community 1 its step first. Counts
/// saturate at n_i, and the schedule ends when neither count can rise any more.
inline DeterministicSchedule build_schedule(const ScheduleScale& s, const SampledCurve& curve) {
  if (!(s.g1 > 0.0 && s.g2 > 0.0)) throw std::invalid_argument("build_schedule: g_i must be > 0");
  if (s.n1 < 0 || s.n2 < 0) throw std::invalid_argument("build_schedule: n_i must be >= 0");
  const double inf = std::numeric_limits<double>::infinity();
  const double x_max = curve.extended() ? inf : curve.x1_end();
  std::vector<std::int64_t> w1{0};
  std::vector<std::int64_t> w2{0};
  std::int64_t f1 = 0;
  std::int64_t f2 = 0;
  while (true) {
    double next1 = inf;
    if (f1 < s.n1) {
      next1 = static_cast<double>(f1 + 1) / s.g1;
      if (next1 > x_max) next1 = inf;
    }
    const double next2 = f2 < s.n2 ? curve.inverse(static_cast<double>(f2 + 1) / s.g2) : inf;
    if (next1 == inf && next2 == inf) break;
    if (next1 <= next2) {
      ++f1;
    } else {
      ++f2;
    }
    w1.push_back(f1);
    w2.push_back(f2);
  }
  return DeterministicSchedule(std::move(w1), std::move(w2), curve);
}

/// Schedule for a finite model from the curve of its limit parameters `a`. When `a` had its
/// community labels exchanged, the curve is drawn in that frame and mapped back.
inline DeterministicSchedule build_schedule(const ModelParams& model, const AsymptoticParams& a,
                                            const SampledCurve& curve) {
  const CriticalScale g = derive_critical_scale(model);
  if (!(g.g2 > 0.0)) throw std::invalid_argument("build_schedule: model needs two communities");
  ScheduleScale s{g.g1, g.g2, model.n1, model.n2};
  if (a.swapped) s = ScheduleScale{g.g2, g.g1, model.n2, model.n1};
  DeterministicSchedule out = build_schedule(s, curve);
  if (a.swapped) out.swap_communities();
  return out;
}

enum class StrategyKind { max, roundrobin, hybrid };

/// Community-selection rule for the binomial chain. Immutable; share freely between runs.
class Strategy {
 public:
  static Strategy max() { return Strategy(StrategyKind::max, nullptr); }
  static Strategy roundrobin() { return Strategy(StrategyKind::roundrobin, nullptr); }
  static Strategy hybrid(DeterministicSchedule schedule) {
    return Strategy(StrategyKind::hybrid,
                    std::make_shared<const DeterministicSchedule>(std::move(schedule)));
  }

  StrategyKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept {
    switch (kind_) {
      case StrategyKind::max: return "max";
      case StrategyKind::roundrobin: return "roundrobin";
      case StrategyKind::hybrid: return "hybrid";
    }
    return "?";
  }
  const DeterministicSchedule* schedule() const noexcept { return schedule_.get(); }

  Community select(const Observation& o, SelectionState& state) const {
    switch (kind_) {
      case StrategyKind::max:
        return select_max(o);
      case StrategyKind::roundrobin: {
        const Community preferred = o.t % 2 == 1 ? Community::one : Community::two;
        return o.frontier(preferred) > 0 ? preferred : other(preferred);
      }
      case StrategyKind::hybrid:
        if (state.on_schedule) {
          const DeterministicSchedule& s = *schedule_;
          const bool beyond = o.t > s.horizon();
          if (beyond || o.active[0] < s.w(Community::one, o.t) ||
              o.active[1] < s.w(Community::two, o.t)) {
            state.on_schedule = false;
            state.t_prime = o.t;
          } else {
            return s.increment(o.t);
          }
        }
        return select_max(o);
    }
    return Community::one;
  }

  /// Community 1 iff its frontier is at least community 2's.
  static Community select_max(const Observation& o) noexcept {
    return o.frontier(Community::one) >= o.frontier(Community::two) ? Community::one
                                                                    : Community::two;
  }

 private:
  Strategy(StrategyKind kind, std::shared_ptr<const DeterministicSchedule> s)
      : kind_(kind), schedule_(std::move(s)) {}

  StrategyKind kind_;
  std::shared_ptr<const DeterministicSchedule> schedule_;
};

/// Hybrid strategy for a finite two-community model: schedule from zeta-bar when the limit
/// parameters are sub-critical, from its straight-line continuation otherwise.
inline Strategy hybrid_for_model(const ModelParams& model, std::optional<double> theta0 = std::nullopt) {
  const AsymptoticParams a = asymptotic_from_model(model);
  if (a.alpha1 > 1.0) {
    throw std::domain_error("hybrid_for_model: alpha1 > 1, no trajectory curve to follow");
  }
  const bool sub = classify(a).regime == Regime::sub;
  return Strategy::hybrid(build_schedule(model, a, trajectory_curve(a, !sub, theta0)));
}

inline Strategy strategy_from_name(std::string_view name, const ModelParams* model = nullptr) {
  if (name == "max") return Strategy::max();
  if (name == "roundrobin") return Strategy::roundrobin();
  if (name == "hybrid") {
    if (model == nullptr) throw std::invalid_argument("hybrid strategy needs a model");
    return hybrid_for_model(*model);
  }
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

}  // namespace bootperc
