// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bootperc/bootperc.hpp"

using namespace bootperc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Hybrid strategy for an arbitrary small instance: the model-derived one when the instance
// has a trajectory curve, otherwise a diagonal schedule so the rule is still exercised.
Strategy small_hybrid(const ModelParams& m, bool& model_based) {
  model_based = false;
  try {
    if (m.n2 > 0 && m.p1 > 0 && m.p2 > 0 && m.q > 0 && m.a1 + m.a2 > 0) {
      model_based = true;
      return hybrid_for_model(m);
    }
  } catch (const std::exception&) {
    model_based = false;
  }
  const SampledCurve diag({0.0, 1.0}, {0.0, 1.0}, 1.0);
  return Strategy::hybrid(build_schedule(ScheduleScale{3.0, 3.0, m.n1, m.n2}, diag));
}

Outcome equivalence_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0, 1);
  int instances = 0;
  int failures = 0;
  int model_hybrids = 0;
  for (int k = 0; k < 1000; ++k) {
    ModelParams m;
    m.n1 = 1 + static_cast<std::int64_t>(u(rng) * 150);
    m.n2 = std::min<std::int64_t>(static_cast<std::int64_t>(u(rng) * 100), 200 - m.n1);
    m.r = 2 + k % 2;
    // mix sparse and dense regimes
    const double scale = u(rng) < 0.5 ? 0.05 : 0.3;
    m.p1 = scale * u(rng);
    m.p2 = scale * u(rng);
    m.q = scale * u(rng);
    m.a1 = static_cast<std::int64_t>(u(rng) * 0.25 * static_cast<double>(m.n1));
    m.a2 = static_cast<std::int64_t>(u(rng) * 0.25 * static_cast<double>(m.n2));
    const auto seed = static_cast<std::uint64_t>(k);
    const SbmGraph g = generate_graph(m, seed);
    const SeedSet s = sample_seeds(m, seed);
    const std::int64_t expected = run_cascade(g, s, m.r).final_active;
    bool model_based = false;
    const std::vector<Strategy> strategies{Strategy::max(), Strategy::roundrobin(), small_hybrid(m, model_based)};
    model_hybrids += model_based;
    ++instances;
    for (const Strategy& st : strategies) {
      try {
        if (run_chain(g, s, m.r, st, {seed, 0}).final_active != expected) ++failures;
      } catch (const std::exception&) {
        ++failures;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 60.0,
          fmt("%d instances x 3 strategies, %d mismatches, %d model-derived hybrid schedules, %.1fs",
              instances, failures, model_hybrids, secs)};
}

Outcome caption_points() {
  auto diag = [](double a1, double a2) { return classify(AsymptoticParams::make(1, 1, 0.6, 2, a1, a2)); };
  const PhaseDiagnosis sub = diag(0.56, 0.10);
  const PhaseDiagnosis mid = diag(0.60, 0.175);
  const PhaseDiagnosis sup = diag(0.60, 0.40);
  const bool mid_ok = mid.regime == Regime::crit || std::abs(mid.min_rho1) < 1e-3;
  const bool ok = sub.regime == Regime::sub && sup.regime == Regime::sup && mid_ok;
  return {ok, fmt("(0.56,0.10)=%s, (0.60,0.175)=%s min_rho1=%.3g, (0.60,0.40)=%s",
                  std::string(to_string(sub.regime)).c_str(), std::string(to_string(mid.regime)).c_str(),
                  mid.min_rho1, std::string(to_string(sup.regime)).c_str())};
}

Outcome neutral_curve() {
  const auto pts = critical_curve(chi(1, 1, 1, 2), 2, default_y1_grid(2, 2001));
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, std::abs(p.alpha1 + p.alpha2 - 0.5));
  return {!pts.empty() && worst < 1e-9, fmt("%zu points, max |alpha1+alpha2-0.5| = %.2e", pts.size(), worst)};
}

Outcome curve_self_consistency() {
  const auto t0 = Clock::now();
  int total = 0;
  int crit_ok = 0;
  int below_ok = 0;
  int above_ok = 0;
  std::ostringstream misses;
  for (const char* family : {"gammavary", "rvary", "nuvary", "muvary"}) {
    for (const FiniteMapping& f : preset(family).shapes) {
      const auto pts = critical_curve(chi(f.nu, f.mu, f.gamma, f.r), f.r, default_y1_grid(f.r, 201));
      for (const auto& p : pts) {
        if (std::max(p.alpha1, p.alpha2) <= 0.0) continue;
        ++total;
        auto regime = [&](double s) {
          return classify(AsymptoticParams::make(f.nu, f.mu, f.gamma, f.r, s * p.alpha1, s * p.alpha2)).regime;
        };
        const bool c = regime(1.0) == Regime::crit;
        crit_ok += c;
        below_ok += regime(0.95) == Regime::sub;
        above_ok += regime(1.05) == Regime::sup;
        if (!c && misses.tellp() < 200) {
          misses << " [" << family << " r=" << f.r << " g=" << f.gamma << " nu=" << f.nu << " mu=" << f.mu
                 << " a=(" << p.alpha1 << "," << p.alpha2 << ")]";
        }
      }
    }
  }
  const double need = 0.99 * total;
  const bool ok = total > 0 && crit_ok >= need && below_ok >= need && above_ok >= need;
  return {ok, fmt("%d curve points over 17 curves: Crit %d, 0.95x Sub %d, 1.05x Sup %d (%.1fs)%s", total,
                  crit_ok, below_ok, above_ok, seconds_since(t0), misses.str().c_str())};
}

ExperimentConfig desk_config(double a1, double a2, double g1 = 100.0) {
  ExperimentConfig c;
  c.model.r = 2;
  c.model.gamma = 0.6;
  c.model.g1 = g1;
  c.model.n1 = 200000;
  c.points = {{a1, a2}};
  c.replicas = 200;
  c.seed = 31337;
  return c;
}

Outcome subcritical_concentration() {
  const auto t0 = Clock::now();
  const double x_star = classify(AsymptoticParams::make(1, 1, 0.6, 2, 0.2, 0.2)).fixed_point->x_star;
  const PointSummary p = run_experiment(desk_config(0.2, 0.2)).points.front();
  const PointSummary p2 = run_experiment(desk_config(0.2, 0.2, 200.0)).points.front();
  const double secs = seconds_since(t0);
  const double ratio = p.median / x_star;
  const double out1 = p.outlier_fraction.value_or(1.0);
  const double out2 = p2.outlier_fraction.value_or(1.0);
  const bool conc = ratio >= 0.85 && ratio <= 1.15;
  const bool decay = out2 < out1 || (out1 == 0.0 && out2 == 0.0);
  return {conc && decay && secs < 300.0,
          fmt("median |G|/g1 = %.4f, x* = %.6f, ratio %.3f; outliers >25%%: %.3f at g1=100, %.3f at g1=200; %.1fs",
              p.median, x_star, ratio, out1, out2, secs)};
}

Outcome supercritical_percolation() {
  const auto t0 = Clock::now();
  const PointSummary p = run_experiment(desk_config(0.6, 0.4)).points.front();
  const double secs = seconds_since(t0);
  return {p.percolation_probability >= 0.95 && secs < 600.0,
          fmt("%.1f%% of %d replicas reach |G|/n >= 0.95 (median |G|/g1 = %.1f, n = %lld); %.1fs",
              100.0 * p.percolation_probability, p.replicas, p.median, static_cast<long long>(p.model.n()), secs)};
}

Outcome er_special_case() {
  const auto t0 = Clock::now();
  const double reference = er_subcritical_limit(2, 0.5);
  const double phi = er_phi(2, 0.5);
  const double residual = std::abs(2 * phi - phi * phi - 0.5);
  ExperimentConfig c = desk_config(0.5, 0.0);
  c.model.single_community = true;
  const PointSummary p = run_experiment(c).points.front();
  const double dev = std::abs(p.median / reference - 1.0);
  return {dev <= 0.15 && residual < 1e-12,
          fmt("median |G|/g1 = %.4f vs %.6f (%.1f%% off); phi residual %.1e; "
              "diagnostic: median |G|/a1 = %.4f, limit of |G|/g1 from rho is %.4f; %.1fs",
              p.median, reference, 100 * dev, residual, p.median_over_seeds, p.predicted_x_star.value_or(0.0),
              seconds_since(t0))};
}

Outcome lemma_convergence() {
  const auto a = AsymptoticParams::make(1, 1, 0.25, 2, 0.56, 0.10);
  const auto rows = convergence_study(a, {0.3, 0.2}, {10000, 100000, 1000000, 10000000});
  const ConvergenceRow& last = rows.back();
  const bool ok = last.error1 < 0.05 && last.error2 < 0.05 && std::abs(last.ratio1 - 1) <= 0.1 &&
                  std::abs(last.ratio2 - 1) <= 0.1;
  std::ostringstream os;
  for (const auto& r : rows) {
    os << fmt(" n=%lld err=(%.4f,%.4f) ratio=(%.4f,%.4f)", static_cast<long long>(r.n), r.error1, r.error2,
              r.ratio1, r.ratio2);
  }
  return {ok, "ladder:" + os.str()};
}

Outcome bound_validity() {
  int checked = 0;
  int violations = 0;
  int far_checked = 0;
  const double e2 = std::exp(2.0);
  for (int i = 1; i <= 10; ++i) {
    const std::int64_t m = 25 * i;
    for (int j = 1; j <= 10; ++j) {
      const double q = 0.009 * j * j;  // 0.009 .. 0.9
      const double mu = static_cast<double>(m) * q;
      for (double f : {0.3, 0.7, 1.3, 2.0, e2 + 0.5}) {
        const auto k = std::llround(mu * f);
        if (k <= 0 || k >= m) continue;
        const auto kd = static_cast<double>(k);
        ++checked;
        if (kd >= mu) {
          violations += binomial_upper_tail(m, q, k) > binomial_tail_bound(m, q, kd, TailDirection::upper);
          if (kd >= e2 * mu) {
            ++far_checked;
            violations += binomial_upper_tail(m, q, k) > binomial_tail_bound(m, q, kd, TailDirection::upper_far);
          }
        } else {
          violations += binomial_lower_tail(m, q, k) > binomial_tail_bound(m, q, kd, TailDirection::lower);
        }
      }
    }
  }
  const bool h_ok = rate_function(1.0) == 0.0;
  return {violations == 0 && h_ok && checked >= 300,
          fmt("%d grid points (%d far-tail), %d violations, H(1) = %g", checked, far_checked, violations,
              rate_function(1.0))};
}

Outcome schedule_fidelity() {
  int runs = 0;
  int mismatches = 0;
  int sum_violations = 0;
  std::int64_t followed_steps = 0;
  FiniteMapping f;
  f.n1 = 50000;
  std::vector<std::pair<FiniteMapping, std::pair<double, double>>> cases;
  cases.push_back({f, {0.2, 0.2}});
  cases.push_back({f, {0.56, 0.10}});
  FiniteMapping g = f;
  g.nu = 2.0;
  g.mu = 1.5;
  g.gamma = 0.4;
  cases.push_back({g, {0.5, 0.2}});
  FiniteMapping h = f;
  h.r = 3;
  h.gamma = 0.25;
  cases.push_back({h, {0.3, 0.4}});
  for (const auto& [shape, alpha] : cases) {
    const ModelParams m = map_to_model(shape, alpha.first, alpha.second);
    const Strategy hy = hybrid_for_model(m);
    const DeterministicSchedule& s = *hy.schedule();
    for (std::int64_t t = 0; t <= s.horizon(); ++t) {
      sum_violations += s.w(Community::one, t) + s.w(Community::two, t) != t;
    }
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      ChainOptions opt;
      opt.rng_seed = derive_key(99, {seed});
      opt.trajectory_stride = 1;
      const RunRecord rec = run_chain_lazy(m, hy, opt);
      ++runs;
      for (const Snapshot& sn : rec.trajectory) {
        if (sn.t >= *rec.t_prime) break;
        ++followed_steps;
        mismatches += sn.U1 != s.w(Community::one, sn.t) || sn.U2 != s.w(Community::two, sn.t);
      }
    }
  }
  return {mismatches == 0 && sum_violations == 0,
          fmt("%d sub-critical runs, %lld steps before T', %d schedule mismatches, %d w1+w2!=t", runs,
              static_cast<long long>(followed_steps), mismatches, sum_violations)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"chain/cascade equivalence", equivalence_oracle},
      {"classification of the chi=0.6 points", caption_points},
      {"neutral critical curve", neutral_curve},
      {"critical curve self-consistency", curve_self_consistency},
      {"sub-critical concentration", subcritical_concentration},
      {"super-critical percolation", supercritical_percolation},
      {"single-community limit", er_special_case},
      {"R and b convergence", lemma_convergence},
      {"binomial tail bounds", bound_validity},
      {"hybrid schedule fidelity", schedule_fidelity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << (i + 1) << " [" << criteria[i].first << "]: " << (o.pass ? "PASS" : "FAIL")
              << " | " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
