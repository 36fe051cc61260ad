#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bootperc/chain.hpp"
#include "bootperc/graph.hpp"
#include "bootperc/model.hpp"
#include "bootperc/phase.hpp"
#include "bootperc/strategy.hpp"

namespace bootperc {

inline constexpr std::string_view kCodeVersion = "0.1.0";

/// Limit shape of a family of finite models, plus the knobs that pin one finite instance.
struct FiniteMapping {
  int r = 2;
  double gamma = 0.6;
  double nu = 1.0;
  double mu = 1.0;
  double g1 = 100.0;          // target critical scale of community 1
  std::int64_t n1 = 200000;
  bool single_community = false;  // n2 = 0: plain G(n1, p1)
};

/// Finite model for seed fractions (alpha1, alpha2): p1 solves g(n1, p1) = g1, then
/// n2 = n1/nu, p2 = p1/mu, q = gamma p1 and a_i = round(alpha_i g_i).
inline ModelParams map_to_model(const FiniteMapping& f, double alpha1, double alpha2) {
  if (f.r < 2 || f.n1 < 1 || !(f.g1 > 0.0) || !(f.nu > 0.0) || !(f.mu > 0.0) || !(f.gamma > 0.0)) {
    throw std::invalid_argument("map_to_model: invalid mapping parameters");
  }
  if (alpha1 < 0.0 || alpha2 < 0.0) throw std::invalid_argument("map_to_model: alphas must be >= 0");
  const double rr = f.r;
  const double scale = f.g1 / (1.0 - 1.0 / rr);
  ModelParams m;
  m.r = f.r;
  m.n1 = f.n1;
  m.p1 = std::exp((std::lgamma(rr) - std::log(static_cast<double>(f.n1)) - (rr - 1.0) * std::log(scale)) / rr);
  if (f.single_community) {
    m.n2 = 0;
    m.p2 = 0.0;
    m.q = 0.0;
  } else {
    m.n2 = std::llround(static_cast<double>(f.n1) / f.nu);
    m.p2 = m.p1 / f.mu;
    m.q = f.gamma * m.p1;
  }
  const CriticalScale s = derive_critical_scale(m);
  m.a1 = std::min<std::int64_t>(std::llround(alpha1 * s.g1), m.n1);
  m.a2 = m.n2 > 0 ? std::min<std::int64_t>(std::llround(alpha2 * s.g2), m.n2) : 0;
  m.validate();
  return m;
}

struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  int steps = 11;

  std::vector<double> values() const {
    std::vector<double> v;
    if (steps <= 1) return {min};
    for (int k = 0; k < steps; ++k) v.push_back(min + (max - min) * k / (steps - 1));
    return v;
  }
};

struct ExperimentConfig {
  FiniteMapping model;
  std::vector<std::pair<double, double>> points;  // explicit (alpha1, alpha2) list
  std::optional<std::pair<GridAxis, GridAxis>> grid;  // or a full alpha1 x alpha2 grid
  int replicas = 200;
  std::uint64_t seed = 1;
  std::string strategy = "max";
  std::string engine = "lazy";  // lazy | graph
  double threshold = 0.95;
  int workers = 1;
  std::string csv_path;       // empty: no CSV
  std::string manifest_path;  // empty: no manifest

  /// Grid points in row-major order (alpha1 outer), or the explicit list.
  std::vector<std::pair<double, double>> resolved_points() const {
    if (!grid) return points;
    std::vector<std::pair<double, double>> out;
    for (double a1 : grid->first.values()) {
      for (double a2 : grid->second.values()) out.emplace_back(a1, a2);
    }
    return out;
  }

  void validate() const {
    auto fail = [](const std::string& w) { throw std::invalid_argument("ExperimentConfig: " + w); };
    if (replicas < 1) fail("replicas must be >= 1");
    if (workers < 1) fail("workers must be >= 1");
    if (!(threshold > 0.0 && threshold <= 1.0)) fail("threshold must lie in (0, 1]");
    if (engine != "lazy" && engine != "graph") fail("engine must be lazy or graph");
    if (strategy != "max" && strategy != "roundrobin" && strategy != "hybrid") fail("unknown strategy");
    const auto pts = resolved_points();
    if (pts.empty()) fail("no grid points");
    for (const auto& [a1, a2] : pts) {
      if (a1 < 0.0 || a2 < 0.0 || a1 > 1.5 || a2 > 1.5) fail("alpha points must lie in [0, 1.5]^2");
    }
  }
};

inline void to_json(nlohmann::json& j, const GridAxis& g) {
  j = {{"min", g.min}, {"max", g.max}, {"steps", g.steps}};
}
inline void from_json(const nlohmann::json& j, GridAxis& g) {
  g.min = j.value("min", 0.0);
  g.max = j.value("max", 1.0);
  g.steps = j.value("steps", 11);
}

inline void to_json(nlohmann::json& j, const FiniteMapping& f) {
  j = {{"r", f.r},   {"gamma", f.gamma}, {"nu", f.nu},
       {"mu", f.mu}, {"g1", f.g1},       {"n1", f.n1},
       {"single_community", f.single_community}};
}
inline void from_json(const nlohmann::json& j, FiniteMapping& f) {
  const FiniteMapping d;
  f.r = j.value("r", d.r);
  f.gamma = j.value("gamma", d.gamma);
  f.nu = j.value("nu", d.nu);
  f.mu = j.value("mu", d.mu);
  f.g1 = j.value("g1", d.g1);
  f.n1 = j.value("n1", d.n1);
  f.single_community = j.value("single_community", d.single_community);
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"model", c.model},         {"points", c.points},       {"replicas", c.replicas},
       {"seed", c.seed},           {"strategy", c.strategy},   {"engine", c.engine},
       {"threshold", c.threshold}, {"workers", c.workers},     {"csv", c.csv_path},
       {"manifest", c.manifest_path}};
  if (c.grid) j["grid"] = {{"alpha1", c.grid->first}, {"alpha2", c.grid->second}};
}

/// Unknown keys are rejected so that typos do not silently fall back to defaults.
inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  static const std::vector<std::string> known{"model", "points", "grid", "replicas", "seed",
                                              "strategy", "engine", "threshold", "workers",
                                              "csv", "manifest"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("ExperimentConfig: unknown key '" + key + "'");
    }
  }
  const ExperimentConfig d;
  c.model = j.value("model", d.model);
  c.points = j.value("points", d.points);
  if (j.contains("grid")) {
    c.grid = std::make_pair(j.at("grid").at("alpha1").get<GridAxis>(),
                            j.at("grid").at("alpha2").get<GridAxis>());
  }
  c.replicas = j.value("replicas", d.replicas);
  c.seed = j.value("seed", d.seed);
  c.strategy = j.value("strategy", d.strategy);
  c.engine = j.value("engine", d.engine);
  c.threshold = j.value("threshold", d.threshold);
  c.workers = j.value("workers", d.workers);
  c.csv_path = j.value("csv", d.csv_path);
  c.manifest_path = j.value("manifest", d.manifest_path);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Theory for one grid point. For a single community the limit of |G|/g1 is the first zero
/// of alpha1 - x + c_r x^r, i.e. r phi(alpha1) / (r - 1).
struct Prediction {
  std::string regime;
  std::optional<double> x_star;
};

inline Prediction predict(const FiniteMapping& f, double alpha1, double alpha2) {
  if (f.single_community) {
    if (alpha1 >= 1.0) return {"Sup", std::nullopt};
    if (alpha1 <= 0.0) return {"Sub", 0.0};
    return {"Sub", f.r * er_phi(f.r, alpha1) / (f.r - 1.0)};
  }
  if (std::max(alpha1, alpha2) <= 0.0) return {"Sub", 0.0};
  const PhaseDiagnosis d = classify(AsymptoticParams::make(f.nu, f.mu, f.gamma, f.r, alpha1, alpha2));
  Prediction p{std::string(to_string(d.regime)), std::nullopt};
  if (d.fixed_point) {
    // x* is in units of the canonical community 1, i.e. g2 when relabelled
    const double x = d.fixed_point->x_star;
    p.x_star = d.swapped ? x * std::pow(f.nu * std::pow(f.mu, f.r), 1.0 / (f.r - 1)) : x;
  }
  return p;
}

struct PointSummary {
  std::size_t index = 0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  ModelParams model;
  double g1 = 0.0;
  int replicas = 0;
  int failures = 0;
  double percolation_probability = 0.0;
  double mean = 0.0;  // statistics of |G| / g1
  double q10 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q90 = 0.0;
  double median_over_seeds = 0.0;  // median of |G| / (a1 + a2)
  std::optional<double> outlier_fraction;  // share deviating > 25% from x*
  std::string predicted_regime;
  std::optional<double> predicted_x_star;
  std::vector<std::int64_t> final_sizes;  // per replica, -1 on failure
};

struct SweepResult {
  std::vector<PointSummary> points;
};

/// Linear-interpolated quantile of a sorted sample.
inline double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return std::nan("");
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// One replica of a finite model under the configured engine.
inline RunRecord run_replica(const ModelParams& m, const Strategy& s, const std::string& engine,
                             std::uint64_t seed) {
  ChainOptions opt;
  opt.rng_seed = seed;
  opt.trajectory_stride = 0;
  if (engine == "graph") {
    const SbmGraph g = generate_graph(m, seed);
    return run_chain(g, sample_seeds(m, seed), m.r, s, opt);
  }
  return run_chain_lazy(m, s, opt);
}

inline PointSummary summarize(std::size_t index, double a1, double a2, const ModelParams& m,
                              std::vector<std::int64_t> sizes, double threshold,
                              const Prediction& pred) {
  PointSummary p;
  p.index = index;
  p.alpha1 = a1;
  p.alpha2 = a2;
  p.model = m;
  p.g1 = critical_seed_count(m.n1, m.p1, m.r);
  p.replicas = static_cast<int>(sizes.size());
  p.predicted_regime = pred.regime;
  p.predicted_x_star = pred.x_star;
  std::vector<double> ratio;
  std::vector<double> over_seeds;
  int percolated = 0;
  int outliers = 0;
  for (std::int64_t s : sizes) {
    if (s < 0) {
      ++p.failures;
      continue;
    }
    const double x = static_cast<double>(s) / p.g1;
    ratio.push_back(x);
    if (m.a1 + m.a2 > 0) over_seeds.push_back(static_cast<double>(s) / static_cast<double>(m.a1 + m.a2));
    if (static_cast<double>(s) >= threshold * static_cast<double>(m.n())) ++percolated;
    if (pred.x_star && *pred.x_star > 0.0 && std::abs(x - *pred.x_star) > 0.25 * *pred.x_star) ++outliers;
  }
  const auto ok = static_cast<double>(ratio.size());
  std::sort(ratio.begin(), ratio.end());
  std::sort(over_seeds.begin(), over_seeds.end());
  if (!ratio.empty()) {
    p.percolation_probability = percolated / ok;
    double sum = 0.0;
    for (double x : ratio) sum += x;
    p.mean = sum / ok;
    p.q10 = quantile_sorted(ratio, 0.10);
    p.q25 = quantile_sorted(ratio, 0.25);
    p.median = quantile_sorted(ratio, 0.50);
    p.q75 = quantile_sorted(ratio, 0.75);
    p.q90 = quantile_sorted(ratio, 0.90);
    if (pred.x_star && *pred.x_star > 0.0) p.outlier_fraction = outliers / ok;
  }
  if (!over_seeds.empty()) p.median_over_seeds = quantile_sorted(over_seeds, 0.5);
  p.final_sizes = std::move(sizes);
  return p;
}

inline void write_csv_rows(std::ostream& os, const PointSummary& p) {
  auto row = [&](std::string_view stat, const auto& value) {
    os << p.index << ',' << p.alpha1 << ',' << p.alpha2 << ',' << stat << ',' << value << '\n';
  };
  row("percolation_probability", p.percolation_probability);
  row("mean_G_over_g1", p.mean);
  row("q10_G_over_g1", p.q10);
  row("q25_G_over_g1", p.q25);
  row("median_G_over_g1", p.median);
  row("q75_G_over_g1", p.q75);
  row("q90_G_over_g1", p.q90);
  row("median_G_over_seeds", p.median_over_seeds);
  row("replicas", p.replicas);
  row("failures", p.failures);
  row("predicted_regime", p.predicted_regime);
  if (p.predicted_x_star) row("predicted_x_star", *p.predicted_x_star);
  if (p.outlier_fraction) row("outlier_fraction", *p.outlier_fraction);
}

/// Run every grid point with `replicas` independent replicas spread over `workers` threads.
/// Replica k of point j uses the stream derive_key(seed, {j, k}) and writes only its own
/// slot, so results do not depend on scheduling. CSV rows are appended point by point.
inline SweepResult run_experiment(const ExperimentConfig& cfg,
                                  const std::function<void(const PointSummary&)>& on_point = {}) {
  cfg.validate();
  const auto pts = cfg.resolved_points();
  std::ofstream csv;
  if (!cfg.csv_path.empty()) {
    csv.open(cfg.csv_path);
    if (!csv) throw std::runtime_error("cannot open CSV output '" + cfg.csv_path + "'");
    csv.precision(17);
    csv << "point,alpha1,alpha2,statistic,value\n";
  }
  SweepResult result;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const auto [a1, a2] = pts[j];
    const ModelParams m = map_to_model(cfg.model, a1, a2);
    const Strategy strat = strategy_from_name(cfg.strategy, &m);
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(cfg.replicas), -1);
    std::atomic<int> next{0};
    auto work = [&] {
      for (int k = next++; k < cfg.replicas; k = next++) {
        try {
          const auto seed = derive_key(cfg.seed, {j, static_cast<std::uint64_t>(k)});
          sizes[static_cast<std::size_t>(k)] = run_replica(m, strat, cfg.engine, seed).final_active;
        } catch (const std::exception&) {
          sizes[static_cast<std::size_t>(k)] = -1;
        }
      }
    };
    const int nthreads = std::min(cfg.workers, cfg.replicas);
    std::vector<std::thread> pool;
    for (int w = 1; w < nthreads; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    PointSummary p = summarize(j, a1, a2, m, std::move(sizes), cfg.threshold, predict(cfg.model, a1, a2));
    if (csv.is_open()) {
      write_csv_rows(csv, p);
      csv.flush();
      if (!csv) throw std::runtime_error("write failed on CSV output '" + cfg.csv_path + "'");
    }
    if (on_point) on_point(p);
    result.points.push_back(std::move(p));
  }
  if (!cfg.manifest_path.empty()) {
    const nlohmann::json config = cfg;
    const nlohmann::json manifest{{"config", config},
                                  {"config_hash", fnv1a(config.dump())},
                                  {"rng_algorithm", kRngAlgorithm},
                                  {"code_version", kCodeVersion},
                                  {"points", pts.size()},
                                  {"csv", cfg.csv_path}};
    std::ofstream out(cfg.manifest_path);
    if (!out) throw std::runtime_error("cannot open manifest output '" + cfg.manifest_path + "'");
    out << manifest.dump(2) << '\n';
  }
  return result;
}

struct BoundaryPoint {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double probability = 0.0;
};

struct PhaseBoundary {
  std::vector<BoundaryPoint> surface;
  std::vector<std::pair<double, double>> contour;  // empirical 50% level, one per alpha1 row
};

/// Percolation-probability surface over the alpha grid and its 50% contour, located on each
/// alpha1 row at the first upward crossing of 0.5 along alpha2 (linear interpolation).
inline PhaseBoundary empirical_phase_boundary(const ExperimentConfig& cfg) {
  if (!cfg.grid) throw std::invalid_argument("empirical_phase_boundary: needs an alpha grid");
  const SweepResult res = run_experiment(cfg);
  PhaseBoundary b;
  for (const auto& p : res.points) b.surface.push_back({p.alpha1, p.alpha2, p.percolation_probability});
  const auto cols = static_cast<std::size_t>(std::max(cfg.grid->second.steps, 1));
  for (std::size_t row = 0; row * cols < b.surface.size(); ++row) {
    const BoundaryPoint* prev = nullptr;
    for (std::size_t c = 0; c < cols; ++c) {
      const BoundaryPoint& cur = b.surface[row * cols + c];
      if (cur.probability >= 0.5) {
        if (prev == nullptr) {
          b.contour.emplace_back(cur.alpha1, cur.alpha2);
        } else {
          const double t = (0.5 - prev->probability) / (cur.probability - prev->probability);
          b.contour.emplace_back(cur.alpha1, prev->alpha2 + t * (cur.alpha2 - prev->alpha2));
        }
        break;
      }
      prev = &cur;
    }
  }
  return b;
}

struct ConvergenceRow {
  std::int64_t n = 0;
  double g1 = 0.0;
  double g2 = 0.0;
  double error1 = 0.0;  // |R_1(floor(x g)) / g_1 - rho_1(x)|
  double error2 = 0.0;
  double ratio1 = 1.0;  // b_exact / b_asymptotic at floor(x g)
  double ratio2 = 1.0;
};

/// Finite model on rung n: n1 = n, n2 = n/nu, p1 = n^(-(1+1/r)/2) (the geometric middle of
/// the window 1/n << p << n^(-1/r)), p2 = p1/mu, q = gamma p1, a_i = round(alpha_i g_i).
inline ModelParams ladder_model(const AsymptoticParams& a, std::int64_t n) {
  ModelParams m;
  m.r = a.r;
  m.n1 = n;
  m.n2 = std::llround(static_cast<double>(n) / a.nu);
  m.p1 = std::pow(static_cast<double>(n), -(1.0 + 1.0 / a.r) / 2.0);
  m.p2 = m.p1 / a.mu;
  m.q = a.gamma * m.p1;
  const CriticalScale s = derive_critical_scale(m);
  m.a1 = std::min<std::int64_t>(std::llround(a.alpha1 * s.g1), m.n1);
  m.a2 = std::min<std::int64_t>(std::llround(a.alpha2 * s.g2), m.n2);
  m.validate();
  return m;
}

/// Exact expected surplus and mark probability against their limits along an n-ladder.
/// The parameters are used in the orientation given (no relabelling).
inline std::vector<ConvergenceRow> convergence_study(const AsymptoticParams& a, Point x,
                                                     const std::vector<std::int64_t>& ladder) {
  const RhoField field(a);
  std::vector<ConvergenceRow> rows;
  for (std::int64_t n : ladder) {
    const ModelParams m = ladder_model(a, n);
    const CriticalScale s = derive_critical_scale(m);
    const auto u = scaled_floor(s, x);
    ConvergenceRow row;
    row.n = n;
    row.g1 = s.g1;
    row.g2 = s.g2;
    row.error1 = std::abs(R_expected(m, u, Community::one) / s.g1 - field.rho1(x.x1, x.x2));
    row.error2 = std::abs(R_expected(m, u, Community::two) / s.g2 - field.rho2(x.x1, x.x2));
    if (u[0] + u[1] > 0) {
      row.ratio1 = b_exact(m, u, Community::one) / b_asymptotic(m, x, Community::one);
      row.ratio2 = b_exact(m, u, Community::two) / b_asymptotic(m, x, Community::two);
    }
    rows.push_back(row);
  }
  return rows;
}

/// Named parameter sets for one-command reproduction.
struct Preset {
  std::string name;
  std::string description;
  std::vector<FiniteMapping> shapes;               // one shape, or a family
  std::vector<std::pair<double, double>> alphas;  // points of interest (may be empty)
};

inline std::vector<std::string> preset_names() {
  return {"fig1", "fig2", "fig3", "gammavary", "rvary", "nuvary", "muvary", "er"};
}

inline Preset preset(std::string_view name) {
  auto shape = [](int r, double gamma, double nu, double mu) {
    FiniteMapping f;
    f.r = r;
    f.gamma = gamma;
    f.nu = nu;
    f.mu = mu;
    return f;
  };
  if (name == "fig1") return {"fig1", "sub-critical point, chi = 0.6", {shape(2, 0.6, 1, 1)}, {{0.56, 0.10}}};
  if (name == "fig2") return {"fig2", "near-critical point, chi = 0.6", {shape(2, 0.6, 1, 1)}, {{0.60, 0.175}}};
  if (name == "fig3") return {"fig3", "super-critical point, chi = 0.6", {shape(2, 0.6, 1, 1)}, {{0.60, 0.40}}};
  if (name == "gammavary") {
    Preset p{"gammavary", "critical curves for varying gamma (r=2, nu=mu=1)", {}, {}};
    for (double g : {0.1, 0.25, 0.5, 1.0, 2.0}) p.shapes.push_back(shape(2, g, 1, 1));
    return p;
  }
  if (name == "rvary") {
    Preset p{"rvary", "critical curves for varying r (gamma=0.25, nu=mu=1)", {}, {}};
    for (int r : {2, 3, 4, 5}) p.shapes.push_back(shape(r, 0.25, 1, 1));
    return p;
  }
  if (name == "nuvary") {
    Preset p{"nuvary", "critical curves for varying nu (r=2, gamma=0.25, mu=1)", {}, {}};
    for (double nu : {1.0, 2.0, 5.0, 10.0}) p.shapes.push_back(shape(2, 0.25, nu, 1));
    return p;
  }
  if (name == "muvary") {
    Preset p{"muvary", "critical curves for varying mu (r=2, gamma=0.25, nu=1)", {}, {}};
    for (double mu : {1.0, 2.0, 5.0, 10.0}) p.shapes.push_back(shape(2, 0.25, 1, mu));
    return p;
  }
  if (name == "er") {
    FiniteMapping f = shape(2, 1.0, 1, 1);
    f.single_community = true;
    return {"er", "single community G(n, p), alpha1 = 0.5", {f}, {{0.5, 0.0}}};
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

}  // namespace bootperc
