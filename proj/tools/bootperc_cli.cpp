// bootperc: command-line front end for simulation, phase analysis and bound checks.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bootperc/bootperc.hpp"
#include "json.hpp"

using namespace bootperc;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string out;
  int workers = 1;
  bool seed_given = false;
  bool workers_given = false;
};

// Limit shape flags shared by run, sweep, classify, phase-curve and converge.
struct ShapeFlags {
  std::string preset;
  FiniteMapping f;
  bool single = false;
  std::vector<CLI::Option*> opts;

  void attach(CLI::App* app, bool finite) {
    app->add_option("--preset", preset, "named parameter set")->check(CLI::IsMember(preset_names()));
    opts.push_back(app->add_option("--r", f.r, "activation threshold")->check(CLI::Range(2, 64)));
    opts.push_back(app->add_option("--gamma", f.gamma, "cross-edge ratio q/p1")->check(CLI::PositiveNumber));
    opts.push_back(app->add_option("--nu", f.nu, "size ratio n1/n2")->check(CLI::PositiveNumber));
    opts.push_back(app->add_option("--mu", f.mu, "density ratio p1/p2")->check(CLI::PositiveNumber));
    if (finite) {
      opts.push_back(app->add_option("--g1", f.g1, "target critical seed count of community 1")
                         ->check(CLI::PositiveNumber));
      opts.push_back(app->add_option("--n1", f.n1, "size of community 1")->check(CLI::PositiveNumber));
      opts.push_back(app->add_flag("--single", single, "single community (n2 = 0)"));
    }
  }

  /// Preset shapes with explicitly given flags applied on top.
  std::vector<FiniteMapping> resolve() const {
    std::vector<FiniteMapping> shapes = preset.empty() ? std::vector<FiniteMapping>{FiniteMapping{}}
                                                       : bootperc::preset(preset).shapes;
    for (FiniteMapping& s : shapes) {
      const auto given = [&](std::size_t k) { return opts.size() > k && opts[k]->count() > 0; };
      if (given(0)) s.r = f.r;
      if (given(1)) s.gamma = f.gamma;
      if (given(2)) s.nu = f.nu;
      if (given(3)) s.mu = f.mu;
      if (given(4)) s.g1 = f.g1;
      if (given(5)) s.n1 = f.n1;
      if (given(6)) s.single_community = single;
    }
    return shapes;
  }

  FiniteMapping single_shape() const {
    const auto shapes = resolve();
    if (shapes.size() != 1) throw std::invalid_argument("preset '" + preset + "' is a family; use phase-curve");
    return shapes.front();
  }

  std::vector<std::pair<double, double>> preset_alphas() const {
    return preset.empty() ? std::vector<std::pair<double, double>>{} : bootperc::preset(preset).alphas;
  }
};

json model_json(const ModelParams& m) {
  return {{"n1", m.n1}, {"n2", m.n2}, {"p1", m.p1}, {"p2", m.p2}, {"q", m.q}, {"r", m.r}, {"a1", m.a1}, {"a2", m.a2}};
}

void print_config(const json& j) { std::cout << "config " << j.dump() << '\n'; }

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file '" + path + "'");
  os << std::setprecision(17);
  return os;
}

void print_point(const PointSummary& p, const FiniteMapping& shape) {
  std::cout << std::setprecision(6) << "point " << p.index << " alpha=(" << p.alpha1 << ", " << p.alpha2
            << ") predicted=" << p.predicted_regime;
  if (p.predicted_x_star) std::cout << " x*=" << *p.predicted_x_star;
  std::cout << " replicas=" << p.replicas << " failures=" << p.failures
            << " P(percolate)=" << p.percolation_probability << "\n  |G|/g1: median=" << p.median
            << " mean=" << p.mean << " q10=" << p.q10 << " q90=" << p.q90
            << "\n  |G|/(a1+a2): median=" << p.median_over_seeds;
  if (p.outlier_fraction) std::cout << " outliers(>25% from x*)=" << *p.outlier_fraction;
  std::cout << '\n';
  if (shape.single_community && p.alpha1 > 0.0 && p.alpha1 < 1.0) {
    std::cout << "  single-community reference r*phi/((r-1)*alpha1) = "
              << er_subcritical_limit(shape.r, p.alpha1) << " (phi = " << er_phi(shape.r, p.alpha1) << ")\n";
  }
}

int cmd_generate(const Globals& g, const ModelParams& m) {
  m.validate();
  print_config({{"model", model_json(m)}, {"seed", g.seed}});
  for (const auto& w : check_window(m).warnings) std::cout << "warning: " << w << '\n';
  const SbmGraph graph = generate_graph(m, g.seed);
  std::cout << "nodes=" << graph.num_nodes() << " edges=" << graph.num_edges()
            << " expected_edges=" << expected_edge_count(m) << '\n';
  if (!g.out.empty()) {
    std::ofstream os = open_out(g.out);
    write_edge_list(os, graph, g.seed);
    std::cout << "edge list written to " << g.out << '\n';
  }
  return 0;
}

int cmd_run(const Globals& g, ExperimentConfig cfg, const FiniteMapping& shape) {
  if (g.seed_given) cfg.seed = g.seed;
  if (g.workers_given) cfg.workers = g.workers;
  if (!g.out.empty()) cfg.csv_path = g.out;
  cfg.validate();
  print_config(cfg);
  run_experiment(cfg, [&](const PointSummary& p) { print_point(p, shape); });
  if (!cfg.csv_path.empty()) std::cout << "csv written to " << cfg.csv_path << '\n';
  if (!cfg.manifest_path.empty()) std::cout << "manifest written to " << cfg.manifest_path << '\n';
  return 0;
}

int cmd_sweep(const Globals& g, ExperimentConfig cfg) {
  if (g.seed_given) cfg.seed = g.seed;
  if (g.workers_given) cfg.workers = g.workers;
  if (!g.out.empty()) cfg.csv_path = g.out;
  cfg.validate();
  print_config(cfg);
  const PhaseBoundary b = empirical_phase_boundary(cfg);
  std::cout << std::setprecision(4) << "alpha1,alpha2,P(percolate)\n";
  for (const auto& s : b.surface) std::cout << s.alpha1 << ',' << s.alpha2 << ',' << s.probability << '\n';
  std::cout << "empirical 50% boundary:\n";
  for (const auto& [a1, a2] : b.contour) std::cout << "  alpha1=" << a1 << " alpha2=" << a2 << '\n';
  return 0;
}

int cmd_classify(const Globals& g, const FiniteMapping& f, double a1, double a2) {
  print_config({{"r", f.r}, {"gamma", f.gamma}, {"nu", f.nu}, {"mu", f.mu}, {"alpha1", a1}, {"alpha2", a2}});
  const PhaseDiagnosis d = classify(AsymptoticParams::make(f.nu, f.mu, f.gamma, f.r, a1, a2));
  const Prediction pr = predict(f, a1, a2);
  std::cout << std::setprecision(10) << "regime=" << to_string(d.regime)
            << " assortativity=" << to_string(d.assortativity) << " swapped=" << (d.swapped ? "yes" : "no");
  if (std::isfinite(d.min_rho1)) std::cout << " min_rho1=" << d.min_rho1;
  std::cout << '\n';
  json j{{"regime", to_string(d.regime)}, {"assortativity", to_string(d.assortativity)}, {"swapped", d.swapped}};
  if (d.fixed_point) {
    std::cout << "z*=" << d.fixed_point->z << " zeta(z*)=" << d.fixed_point->zeta_z << " x*=" << *pr.x_star
              << "  (x* = lim |G|/g1)\n";
    j["z_star"] = d.fixed_point->z;
    j["zeta_z_star"] = d.fixed_point->zeta_z;
    j["x_star"] = *pr.x_star;
  }
  if (!g.out.empty()) open_out(g.out) << j.dump(2) << '\n';
  return 0;
}

int cmd_phase_curve(const Globals& g, const std::vector<FiniteMapping>& shapes, int samples) {
  json cfg = json::array();
  for (const auto& f : shapes) cfg.push_back({{"r", f.r}, {"gamma", f.gamma}, {"nu", f.nu}, {"mu", f.mu}});
  print_config({{"shapes", cfg}, {"samples", samples}});
  std::ostringstream csv;
  for (const auto& f : shapes) {
    const ChiMatrix c = chi(f.nu, f.mu, f.gamma, f.r);
    const auto pts = critical_curve(c, f.r, default_y1_grid(f.r, samples));
    write_critical_curve_csv(csv, pts, f.r, f.gamma, f.nu, f.mu);
    std::cout << "r=" << f.r << " gamma=" << f.gamma << " nu=" << f.nu << " mu=" << f.mu << ": " << pts.size()
              << " points\n";
  }
  if (g.out.empty()) {
    std::cout << csv.str();
  } else {
    open_out(g.out) << csv.str();
    std::cout << "csv written to " << g.out << '\n';
  }
  return 0;
}

int cmd_converge(const Globals& g, const FiniteMapping& f, double a1, double a2, Point x,
                 const std::vector<std::int64_t>& ladder) {
  print_config({{"r", f.r},
                {"gamma", f.gamma},
                {"nu", f.nu},
                {"mu", f.mu},
                {"alpha1", a1},
                {"alpha2", a2},
                {"x", {x.x1, x.x2}},
                {"ladder", ladder}});
  const auto rows = convergence_study(AsymptoticParams::make(f.nu, f.mu, f.gamma, f.r, a1, a2), x, ladder);
  std::ostringstream csv;
  csv << std::setprecision(10) << "n,g1,g2,error1,error2,ratio1,ratio2\n";
  for (const auto& r : rows) {
    csv << r.n << ',' << r.g1 << ',' << r.g2 << ',' << r.error1 << ',' << r.error2 << ',' << r.ratio1 << ','
        << r.ratio2 << '\n';
  }
  std::cout << csv.str();
  if (!g.out.empty()) open_out(g.out) << csv.str();
  return 0;
}

int cmd_bounds(const Globals& g, std::int64_t m, double q, std::int64_t k) {
  print_config({{"m", m}, {"q", q}, {"k", k}});
  if (m < 1 || !(q > 0.0 && q < 1.0) || k < 0 || k > m) {
    throw std::invalid_argument("bounds: need m >= 1, 0 < q < 1, 0 <= k <= m");
  }
  const double mu = static_cast<double>(m) * q;
  const auto kd = static_cast<double>(k);
  json j{{"m", m}, {"q", q}, {"k", k}, {"mean", mu}};
  std::cout << std::setprecision(10) << "mean=" << mu << " H(k/mean)=" << rate_function(kd / mu) << '\n';
  if (kd >= mu) {
    const double exact = binomial_upper_tail(m, q, k);
    const double bound = binomial_tail_bound(m, q, kd, TailDirection::upper);
    std::cout << "P(X >= k)=" << exact << " bound exp(-mean H)=" << bound << '\n';
    j["upper_tail"] = exact;
    j["upper_bound"] = bound;
    if (kd >= std::exp(2.0) * mu) {
      const double far = binomial_tail_bound(m, q, kd, TailDirection::upper_far);
      std::cout << "far-tail bound exp(-k)=" << far << '\n';
      j["upper_far_bound"] = far;
    }
  }
  if (kd <= mu) {
    const double exact = binomial_lower_tail(m, q, k);
    const double bound = binomial_tail_bound(m, q, kd, TailDirection::lower);
    std::cout << "P(X <= k)=" << exact << " bound exp(-mean H)=" << bound << '\n';
    j["lower_tail"] = exact;
    j["lower_bound"] = bound;
  }
  if (!g.out.empty()) open_out(g.out) << j.dump(2) << '\n';
  return 0;
}

void print_subcommand_help(const CLI::App& app) {
  const auto subs = app.get_subcommands();
  std::cerr << (subs.empty() ? app.help() : subs.front()->help());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bootstrap percolation on the two-community stochastic block model"};
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "master RNG seed");
  app.add_option("--out", g.out, "file for machine-readable output");
  auto* workers_opt =
      app.add_option("--workers", g.workers, "worker threads for replicas")->check(CLI::PositiveNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "sample one SBM graph and write its edge list");
  ModelParams gm{1000, 1000, 0.01, 0.01, 0.005, 2, 0, 0};
  gen->add_option("--n1", gm.n1, "size of community 1");
  gen->add_option("--n2", gm.n2, "size of community 2");
  gen->add_option("--p1", gm.p1, "edge probability inside community 1");
  gen->add_option("--p2", gm.p2, "edge probability inside community 2");
  gen->add_option("--q", gm.q, "edge probability across communities");
  gen->add_option("--r", gm.r, "activation threshold");

  // run
  auto* run = app.add_subcommand("run", "simulate replicas at one or more (alpha1, alpha2) points");
  ShapeFlags run_shape;
  run_shape.attach(run, true);
  std::vector<double> run_a1;
  std::vector<double> run_a2;
  ExperimentConfig run_cfg;
  std::string run_config_file;
  std::string run_manifest;
  run->add_option("--alpha1", run_a1, "seed fraction a1/g1 (repeatable)");
  run->add_option("--alpha2", run_a2, "seed fraction a2/g2 (repeatable)");
  run->add_option("--replicas", run_cfg.replicas, "replicas per point")->check(CLI::PositiveNumber);
  run->add_option("--strategy", run_cfg.strategy, "max | roundrobin | hybrid")
      ->check(CLI::IsMember({"max", "roundrobin", "hybrid"}));
  run->add_option("--engine", run_cfg.engine, "lazy | graph")->check(CLI::IsMember({"lazy", "graph"}));
  run->add_option("--threshold", run_cfg.threshold, "percolation threshold on |G|/n");
  run->add_option("--manifest", run_manifest, "write a run manifest JSON here");
  run->add_option("--config", run_config_file, "experiment config JSON (replaces the shape flags)")
      ->check(CLI::ExistingFile);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "percolation probability over an alpha grid");
  ShapeFlags sweep_shape;
  sweep_shape.attach(sweep, true);
  ExperimentConfig sweep_cfg;
  sweep_cfg.replicas = 50;
  GridAxis ax1{0.0, 1.0, 11};
  GridAxis ax2{0.0, 1.0, 11};
  std::string sweep_manifest;
  std::string sweep_config_file;
  sweep->add_option("--a1-min", ax1.min);
  sweep->add_option("--a1-max", ax1.max);
  sweep->add_option("--a1-steps", ax1.steps)->check(CLI::PositiveNumber);
  sweep->add_option("--a2-min", ax2.min);
  sweep->add_option("--a2-max", ax2.max);
  sweep->add_option("--a2-steps", ax2.steps)->check(CLI::PositiveNumber);
  sweep->add_option("--replicas", sweep_cfg.replicas, "replicas per point")->check(CLI::PositiveNumber);
  sweep->add_option("--strategy", sweep_cfg.strategy, "max | roundrobin | hybrid")
      ->check(CLI::IsMember({"max", "roundrobin", "hybrid"}));
  sweep->add_option("--engine", sweep_cfg.engine, "lazy | graph")->check(CLI::IsMember({"lazy", "graph"}));
  sweep->add_option("--threshold", sweep_cfg.threshold, "percolation threshold on |G|/n");
  sweep->add_option("--manifest", sweep_manifest, "write a run manifest JSON here");
  sweep->add_option("--config", sweep_config_file, "experiment config JSON with a grid")->check(CLI::ExistingFile);

  // classify
  auto* cls = app.add_subcommand("classify", "regime of the limit parameters");
  ShapeFlags cls_shape;
  cls_shape.attach(cls, false);
  double cls_a1 = 0.0;
  double cls_a2 = 0.0;
  auto* cls_a1_opt = cls->add_option("--alpha1", cls_a1)->check(CLI::NonNegativeNumber);
  auto* cls_a2_opt = cls->add_option("--alpha2", cls_a2)->check(CLI::NonNegativeNumber);

  // phase-curve
  auto* pc = app.add_subcommand("phase-curve", "critical curve (alpha1, alpha2) as CSV");
  ShapeFlags pc_shape;
  pc_shape.attach(pc, false);
  int pc_samples = 501;
  pc->add_option("--samples", pc_samples, "points per curve")->check(CLI::Range(2, 1000000));

  // converge
  auto* conv = app.add_subcommand("converge", "finite-n expected surplus and mark probability vs limits");
  ShapeFlags conv_shape;
  conv_shape.attach(conv, false);
  double conv_a1 = 0.56;
  double conv_a2 = 0.10;
  Point conv_x{0.3, 0.2};
  std::vector<std::int64_t> ladder{10000, 100000, 1000000, 10000000};
  conv->add_option("--alpha1", conv_a1)->check(CLI::NonNegativeNumber);
  conv->add_option("--alpha2", conv_a2)->check(CLI::NonNegativeNumber);
  conv->add_option("--x1", conv_x.x1)->check(CLI::NonNegativeNumber);
  conv->add_option("--x2", conv_x.x2)->check(CLI::NonNegativeNumber);
  conv->add_option("--ladder", ladder, "community-1 sizes")->check(CLI::PositiveNumber);

  // bounds
  auto* bnd = app.add_subcommand("bounds", "exact binomial tails against the exponential bounds");
  std::int64_t bm = 100;
  double bq = 0.1;
  std::int64_t bk = 25;
  bnd->add_option("--m", bm, "trials");
  bnd->add_option("--q", bq, "success probability");
  bnd->add_option("--k", bk, "threshold count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    print_subcommand_help(app);
    return 1;
  }

  g.seed_given = seed_opt->count() > 0;
  g.workers_given = workers_opt->count() > 0;

  // experiment config from the shape flags, a preset, or a JSON file
  auto experiment = [&](ShapeFlags& sf, ExperimentConfig base, const std::string& file,
                        const std::string& manifest) {
    ExperimentConfig cfg = base;
    if (!file.empty()) {
      std::ifstream in(file);
      cfg = json::parse(in).get<ExperimentConfig>();
    } else {
      cfg.model = sf.single_shape();
    }
    if (!manifest.empty()) cfg.manifest_path = manifest;
    return cfg;
  };

  try {
    if (*gen) return cmd_generate(g, gm);
    if (*run) {
      ExperimentConfig cfg = experiment(run_shape, run_cfg, run_config_file, run_manifest);
      if (run_config_file.empty()) {
        if (run_a2.empty()) run_a2.assign(run_a1.size(), 0.0);
        if (run_a1.empty()) run_a1.assign(run_a2.size(), 0.0);
        if (run_a1.size() != run_a2.size()) throw std::invalid_argument("--alpha1 and --alpha2 must pair up");
        for (std::size_t k = 0; k < run_a1.size(); ++k) cfg.points.emplace_back(run_a1[k], run_a2[k]);
        if (cfg.points.empty()) cfg.points = run_shape.preset_alphas();
        if (cfg.points.empty()) throw std::invalid_argument("run: give --alpha1/--alpha2 or a preset");
      }
      return cmd_run(g, cfg, cfg.model);
    }
    if (*sweep) {
      ExperimentConfig cfg = experiment(sweep_shape, sweep_cfg, sweep_config_file, sweep_manifest);
      if (sweep_config_file.empty()) cfg.grid = std::make_pair(ax1, ax2);
      return cmd_sweep(g, cfg);
    }
    if (*cls) {
      const FiniteMapping f = cls_shape.single_shape();
      const auto alphas = cls_shape.preset_alphas();
      double a1 = cls_a1;
      double a2 = cls_a2;
      if (!alphas.empty()) {
        if (cls_a1_opt->count() == 0) a1 = alphas.front().first;
        if (cls_a2_opt->count() == 0) a2 = alphas.front().second;
      }
      return cmd_classify(g, f, a1, a2);
    }
    if (*pc) return cmd_phase_curve(g, pc_shape.resolve(), pc_samples);
    if (*conv) {
      FiniteMapping f = conv_shape.single_shape();
      if (conv_shape.opts[1]->count() == 0 && conv_shape.preset.empty()) f.gamma = 0.25;
      return cmd_converge(g, f, conv_a1, conv_a2, conv_x, ladder);
    }
    if (*bnd) return cmd_bounds(g, bm, bq, bk);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    print_subcommand_help(app);
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
