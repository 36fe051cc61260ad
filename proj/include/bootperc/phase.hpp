#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bootperc/binomial.hpp"
#include "bootperc/model.hpp"

namespace bootperc {

enum class Regime { sub, crit, sup };
enum class Assortativity { assortative, neutral, disassortative };

constexpr std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::sub: return "Sub";
    case Regime::crit: return "Crit";
    case Regime::sup: return "Sup";
  }
  return "?";
}

constexpr std::string_view to_string(Assortativity a) noexcept {
  switch (a) {
    case Assortativity::assortative: return "assortative";
    case Assortativity::neutral: return "neutral";
    case Assortativity::disassortative: return "disassortative";
  }
  return "?";
}

/// x^k for small non-negative integer k.
constexpr double ipow(double x, int k) noexcept {
  double out = 1.0;
  while (k > 0) {
    if (k & 1) out *= x;
    x *= x;
    k >>= 1;
  }
  return out;
}

/// Limit-regime description: n1 ~ nu n2, p1 ~ mu p2, q ~ gamma p1, a_i / g_i -> alpha_i.
///
/// Always stored in canonical orientation alpha1 >= alpha2. `make` relabels the communities
/// when needed (nu -> 1/nu, mu -> 1/mu, gamma -> gamma mu, alphas swapped), which transposes
/// the chi matrix; `swapped` records that it happened.
struct AsymptoticParams {
  double nu = 1.0;
  double mu = 1.0;
  double gamma = 1.0;
  int r = 2;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  bool swapped = false;

  static AsymptoticParams make(double nu, double mu, double gamma, int r, double alpha1,
                               double alpha2) {
    if (!(nu > 0.0 && mu > 0.0 && gamma > 0.0)) {
      throw std::invalid_argument("AsymptoticParams: nu, mu, gamma must be > 0");
    }
    if (r < 2) throw std::invalid_argument("AsymptoticParams: r must be >= 2");
    if (!(alpha1 >= 0.0 && alpha2 >= 0.0)) {
      throw std::invalid_argument("AsymptoticParams: alphas must be >= 0");
    }
    if (!(std::max(alpha1, alpha2) > 0.0)) {
      throw std::invalid_argument("AsymptoticParams: max(alpha1, alpha2) must be > 0");
    }
    AsymptoticParams a{nu, mu, gamma, r, alpha1, alpha2, false};
    if (alpha1 < alpha2) {
      a = AsymptoticParams{1.0 / nu, 1.0 / mu, gamma * mu, r, alpha2, alpha1, true};
    }
    return a;
  }

  /// Ratio g2 / g1 in the limit: (nu mu^r)^(1/(r-1)).
  double g_ratio() const noexcept { return std::pow(nu * std::pow(mu, r), 1.0 / (r - 1)); }
};

/// Limit parameters of a finite instance (nu = n1/n2, mu = p1/p2, gamma = q/p1,
/// alpha_i = a_i/g_i), normalised to canonical orientation.
inline AsymptoticParams asymptotic_from_model(const ModelParams& m) {
  if (m.n2 <= 0 || !(m.p1 > 0.0) || !(m.p2 > 0.0) || !(m.q > 0.0)) {
    throw std::invalid_argument("asymptotic_from_model: needs n2 > 0 and p1, p2, q > 0");
  }
  const CriticalScale s = derive_critical_scale(m);
  return AsymptoticParams::make(static_cast<double>(m.n1) / static_cast<double>(m.n2),
                                m.p1 / m.p2, m.q / m.p1, m.r, s.alpha1, s.alpha2);
}

struct ChiMatrix {
  double chi12 = 1.0;
  double chi21 = 1.0;

  double det() const noexcept { return 1.0 - chi12 * chi21; }

  Assortativity assortativity(double tol = 1e-12) const noexcept {
    const double d = det();
    if (d > tol) return Assortativity::assortative;
    if (d < -tol) return Assortativity::disassortative;
    return Assortativity::neutral;
  }
};

inline ChiMatrix chi(double nu, double mu, double gamma, int r) {
  const double e = 1.0 / (r - 1);
  return {gamma * std::pow(nu * std::pow(mu, r), e), gamma * std::pow(nu * mu, -e)};
}

inline ChiMatrix chi(const AsymptoticParams& a) { return chi(a.nu, a.mu, a.gamma, a.r); }

/// r^-1 (1 - r^-1)^(r-1).
inline double rho_coefficient(int r) noexcept {
  const double rr = r;
  return ipow(1.0 - 1.0 / rr, r - 1) / rr;
}

/// Upper edge r/(r-1) of the domain D.
inline double domain_edge(int r) noexcept { return static_cast<double>(r) / (r - 1); }

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// rho_i(x) = alpha_i - x_i + c_r (x_i + chi_ij x_j)^r with c_r = r^-1 (1 - r^-1)^(r-1),
/// evaluated with the parameters captured once.
class RhoField {
 public:
  RhoField(const AsymptoticParams& a, const ChiMatrix& c)
      : alpha1_(a.alpha1), alpha2_(a.alpha2), chi_(c), r_(a.r), coef_(rho_coefficient(a.r)),
        edge_(domain_edge(a.r)) {}
  explicit RhoField(const AsymptoticParams& a) : RhoField(a, chi(a)) {}

  double rho1(double x1, double x2) const noexcept {
    return alpha1_ - x1 + coef_ * ipow(x1 + chi_.chi12 * x2, r_);
  }
  double rho2(double x1, double x2) const noexcept {
    return alpha2_ - x2 + coef_ * ipow(x2 + chi_.chi21 * x1, r_);
  }
  /// rho1 - rho2; strictly increasing in x2 and decreasing in x1 inside D.
  double sigma(double x1, double x2) const noexcept { return rho1(x1, x2) - rho2(x1, x2); }

  bool in_domain(double x1, double x2, double slack = 0.0) const noexcept {
    return x1 >= -slack && x2 >= -slack && x1 + chi_.chi12 * x2 <= edge_ + slack &&
           x2 + chi_.chi21 * x1 <= edge_ + slack;
  }

  /// Largest x2 with (x1, x2) in D, for 0 <= x1 <= min(R, R / chi21).
  double x2_ceiling(double x1) const noexcept {
    return std::max(0.0, std::min((edge_ - x1) / chi_.chi12, edge_ - chi_.chi21 * x1));
  }

  /// Largest x1 with (x1, 0) in D.
  double x1_ceiling() const noexcept { return std::min(edge_, edge_ / chi_.chi21); }

  const ChiMatrix& chi_matrix() const noexcept { return chi_; }
  double alpha1() const noexcept { return alpha1_; }
  double alpha2() const noexcept { return alpha2_; }
  int r() const noexcept { return r_; }
  double edge() const noexcept { return edge_; }

 private:
  double alpha1_;
  double alpha2_;
  ChiMatrix chi_;
  int r_;
  double coef_;
  double edge_;
};

inline std::pair<double, double> rho(const AsymptoticParams& a, const ChiMatrix& c, Point x) {
  const RhoField f(a, c);
  return {f.rho1(x.x1, x.x2), f.rho2(x.x1, x.x2)};
}

inline bool domain_contains(const ChiMatrix& c, int r, Point x) {
  const double e = domain_edge(r);
  return x.x1 >= 0.0 && x.x2 >= 0.0 && x.x1 <= e && x.x2 <= e && x.x1 + c.chi12 * x.x2 <= e &&
         x.x2 + c.chi21 * x.x1 <= e;
}

/// Root-finding and classification knobs.
struct PhaseTolerances {
  double root = 1e-12;       // bracket width at which bisection stops
  double residual = 1e-8;    // acceptable |sigma| at a returned zeta value
  double crit_band = 1e-6;   // |min rho1| at or below this declares Crit
  int curve_samples = 4096;  // uniform x1 samples when minimising rho1 along the curve
};

/// Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must have opposite
/// signs (or one of them vanish). Returns the midpoint of the final bracket.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  double f_lo = f(lo);
  if (f_lo == 0.0) return lo;
  const bool lo_negative = f_lo < 0.0;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct CurveEndpoints {
  double x1_start = 0.0;  // x1^(0): rho1 = rho2 on the x1 axis
  double x1_end = 0.0;    // x1^(1): the curve meets max{x1 + chi12 x2, x2 + chi21 x1} = R
};

/// Endpoints of the curve D_rho = {x in D : rho1(x) = rho2(x)}.
/// Throws std::domain_error when alpha1 > 1 (the curve need not exist; the regime is Sup).
inline CurveEndpoints curve_endpoints(const RhoField& f, const PhaseTolerances& tol = {}) {
  if (f.alpha1() > 1.0) {
    throw std::domain_error("curve_endpoints: alpha1 > 1, D_rho endpoints undefined");
  }
  CurveEndpoints e;
  const double x1_max = f.x1_ceiling();
  auto on_axis = [&f](double x1) { return f.sigma(x1, 0.0); };
  if (f.alpha1() == f.alpha2()) {
    e.x1_start = 0.0;
  } else if (on_axis(x1_max) >= 0.0) {
    e.x1_start = x1_max;  // no crossing inside D; the curve degenerates to a point
  } else {
    e.x1_start = bisect(on_axis, 0.0, x1_max, tol.root);
  }
  // sigma on the upper boundary of D: non-negative while the curve is still inside D
  auto on_boundary = [&f](double x1) { return f.sigma(x1, f.x2_ceiling(x1)); };
  if (on_boundary(x1_max) >= 0.0 || e.x1_start >= x1_max) {
    e.x1_end = x1_max;
  } else {
    e.x1_end = bisect(on_boundary, e.x1_start, x1_max, tol.root);
    // keep the endpoint on the inside of the sign change
    while (e.x1_end > e.x1_start && on_boundary(e.x1_end) < 0.0) {
      e.x1_end = std::nextafter(e.x1_end, e.x1_start);
    }
  }
  return e;
}

inline CurveEndpoints curve_endpoints(const AsymptoticParams& a, const ChiMatrix& c,
                                      const PhaseTolerances& tol = {}) {
  return curve_endpoints(RhoField(a, c), tol);
}

/// zeta(x1): the unique x2 with rho1(x1, x2) = rho2(x1, x2), x1 in [x1^(0), x1^(1)].
inline double zeta_curve(const RhoField& f, const CurveEndpoints& ends, double x1,
                         const PhaseTolerances& tol = {}) {
  const double slack = 1e-12 * std::max(1.0, ends.x1_end);
  if (x1 < ends.x1_start - slack || x1 > ends.x1_end + slack) {
    throw std::domain_error("zeta_curve: x1 outside [x1^(0), x1^(1)]");
  }
  x1 = std::clamp(x1, ends.x1_start, ends.x1_end);
  auto s = [&f, x1](double x2) { return f.sigma(x1, x2); };
  if (s(0.0) >= 0.0) return 0.0;
  const double hi = f.x2_ceiling(x1);
  if (s(hi) <= 0.0) return hi;
  return bisect(s, 0.0, hi, tol.root);
}

inline double zeta_curve(const AsymptoticParams& a, const ChiMatrix& c, double x1,
                         const PhaseTolerances& tol = {}) {
  const RhoField f(a, c);
  return zeta_curve(f, curve_endpoints(f, tol), x1, tol);
}

struct FixedPoint {
  double z = 0.0;       // z*: first common zero of rho1, rho2 along the curve
  double zeta_z = 0.0;  // zeta(z*)
  double x_star = 0.0;  // limit of |G| / g1: z* + zeta(z*) (nu mu^r)^(1/(r-1))
};

struct PhaseDiagnosis {
  Regime regime = Regime::sup;
  Assortativity assortativity = Assortativity::neutral;
  ChiMatrix chi_matrix;
  std::optional<FixedPoint> fixed_point;    // present iff regime == Sub
  std::optional<CurveEndpoints> endpoints;  // absent when alpha1 > 1
  double min_rho1 = std::numeric_limits<double>::infinity();  // min of rho1 along D_rho
  bool swapped = false;  // community labels were exchanged to reach alpha1 >= alpha2
};

/// Regime of the limit parameters: the sign of min over D_rho of rho1, with alpha1 > 1
/// short-circuiting to Sup.
inline PhaseDiagnosis classify(const AsymptoticParams& a, const PhaseTolerances& tol = {}) {
  PhaseDiagnosis d;
  d.chi_matrix = chi(a);
  d.assortativity = d.chi_matrix.assortativity();
  d.swapped = a.swapped;
  if (a.alpha1 > 1.0) {
    d.regime = Regime::sup;
    return d;
  }
  const RhoField f(a, d.chi_matrix);
  const CurveEndpoints ends = curve_endpoints(f, tol);
  d.endpoints = ends;

  auto along = [&](double x1) { return f.rho1(x1, zeta_curve(f, ends, x1, tol)); };

  const int n = std::max(2, tol.curve_samples);
  const double span = ends.x1_end - ends.x1_start;
  std::vector<double> xs(static_cast<std::size_t>(n));
  std::vector<double> vals(static_cast<std::size_t>(n));
  std::size_t arg = 0;
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    xs[i] = k == n - 1 ? ends.x1_end : ends.x1_start + span * k / (n - 1);
    vals[i] = along(xs[i]);
    if (vals[i] < vals[arg]) arg = i;
  }

  // golden-section refinement of the sampled minimum
  double lo = xs[arg == 0 ? 0 : arg - 1];
  double hi = xs[std::min(arg + 1, xs.size() - 1)];
  double x_min = xs[arg];
  double m = vals[arg];
  if (hi > lo) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double e = lo + inv_phi * (hi - lo);
    double fc = along(c);
    double fe = along(e);
    for (int it = 0; it < 80 && hi - lo > tol.root; ++it) {
      if (fc < fe) {
        hi = e;
        e = c;
        fe = fc;
        c = hi - inv_phi * (hi - lo);
        fc = along(c);
      } else {
        lo = c;
        c = e;
        fc = fe;
        e = lo + inv_phi * (hi - lo);
        fe = along(e);
      }
    }
    const double cand = 0.5 * (lo + hi);
    const double f_cand = along(cand);
    if (f_cand < m) {
      m = f_cand;
      x_min = cand;
    }
  }
  d.min_rho1 = m;

  if (m > tol.crit_band) {
    d.regime = Regime::sup;
  } else if (m >= -tol.crit_band) {
    d.regime = Regime::crit;
  } else {
    d.regime = Regime::sub;
    // first sign change of rho1 along the curve, left of (or at) the minimum
    double right = x_min;
    double left = ends.x1_start;
    for (std::size_t k = 1; k < xs.size(); ++k) {
      if (vals[k] < 0.0) {
        right = xs[k];
        left = xs[k - 1];
        break;
      }
    }
    if (right > x_min) {
      right = x_min;
      left = std::min(left, x_min);
    }
    FixedPoint fp;
    fp.z = along(left) <= 0.0 ? left : bisect(along, left, right, tol.root);
    fp.zeta_z = zeta_curve(f, ends, fp.z, tol);
    fp.x_star = fp.z + fp.zeta_z * a.g_ratio();
    d.fixed_point = fp;
  }
  return d;
}

struct CriticalPoint {
  double y1 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

enum class CurveBranch { invertible, neutral };

inline CurveBranch critical_branch(const ChiMatrix& c, double det_tol = 1e-12) {
  return std::abs(c.det()) <= det_tol ? CurveBranch::neutral : CurveBranch::invertible;
}

/// Points of the critical curve in the (alpha1, alpha2) plane, obtained from the tangency
/// of the zero sets of rho1 and rho2. Points outside [0, 1]^2 are dropped.
///
/// Invertible chi: with y = chi x and a = (1 - 1/r)^(r-1) y1^(r-1), tangency forces
///   y2 = (1 - 1/r)^(-1) ((1 - a) / (1 - a det chi))^(1/(r-1)),
/// and alpha = chi^-1 y - c_r (y1^r, y2^r).
/// Singular chi (det = 0): in x coordinates,
///   y2 = chi21 [ r/(r-1) (1 / (1 + chi21^(r-1)))^(1/(r-1)) - y1 ],
///   alpha = (y1, y2) - c_r ((y1 + chi12 y2)^r, (chi21 y1 + y2)^r).
inline std::vector<CriticalPoint> critical_curve(const ChiMatrix& c, int r,
                                                 std::span<const double> y1_grid) {
  const double rr = r;
  const double coef = rho_coefficient(r);
  const double edge = domain_edge(r);
  const double base = ipow(1.0 - 1.0 / rr, r - 1);
  const double e = 1.0 / (rr - 1.0);
  const double det = c.det();
  std::vector<CriticalPoint> out;
  out.reserve(y1_grid.size());
  for (double y1 : y1_grid) {
    if (y1 < 0.0 || y1 > edge) continue;
    double a1 = 0.0;
    double a2 = 0.0;
    if (critical_branch(c) == CurveBranch::neutral) {
      const double y2 = c.chi21 * (edge * std::pow(1.0 / (1.0 + ipow(c.chi21, r - 1)), e) - y1);
      a1 = y1 - coef * ipow(y1 + c.chi12 * y2, r);
      a2 = y2 - coef * ipow(c.chi21 * y1 + y2, r);
    } else {
      const double a = base * ipow(y1, r - 1);
      const double ratio = std::max(0.0, (1.0 - a) / (1.0 - a * det));
      const double y2 = std::pow(ratio, e) / (1.0 - 1.0 / rr);
      const double x1 = (y1 - c.chi12 * y2) / det;
      const double x2 = (y2 - c.chi21 * y1) / det;
      a1 = x1 - coef * ipow(y1, r);
      a2 = x2 - coef * ipow(y2, r);
    }
    if (a1 >= 0.0 && a1 <= 1.0 && a2 >= 0.0 && a2 <= 1.0) out.push_back({y1, a1, a2});
  }
  return out;
}

/// Uniform grid of `count` points over [0, r/(r-1)].
inline std::vector<double> default_y1_grid(int r, int count) {
  std::vector<double> grid(static_cast<std::size_t>(std::max(count, 2)));
  const double edge = domain_edge(r);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = edge * static_cast<double>(k) / static_cast<double>(grid.size() - 1);
  }
  return grid;
}

/// CSV "y1,alpha1,alpha2" preceded by a comment line recording the curve parameters.
inline void write_critical_curve_csv(std::ostream& os, const std::vector<CriticalPoint>& pts,
                                     int r, double gamma, double nu, double mu) {
  const ChiMatrix c = chi(nu, mu, gamma, r);
  const auto old = os.precision(17);
  os << "# r=" << r << " gamma=" << gamma << " nu=" << nu << " mu=" << mu << " det=" << c.det()
     << " branch=" << (critical_branch(c) == CurveBranch::neutral ? "ii" : "i") << '\n';
  os << "y1,alpha1,alpha2\n";
  for (const auto& p : pts) os << p.y1 << ',' << p.alpha1 << ',' << p.alpha2 << '\n';
  os.precision(old);
}

/// b_i(u) = P(Bin(u_i, p_i) + Bin(u_j, q) >= r): probability that a fresh community-i node
/// holds at least r marks once u_1, u_2 nodes have been used. Summed over the upper tail
/// directly (all terms positive) so tiny values keep full relative precision.
inline double b_exact(const ModelParams& m, std::array<std::int64_t, 2> u, Community i) {
  const Community j = other(i);
  const std::int64_t own = u[index(i)];
  const std::int64_t cross = u[index(j)];
  if (own < 0 || cross < 0) throw std::invalid_argument("b_exact: used counts must be >= 0");
  const double p = m.intra(i);
  double total = binomial_upper_tail(own, p, m.r);
  for (int k = 0; k < m.r; ++k) {
    const double pk = binomial_pmf(own, p, k);
    if (pk == 0.0) continue;
    total += pk * binomial_upper_tail(cross, m.q, m.r - k);
  }
  return std::clamp(total, 0.0, 1.0);
}

/// R_i(u) = a_i + (n_i - a_i) b_i(u) - u_i: expected surplus of active over used nodes.
inline double R_expected(const ModelParams& m, std::array<std::int64_t, 2> u, Community i) {
  const auto a = static_cast<double>(m.seeds(i));
  const auto n = static_cast<double>(m.size(i));
  return a + (n - a) * b_exact(m, u, i) - static_cast<double>(u[index(i)]);
}

/// floor(x g) componentwise.
inline std::array<std::int64_t, 2> scaled_floor(const CriticalScale& s, Point x) {
  return {static_cast<std::int64_t>(std::floor(x.x1 * s.g1)),
          static_cast<std::int64_t>(std::floor(x.x2 * s.g2))};
}

/// Leading term (floor(x_i g_i) p_i + floor(x_j g_j) q)^r / r! of b_i(floor(x g)).
inline double b_asymptotic(const ModelParams& m, Point x, Community i) {
  if (x.x1 < 0.0 || x.x2 < 0.0) throw std::invalid_argument("b_asymptotic: x must be >= 0");
  const auto u = scaled_floor(derive_critical_scale(m), x);
  const double lambda = static_cast<double>(u[index(i)]) * m.intra(i) +
                        static_cast<double>(u[index(other(i))]) * m.q;
  return std::exp(m.r * std::log(lambda) - std::lgamma(m.r + 1.0));
}

/// phi(alpha1): the root in [0, 1] of r x - x^r = (r - 1) alpha1.
inline double er_phi(int r, double alpha1) {
  if (r < 2) throw std::invalid_argument("er_phi: r must be >= 2");
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw std::domain_error("er_phi: alpha1 must lie in (0, 1)");
  const double target = (r - 1) * alpha1;
  return bisect([&](double x) { return r * x - ipow(x, r) - target; }, 0.0, 1.0, 1e-16);
}

/// r phi(alpha1) / ((r - 1) alpha1), the single-community sub-critical reference value.
inline double er_subcritical_limit(int r, double alpha1) {
  return r * er_phi(r, alpha1) / ((r - 1) * alpha1);
}

}  // namespace bootperc
