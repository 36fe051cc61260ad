#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bootperc {

/// Community label. Community one owns node indices [0, n1), community two [n1, n1 + n2).
enum class Community : std::uint8_t { one = 0, two = 1 };

constexpr std::size_t index(Community c) noexcept { return static_cast<std::size_t>(c); }
constexpr Community other(Community c) noexcept {
  return c == Community::one ? Community::two : Community::one;
}
constexpr int label(Community c) noexcept { return c == Community::one ? 1 : 2; }

using NodeId = std::uint32_t;

/// Finite two-community SBM instance G(n1, n2, p1, p2, q) with threshold r and seed counts.
struct ModelParams {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  double p1 = 0.0;
  double p2 = 0.0;
  double q = 0.0;
  int r = 2;
  std::int64_t a1 = 0;
  std::int64_t a2 = 0;

  std::int64_t n() const noexcept { return n1 + n2; }
  std::int64_t size(Community c) const noexcept { return c == Community::one ? n1 : n2; }
  std::int64_t seeds(Community c) const noexcept { return c == Community::one ? a1 : a2; }
  double intra(Community c) const noexcept { return c == Community::one ? p1 : p2; }

  /// Edge probability between a node of community `from` and a node of community `to`.
  double edge_probability(Community from, Community to) const noexcept {
    return from == to ? intra(from) : q;
  }

  /// Throws std::invalid_argument on a hard violation of the model invariants.
  ///
  /// Probabilities are accepted in [0, 1]; p = 1 is only meaningful for hand-built
  /// test graphs since the asymptotic window requires p -> 0.
  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("ModelParams: " + what); };
    if (n1 < 1) fail("n1 must be >= 1");
    if (n2 < 0) fail("n2 must be >= 0");
    if (n() > static_cast<std::int64_t>(UINT32_MAX)) fail("n1 + n2 exceeds 32-bit node index space");
    if (r < 2) fail("threshold r must be >= 2");
    for (double p : {p1, p2, q}) {
      if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
    }
    if (a1 < 0 || a1 > n1) fail("a1 must satisfy 0 <= a1 <= n1");
    if (a2 < 0 || a2 > n2) fail("a2 must satisfy 0 <= a2 <= n2");
  }
};

/// Heuristic check of the window 1/n_i << p_i << n_i^(-1/r): warnings only.
struct ValidityReport {
  std::vector<std::string> warnings;
  bool in_window() const noexcept { return warnings.empty(); }
};

inline ValidityReport check_window(const ModelParams& m) {
  ValidityReport report;
  for (Community c : {Community::one, Community::two}) {
    const auto n = static_cast<double>(m.size(c));
    if (n == 0) continue;
    const double p = m.intra(c);
    const std::string who = "community " + std::to_string(label(c));
    if (!(n * p > 1.0)) report.warnings.push_back(who + ": n*p <= 1 (graph too sparse)");
    if (!(p * std::pow(n, 1.0 / m.r) < 1.0)) {
      report.warnings.push_back(who + ": p*n^(1/r) >= 1 (graph too dense)");
    }
  }
  return report;
}

struct CriticalScale {
  double g1 = 0.0;
  double g2 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;

  double g(Community c) const noexcept { return c == Community::one ? g1 : g2; }
  double alpha(Community c) const noexcept { return c == Community::one ? alpha1 : alpha2; }
};

/// g = (1 - 1/r) * ((r-1)! / (n p^r))^(1/(r-1)).
inline double critical_seed_count(std::int64_t n, double p, int r) {
  if (n < 1) throw std::invalid_argument("critical_seed_count: n must be >= 1");
  if (!(p > 0.0)) throw std::invalid_argument("critical_seed_count: p must be > 0");
  if (r < 2) throw std::invalid_argument("critical_seed_count: r must be >= 2");
  const double rr = r;
  // log-space keeps (r-1)!/(n p^r) representable for small p and large r
  const double log_ratio =
      std::lgamma(rr) - std::log(static_cast<double>(n)) - rr * std::log(p);
  return (1.0 - 1.0 / rr) * std::exp(log_ratio / (rr - 1.0));
}

/// Critical seed scales g_i and normalised seed fractions alpha_i = a_i / g_i.
/// An empty community two (n2 = 0, single-community mode) reports g2 = alpha2 = 0.
inline CriticalScale derive_critical_scale(const ModelParams& m) {
  CriticalScale s;
  s.g1 = critical_seed_count(m.n1, m.p1, m.r);
  s.alpha1 = static_cast<double>(m.a1) / s.g1;
  if (m.n2 > 0) {
    s.g2 = critical_seed_count(m.n2, m.p2, m.r);
    s.alpha2 = static_cast<double>(m.a2) / s.g2;
  }
  return s;
}

}  // namespace bootperc
