#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace bootperc {

/// P(Bin(m, p) = k).
inline double binomial_pmf(std::int64_t m, double p, std::int64_t k) {
  if (k < 0 || k > m) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == m ? 1.0 : 0.0;
  return boost::math::pdf(boost::math::binomial_distribution<double>(static_cast<double>(m), p),
                          static_cast<double>(k));
}

/// P(Bin(m, p) >= k), accurate in the far tail (regularised incomplete beta I_p(k, m-k+1)).
inline double binomial_upper_tail(std::int64_t m, double p, std::int64_t k) {
  if (k <= 0) return 1.0;
  if (k > m) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(m - k + 1), p);
}

/// P(Bin(m, p) <= k).
inline double binomial_lower_tail(std::int64_t m, double p, std::int64_t k) {
  if (k < 0) return 0.0;
  if (k >= m) return 1.0;
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  return boost::math::ibetac(static_cast<double>(k + 1), static_cast<double>(m - k), p);
}

/// H(x) = 1 - x + x log x, with H(0) = 1.
inline double rate_function(double x) {
  if (x < 0.0) throw std::domain_error("rate_function: x must be >= 0");
  if (x == 0.0) return 1.0;
  return 1.0 - x + x * std::log(x);
}

enum class TailDirection {
  upper,      // P(Bin >= k) <= exp(-mu H(k/mu)), valid for k >= mu
  lower,      // P(Bin <= k) <= exp(-mu H(k/mu)), valid for k <= mu
  upper_far,  // P(Bin >= k) <= exp(-(k/2) log(k/mu)), valid for k >= e^2 mu
};

/// Classical Chernoff-type bounds on binomial tails, mu = m q.
inline double binomial_tail_bound(std::int64_t m, double q, double k, TailDirection direction) {
  if (!(k > 0.0 && k < static_cast<double>(m))) {
    throw std::invalid_argument("binomial_tail_bound: requires 0 < k < m");
  }
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("binomial_tail_bound: requires q in (0,1)");
  const double mu = static_cast<double>(m) * q;
  switch (direction) {
    case TailDirection::upper:
      if (k < mu) throw std::domain_error("binomial_tail_bound: upper tail needs k >= mu");
      return std::exp(-mu * rate_function(k / mu));
    case TailDirection::lower:
      if (k > mu) throw std::domain_error("binomial_tail_bound: lower tail needs k <= mu");
      return std::exp(-mu * rate_function(k / mu));
    case TailDirection::upper_far:
      if (k < std::exp(2.0) * mu) {
        throw std::domain_error("binomial_tail_bound: far upper tail needs k >= e^2 mu");
      }
      return std::exp(-(k / 2.0) * std::log(k / mu));
  }
  throw std::invalid_argument("binomial_tail_bound: unknown direction");
}

}  // namespace bootperc
