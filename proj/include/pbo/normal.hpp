#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "pbo/errors.hpp"

namespace pbo {

/// Standard normal CDF.
inline double phi1(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal quantile; p must lie strictly inside (0, 1).
inline double phi1_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("phi1_inv: probability must lie in (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// Bivariate standard normal density with correlation sigma.
inline double bivariate_density(double x1, double x2, double sigma) {
  const double one_minus = (1.0 - sigma) * (1.0 + sigma);
  if (one_minus <= 0.0) return 0.0;
  const double q = (x1 * x1 - 2.0 * sigma * x1 * x2 + x2 * x2) / one_minus;
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(one_minus));
}

namespace detail {

// Upper orthant probability P(X > h, Y > k) for correlation r, following the
// Drezner-Wesolowsky series as refined by Genz: Gauss-Legendre quadrature of
// the arcsine-integral form for |r| < 0.925, and an asymptotic expansion plus
// correction integral near |r| = 1. Accurate to about 1e-15.
inline double upper_orthant(double h, double k, double r) {
  using boost::math::quadrature::gauss;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  // Rules sized to |r|; abscissae are the non-negative half of a symmetric rule.
  auto accumulate = [&](auto const& nodes, auto const& weights, auto&& term) {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double x = nodes[i];
      s += (x == 0.0) ? weights[i] * term(0.0) : weights[i] * (term(x) + term(-x));
    }
    return s;
  };
  auto with_rule = [&](double absr, auto&& term) {
    if (absr < 0.3) return accumulate(gauss<double, 6>::abscissa(), gauss<double, 6>::weights(), term);
    if (absr < 0.75) return accumulate(gauss<double, 12>::abscissa(), gauss<double, 12>::weights(), term);
    return accumulate(gauss<double, 20>::abscissa(), gauss<double, 20>::weights(), term);
  };

  double hk = h * k;
  double bvn = 0.0;
  const double absr = std::abs(r);
  if (absr < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    bvn = with_rule(absr, [&](double x) {
      const double sn = std::sin(0.5 * asr * (x + 1.0));
      return std::exp((sn * hk - hs) / (1.0 - sn * sn));
    });
    // The rule integrates over [-1,1]; the series integral is over [0, asr].
    bvn = bvn * asr / (2.0 * two_pi) + phi1(-h) * phi1(-k);
    return bvn;
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (absr < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-0.5 * (bs / as + hk)) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-0.5 * hk) * std::sqrt(two_pi) * phi1(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    bvn += with_rule(absr, [&](double x) {
      const double xs = (a * (x + 1.0)) * (a * (x + 1.0));
      const double rs = std::sqrt(1.0 - xs);
      const double asr = -0.5 * (bs / xs + hk);
      if (asr <= -100.0) return 0.0;
      return a * std::exp(asr) *
             (std::exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
    });
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) {
    bvn += phi1(-std::max(h, k));
  } else {
    bvn = -bvn;
    if (k > h) {
      if (h < 0.0) {
        bvn += phi1(k) - phi1(h);
      } else {
        bvn += phi1(-h) - phi1(-k);
      }
    }
  }
  return bvn;
}

}  // namespace detail

/// Bivariate standard normal CDF P(X <= x1, Y <= x2) with correlation sigma.
inline double phi2(double x1, double x2, double sigma) {
  if (!(sigma >= -1.0 && sigma <= 1.0)) throw DomainError("phi2: correlation must lie in [-1,1]");
  const double p = detail::upper_orthant(-x1, -x2, sigma);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace pbo
