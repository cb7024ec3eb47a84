#pragma once

// Reference computations for the tests. Written directly from the
// definitions, without the library's evaluation shortcuts.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "pbo/objective.hpp"

namespace testing_support {

using Matrix = std::vector<std::vector<double>>;

inline Matrix toy_matrix() {
  return {{1, 2, 1, 0}, {2, 1, -3, -2}, {1, -3, 1, 2}, {0, -2, 2, -2}};
}

inline pbo::QuadraticObjective make_objective(const Matrix& F) {
  std::vector<double> flat;
  for (const auto& row : F) flat.insert(flat.end(), row.begin(), row.end());
  return pbo::QuadraticObjective(F.size(), flat);
}

/// State t of B^d; bit i of t is component i.
inline pbo::BinaryVector state(std::uint64_t t, std::size_t d) {
  pbo::BinaryVector x(d);
  for (std::size_t i = 0; i < d; ++i) x[i] = (t >> i) & 1u;
  return x;
}

inline double quad_form(const Matrix& F, const pbo::BinaryVector& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    for (std::size_t j = 0; j < F.size(); ++j) s += F[i][j] * x[i] * x[j];
  }
  return s;
}

/// pi(x) proportional to exp(rho x^T F x) over all 2^d states, indexed as in state().
inline std::vector<double> tempered_pmf(const Matrix& F, double rho) {
  const std::size_t d = F.size();
  std::vector<double> p(std::size_t{1} << d);
  double z = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) z += p[t] = std::exp(rho * quad_form(F, state(t, d)));
  for (double& v : p) v /= z;
  return p;
}

inline std::uint64_t index_of(const pbo::BinaryVector& x) {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < x.size(); ++i) t |= std::uint64_t{x[i]} << i;
  return t;
}

inline Matrix random_symmetric(std::size_t d, int c, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> u(-c, c);
  Matrix F(d, std::vector<double>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) F[i][j] = F[j][i] = u(gen);
  }
  return F;
}

/// Three standard errors of a binomial proportion estimate.
inline double three_sigma(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

}  // namespace testing_support
