#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pbo/errors.hpp"

namespace pbo {

/// A point of {0,1}^d, one byte per component.
using BinaryVector = std::vector<std::uint8_t>;

inline void require_binary(std::span<const std::uint8_t> x) {
  if (x.empty()) throw ContractViolation("binary vector must have dimension >= 1");
  for (auto b : x) {
    if (b > 1) throw ContractViolation("binary vector entries must be 0 or 1");
  }
}

inline std::string to_bitstring(std::span<const std::uint8_t> x) {
  std::string s(x.size(), '0');
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? '1' : '0';
  return s;
}

inline BinaryVector from_bitstring(const std::string& s) {
  BinaryVector x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw ContractViolation("bitstring may only contain 0 and 1");
    x[i] = s[i] == '1';
  }
  return x;
}

/// Row-major n x d matrix of bits; row k is particle k.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<std::uint8_t> row(std::size_t k) noexcept { return {bits_.data() + k * cols_, cols_}; }
  std::span<const std::uint8_t> row(std::size_t k) const noexcept { return {bits_.data() + k * cols_, cols_}; }

  std::uint8_t operator()(std::size_t k, std::size_t i) const noexcept { return bits_[k * cols_ + i]; }
  std::uint8_t& operator()(std::size_t k, std::size_t i) noexcept { return bits_[k * cols_ + i]; }

  const std::vector<std::uint8_t>& data() const noexcept { return bits_; }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// f(x) = x^T F x for a dense symmetric F.
///
/// Immutable after construction. Asymmetric input is rejected rather than
/// symmetrized because every generator emits symmetric matrices.
class QuadraticObjective {
 public:
  QuadraticObjective() = default;

  /// coeffs is row-major d x d.
  QuadraticObjective(std::size_t dim, std::vector<double> coeffs) : dim_(dim), coeffs_(std::move(coeffs)) {
    if (dim_ == 0) throw ContractViolation("objective dimension must be >= 1");
    if (coeffs_.size() != dim_ * dim_) throw ContractViolation("coefficient count does not match dimension");
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < dim_; ++j) {
        const double v = coeffs_[i * dim_ + j];
        if (!std::isfinite(v)) throw ContractViolation("coefficients must be finite");
        if (v != coeffs_[j * dim_ + i]) throw ContractViolation("coefficient matrix must be symmetric");
      }
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return coeffs_[i * dim_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {coeffs_.data() + i * dim_, dim_}; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

  friend bool operator==(const QuadraticObjective&, const QuadraticObjective&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coeffs_;
};

inline double evaluate(const QuadraticObjective& obj, std::span<const std::uint8_t> x) {
  const std::size_t d = obj.dim();
  if (x.size() != d) throw ContractViolation("evaluate: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!x[i]) continue;
    const auto r = obj.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (x[j]) s += r[j];
    }
    total += s;
  }
  return total;
}

/// f(x with bit i flipped) - f(x) in O(d).
inline double flip_delta(const QuadraticObjective& obj, std::span<const std::uint8_t> x, std::size_t i) {
  const std::size_t d = obj.dim();
  if (x.size() != d) throw ContractViolation("flip_delta: dimension mismatch");
  if (i >= d) throw ContractViolation("flip_delta: index out of range");
  const auto r = obj.row(i);
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (j != i && x[j]) s += r[j];
  }
  s = 2.0 * s + r[i];
  return x[i] ? -s : s;
}

/// Overload taking the current value; kept for call sites that thread fx through.
inline double flip_delta(const QuadraticObjective& obj, std::span<const std::uint8_t> x, std::size_t i,
                         double /*fx*/) {
  return flip_delta(obj, x, i);
}

/// Sum of x^T F x over all of {0,1}^d, i.e. 2^(d-2) (1^T F 1 + tr F).
inline double quadratic_mass_normalizer(const QuadraticObjective& obj) {
  const std::size_t d = obj.dim();
  double all = 0.0;
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    trace += obj(i, i);
    for (std::size_t j = 0; j < d; ++j) all += obj(i, j);
  }
  return std::ldexp(all + trace, static_cast<int>(d) - 2);
}

/// Local fields h_i = sum_j F_ij x_j, maintained incrementally by local search
/// and enumeration so that a flip costs O(d).
class LocalField {
 public:
  LocalField(const QuadraticObjective& obj, std::span<const std::uint8_t> x)
      : obj_(&obj), x_(x.begin(), x.end()), h_(obj.dim(), 0.0) {
    if (x.size() != obj.dim()) throw ContractViolation("LocalField: dimension mismatch");
    for (std::size_t j = 0; j < x_.size(); ++j) {
      if (!x_[j]) continue;
      const auto r = obj.row(j);
      for (std::size_t i = 0; i < h_.size(); ++i) h_[i] += r[i];
    }
    value_ = evaluate(obj, x_);
  }

  double value() const noexcept { return value_; }
  const BinaryVector& state() const noexcept { return x_; }

  double delta(std::size_t i) const noexcept {
    const double fii = (*obj_)(i, i);
    const double s = 2.0 * (h_[i] - (x_[i] ? fii : 0.0)) + fii;
    return x_[i] ? -s : s;
  }

  void flip(std::size_t i) noexcept {
    value_ += delta(i);
    const double sign = x_[i] ? -1.0 : 1.0;
    x_[i] ^= 1;
    const auto r = obj_->row(i);
    for (std::size_t j = 0; j < h_.size(); ++j) h_[j] += sign * r[j];
  }

 private:
  const QuadraticObjective* obj_;
  BinaryVector x_;
  std::vector<double> h_;
  double value_ = 0.0;
};

}  // namespace pbo
