#pragma once

// Parametric families on {0,1}^d: product (independent Bernoulli), logistic
// conditionals (chain-rule factorization with logistic links) and Gaussian
// copula (thresholded correlated normal). Each family can be fitted to a
// weighted particle sample and sampled from; the first two also evaluate
// their mass function exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pbo/errors.hpp"
#include "pbo/normal.hpp"
#include "pbo/objective.hpp"
#include "pbo/parallel.hpp"
#include "pbo/rng.hpp"

namespace pbo {

// ---------------------------------------------------------------------------
// Scalar helpers

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(logistic(x)) without overflow.
inline double log_logistic(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Default marginal clip: 1/(2n), never below 1e-6.
inline double default_clip(std::size_t n) { return std::max(1.0 / (2.0 * static_cast<double>(n)), 1e-6); }

// ---------------------------------------------------------------------------
// Weighted samples

/// Non-owning view of a particle system (w, X) used as fitting input.
class WeightedSample {
 public:
  WeightedSample(const BinaryMatrix& X, std::span<const double> w) : X_(&X), w_(w) {
    if (X.rows() == 0) throw ContractViolation("weighted sample needs at least one particle");
    if (w.size() != X.rows()) throw ContractViolation("weight count does not match particle count");
    double total = 0.0;
    for (double v : w) {
      if (!(v >= 0.0)) throw ContractViolation("weights must be nonnegative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ContractViolation("weights must sum to one");
  }

  std::size_t n() const noexcept { return X_->rows(); }
  std::size_t d() const noexcept { return X_->cols(); }
  const BinaryMatrix& X() const noexcept { return *X_; }
  std::span<const double> w() const noexcept { return w_; }

 private:
  const BinaryMatrix* X_;
  std::span<const double> w_;
};

/// Distinct rows of a weighted sample with their pooled weights, in order of
/// first appearance. The weighted likelihood and all moments depend only on
/// this pooled form, so fitting runs on it.
struct PooledSample {
  BinaryMatrix X;
  std::vector<double> w;
};

inline PooledSample pool_duplicates(const WeightedSample& s) {
  const std::size_t d = s.d();
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(s.n() * 2);
  std::vector<std::size_t> first;
  std::vector<double> weight;
  for (std::size_t k = 0; k < s.n(); ++k) {
    if (s.w()[k] == 0.0) continue;
    const auto r = s.X().row(k);
    std::string_view key(reinterpret_cast<const char*>(r.data()), r.size());
    auto [it, inserted] = index.try_emplace(key, first.size());
    if (inserted) {
      first.push_back(k);
      weight.push_back(s.w()[k]);
    } else {
      weight[it->second] += s.w()[k];
    }
  }
  PooledSample out{BinaryMatrix(first.size(), d), std::move(weight)};
  for (std::size_t u = 0; u < first.size(); ++u) {
    const auto src = s.X().row(first[u]);
    std::copy(src.begin(), src.end(), out.X.row(u).begin());
  }
  return out;
}

/// Weighted first and second sample moments, xbar_i and xbar_ij.
struct Moments {
  std::size_t d = 0;
  std::vector<double> mean;
  std::vector<double> cross;  // row-major d x d; diagonal equals mean

  double operator()(std::size_t i, std::size_t j) const noexcept { return cross[i * d + j]; }

  /// Weighted correlation of columns i and j; zero if either is constant.
  double correlation(std::size_t i, std::size_t j) const noexcept {
    const double vi = mean[i] * (1.0 - mean[i]);
    const double vj = mean[j] * (1.0 - mean[j]);
    if (vi <= 1e-14 || vj <= 1e-14) return 0.0;
    return ((*this)(i, j) - mean[i] * mean[j]) / std::sqrt(vi * vj);
  }
};

inline Moments weighted_moments(const BinaryMatrix& X, std::span<const double> w) {
  const std::size_t d = X.cols();
  Moments m{d, std::vector<double>(d, 0.0), std::vector<double>(d * d, 0.0)};
  std::vector<std::size_t> ones;
  ones.reserve(d);
  for (std::size_t k = 0; k < X.rows(); ++k) {
    const double wk = w[k];
    if (wk == 0.0) continue;
    ones.clear();
    const auto r = X.row(k);
    for (std::size_t i = 0; i < d; ++i) {
      if (r[i]) ones.push_back(i);
    }
    for (std::size_t a : ones) {
      m.mean[a] += wk;
      for (std::size_t b : ones) m.cross[a * d + b] += wk;
    }
  }
  return m;
}

inline Moments weighted_moments(const WeightedSample& s) { return weighted_moments(s.X(), s.w()); }

/// A draw together with the natural log of its mass under the sampling family.
struct SampleWithMass {
  BinaryVector y;
  double log_p = 0.0;
};

// ---------------------------------------------------------------------------
// Product family

struct ProductParams {
  std::vector<double> m;

  std::size_t dim() const noexcept { return m.size(); }
  static ProductParams uniform(std::size_t d) { return {std::vector<double>(d, 0.5)}; }
};

/// Maximum-likelihood fit: the weighted sample mean, clipped into [eps, 1-eps].
inline ProductParams product_fit(const WeightedSample& s, double eps_clip) {
  ProductParams p{std::vector<double>(s.d(), 0.0)};
  for (std::size_t k = 0; k < s.n(); ++k) {
    const double wk = s.w()[k];
    const auto r = s.X().row(k);
    for (std::size_t i = 0; i < s.d(); ++i) {
      if (r[i]) p.m[i] += wk;
    }
  }
  for (double& v : p.m) v = std::clamp(v, eps_clip, 1.0 - eps_clip);
  return p;
}

inline double product_logpmf(const ProductParams& p, std::span<const std::uint8_t> y) {
  if (y.size() != p.dim()) throw ContractViolation("product_logpmf: dimension mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) lp += y[i] ? std::log(p.m[i]) : std::log1p(-p.m[i]);
  return lp;
}

inline SampleWithMass product_sample(const ProductParams& p, RandomStream& rng) {
  SampleWithMass out{BinaryVector(p.dim(), 0), 0.0};
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const bool one = rng.uniform() < p.m[i];
    out.y[i] = one;
    out.log_p += one ? std::log(p.m[i]) : std::log1p(-p.m[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Logistic conditionals family

/// Lower-triangular A; component i is Bernoulli(logistic(a_ii + sum_{j<i} a_ij y_j)).
class LogisticParams {
 public:
  LogisticParams() = default;
  explicit LogisticParams(std::size_t d) : d_(d), a_(d * d, 0.0) {}

  /// The product family with marginals m, i.e. A = diag(logit(m)).
  static LogisticParams from_product(const ProductParams& p) {
    LogisticParams out(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) out.at(i, i) = logit(p.m[i]);
    return out;
  }

  std::size_t dim() const noexcept { return d_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * d_ + j]; }

  /// Entries above the diagonal are not addressable.
  double& at(std::size_t i, std::size_t j) {
    if (j > i || i >= d_) throw ContractViolation("logistic parameter index outside lower triangle");
    return a_[i * d_ + j];
  }

  /// Linear predictor of component i given the preceding components of y.
  double predictor(std::size_t i, std::span<const std::uint8_t> y) const noexcept {
    const double* row = a_.data() + i * d_;
    double eta = row[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (y[j]) eta += row[j];
    }
    return eta;
  }

  const std::vector<double>& data() const noexcept { return a_; }

  friend bool operator==(const LogisticParams&, const LogisticParams&) = default;

 private:
  std::size_t d_ = 0;
  std::vector<double> a_;
};

/// Chain-rule sampling; the exact log mass is accumulated along the way.
inline SampleWithMass logistic_sample(const LogisticParams& p, RandomStream& rng) {
  SampleWithMass out{BinaryVector(p.dim(), 0), 0.0};
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double eta = p.predictor(i, out.y);
    const bool one = rng.uniform() < logistic(eta);
    out.y[i] = one;
    out.log_p += one ? log_logistic(eta) : log_logistic(-eta);
  }
  return out;
}

inline double logistic_logpmf(const LogisticParams& p, std::span<const std::uint8_t> y) {
  if (y.size() != p.dim()) throw ContractViolation("logistic_logpmf: dimension mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double eta = p.predictor(i, y);
    lp += y[i] ? log_logistic(eta) : log_logistic(-eta);
  }
  return lp;
}

/// Tuning for the Newton-type fitting procedures.
struct FitOptions {
  double eps_clip = 0.0;       ///< marginal clip; 0 selects default_clip(n)
  double penalty = 1e-4;       ///< ridge on the logistic regressions
  double newton_tol = 1e-6;    ///< sup-norm step size at which Newton stops
  int max_iter = 50;
  double corr_screen = 0.075;  ///< predictors/pairs weaker than this are dropped
  int penalty_escalations = 2; ///< x10 retries before falling back to the marginal
};

namespace detail {

struct RowFit {
  std::vector<double> coef;  // predictors in order, then intercept
  bool converged = false;
};

// Penalized Newton-Raphson for one weighted logistic regression.
// Z holds the selected predictor columns plus a trailing column of ones.
inline RowFit penalized_newton(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                               Eigen::VectorXd a, double penalty, double tol, int max_iter) {
  const Eigen::Index p = Z.cols();
  for (int t = 0; t < max_iter; ++t) {
    const Eigen::VectorXd eta = Z * a;
    Eigen::VectorXd prob(eta.size());
    Eigen::VectorXd curv(eta.size());
    for (Eigen::Index k = 0; k < eta.size(); ++k) {
      prob[k] = logistic(eta[k]);
      curv[k] = w[k] * prob[k] * (1.0 - prob[k]);
    }
    const Eigen::VectorXd score = Z.transpose() * (w.cwiseProduct(y - prob)) - penalty * a;
    Eigen::MatrixXd hess = Z.transpose() * curv.asDiagonal() * Z;
    hess.diagonal().array() += penalty;
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = llt.solve(score);
    if (!step.allFinite()) break;
    a += step;
    if (step.lpNorm<Eigen::Infinity>() < tol) {
      return {std::vector<double>(a.data(), a.data() + p), true};
    }
  }
  return {std::vector<double>(a.data(), a.data() + p), false};
}

}  // namespace detail

/// Fits A row by row by penalized weighted logistic regression of column i on
/// the screened earlier columns plus an intercept, warm-started from init.
///
/// Rows whose weighted mean lies within eps_clip of 0 or 1 are set to the
/// clipped marginal directly. A row that fails to converge is retried with the
/// penalty raised tenfold (up to penalty_escalations times) and finally falls
/// back to a_ii = logit(mean), a_ij = 0. Rows are independent, so they may be
/// fitted in parallel with identical results.
inline LogisticParams logistic_fit(const WeightedSample& s, const LogisticParams& init, const FitOptions& opt = {},
                                   std::size_t workers = 1) {
  const std::size_t d = s.d();
  if (init.dim() != d) throw ContractViolation("logistic_fit: initial parameter dimension mismatch");
  if (!(opt.penalty > 0.0)) throw ContractViolation("logistic_fit: penalty must be positive");
  const double clip = opt.eps_clip > 0.0 ? opt.eps_clip : default_clip(s.n());

  const PooledSample pooled = pool_duplicates(s);
  const Moments mom = weighted_moments(pooled.X, pooled.w);
  const auto m = static_cast<Eigen::Index>(pooled.w.size());
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(pooled.w.data(), m);

  LogisticParams out(d);
  std::vector<std::vector<double>> rows(d);

  parallel_for(workers, d, [&](std::size_t i) {
    std::vector<double>& row = rows[i];
    row.assign(i + 1, 0.0);
    const double mean = mom.mean[i];
    if (mean <= clip || mean >= 1.0 - clip) {
      row[i] = logit(std::clamp(mean, clip, 1.0 - clip));
      return;
    }

    std::vector<std::size_t> preds;
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(mom.correlation(i, j)) >= opt.corr_screen) preds.push_back(j);
    }
    const auto p = static_cast<Eigen::Index>(preds.size());
    Eigen::MatrixXd Z(m, p + 1);
    Eigen::VectorXd y(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto r = pooled.X.row(static_cast<std::size_t>(k));
      for (Eigen::Index c = 0; c < p; ++c) Z(k, c) = r[preds[static_cast<std::size_t>(c)]];
      Z(k, p) = 1.0;
      y[k] = r[i];
    }
    Eigen::VectorXd a0(p + 1);
    for (Eigen::Index c = 0; c < p; ++c) a0[c] = init(i, preds[static_cast<std::size_t>(c)]);
    a0[p] = init(i, i);
    if (!a0.allFinite()) a0.setZero();

    double penalty = opt.penalty;
    for (int attempt = 0; attempt <= opt.penalty_escalations; ++attempt, penalty *= 10.0) {
      const auto fit = detail::penalized_newton(Z, y, w, a0, penalty, opt.newton_tol, opt.max_iter);
      if (fit.converged) {
        for (Eigen::Index c = 0; c < p; ++c) row[preds[static_cast<std::size_t>(c)]] = fit.coef[c];
        row[i] = fit.coef[p];
        return;
      }
    }
    row[i] = logit(std::clamp(mean, clip, 1.0 - clip));
  });

  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) out.at(i, j) = rows[i][j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian copula family

/// Shift added on top of |lambda_min| when repairing, so the result is strictly
/// positive definite rather than singular.
inline constexpr double kRepairMargin = 1e-6;
inline constexpr double kRepairThreshold = 1e-9;

/// Thresholds a and correlation matrix Sigma, with the Cholesky factor cached.
class CopulaParams {
 public:
  CopulaParams() = default;

  /// Throws InvalidParams if sigma is not a positive definite correlation matrix.
  CopulaParams(std::vector<double> a, Eigen::MatrixXd sigma) : a_(std::move(a)), sigma_(std::move(sigma)) {
    const auto d = static_cast<Eigen::Index>(a_.size());
    if (sigma_.rows() != d || sigma_.cols() != d) throw ContractViolation("copula: threshold/matrix size mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
    if (llt.info() != Eigen::Success) throw InvalidParams("copula: correlation matrix is not positive definite");
    chol_ = llt.matrixL();
  }

  static CopulaParams independent(std::vector<double> a) {
    const auto d = static_cast<Eigen::Index>(a.size());
    return CopulaParams(std::move(a), Eigen::MatrixXd::Identity(d, d));
  }

  std::size_t dim() const noexcept { return a_.size(); }
  const std::vector<double>& a() const noexcept { return a_; }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }

  bool repaired = false;         ///< set by copula_fit/blend when the PD repair fired
  double min_eigenvalue = 1.0;   ///< smallest eigenvalue before any repair

 private:
  std::vector<double> a_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd chol_;
};

struct RepairResult {
  Eigen::MatrixXd sigma;
  double min_eigenvalue = 0.0;
  bool repaired = false;
};

/// If the smallest eigenvalue lambda is <= 1e-9, returns
/// (Sigma + s I) / (1 + s) with s = |lambda| + kRepairMargin, which keeps the
/// unit diagonal and lowers all correlations by the same factor.
inline RepairResult repair_correlation(const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lambda = eig.eigenvalues().minCoeff();
  if (lambda > kRepairThreshold) return {sigma, lambda, false};
  const double shift = std::abs(lambda) + kRepairMargin;
  Eigen::MatrixXd fixed = sigma;
  fixed.diagonal().array() += shift;
  fixed /= (1.0 + shift);
  return {fixed, lambda, true};
}

namespace detail {

/// Solves phi2(ai, aj; s) = target for s; Newton from s0 with bisection fallback.
inline double solve_pair_correlation(double ai, double aj, double target, double s0, double tol, int max_iter) {
  constexpr double lo_bound = -1.0 + 1e-8;
  constexpr double hi_bound = 1.0 - 1e-8;
  double s = std::clamp(s0, lo_bound, hi_bound);
  for (int t = 0; t < max_iter; ++t) {
    const double dens = bivariate_density(ai, aj, s);
    if (dens < 1e-12) break;
    const double next = s - (phi2(ai, aj, s) - target) / dens;
    if (!(next >= -1.0 && next <= 1.0)) break;
    const double clamped = std::clamp(next, lo_bound, hi_bound);
    if (std::abs(clamped - s) < tol) return clamped;
    s = clamped;
  }
  // phi2 is increasing in the correlation, so bisection always succeeds.
  double lo = lo_bound;
  double hi = hi_bound;
  if (phi2(ai, aj, lo) >= target) return lo;
  if (phi2(ai, aj, hi) <= target) return hi;
  for (int t = 0; t < 200 && hi - lo >= tol; ++t) {
    const double mid = 0.5 * (lo + hi);
    if (phi2(ai, aj, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Method-of-moments fit: a_i = Phi^-1(xbar_i), and each screened pair solves
/// Phi2(a_i, a_j; sigma_ij) = xbar_ij. Pairs with weak weighted correlation
/// get sigma_ij = 0. The assembled matrix is repaired if not positive definite.
/// sigma_init supplies Newton starting points (identity if empty).
inline CopulaParams copula_fit(const WeightedSample& s, const Eigen::MatrixXd& sigma_init = {},
                               const FitOptions& opt = {}, std::size_t workers = 1) {
  const std::size_t d = s.d();
  const double clip = opt.eps_clip > 0.0 ? opt.eps_clip : default_clip(s.n());
  const PooledSample pooled = pool_duplicates(s);
  const Moments mom = weighted_moments(pooled.X, pooled.w);
  const bool have_init = sigma_init.rows() == static_cast<Eigen::Index>(d);

  std::vector<double> a(d);
  for (std::size_t i = 0; i < d; ++i) a[i] = phi1_inv(std::clamp(mom.mean[i], clip, 1.0 - clip));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> solved(pairs.size(), 0.0);
  parallel_for(workers, pairs.size(), [&](std::size_t idx) {
    const auto [i, j] = pairs[idx];
    if (std::abs(mom.correlation(i, j)) < opt.corr_screen) return;
    const double s0 = have_init ? sigma_init(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) : 0.0;
    solved[idx] = detail::solve_pair_correlation(a[i], a[j], mom(i, j), s0, opt.newton_tol, opt.max_iter);
  });

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
    const auto [i, j] = pairs[idx];
    sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = solved[idx];
    sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = solved[idx];
  }
  RepairResult fixed = repair_correlation(sigma);
  CopulaParams out(std::move(a), std::move(fixed.sigma));
  out.repaired = fixed.repaired;
  out.min_eigenvalue = fixed.min_eigenvalue;
  return out;
}

/// y_i = 1{v_i <= a_i} for v ~ N(0, Sigma). No mass value is available.
inline BinaryVector copula_sample(const CopulaParams& p, RandomStream& rng) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = phi1_inv(rng.open_uniform());
  const Eigen::VectorXd v = p.cholesky().triangularView<Eigen::Lower>() * z;
  BinaryVector y(p.dim());
  for (Eigen::Index i = 0; i < d; ++i) y[static_cast<std::size_t>(i)] = v[i] <= p.a()[static_cast<std::size_t>(i)];
  return y;
}

// ---------------------------------------------------------------------------
// Family-generic interface

enum class FamilyKind { product, logistic, copula };

inline std::string_view to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::product: return "product";
    case FamilyKind::logistic: return "logistic";
    case FamilyKind::copula: return "copula";
  }
  return "?";
}

inline FamilyKind parse_family_kind(std::string_view s) {
  if (s == "product") return FamilyKind::product;
  if (s == "logistic") return FamilyKind::logistic;
  if (s == "copula") return FamilyKind::copula;
  throw ContractViolation("unknown family '" + std::string(s) + "'");
}

using FamilyParams = std::variant<ProductParams, LogisticParams, CopulaParams>;

inline FamilyKind kind_of(const FamilyParams& p) { return static_cast<FamilyKind>(p.index()); }

inline std::size_t dim_of(const FamilyParams& p) {
  return std::visit([](const auto& v) { return v.dim(); }, p);
}

/// The uniform distribution on {0,1}^d expressed in the requested family.
inline FamilyParams uniform_family(FamilyKind kind, std::size_t d) {
  switch (kind) {
    case FamilyKind::product: return ProductParams::uniform(d);
    case FamilyKind::logistic: return LogisticParams(d);
    case FamilyKind::copula: return CopulaParams::independent(std::vector<double>(d, 0.0));
  }
  throw ContractViolation("unknown family kind");
}

inline bool supports_mass(const FamilyParams& p) { return !std::holds_alternative<CopulaParams>(p); }

inline BinaryVector draw(const FamilyParams& p, RandomStream& rng) {
  switch (kind_of(p)) {
    case FamilyKind::product: return product_sample(std::get<ProductParams>(p), rng).y;
    case FamilyKind::logistic: return logistic_sample(std::get<LogisticParams>(p), rng).y;
    case FamilyKind::copula: return copula_sample(std::get<CopulaParams>(p), rng);
  }
  throw ContractViolation("unknown family kind");
}

inline SampleWithMass draw_with_mass(const FamilyParams& p, RandomStream& rng) {
  if (const auto* prod = std::get_if<ProductParams>(&p)) return product_sample(*prod, rng);
  if (const auto* lg = std::get_if<LogisticParams>(&p)) return logistic_sample(*lg, rng);
  throw ContractViolation("Gaussian copula family has no pointwise mass");
}

inline double logpmf(const FamilyParams& p, std::span<const std::uint8_t> y) {
  if (const auto* prod = std::get_if<ProductParams>(&p)) return product_logpmf(*prod, y);
  if (const auto* lg = std::get_if<LogisticParams>(&p)) return logistic_logpmf(*lg, y);
  throw ContractViolation("Gaussian copula family has no pointwise mass");
}

/// Fits the family of the given kind; prev (same kind) provides warm starts.
inline FamilyParams fit_family(FamilyKind kind, const WeightedSample& s, const FamilyParams* prev,
                               const FitOptions& opt = {}, std::size_t workers = 1) {
  const double clip = opt.eps_clip > 0.0 ? opt.eps_clip : default_clip(s.n());
  switch (kind) {
    case FamilyKind::product: return product_fit(s, clip);
    case FamilyKind::logistic: {
      const LogisticParams* init = prev ? std::get_if<LogisticParams>(prev) : nullptr;
      return logistic_fit(s, init ? *init : LogisticParams(s.d()), opt, workers);
    }
    case FamilyKind::copula: {
      const CopulaParams* init = prev ? std::get_if<CopulaParams>(prev) : nullptr;
      return copula_fit(s, init ? init->sigma() : Eigen::MatrixXd{}, opt, workers);
    }
  }
  throw ContractViolation("unknown family kind");
}

/// Convex combination (1 - tau) fitted + tau prev, entrywise. Copula matrices
/// are repaired afterwards if the blend is not positive definite.
inline FamilyParams blend_params(const FamilyParams& prev, const FamilyParams& fitted, double tau) {
  if (prev.index() != fitted.index()) throw ContractViolation("blend_params: family kinds differ");
  if (dim_of(prev) != dim_of(fitted)) throw ContractViolation("blend_params: dimensions differ");
  if (!(tau >= 0.0 && tau < 1.0)) throw ContractViolation("blend_params: tau must lie in [0,1)");
  const double keep = 1.0 - tau;
  switch (kind_of(prev)) {
    case FamilyKind::product: {
      const auto& a = std::get<ProductParams>(prev);
      ProductParams out = std::get<ProductParams>(fitted);
      for (std::size_t i = 0; i < out.m.size(); ++i) out.m[i] = keep * out.m[i] + tau * a.m[i];
      return out;
    }
    case FamilyKind::logistic: {
      const auto& a = std::get<LogisticParams>(prev);
      const auto& b = std::get<LogisticParams>(fitted);
      LogisticParams out(a.dim());
      for (std::size_t i = 0; i < a.dim(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) out.at(i, j) = keep * b(i, j) + tau * a(i, j);
      }
      return out;
    }
    case FamilyKind::copula: {
      const auto& a = std::get<CopulaParams>(prev);
      const auto& b = std::get<CopulaParams>(fitted);
      std::vector<double> thr(a.dim());
      for (std::size_t i = 0; i < a.dim(); ++i) thr[i] = keep * b.a()[i] + tau * a.a()[i];
      RepairResult fixed = repair_correlation(keep * b.sigma() + tau * a.sigma());
      CopulaParams out(std::move(thr), std::move(fixed.sigma));
      out.repaired = fixed.repaired;
      out.min_eigenvalue = fixed.min_eigenvalue;
      return out;
    }
  }
  throw ContractViolation("unknown family kind");
}

/// Debug dump: a "family=<kind>" header, then one parameter row per line.
inline void write_params(std::ostream& os, const FamilyParams& p) {
  const auto old_precision = os.precision(17);
  os << "family=" << to_string(kind_of(p)) << '\n';
  auto write_row = [&](auto first, auto last) {
    for (auto it = first; it != last; ++it) os << (it == first ? "" : " ") << *it;
    os << '\n';
  };
  switch (kind_of(p)) {
    case FamilyKind::product: {
      const auto& m = std::get<ProductParams>(p).m;
      write_row(m.begin(), m.end());
      break;
    }
    case FamilyKind::logistic: {
      const auto& a = std::get<LogisticParams>(p);
      for (std::size_t i = 0; i < a.dim(); ++i) {
        const auto* row = a.data().data() + i * a.dim();
        write_row(row, row + i + 1);
      }
      break;
    }
    case FamilyKind::copula: {
      const auto& c = std::get<CopulaParams>(p);
      write_row(c.a().begin(), c.a().end());
      for (Eigen::Index i = 0; i < c.sigma().rows(); ++i) {
        const Eigen::VectorXd r = c.sigma().row(i);
        write_row(r.data(), r.data() + r.size());
      }
      break;
    }
  }
  os.precision(old_precision);
}

}  // namespace pbo
