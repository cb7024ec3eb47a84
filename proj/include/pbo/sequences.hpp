#pragma once

// Auxiliary sequences of distributions that move from the uniform law on
// {0,1}^d towards the maximizers of f, together with importance reweighting,
// the effective sample size and the adaptive step-length rule.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbo/errors.hpp"
#include "pbo/families.hpp"

namespace pbo {

enum class SequenceTag { tempered, level_set, logistic_potential };

inline std::string_view to_string(SequenceTag t) {
  switch (t) {
    case SequenceTag::tempered: return "tempered";
    case SequenceTag::level_set: return "level_set";
    case SequenceTag::logistic_potential: return "logistic_potential";
  }
  return "?";
}

inline SequenceTag parse_sequence_tag(std::string_view s) {
  if (s == "tempered") return SequenceTag::tempered;
  if (s == "level_set") return SequenceTag::level_set;
  if (s == "logistic_potential") return SequenceTag::logistic_potential;
  throw ContractViolation("unknown sequence '" + std::string(s) + "'");
}

/// Which sequence, plus the best objective value known so far. The level-set
/// and logistic-potential laws reference f(x*), which is unknown while running;
/// fstar stands in for it.
struct SequenceKind {
  SequenceTag tag = SequenceTag::tempered;
  double fstar = 0.0;
};

/// log of the unnormalized target mass at parameter rho for a state with value f.
inline double log_target(const SequenceKind& kind, double f, double rho) {
  switch (kind.tag) {
    case SequenceTag::tempered: return rho * f;
    case SequenceTag::level_set:
      if (rho <= 0.0) return 0.0;
      return f >= kind.fstar - 1.0 / rho ? 0.0 : -std::numeric_limits<double>::infinity();
    case SequenceTag::logistic_potential: return log_logistic(rho * (f - kind.fstar));
  }
  return 0.0;
}

/// Log incremental weights log(pi_{rho+alpha}(x_k) / pi_rho(x_k)), up to a constant.
inline std::vector<double> log_weight_update(const SequenceKind& kind, std::span<const double> fvals, double rho,
                                             double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("step length must be nonnegative");
  std::vector<double> out(fvals.size(), 0.0);
  switch (kind.tag) {
    case SequenceTag::tempered:
      for (std::size_t k = 0; k < fvals.size(); ++k) out[k] = alpha * fvals[k];
      break;
    case SequenceTag::level_set: {
      if (rho + alpha <= 0.0) throw DomainError("level-set parameter must be positive");
      const double level = kind.fstar - 1.0 / (rho + alpha);
      for (std::size_t k = 0; k < fvals.size(); ++k) {
        out[k] = fvals[k] >= level ? 0.0 : -std::numeric_limits<double>::infinity();
      }
      break;
    }
    case SequenceTag::logistic_potential:
      for (std::size_t k = 0; k < fvals.size(); ++k) {
        const double gap = fvals[k] - kind.fstar;
        out[k] = log_logistic((rho + alpha) * gap) - log_logistic(rho * gap);
      }
      break;
  }
  return out;
}

/// w'_k proportional to w_k exp(log_u_k), normalized with max-subtraction.
inline std::vector<double> reweight(std::span<const double> w, std::span<const double> log_u) {
  if (w.size() != log_u.size()) throw ContractViolation("reweight: size mismatch");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) top = std::max(top, log_u[k]);
  }
  if (!std::isfinite(top)) throw DegenerateWeights("reweighting annihilated every particle");
  std::vector<double> out(w.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) {
      out[k] = w[k] * std::exp(log_u[k] - top);
      total += out[k];
    }
  }
  for (double& v : out) v /= total;
  return out;
}

/// Effective sample size as a fraction of n: 1 / (n sum w_k^2), in [1/n, 1].
inline double ess(std::span<const double> w) {
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return 1.0 / (static_cast<double>(w.size()) * sq);
}

struct StepResult {
  double alpha = 0.0;
  std::vector<double> w_new;
  double ess_new = 0.0;
  bool saturated = false;  ///< the ESS could not be lowered to the target within alpha_max
};

namespace detail {

// Level-set step: keep the smallest prefix of particles ordered by decreasing
// value (ties by ascending index) whose restricted weights still have ESS at
// least beta times the current ESS.
inline StepResult level_set_step(const SequenceKind& kind, std::span<const double> w, std::span<const double> fvals,
                                 double rho, double beta, double alpha_max) {
  const double n = static_cast<double>(w.size());
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) order.push_back(k);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fvals[a] > fvals[b]; });
  const double target = beta * ess(w);

  double sum = 0.0;
  double sq = 0.0;
  std::size_t keep = order.size();
  double kept_ess = ess(w);
  for (std::size_t m = 0; m < order.size(); ++m) {
    sum += w[order[m]];
    sq += w[order[m]] * w[order[m]];
    const double e = sum * sum / (n * sq);
    if (e >= target * (1.0 - 1e-12)) {
      keep = m + 1;
      kept_ess = e;
      break;
    }
  }

  StepResult out;
  out.w_new.assign(w.size(), 0.0);
  double kept_mass = 0.0;
  for (std::size_t m = 0; m < keep; ++m) kept_mass += w[order[m]];
  for (std::size_t m = 0; m < keep; ++m) out.w_new[order[m]] = w[order[m]] / kept_mass;
  out.ess_new = kept_ess;

  const double boundary = fvals[order[keep - 1]];
  if (keep == order.size() || kind.fstar <= boundary) {
    out.alpha = keep == order.size() ? 0.0 : alpha_max;
    out.saturated = true;
    return out;
  }
  out.alpha = std::clamp(1.0 / (kind.fstar - boundary) - rho, 0.0, alpha_max);
  return out;
}

}  // namespace detail

/// Chooses alpha so that the ESS after reweighting is beta times the current
/// ESS. For the tempered and logistic-potential laws the ESS is continuous and
/// decreasing in alpha and is solved by bisection on [0, alpha_max]; if even
/// alpha_max cannot reach the target, alpha_max is returned with the saturation
/// flag set. The level-set law is solved exactly by sorting.
inline StepResult find_step_length(const SequenceKind& kind, std::span<const double> w,
                                   std::span<const double> fvals, double rho, double beta, double alpha_max,
                                   double tol = 1e-8) {
  if (!(beta > 0.0 && beta < 1.0)) throw ContractViolation("find_step_length: beta must lie in (0,1)");
  if (!(alpha_max > 0.0)) throw ContractViolation("find_step_length: alpha_max must be positive");
  if (w.size() != fvals.size()) throw ContractViolation("find_step_length: size mismatch");
  if (kind.tag == SequenceTag::level_set) return detail::level_set_step(kind, w, fvals, rho, beta, alpha_max);

  const double target = beta * ess(w);
  auto at = [&](double alpha) {
    StepResult r;
    r.alpha = alpha;
    r.w_new = reweight(w, log_weight_update(kind, fvals, rho, alpha));
    r.ess_new = ess(r.w_new);
    return r;
  };

  StepResult hi_result = at(alpha_max);
  if (hi_result.ess_new > target + tol) {
    hi_result.saturated = true;
    return hi_result;
  }
  if (std::abs(hi_result.ess_new - target) <= tol) return hi_result;

  // Stop once both the ESS residual and the bracket are within tol; the
  // residual alone leaves alpha loose where the ESS curve is flat.
  double lo = 0.0;
  double hi = alpha_max;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    StepResult r = at(mid);
    if (std::abs(r.ess_new - target) <= tol && hi - lo <= 2.0 * tol) return r;
    if (r.ess_new > target) {
      lo = mid;
    } else {
      hi = mid;
      hi_result = std::move(r);
    }
  }
  return hi_result;
}

/// Diversity expected from an independent sample of size n from pi:
/// 1 ^ |{x : c_n pi(x) >= 1}| / n, with c_n the smallest c such that
/// sum_x floor(c pi(x)) >= n. pmf lists pi over all 2^d states (d <= 20).
inline double expected_diversity(std::span<const double> pmf, std::size_t n) {
  if (pmf.size() > (std::size_t{1} << 20)) throw GuardError("expected_diversity: enumeration limited to d <= 20");
  if (!std::has_single_bit(pmf.size())) throw ContractViolation("expected_diversity: pmf must cover 2^d states");
  if (n == 0) throw ContractViolation("expected_diversity: n must be positive");
  const double target = static_cast<double>(n);
  constexpr double slack = 1e-12;

  auto total_floor = [&](double c) {
    double s = 0.0;
    for (double p : pmf) s += std::floor(c * p * (1.0 + slack));
    return s;
  };
  const double pmax = *std::max_element(pmf.begin(), pmf.end());
  if (!(pmax > 0.0)) throw ContractViolation("expected_diversity: pmf has no mass");

  double lo = 0.0;
  double hi = target / pmax;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total_floor(mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // Snap down to the jump point of the step function just below hi.
  double c = 0.0;
  for (double p : pmf) {
    if (p <= 0.0) continue;
    const double k = std::floor(hi * p * (1.0 + slack));
    if (k >= 1.0) c = std::max(c, k / p);
  }
  std::size_t count = 0;
  for (double p : pmf) {
    if (c * p * (1.0 + slack) >= 1.0) ++count;
  }
  return std::min(1.0, static_cast<double>(count) / target);
}

}  // namespace pbo
