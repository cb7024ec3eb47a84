#pragma once

// Sequential Monte Carlo optimizer: reweight along an auxiliary sequence,
// resample systematically, and move particles with Metropolis-Hastings
// kernels until the particle diversity stalls.

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pbo/errors.hpp"
#include "pbo/families.hpp"
#include "pbo/objective.hpp"
#include "pbo/oracle.hpp"
#include "pbo/parallel.hpp"
#include "pbo/record.hpp"
#include "pbo/rng.hpp"
#include "pbo/sequences.hpp"

namespace pbo {

enum class KernelKind { adaptive_logistic, adaptive_product, symmetric };

inline std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::adaptive_logistic: return "adaptive_logistic";
    case KernelKind::adaptive_product: return "adaptive_product";
    case KernelKind::symmetric: return "symmetric";
  }
  return "?";
}

inline KernelKind parse_kernel_kind(std::string_view s) {
  if (s == "adaptive_logistic") return KernelKind::adaptive_logistic;
  if (s == "adaptive_product") return KernelKind::adaptive_product;
  if (s == "symmetric") return KernelKind::symmetric;
  throw ContractViolation("unknown kernel '" + std::string(s) + "'");
}

struct SmcConfig {
  std::size_t n = 2000;
  double beta = 0.9;
  double zeta_star = 0.95;
  double zeta_delta_star = 0.01;
  double delta_term = 0.02;
  std::size_t d_star = 12;  ///< degeneracy exit below this many random components; 0 disables
  std::size_t move_batch = 0;  ///< 0 picks 1 for independent kernels, 10 for symmetric
  KernelKind kernel = KernelKind::adaptive_logistic;
  std::vector<double> symmetric_p{1.0};  ///< p_k for k = 1, 2, ...; missing entries are zero
  SequenceTag seq = SequenceTag::tempered;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  double alpha_max_factor = 100.0;  ///< alpha_max = factor * (rho + 1)
  double step_tol = 1e-8;
  std::size_t max_iters = 10000;
  bool final_polish = false;
  bool progress = false;
  FitOptions fit{};

  std::size_t batch_size() const noexcept {
    if (move_batch > 0) return move_batch;
    return kernel == KernelKind::symmetric ? 10 : 1;
  }

  void validate() const {
    if (n < 2) throw ContractViolation("smc: need at least two particles");
    if (!(beta > 0.0 && beta < 1.0)) throw ContractViolation("smc: beta must lie in (0,1)");
    if (!(delta_term > 0.0 && delta_term < zeta_star && zeta_star <= 1.0)) {
      throw ContractViolation("smc: require 0 < delta_term < zeta_star <= 1");
    }
    if (!(zeta_delta_star > 0.0)) throw ContractViolation("smc: zeta_delta_star must be positive");
    if (d_star > kMaxBruteForceDim) throw ContractViolation("smc: d_star may not exceed 25");
    if (!(alpha_max_factor > 0.0)) throw ContractViolation("smc: alpha_max_factor must be positive");
    if (kernel == KernelKind::symmetric) {
      double total = 0.0;
      for (double p : symmetric_p) {
        if (!(p >= 0.0)) throw ContractViolation("smc: symmetric kernel weights must be nonnegative");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ContractViolation("smc: symmetric kernel weights must sum to one");
    }
  }
};

/// n weighted particles with cached objective values, targeting pi_rho.
struct ParticleSystem {
  BinaryMatrix X;
  std::vector<double> w;
  std::vector<double> fvals;
  double rho = 0.0;

  std::size_t size() const noexcept { return X.rows(); }
  std::size_t dim() const noexcept { return X.cols(); }
};

struct MoveStats {
  std::size_t steps_taken = 0;
  double mean_acceptance = 0.0;
  double final_diversity = 0.0;
  std::uint64_t evaluations = 0;
};

// Stream tags keep the substreams of different algorithm stages disjoint.
enum class Stage : std::uint64_t { init = 1, resample = 2, move = 3, polish = 4, sample = 5 };

inline RandomStream substream(std::uint64_t seed, std::uint64_t iteration, Stage stage, std::uint64_t index = 0) {
  return RandomStream{seed, iteration, static_cast<std::uint64_t>(stage), index};
}

/// Fraction of distinct rows.
inline double diversity(const BinaryMatrix& X) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(X.rows() * 2);
  for (std::size_t k = 0; k < X.rows(); ++k) {
    const auto r = X.row(k);
    seen.emplace(reinterpret_cast<const char*>(r.data()), r.size());
  }
  return static_cast<double>(seen.size()) / static_cast<double>(X.rows());
}

/// n iid uniform particles with uniform weights and rho = 0.
inline ParticleSystem init_system(const QuadraticObjective& obj, std::size_t n, std::uint64_t seed,
                                  std::size_t workers = 1) {
  if (n < 2) throw ContractViolation("init_system: need at least two particles");
  const std::size_t d = obj.dim();
  ParticleSystem sys{BinaryMatrix(n, d), std::vector<double>(n, 1.0 / static_cast<double>(n)),
                     std::vector<double>(n, 0.0), 0.0};
  parallel_for(workers, n, [&](std::size_t k) {
    RandomStream rng = substream(seed, 0, Stage::init, k);
    auto row = sys.X.row(k);
    for (std::size_t i = 0; i < d; ++i) row[i] = rng() >> 63;
    sys.fvals[k] = evaluate(obj, row);
  });
  return sys;
}

inline ParticleSystem init_system(const QuadraticObjective& obj, const SmcConfig& cfg) {
  return init_system(obj, cfg.n, cfg.seed, cfg.workers);
}

/// Systematic resampling with a single uniform; output weights are uniform and
/// cached values travel with their particles.
inline ParticleSystem resample_systematic(const ParticleSystem& sys, RandomStream& rng) {
  const std::size_t n = sys.size();
  ParticleSystem out{BinaryMatrix(n, sys.dim()), std::vector<double>(n, 1.0 / static_cast<double>(n)),
                     std::vector<double>(n, 0.0), sys.rho};
  const double scale = static_cast<double>(n);
  std::size_t i = 0;
  double c = scale * sys.w[0];
  double u = rng.uniform();
  for (std::size_t k = 0; k < n; ++k) {
    while (c < u && i + 1 < n) {
      ++i;
      c += scale * sys.w[i];
    }
    const auto src = sys.X.row(i);
    std::copy(src.begin(), src.end(), out.X.row(k).begin());
    out.fvals[k] = sys.fvals[i];
    u += 1.0;
  }
  return out;
}

namespace detail {

// log acceptance of a move x -> gamma given the target log masses and the
// proposal correction log q(x) - log q(gamma).
inline double acceptance_probability(double log_target_new, double log_target_old, double proposal_correction) {
  if (log_target_new == -std::numeric_limits<double>::infinity()) return 0.0;
  if (log_target_old == -std::numeric_limits<double>::infinity()) return 1.0;
  const double log_ratio = log_target_new - log_target_old + proposal_correction;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

}  // namespace detail

/// Independent Metropolis-Hastings proposals from a family with pointwise mass.
/// Holds log q of every current particle so each sweep needs one mass
/// evaluation per proposal only.
class IndependentKernel {
 public:
  IndependentKernel(const FamilyParams& q, const ParticleSystem& sys, std::size_t workers = 1) : q_(&q) {
    if (!supports_mass(q)) throw ContractViolation("independent kernel needs a family with pointwise mass");
    log_q_.resize(sys.size());
    parallel_for(workers, sys.size(), [&](std::size_t k) { log_q_[k] = logpmf(q, sys.X.row(k)); });
  }

  /// One proposal for particle k; returns the acceptance probability.
  double step(ParticleSystem& sys, std::size_t k, const QuadraticObjective& obj, const SequenceKind& kind,
              RandomStream& rng) {
    SampleWithMass prop = draw_with_mass(*q_, rng);
    const double f_new = evaluate(obj, prop.y);
    const double lambda = detail::acceptance_probability(log_target(kind, f_new, sys.rho),
                                                         log_target(kind, sys.fvals[k], sys.rho),
                                                         log_q_[k] - prop.log_p);
    if (rng.uniform() < lambda) {
      std::copy(prop.y.begin(), prop.y.end(), sys.X.row(k).begin());
      sys.fvals[k] = f_new;
      log_q_[k] = prop.log_p;
    }
    return lambda;
  }

 private:
  const FamilyParams* q_;
  std::vector<double> log_q_;
};

/// Symmetric proposals: with probability p_k flip a uniformly chosen k-subset.
class SymmetricKernel {
 public:
  explicit SymmetricKernel(std::span<const double> p) : cdf_(p.size()) {
    std::partial_sum(p.begin(), p.end(), cdf_.begin());
  }

  double step(ParticleSystem& sys, std::size_t k, const QuadraticObjective& obj, const SequenceKind& kind,
              RandomStream& rng) {
    const std::size_t d = sys.dim();
    const double u = rng.uniform() * cdf_.back();
    const std::size_t order = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin()) + 1, d);
    auto row = sys.X.row(k);
    BinaryVector y(row.begin(), row.end());
    double f_new = sys.fvals[k];
    if (order == 1) {
      const std::size_t i = rng.below(d);
      f_new += flip_delta(obj, y, i);
      y[i] ^= 1;
    } else {
      // Partial Fisher-Yates picks a uniform k-subset.
      std::vector<std::size_t> idx(d);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t r = 0; r < order; ++r) {
        std::swap(idx[r], idx[r + rng.below(d - r)]);
        f_new += flip_delta(obj, y, idx[r]);
        y[idx[r]] ^= 1;
      }
    }
    const double lambda = detail::acceptance_probability(log_target(kind, f_new, sys.rho),
                                                         log_target(kind, sys.fvals[k], sys.rho), 0.0);
    if (rng.uniform() < lambda) {
      std::copy(y.begin(), y.end(), row.begin());
      sys.fvals[k] = f_new;
    }
    return lambda;
  }

 private:
  std::vector<double> cdf_;
};

/// One sweep of `kernel` over every particle, each with its own stream.
template <class Kernel>
MoveStats sweep(ParticleSystem& sys, Kernel& kernel, const QuadraticObjective& obj, const SequenceKind& kind,
                std::span<RandomStream> streams, std::size_t workers = 1) {
  if (streams.size() != sys.size()) throw ContractViolation("sweep: one stream per particle required");
  std::vector<double> lambda(sys.size(), 0.0);
  parallel_for(workers, sys.size(), [&](std::size_t k) { lambda[k] = kernel.step(sys, k, obj, kind, streams[k]); });
  MoveStats stats;
  stats.steps_taken = 1;
  stats.mean_acceptance = std::accumulate(lambda.begin(), lambda.end(), 0.0) / static_cast<double>(sys.size());
  stats.evaluations = sys.size();
  return stats;
}

inline MoveStats mh_step_independent(ParticleSystem& sys, const FamilyParams& q, const SequenceKind& kind,
                                     const QuadraticObjective& obj, std::span<RandomStream> streams,
                                     std::size_t workers = 1) {
  IndependentKernel kernel(q, sys, workers);
  MoveStats s = sweep(sys, kernel, obj, kind, streams, workers);
  s.final_diversity = diversity(sys.X);
  return s;
}

inline MoveStats mh_step_symmetric(ParticleSystem& sys, std::span<const double> p, const SequenceKind& kind,
                                   const QuadraticObjective& obj, std::span<RandomStream> streams,
                                   std::size_t workers = 1) {
  SymmetricKernel kernel(p);
  MoveStats s = sweep(sys, kernel, obj, kind, streams, workers);
  s.final_diversity = diversity(sys.X);
  return s;
}

/// Applies batches of `batch` sweeps until the diversity exceeds zeta_star or
/// a batch gains less than zeta_delta_star. At least one batch always runs.
template <class Kernel>
MoveStats move(ParticleSystem& sys, Kernel& kernel, const QuadraticObjective& obj, const SequenceKind& kind,
               std::span<RandomStream> streams, std::size_t batch, double zeta_star, double zeta_delta_star,
               std::size_t workers = 1) {
  MoveStats total;
  double acceptance_sum = 0.0;
  double before = diversity(sys.X);
  while (true) {
    for (std::size_t b = 0; b < batch; ++b) {
      const MoveStats s = sweep(sys, kernel, obj, kind, streams, workers);
      acceptance_sum += s.mean_acceptance;
      total.evaluations += s.evaluations;
      ++total.steps_taken;
    }
    const double after = diversity(sys.X);
    total.final_diversity = after;
    if (after > zeta_star || after - before < zeta_delta_star) break;
    before = after;
  }
  total.mean_acceptance = acceptance_sum / static_cast<double>(total.steps_taken);
  return total;
}

namespace detail {

inline std::size_t argmax_first(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Components whose weighted mean is within eps of 0 or 1 count as constant.
/// Returns the free indices and a base vector with constants pinned.
inline std::pair<std::vector<std::size_t>, BinaryVector> split_components(std::span<const double> means,
                                                                          double eps) {
  std::vector<std::size_t> free;
  BinaryVector base(means.size(), 0);
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (means[i] <= eps) {
      base[i] = 0;
    } else if (means[i] >= 1.0 - eps) {
      base[i] = 1;
    } else {
      free.push_back(i);
    }
  }
  return {std::move(free), std::move(base)};
}

/// Best-improvement 1-flip ascent; returns the number of neighbor evaluations.
inline std::uint64_t one_opt_ascent(const QuadraticObjective& obj, LocalField& field) {
  std::uint64_t evals = 0;
  while (true) {
    std::size_t best_i = field.state().size();
    double best_gain = 0.0;
    for (std::size_t i = 0; i < field.state().size(); ++i) {
      const double g = field.delta(i);
      ++evals;
      if (g > best_gain) {
        best_gain = g;
        best_i = i;
      }
    }
    if (best_i == field.state().size()) return evals;
    field.flip(best_i);
  }
  (void)obj;
}

}  // namespace detail

/// Why an SMC run stopped.
enum class SmcExit { diversity, degenerate_family, saturation, iteration_cap };

struct SmcResult {
  RunRecord record;
  SmcExit exit = SmcExit::diversity;
  std::vector<double> acceptance_history;  ///< mean acceptance of each move step
  std::vector<double> rho_history;         ///< rho after each reweighting
};

/// Full optimizer: fit family -> resample -> move -> step length -> reweight,
/// started from uniform particles. Stops on low diversity, a degenerate fitted
/// family (fewer than d_star random components; the remaining free components
/// are then enumerated exactly), or two consecutive saturated step searches.
inline SmcResult smc_optimize_detailed(const QuadraticObjective& obj, const SmcConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = cfg.n;
  const std::size_t d = obj.dim();
  const double clip = cfg.fit.eps_clip > 0.0 ? cfg.fit.eps_clip : default_clip(n);

  SmcResult result;
  RunRecord& rec = result.record;
  rec.algorithm = cfg.kernel == KernelKind::symmetric ? "smc-local" : "smc";
  rec.seed = cfg.seed;

  ParticleSystem sys = init_system(obj, cfg);
  rec.evaluations = n;
  auto track_best = [&] {
    const std::size_t k = detail::argmax_first(sys.fvals);
    if (rec.best_x.empty() || sys.fvals[k] > rec.best_f) {
      rec.best_f = sys.fvals[k];
      const auto r = sys.X.row(k);
      rec.best_x.assign(r.begin(), r.end());
    }
  };
  track_best();
  SequenceKind kind{cfg.seq, rec.best_f};

  std::size_t saturated_in_a_row = 0;
  auto advance = [&] {
    const double alpha_max = cfg.alpha_max_factor * (sys.rho + 1.0);
    StepResult step = find_step_length(kind, sys.w, sys.fvals, sys.rho, cfg.beta, alpha_max, cfg.step_tol);
    sys.w = std::move(step.w_new);
    sys.rho += step.alpha;
    saturated_in_a_row = step.saturated ? saturated_in_a_row + 1 : 0;
    result.rho_history.push_back(sys.rho);
  };
  advance();

  const FamilyKind family_kind =
      cfg.kernel == KernelKind::adaptive_product ? FamilyKind::product : FamilyKind::logistic;
  FamilyParams family = uniform_family(family_kind, d);
  const std::vector<double> sym_p = [&] {
    std::vector<double> p(cfg.symmetric_p);
    p.resize(std::max<std::size_t>(1, std::min(p.size(), d)), 0.0);
    return p;
  }();

  result.exit = SmcExit::iteration_cap;
  std::uint64_t iteration = 0;
  while (iteration < cfg.max_iters) {
    if (saturated_in_a_row >= 2) {
      result.exit = SmcExit::saturation;
      break;
    }
    if (diversity(sys.X) <= cfg.delta_term) {
      result.exit = SmcExit::diversity;
      break;
    }
    ++iteration;

    const WeightedSample sample(sys.X, sys.w);
    if (cfg.d_star > 0) {
      const Moments mom = weighted_moments(sys.X, sys.w);
      auto [free, base] = detail::split_components(mom.mean, clip);
      if (free.size() < cfg.d_star) {
        const Maximizer sub = brute_force_subproblem(obj, base, free);
        rec.evaluations += std::uint64_t{1} << free.size();
        if (sub.value > rec.best_f) {
          rec.best_f = sub.value;
          rec.best_x = sub.x;
        }
        result.exit = SmcExit::degenerate_family;
        break;
      }
    }
    if (cfg.kernel != KernelKind::symmetric) {
      family = fit_family(family_kind, sample, &family, cfg.fit, cfg.workers);
    }

    RandomStream resample_rng = substream(cfg.seed, iteration, Stage::resample);
    sys = resample_systematic(sys, resample_rng);

    std::vector<RandomStream> streams;
    streams.reserve(n);
    for (std::size_t k = 0; k < n; ++k) streams.push_back(substream(cfg.seed, iteration, Stage::move, k));
    MoveStats stats;
    if (cfg.kernel == KernelKind::symmetric) {
      SymmetricKernel kernel(sym_p);
      stats = move(sys, kernel, obj, kind, streams, cfg.batch_size(), cfg.zeta_star, cfg.zeta_delta_star,
                   cfg.workers);
    } else {
      IndependentKernel kernel(family, sys, cfg.workers);
      stats = move(sys, kernel, obj, kind, streams, cfg.batch_size(), cfg.zeta_star, cfg.zeta_delta_star,
                   cfg.workers);
    }
    rec.evaluations += stats.evaluations;
#ifndef NDEBUG
    for (std::size_t k = 0; k < n; k += std::max<std::size_t>(1, n / 16)) {
      const double exact = evaluate(obj, sys.X.row(k));
      assert(std::abs(sys.fvals[k] - exact) <= 1e-9 * (1.0 + std::abs(exact)));
    }
#endif
    result.acceptance_history.push_back(stats.mean_acceptance);
    track_best();
    kind.fstar = rec.best_f;

    advance();
    if (cfg.progress) {
      std::cerr << iteration << '\t' << sys.rho << '\t' << ess(sys.w) << '\t' << stats.final_diversity << '\t'
                << stats.mean_acceptance << '\t' << rec.best_f << '\n';
    }
  }

  if (cfg.final_polish) {
    LocalField field(obj, rec.best_x);
    rec.evaluations += detail::one_opt_ascent(obj, field);
    if (field.value() > rec.best_f) {
      rec.best_x = field.state();
      rec.best_f = evaluate(obj, rec.best_x);
    }
  }

  rec.iterations = iteration;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

inline RunRecord smc_optimize(const QuadraticObjective& obj, const SmcConfig& cfg) {
  return smc_optimize_detailed(obj, cfg).record;
}

}  // namespace pbo
