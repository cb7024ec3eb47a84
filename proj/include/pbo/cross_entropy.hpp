#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <vector>

#include "pbo/errors.hpp"
#include "pbo/families.hpp"
#include "pbo/objective.hpp"
#include "pbo/oracle.hpp"
#include "pbo/parallel.hpp"
#include "pbo/record.hpp"
#include "pbo/smc.hpp"

namespace pbo {

struct CeConfig {
  std::size_t n = 2000;
  double beta = 0.8;  ///< fraction discarded
  double tau = 0.5;   ///< lag
  FamilyKind family = FamilyKind::logistic;
  std::size_t max_iters = 1000;
  std::size_t stagnation_limit = 30;
  std::size_t d_star = 12;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool progress = false;
  FitOptions fit{};

  std::size_t elite_size() const {
    // The small slack absorbs rounding in 1 - beta, e.g. 10 * (1 - 0.8).
    const double m = std::ceil(static_cast<double>(n) * (1.0 - beta) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(m), 1, n);
  }

  void validate() const {
    if (n < 2) throw ContractViolation("ce: need at least two particles");
    if (!(beta > 0.0 && beta < 1.0)) throw ContractViolation("ce: beta must lie in (0,1)");
    if (!(tau >= 0.0 && tau < 1.0)) throw ContractViolation("ce: tau must lie in [0,1)");
    if (max_iters == 0) throw ContractViolation("ce: max_iters must be positive");
    if (stagnation_limit == 0) throw ContractViolation("ce: stagnation_limit must be positive");
    if (d_star > kMaxBruteForceDim) throw ContractViolation("ce: d_star may not exceed 25");
  }
};

/// Indices of the top m values, ties broken by index.
inline std::vector<std::size_t> elite_indices(std::span<const double> fvals, std::size_t m) {
  std::vector<std::size_t> order(fvals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fvals[a] > fvals[b]; });
  order.resize(std::min(m, order.size()));
  return order;
}

inline RunRecord ce_optimize(const QuadraticObjective& obj, const CeConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = cfg.n;
  const std::size_t d = obj.dim();
  const std::size_t m = cfg.elite_size();
  const double clip = cfg.fit.eps_clip > 0.0 ? cfg.fit.eps_clip : default_clip(m);

  RunRecord rec;
  rec.algorithm = "ce";
  rec.seed = cfg.seed;

  FamilyParams family = uniform_family(cfg.family, d);
  std::vector<double> marginals(d, 0.5);  // blended elite means, used for the degeneracy test
  BinaryMatrix X(n, d);
  std::vector<double> fvals(n);
  std::size_t stagnant = 0;
  std::uint64_t t = 0;

  while (t < cfg.max_iters) {
    ++t;
    parallel_for(cfg.workers, n, [&](std::size_t k) {
      RandomStream rng = substream(cfg.seed, t, Stage::sample, k);
      const BinaryVector y = draw(family, rng);
      std::copy(y.begin(), y.end(), X.row(k).begin());
      fvals[k] = evaluate(obj, y);
    });
    rec.evaluations += n;

    const std::vector<std::size_t> elite = elite_indices(fvals, m);
    if (rec.best_x.empty() || fvals[elite[0]] > rec.best_f) {
      rec.best_f = fvals[elite[0]];
      const auto r = X.row(elite[0]);
      rec.best_x.assign(r.begin(), r.end());
      stagnant = 0;
    } else if (++stagnant >= cfg.stagnation_limit) {
      break;
    }

    BinaryMatrix E(m, d);
    for (std::size_t e = 0; e < m; ++e) {
      const auto r = X.row(elite[e]);
      std::copy(r.begin(), r.end(), E.row(e).begin());
    }
    const std::vector<double> w(m, 1.0 / static_cast<double>(m));
    const WeightedSample sample(E, w);
    const FamilyParams fitted = fit_family(cfg.family, sample, &family, cfg.fit, cfg.workers);
    family = blend_params(family, fitted, cfg.tau);

    const Moments mom = weighted_moments(E, w);
    for (std::size_t i = 0; i < d; ++i) marginals[i] = (1.0 - cfg.tau) * mom.mean[i] + cfg.tau * marginals[i];

    if (cfg.progress) std::cerr << t << '\t' << cfg.tau << '\t' << rec.best_f << '\n';

    if (cfg.d_star > 0) {
      auto [free, base] = detail::split_components(marginals, clip);
      if (free.size() < cfg.d_star) {
        const Maximizer sub = brute_force_subproblem(obj, base, free);
        rec.evaluations += std::uint64_t{1} << free.size();
        if (sub.value > rec.best_f) {
          rec.best_f = sub.value;
          rec.best_x = sub.x;
        }
        break;
      }
    }
  }

  rec.iterations = t;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace pbo
