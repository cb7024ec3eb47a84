#pragma once

// Simulated annealing with single-flip proposals. The inverse temperature is
// steered so that the windowed acceptance rate follows (1 + T_delta/T_star)^-5.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <vector>

#include "pbo/budget.hpp"
#include "pbo/errors.hpp"
#include "pbo/objective.hpp"
#include "pbo/record.hpp"
#include "pbo/rng.hpp"
#include "pbo/smc.hpp"

namespace pbo {

struct SaConfig {
  Budget budget{};
  std::size_t window = 500;
  double gain = 0.01;  ///< eta in rho <- rho * exp(eta * (acceptance - target))
  double rho0 = 1e-6;
  std::uint64_t seed = 0;
  bool progress = false;

  void validate() const {
    budget.validate();
    if (window == 0) throw ContractViolation("sa: window must be at least 1");
    if (!(gain > 0.0)) throw ContractViolation("sa: gain must be positive");
    if (!(rho0 > 0.0)) throw ContractViolation("sa: rho0 must be positive");
  }
};

/// Target acceptance rate at normalized elapsed budget u = T_delta / T_star.
inline double sa_target_acceptance(double u) { return std::pow(1.0 + u, -5.0); }

/// One annealing step as seen by an observer.
struct SaStep {
  std::uint64_t t = 0;
  double delta_f = 0.0;
  double rho = 0.0;  ///< inverse temperature used for the decision
  double u = 0.0;
  bool accepted = false;
  double window_acceptance = 0.0;
  double target = 0.0;
};

inline RunRecord sa_optimize(const QuadraticObjective& obj, const SaConfig& cfg,
                             const std::function<void(const SaStep&)>& observer = {}) {
  cfg.validate();
  const std::size_t d = obj.dim();
  BudgetClock clock(cfg.budget);

  RunRecord rec;
  rec.algorithm = "sa";
  rec.seed = cfg.seed;

  RandomStream rng = substream(cfg.seed, 0, Stage::init);
  BinaryVector x0(d);
  for (auto& b : x0) b = rng() >> 63;
  LocalField field(obj, x0);
  clock.spend();
  rec.best_x = field.state();
  rec.best_f = field.value();

  std::vector<std::uint8_t> ring(cfg.window, 0);
  std::size_t filled = 0;
  std::size_t accepted_in_window = 0;
  double rho = cfg.rho0;
  std::uint64_t t = 0;

  while (true) {
    // Checking the wall clock on every step would dominate the cost of a flip.
    if ((!cfg.budget.wall_clock() || t % 256 == 0) && clock.exhausted()) break;
    ++t;
    const std::size_t i = rng.below(d);
    const double df = field.delta(i);
    clock.spend();
    const double u = rng.uniform();
    const bool accept = df >= 0.0 || u < std::exp(rho * df);
    if (accept) {
      field.flip(i);
      if (field.value() > rec.best_f) {
        rec.best_f = field.value();
        rec.best_x = field.state();
      }
    }

    const std::size_t slot = static_cast<std::size_t>((t - 1) % cfg.window);
    if (filled == cfg.window) {
      accepted_in_window -= ring[slot];
    } else {
      ++filled;
    }
    ring[slot] = accept ? 1 : 0;
    accepted_in_window += ring[slot];
    const double lambda = static_cast<double>(accepted_in_window) / static_cast<double>(filled);
    const double target = sa_target_acceptance(std::min(clock.fraction(), 1.0));

    if (observer) observer(SaStep{t, df, rho, u, accept, lambda, target});
    rho *= std::exp(cfg.gain * (lambda - target));

    if (cfg.progress && t % 100000 == 0) std::cerr << t << '\t' << rho << '\t' << rec.best_f << '\n';
  }

  rec.best_f = evaluate(obj, rec.best_x);
  rec.evaluations = clock.used();
  rec.iterations = t;
  rec.wall_seconds = clock.elapsed();
  return rec;
}

}  // namespace pbo
