#pragma once

// Randomized k-opt local search: best-improvement ascent over all states within
// Hamming distance k, restarted from uniform states until the budget runs out.

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

struct LsConfig {
  Budget budget{};
  std::size_t k = 1;
  std::uint64_t seed = 0;
  bool progress = false;

  void validate() const {
    budget.validate();
    if (k == 0) throw ContractViolation("ls: k must be at least 1");
  }
};

/// Best move within Hamming distance k of the field's state.
struct KoptMove {
  std::vector<std::size_t> flips;
  double gain = 0.0;
};

namespace detail {

// Gain of flipping a set S is sum_i delta_i + 2 sum_{i<j in S} F_ij s_i s_j
// with s_i = +1 for a 0 -> 1 flip and -1 otherwise.
inline void scan_subsets(const QuadraticObjective& obj, const LocalField& field, std::size_t k, std::size_t start,
                         std::vector<std::size_t>& chosen, double gain, KoptMove& best, std::uint64_t& evals) {
  const BinaryVector& x = field.state();
  for (std::size_t i = start; i < x.size(); ++i) {
    double g = gain + field.delta(i);
    const double si = x[i] ? -1.0 : 1.0;
    for (std::size_t j : chosen) g += 2.0 * obj(i, j) * si * (x[j] ? -1.0 : 1.0);
    chosen.push_back(i);
    ++evals;
    if (g > best.gain) {
      best.gain = g;
      best.flips = chosen;
    }
    if (chosen.size() < k) scan_subsets(obj, field, k, i + 1, chosen, g, best, evals);
    chosen.pop_back();
  }
}

}  // namespace detail

/// Scans the union of the 1..k flip neighborhoods; flips is empty when no
/// neighbor strictly improves. evals receives the number of neighbors checked.
inline KoptMove best_kopt_move(const QuadraticObjective& obj, const LocalField& field, std::size_t k,
                               std::uint64_t& evals) {
  KoptMove best;
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  detail::scan_subsets(obj, field, k, 0, chosen, 0.0, best, evals);
  return best;
}

/// Observer sees the value after each accepted ascent move and a restart flag.
using LsObserver = std::function<void(double value, bool restart)>;

inline RunRecord local_search_kopt(const QuadraticObjective& obj, const LsConfig& cfg,
                                   const LsObserver& observer = {}) {
  cfg.validate();
  const std::size_t d = obj.dim();
  BudgetClock clock(cfg.budget);

  RunRecord rec;
  rec.algorithm = "ls";
  rec.seed = cfg.seed;

  std::uint64_t restart = 0;
  std::uint64_t completed = 0;
  while (!clock.exhausted()) {
    RandomStream rng = substream(cfg.seed, restart, Stage::init);
    BinaryVector x(d);
    for (auto& b : x) b = rng() >> 63;
    ++restart;
    LocalField field(obj, x);
    clock.spend();
    if (observer) observer(field.value(), true);

    bool finished = false;
    while (!clock.exhausted()) {
      std::uint64_t evals = 0;
      const KoptMove mv = best_kopt_move(obj, field, cfg.k, evals);
      clock.spend(evals);
      if (mv.flips.empty()) {
        finished = true;
        break;
      }
      for (std::size_t i : mv.flips) field.flip(i);
      if (observer) observer(field.value(), false);
    }
    // A descent cut off by the budget only counts when nothing else finished,
    // so returned points are local optima whenever possible.
    if (!finished && completed > 0) break;
    if (finished) ++completed;
    if (rec.best_x.empty() || field.value() > rec.best_f) {
      rec.best_f = field.value();
      rec.best_x = field.state();
    }
    if (cfg.progress) std::cerr << restart << '\t' << field.value() << '\t' << rec.best_f << '\n';
  }

  rec.best_f = evaluate(obj, rec.best_x);
  rec.evaluations = clock.used();
  rec.iterations = restart;
  rec.wall_seconds = clock.elapsed();
  return rec;
}

}  // namespace pbo
