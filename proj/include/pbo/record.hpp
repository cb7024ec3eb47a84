#pragma once

#include <cstdint>
#include <string>

#include "pbo/objective.hpp"

namespace pbo {

/// Outcome of one optimizer run.
struct RunRecord {
  std::string algorithm;
  std::string problem;
  std::uint64_t seed = 0;
  BinaryVector best_x;
  double best_f = 0.0;
  std::uint64_t evaluations = 0;
  double wall_seconds = 0.0;
  std::uint64_t iterations = 0;

  /// Equality on everything except wall time, which is never reproducible.
  bool same_outcome(const RunRecord& o) const {
    return algorithm == o.algorithm && problem == o.problem && seed == o.seed && best_x == o.best_x &&
           best_f == o.best_f && evaluations == o.evaluations && iterations == o.iterations;
  }
};

}  // namespace pbo
