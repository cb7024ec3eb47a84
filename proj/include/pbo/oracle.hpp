#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pbo/errors.hpp"
#include "pbo/objective.hpp"

namespace pbo {

inline constexpr std::size_t kMaxBruteForceDim = 25;

struct Maximizer {
  BinaryVector x;
  double value = 0.0;
};

/// Exact maximizer over the components listed in `free`, all other components
/// pinned to their value in `base`. Gray-code order, one O(d) update per state.
/// Ties go to the lexicographically smallest vector.
inline Maximizer brute_force_subproblem(const QuadraticObjective& obj, std::span<const std::uint8_t> base,
                                        std::span<const std::size_t> free) {
  if (free.size() > kMaxBruteForceDim) throw GuardError("brute force limited to 25 free components");
  if (base.size() != obj.dim()) throw ContractViolation("brute force: dimension mismatch");
  BinaryVector start(base.begin(), base.end());
  for (std::size_t i : free) start[i] = 0;
  LocalField field(obj, start);
  Maximizer best{field.state(), field.value()};
  const std::uint64_t states = std::uint64_t{1} << free.size();
  for (std::uint64_t t = 1; t < states; ++t) {
    field.flip(free[static_cast<std::size_t>(std::countr_zero(t))]);
    const double v = field.value();
    if (v > best.value || (v == best.value && field.state() < best.x)) {
      best.x = field.state();
      best.value = v;
    }
  }
  best.value = evaluate(obj, best.x);
  return best;
}

/// Exact global maximizer of x^T F x for d <= 25.
inline Maximizer brute_force(const QuadraticObjective& obj) {
  if (obj.dim() > kMaxBruteForceDim) throw GuardError("brute force limited to d <= 25");
  std::vector<std::size_t> all(obj.dim());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return brute_force_subproblem(obj, BinaryVector(obj.dim(), 0), all);
}

}  // namespace pbo
