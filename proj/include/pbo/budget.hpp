#pragma once

#include <chrono>
#include <cstdint>

#include "pbo/errors.hpp"

namespace pbo {

/// Evaluation-count or wall-clock budget. Evaluation counts are the default
/// because they make runs reproducible.
struct Budget {
  std::uint64_t evaluations = 1'000'000;
  double seconds = 0.0;  ///< > 0 switches to wall-clock mode

  void validate() const {
    if (seconds < 0.0) throw ContractViolation("budget: seconds must be nonnegative");
    if (seconds == 0.0 && evaluations == 0) throw ContractViolation("budget must be positive");
  }
  bool wall_clock() const noexcept { return seconds > 0.0; }
};

/// Tracks consumption of a Budget; fraction() is T_delta / T_star.
class BudgetClock {
 public:
  explicit BudgetClock(const Budget& b) : budget_(b), start_(std::chrono::steady_clock::now()) {}

  void spend(std::uint64_t evals = 1) noexcept { used_ += evals; }
  std::uint64_t used() const noexcept { return used_; }
  double elapsed() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

  double fraction() const {
    if (budget_.wall_clock()) return elapsed() / budget_.seconds;
    return static_cast<double>(used_) / static_cast<double>(budget_.evaluations);
  }
  bool exhausted() const { return fraction() >= 1.0; }

 private:
  Budget budget_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t used_ = 0;
};

}  // namespace pbo
