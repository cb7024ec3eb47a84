#include <catch_amalgamated.hpp>

#include <random>

#include "pbo/objective.hpp"
#include "support.hpp"

using namespace pbo;
using testing_support::make_objective;

namespace {
const auto kSmall = make_objective({{1, 2}, {2, 1}});
}

TEST_CASE("evaluate expands the quadratic form", "[objective]") {
  CHECK(evaluate(kSmall, BinaryVector{1, 1}) == 6.0);
  CHECK(evaluate(kSmall, BinaryVector{0, 0}) == 0.0);
  CHECK(evaluate(make_objective(testing_support::toy_matrix()), BinaryVector{1, 1, 1, 1}) == 1.0);
  CHECK_THROWS_AS(evaluate(kSmall, BinaryVector{1, 0, 1}), ContractViolation);
}

TEST_CASE("objective rejects bad matrices", "[objective]") {
  CHECK_THROWS_AS(QuadraticObjective(2, {1, 2, 3, 1}), ContractViolation);
  CHECK_THROWS_AS(QuadraticObjective(2, {1, 2, 2}), ContractViolation);
  CHECK_THROWS_AS(QuadraticObjective(0, {}), ContractViolation);
  CHECK_THROWS_AS(QuadraticObjective(1, {std::nan("")}), ContractViolation);
}

TEST_CASE("flip_delta examples", "[objective]") {
  CHECK(flip_delta(kSmall, BinaryVector{0, 0}, 0) == 1.0);
  CHECK(flip_delta(kSmall, BinaryVector{1, 1}, 1) == -5.0);
  CHECK_THROWS_AS(flip_delta(kSmall, BinaryVector{1, 1}, 2), ContractViolation);
}

TEST_CASE("flip_delta agrees with re-evaluation and is an involution", "[objective][property]") {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 1 + gen() % 12;
    const auto F = testing_support::random_symmetric(d, 50, gen);
    const auto obj = make_objective(F);
    BinaryVector x = testing_support::state(gen(), d);
    const std::size_t i = gen() % d;
    const double fx = testing_support::quad_form(F, x);
    const double delta = flip_delta(obj, x, i);
    BinaryVector y = x;
    y[i] ^= 1;
    CHECK(testing_support::quad_form(F, y) - fx == Catch::Approx(delta).margin(1e-9));
    CHECK(flip_delta(obj, y, i) == -delta);
  }
}

TEST_CASE("quadratic mass normalizer examples", "[objective]") {
  CHECK(quadratic_mass_normalizer(kSmall) == 8.0);
  CHECK(quadratic_mass_normalizer(make_objective({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})) == 12.0);
  CHECK(quadratic_mass_normalizer(make_objective({{0, 0}, {0, 0}})) == 0.0);
}

TEST_CASE("quadratic mass identity holds exhaustively", "[objective][property]") {
  std::mt19937_64 gen(3);
  for (std::size_t d = 1; d <= 12; ++d) {
    const auto F = testing_support::random_symmetric(d, 100, gen);
    double total = 0.0;
    for (std::uint64_t t = 0; t < (std::uint64_t{1} << d); ++t) total += testing_support::quad_form(F, testing_support::state(t, d));
    CHECK(quadratic_mass_normalizer(make_objective(F)) == total);
  }
}

TEST_CASE("evaluation is unchanged by symmetrization", "[objective][property]") {
  std::mt19937_64 gen(5);
  const std::size_t d = 7;
  testing_support::Matrix A(d, std::vector<double>(d));
  for (auto& row : A) {
    for (auto& v : row) v = static_cast<double>(static_cast<int>(gen() % 21) - 10);
  }
  testing_support::Matrix S(d, std::vector<double>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) S[i][j] = 0.5 * (A[i][j] + A[j][i]);
  }
  const auto obj = make_objective(S);
  for (std::uint64_t t = 0; t < 128; ++t) {
    const auto x = testing_support::state(t, d);
    CHECK(evaluate(obj, x) == testing_support::quad_form(A, x));
  }
}

TEST_CASE("LocalField tracks values and deltas", "[objective]") {
  std::mt19937_64 gen(11);
  const auto F = testing_support::random_symmetric(9, 30, gen);
  const auto obj = make_objective(F);
  LocalField field(obj, testing_support::state(gen(), 9));
  for (int step = 0; step < 100; ++step) {
    const std::size_t i = gen() % 9;
    CHECK(field.delta(i) == flip_delta(obj, field.state(), i));
    field.flip(i);
    CHECK(field.value() == testing_support::quad_form(F, field.state()));
  }
}

TEST_CASE("bit strings round-trip", "[objective]") {
  const BinaryVector x{1, 0, 0, 1, 1};
  CHECK(to_bitstring(x) == "10011");
  CHECK(from_bitstring("10011") == x);
  CHECK_THROWS_AS(from_bitstring("102"), ContractViolation);
}
