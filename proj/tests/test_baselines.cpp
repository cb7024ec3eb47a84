#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "pbo/annealing.hpp"
#include "pbo/cross_entropy.hpp"
#include "pbo/local_search.hpp"
#include "pbo/oracle.hpp"
#include "pbo/problems.hpp"
#include "pbo/sequences.hpp"
#include "support.hpp"

using namespace pbo;
namespace ts = testing_support;

namespace {

ts::Matrix separable(std::size_t d) {
  ts::Matrix F(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) F[i][i] = 1.0 + static_cast<double>(i % 4);
  return F;
}

bool is_one_opt(const QuadraticObjective& obj, const BinaryVector& x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (flip_delta(obj, x, i) > 0.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("ce elite size", "[ce]") {
  CeConfig cfg;
  cfg.n = 10;
  cfg.beta = 0.8;
  CHECK(cfg.elite_size() == 2);
  cfg.n = 2000;
  CHECK(cfg.elite_size() == 400);
  cfg.n = 7;
  cfg.beta = 0.5;
  CHECK(cfg.elite_size() == 4);
  cfg.beta = 0.999;
  CHECK(cfg.elite_size() == 1);
}

TEST_CASE("ce elite equals the level-set survivors", "[ce][property]") {
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 5 + gen() % 200;
    std::vector<double> f(n);
    // Small integer range so ties are common.
    for (auto& v : f) v = static_cast<double>(gen() % 12);
    CeConfig cfg;
    cfg.n = n;
    cfg.beta = 0.5 + 0.45 * std::uniform_real_distribution<double>(0, 1)(gen);
    const auto elite = elite_indices(f, cfg.elite_size());
    const std::vector<double> w(n, 1.0 / static_cast<double>(n));
    const auto step = find_step_length({SequenceTag::level_set, 1e6}, w, f, 0.0, 1.0 - cfg.beta, 100.0);
    std::set<std::size_t> survivors;
    for (std::size_t k = 0; k < n; ++k) {
      if (step.w_new[k] > 0.0) survivors.insert(k);
    }
    INFO("n " << n << " beta " << cfg.beta);
    CHECK(survivors == std::set<std::size_t>(elite.begin(), elite.end()));
  }
}

TEST_CASE("ce finds the toy maximum", "[ce]") {
  const auto obj = ts::make_objective(ts::toy_matrix());
  const double best = brute_force(obj).value;
  for (auto family : {FamilyKind::logistic, FamilyKind::product}) {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      CeConfig cfg;
      cfg.n = 200;
      cfg.seed = seed;
      cfg.family = family;
      cfg.d_star = 0;
      const auto rec = ce_optimize(obj, cfg);
      CHECK(rec.best_f == evaluate(obj, rec.best_x));
      hits += rec.best_f == best;
    }
    INFO("family " << to_string(family));
    CHECK(hits >= 99);
  }
}

TEST_CASE("ce on a separable objective and determinism", "[ce][determinism]") {
  const auto obj = ts::make_objective(separable(16));
  CeConfig cfg;
  cfg.n = 400;
  cfg.seed = 4;
  const auto a = ce_optimize(obj, cfg);
  CHECK(a.best_x == BinaryVector(16, 1));
  cfg.workers = 3;
  CHECK(a.same_outcome(ce_optimize(obj, cfg)));
  cfg.beta = 0.0;
  CHECK_THROWS_AS(ce_optimize(obj, cfg), ContractViolation);
}

TEST_CASE("sa target acceptance", "[sa]") {
  CHECK(sa_target_acceptance(0.0) == 1.0);
  CHECK(sa_target_acceptance(1.0) == Catch::Approx(0.03125).epsilon(1e-15));
  for (double u = 0.0; u < 1.0; u += 0.01) CHECK(sa_target_acceptance(u + 0.01) < sa_target_acceptance(u));
}

TEST_CASE("sa obeys the Metropolis rule", "[sa][property]") {
  std::mt19937_64 gen(22);
  const auto obj = ts::make_objective(ts::random_symmetric(12, 20, gen));
  SaConfig cfg;
  cfg.budget.evaluations = 50000;
  cfg.seed = 3;
  std::uint64_t steps = 0;
  double rho_prev = -1.0;
  double lambda_prev = 0.0;
  double target_prev = 0.0;
  const auto rec = sa_optimize(obj, cfg, [&](const SaStep& s) {
    ++steps;
    CHECK(s.t == steps);
    const bool rule = s.delta_f >= 0.0 || s.u < std::exp(s.rho * s.delta_f);
    CHECK(rule == s.accepted);
    if (rho_prev > 0.0) {
      CHECK(s.rho == Catch::Approx(rho_prev * std::exp(cfg.gain * (lambda_prev - target_prev))).epsilon(1e-12));
    } else {
      CHECK(s.rho == cfg.rho0);
    }
    rho_prev = s.rho;
    lambda_prev = s.window_acceptance;
    target_prev = s.target;
  });
  CHECK(rec.evaluations == 50000);
  CHECK(rec.iterations == steps);
  CHECK(rec.best_f == evaluate(obj, rec.best_x));
}

TEST_CASE("sa on a separable objective and determinism", "[sa][determinism]") {
  const auto obj = ts::make_objective(separable(20));
  SaConfig cfg;
  cfg.budget.evaluations = 200000;
  cfg.seed = 9;
  const auto a = sa_optimize(obj, cfg);
  CHECK(a.best_x == BinaryVector(20, 1));
  CHECK(a.same_outcome(sa_optimize(obj, cfg)));
  cfg.seed = 10;
  CHECK(sa_optimize(obj, cfg).best_x == BinaryVector(20, 1));
  cfg.budget.evaluations = 0;
  CHECK_THROWS_AS(sa_optimize(obj, cfg), ContractViolation);
}

TEST_CASE("sa reaches the optimum on d=15 Cauchy in most runs", "[sa]") {
  ProblemSpec spec;
  spec.d = 15;
  spec.law = EntryLaw::cauchy;
  spec.seed = 7;
  const auto inst = generate(spec);
  const double best = brute_force(inst.obj).value;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SaConfig cfg;
    cfg.budget.evaluations = 1'000'000;
    cfg.seed = seed;
    hits += sa_optimize(inst.obj, cfg).best_f == best;
  }
  CHECK(hits > 10);
}

TEST_CASE("sa wall-clock budget", "[sa]") {
  const auto obj = ts::make_objective(separable(10));
  SaConfig cfg;
  cfg.budget.seconds = 0.05;
  const auto rec = sa_optimize(obj, cfg);
  CHECK(rec.wall_seconds >= 0.05);
  CHECK(rec.wall_seconds < 2.0);
  CHECK(rec.evaluations > 1);
}

TEST_CASE("kopt move scan", "[ls]") {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 30; ++rep) {
    const auto F = ts::random_symmetric(8, 10, gen);
    const auto obj = ts::make_objective(F);
    const auto x = ts::state(gen() % 256, 8);
    LocalField field(obj, x);
    for (std::size_t k = 1; k <= 3; ++k) {
      std::uint64_t evals = 0;
      const auto mv = best_kopt_move(obj, field, k, evals);
      // Oracle: every state within Hamming distance k.
      std::uint64_t expect_evals = 0;
      double best_gain = 0.0;
      for (std::uint64_t t = 0; t < 256; ++t) {
        const auto y = ts::state(t, 8);
        std::size_t h = 0;
        for (std::size_t i = 0; i < 8; ++i) h += y[i] != x[i];
        if (h == 0 || h > k) continue;
        ++expect_evals;
        best_gain = std::max(best_gain, ts::quad_form(F, y) - ts::quad_form(F, x));
      }
      CHECK(evals == expect_evals);
      CHECK(mv.gain == Catch::Approx(best_gain).margin(1e-9));
      if (best_gain > 0.0) {
        auto y = x;
        for (auto i : mv.flips) y[i] ^= 1u;
        CHECK(ts::quad_form(F, y) - ts::quad_form(F, x) == Catch::Approx(mv.gain).margin(1e-9));
      } else {
        CHECK(mv.flips.empty());
      }
    }
  }
}

TEST_CASE("ls returns enumerated local optima", "[ls][property]") {
  std::mt19937_64 gen(24);
  const auto F = ts::random_symmetric(12, 30, gen);
  const auto obj = ts::make_objective(F);
  std::set<BinaryVector> optima;
  for (std::uint64_t t = 0; t < 4096; ++t) {
    const auto x = ts::state(t, 12);
    if (is_one_opt(obj, x)) optima.insert(x);
  }
  REQUIRE(!optima.empty());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    LsConfig cfg;
    cfg.budget.evaluations = 500;
    cfg.seed = seed;
    const auto rec = local_search_kopt(obj, cfg);
    CHECK(optima.count(rec.best_x) == 1);
    CHECK(rec.best_f == evaluate(obj, rec.best_x));
  }
}

TEST_CASE("ls trajectory strictly increases within a descent", "[ls][property]") {
  std::mt19937_64 gen(25);
  const auto obj = ts::make_objective(ts::random_symmetric(30, 100, gen));
  for (std::size_t k : {std::size_t{1}, std::size_t{2}}) {
    LsConfig cfg;
    cfg.budget.evaluations = 200000;
    cfg.k = k;
    cfg.seed = 5;
    double last = 0.0;
    std::size_t restarts = 0;
    local_search_kopt(obj, cfg, [&](double v, bool restart) {
      if (restart) {
        ++restarts;
      } else {
        CHECK(v > last);
      }
      last = v;
    });
    CHECK(restarts > 1);
  }
}

TEST_CASE("ls on a separable objective and determinism", "[ls][determinism]") {
  const auto obj = ts::make_objective(separable(25));
  LsConfig cfg;
  cfg.budget.evaluations = 1000;
  const auto a = local_search_kopt(obj, cfg);
  CHECK(a.best_x == BinaryVector(25, 1));
  CHECK(a.evaluations <= 1000 + 25);
  CHECK(a.same_outcome(local_search_kopt(obj, cfg)));
  cfg.k = 0;
  CHECK_THROWS_AS(local_search_kopt(obj, cfg), ContractViolation);
}
