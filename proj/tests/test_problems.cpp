#include <catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "pbo/problems.hpp"
#include "support.hpp"

using namespace pbo;
namespace ts = testing_support;

namespace {

ProblemSpec make_spec(std::size_t d, EntryLaw law, std::uint64_t seed) {
  ProblemSpec s;
  s.d = d;
  s.law = law;
  s.seed = seed;
  return s;
}

std::vector<std::int64_t> upper_entries(const QuadraticObjective& obj) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < obj.dim(); ++i) {
    for (std::size_t j = i; j < obj.dim(); ++j) out.push_back(static_cast<std::int64_t>(obj(i, j)));
  }
  return out;
}

}  // namespace

TEST_CASE("uniform entries pass a chi-square test", "[problems]") {
  // d = 1414 gives about 1e6 upper-triangular draws.
  const auto inst = generate(make_spec(1414, EntryLaw::uniform, 1));
  const auto v = upper_entries(inst.obj);
  REQUIRE(v.size() > 999'000);
  std::vector<double> counts(201, 0.0);
  for (auto x : v) {
    REQUIRE(x >= -100);
    REQUIRE(x <= 100);
    counts[static_cast<std::size_t>(x + 100)] += 1.0;
  }
  const double expect = static_cast<double>(v.size()) / 201.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  const double critical = boost::math::quantile(boost::math::chi_squared(200.0), 0.99);
  CHECK(chi2 < critical);
}

TEST_CASE("instances are symmetric integers and reproducible", "[problems]") {
  for (auto law : {EntryLaw::uniform, EntryLaw::shifted, EntryLaw::density, EntryLaw::cauchy}) {
    auto spec = make_spec(25, law, 8);
    spec.tau = 30;
    spec.omega = 0.4;
    const auto a = generate(spec);
    CHECK(a == generate(spec));
    spec.seed = 9;
    CHECK(!(a.obj == generate(spec).obj));
    for (std::size_t i = 0; i < 25; ++i) {
      for (std::size_t j = 0; j < 25; ++j) {
        CHECK(a.obj(i, j) == a.obj(j, i));
        CHECK(a.obj(i, j) == std::round(a.obj(i, j)));
      }
    }
  }
}

TEST_CASE("shifted instances add tau to the unshifted draws", "[problems]") {
  for (std::int64_t tau : {-100, -7, 0, 13, 100}) {
    auto spec = make_spec(20, EntryLaw::shifted, 4);
    spec.tau = tau;
    const auto shifted = generate(spec);
    const auto base = generate(make_spec(20, EntryLaw::uniform, 4));
    for (std::size_t i = 0; i < 20; ++i) {
      for (std::size_t j = 0; j < 20; ++j) CHECK(shifted.obj(i, j) == base.obj(i, j) + static_cast<double>(tau));
    }
    CHECK(shifted.rho_bar == rho_bar(100, tau));
  }
  auto bad = make_spec(5, EntryLaw::shifted, 1);
  bad.tau = 101;
  CHECK_THROWS_AS(generate(bad), ContractViolation);
}

TEST_CASE("rho_bar", "[problems]") {
  CHECK(rho_bar(100, 0) == 0.5);
  CHECK(rho_bar(100, 100) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(rho_bar(100, -100) == Catch::Approx(0.0).margin(1e-15));
  CHECK(rho_bar(1, 1) == Catch::Approx(1.0));
  for (std::int64_t t = -99; t <= 100; ++t) CHECK(rho_bar(100, t) > rho_bar(100, t - 1));
  CHECK(generate(make_spec(4, EntryLaw::cauchy, 1)).rho_bar == 0.5);
}

TEST_CASE("density law zero fraction", "[problems]") {
  auto spec = make_spec(600, EntryLaw::density, 2);
  spec.omega = 0.3;
  const auto v = upper_entries(generate(spec).obj);
  double zeros = 0.0;
  for (auto x : v) zeros += x == 0;
  // A nonzero-slot draw is itself zero with probability 1/201.
  const double p0 = 0.7 + 0.3 / 201.0;
  const double n = static_cast<double>(v.size());
  CHECK(std::abs(zeros / n - p0) < ts::three_sigma(p0, v.size()));
}

TEST_CASE("cauchy table", "[problems]") {
  const CauchyTable table(100);
  double total = 0.0;
  for (std::int64_t k = -kCauchyTruncation * 100; k <= kCauchyTruncation * 100; ++k) total += table.pmf(k);
  CHECK(total == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(table.pmf(0) / table.pmf(100) == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(table.pmf(37) == Catch::Approx(table.pmf(-37)).epsilon(1e-9));
  CHECK(table.pmf(kCauchyTruncation * 100 + 1) == 0.0);

  RandomStream rng{5u};
  const std::size_t n = 400000;
  std::size_t central = 0;
  std::size_t tail = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const auto k = table.sample(rng);
    central += std::abs(k) <= 100;
    tail += std::abs(k) > 1000;
  }
  double p_central = 0.0;
  for (std::int64_t k = -100; k <= 100; ++k) p_central += table.pmf(k);
  // Cauchy: P(|K| <= c) is about 1/2 and P(|K| > 10c) about 2 atan(1/10) / pi.
  CHECK(p_central == Catch::Approx(0.5).margin(0.01));
  CHECK(std::abs(static_cast<double>(central) / n - p_central) < ts::three_sigma(p_central, n));
  CHECK(static_cast<double>(tail) / n == Catch::Approx(2.0 * std::atan(0.1) / M_PI).margin(0.003));

  // Heavier tail than the uniform law, which never exceeds c.
  const auto inst = generate(make_spec(100, EntryLaw::cauchy, 3));
  std::int64_t largest = 0;
  for (auto x : upper_entries(inst.obj)) largest = std::max(largest, std::abs(x));
  CHECK(largest > 100);
}

TEST_CASE("instance files round-trip", "[problems][io]") {
  const auto dir = std::filesystem::temp_directory_path() / "pbo_test_problems";
  std::filesystem::create_directories(dir);
  for (auto law : {EntryLaw::uniform, EntryLaw::shifted, EntryLaw::density, EntryLaw::cauchy}) {
    auto spec = make_spec(17, law, 77);
    if (law == EntryLaw::shifted) spec.tau = -12;
    if (law == EntryLaw::density) spec.omega = 0.25;
    spec.c = 50;
    const auto inst = generate(spec);
    const auto path = (dir / (std::string(spec.law_token().substr(0, 3)) + ".txt")).string();
    save(inst, path);
    const auto back = load(path);
    CHECK(back == inst);
    CHECK(back.spec.id() == inst.spec.id());
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load("/nonexistent/file.txt"), ValidationError);
}

TEST_CASE("hand-written instance files", "[problems][io]") {
  std::istringstream ok("uqbo d=2 dist=custom seed=0\n1 -2\n-2 3.5\n");
  const auto inst = read_instance(ok);
  CHECK(inst.spec.law == EntryLaw::custom);
  CHECK(inst.obj(0, 1) == -2.0);
  CHECK(inst.obj(1, 1) == 3.5);
  CHECK(evaluate(inst.obj, BinaryVector{1, 1}) == Catch::Approx(0.5));

  std::istringstream asym("uqbo d=2 dist=custom seed=0\n1 2\n3 4\n");
  CHECK_THROWS_AS(read_instance(asym), ValidationError);

  std::istringstream short_row("uqbo d=2 dist=custom seed=0\n1 2\n2\n");
  CHECK_THROWS_AS(read_instance(short_row), ValidationError);

  std::istringstream few_rows("uqbo d=3 dist=custom seed=0\n1 2 3\n2 1 1\n");
  CHECK_THROWS_AS(read_instance(few_rows), ValidationError);

  std::istringstream bad_header("qubo d=2\n1 0\n0 1\n");
  CHECK_THROWS_AS(read_instance(bad_header), ParseError);

  std::istringstream bad_number("uqbo d=2 dist=custom seed=0\n1 0\n0 x\n");
  try {
    read_instance(bad_number);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }

  std::istringstream bad_law("uqbo d=2 dist=gauss:3 seed=0\n1 0\n0 1\n");
  try {
    read_instance(bad_law);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }

  std::istringstream empty("");
  CHECK_THROWS_AS(read_instance(empty), ParseError);
}

TEST_CASE("law tokens", "[problems]") {
  auto spec = make_spec(10, EntryLaw::shifted, 3);
  spec.tau = -50;
  CHECK(spec.law_token() == "shifted:100:-50");
  CHECK(make_spec(15, EntryLaw::uniform, 3).id() == "uniform:100/d15/s3");
  ProblemSpec parsed;
  parse_law_token("density:20:0.5", parsed);
  CHECK(parsed.law == EntryLaw::density);
  CHECK(parsed.c == 20);
  CHECK(parsed.omega == 0.5);
  CHECK_THROWS_AS(parse_law_token("uniform", parsed), ContractViolation);
  CHECK_THROWS_AS(parse_law_token("cauchy:abc", parsed), ContractViolation);
}
