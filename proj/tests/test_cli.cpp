#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pbo/bench.hpp"
#include "pbo/problems.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
};

fs::path workdir() {
  const auto dir = fs::temp_directory_path() / "pbo_test_cli";
  fs::create_directories(dir);
  return dir;
}

Outcome pbo_cli(const std::string& args) {
  const auto out = workdir() / "stdout.txt";
  const std::string cmd = std::string(PBO_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream is(out);
  std::stringstream ss;
  ss << is.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST_CASE("gen, oracle, run and report", "[cli]") {
  auto r = pbo_cli("gen --dim 12 --dist cauchy --c 100 --seed 4 --out " + at("p.txt"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("cauchy:100/d12/s4") != std::string::npos);
  const auto inst = pbo::load(at("p.txt"));
  CHECK(inst.obj.dim() == 12);

  r = pbo_cli("oracle --problem " + at("p.txt"));
  REQUIRE(r.code == 0);
  const auto best = pbo::brute_force(inst.obj);
  CHECK(r.out.rfind(pbo::to_bitstring(best.x), 0) == 0);

  for (const std::string algo : {"smc", "ce", "ls"}) {
    r = pbo_cli("run --problem " + at("p.txt") + " --algo " + algo + " --config " + PBO_CONFIG_DIR +
                "/quick.cfg --repeats 3 --seed 1 --out-records " + at(algo + ".csv"));
    INFO(r.out);
    REQUIRE(r.code == 0);
    CHECK(pbo::load_records(at(algo + ".csv")).size() == 3);
  }
  r = pbo_cli("run --problem " + at("p.txt") + " --algo smc-local --config " + std::string(PBO_CONFIG_DIR) +
              "/local_moves.cfg --repeats 1 --seed 1 --out-records " + at("local.json"));
  REQUIRE(r.code == 0);
  CHECK(pbo::load_records(at("local.json"))[0].algorithm == "smc-local");

  fs::remove(at("best.tsv"));
  r = pbo_cli("report --records " + at("smc.csv") + " " + at("ce.csv") + " " + at("ls.csv") +
              " --bins 3 --best-known " + at("best.tsv") + " --out-hist " + at("hist.tsv"));
  INFO(r.out);
  REQUIRE(r.code == 0);
  std::ifstream hist(at("hist.tsv"));
  std::string header;
  std::getline(hist, header);
  CHECK(header.find("smc") != std::string::npos);
  CHECK(header.find("ls") != std::string::npos);
  const auto db = pbo::load_best_known(at("best.tsv"));
  CHECK(db.size() == 1);
}

TEST_CASE("defaults round-trip through the config parser", "[cli]") {
  const auto r = pbo_cli("defaults");
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::ostringstream os;
  pbo::write_config(os, pbo::parse_config(is));
  CHECK(os.str() == r.out);
  std::ifstream shipped(std::string(PBO_CONFIG_DIR) + "/default.cfg");
  std::stringstream ss;
  ss << shipped.rdbuf();
  CHECK(ss.str() == r.out);
}

TEST_CASE("exit codes", "[cli]") {
  CHECK(pbo_cli("").code == 2);
  CHECK(pbo_cli("gen --dim 5 --dist gauss --c 10 --seed 1 --out " + at("x.txt")).code == 2);
  CHECK(pbo_cli("gen --dim 5 --dist shifted --c 10 --tau 11 --seed 1 --out " + at("x.txt")).code == 2);

  {
    std::ofstream os(at("asym.txt"));
    os << "uqbo d=2 dist=custom seed=0\n1 2\n3 4\n";
  }
  CHECK(pbo_cli("oracle --problem " + at("asym.txt")).code == 2);
  CHECK(pbo_cli("oracle --problem " + at("missing.txt")).code == 2);

  {
    std::ofstream os(at("bad.cfg"));
    os << "smc.n = 0\n";
  }
  REQUIRE(pbo_cli("gen --dim 26 --dist uniform --c 10 --seed 1 --out " + at("big.txt")).code == 0);
  CHECK(pbo_cli("oracle --problem " + at("big.txt")).code == 3);
  CHECK(pbo_cli("run --problem " + at("big.txt") + " --algo smc --config " + at("bad.cfg") +
                " --seed 1 --out-records " + at("r.csv"))
            .code == 2);
}
