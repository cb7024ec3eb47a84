// Command-line front end: gen, run, report, oracle.
//
// Exit codes: 0 success, 1 other failure, 2 validation error, 3 guard error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pbo/bench.hpp"
#include "pbo/oracle.hpp"
#include "pbo/problems.hpp"

namespace {

int cmd_gen(std::size_t dim, const std::string& dist, std::int64_t c, std::int64_t tau, double omega,
            std::uint64_t seed, const std::string& out) {
  pbo::ProblemSpec spec;
  spec.d = dim;
  spec.c = c;
  spec.tau = tau;
  spec.omega = omega;
  spec.seed = seed;
  if (dist == "uniform") {
    spec.law = pbo::EntryLaw::uniform;
  } else if (dist == "shifted") {
    spec.law = pbo::EntryLaw::shifted;
  } else if (dist == "density") {
    spec.law = pbo::EntryLaw::density;
  } else {
    spec.law = pbo::EntryLaw::cauchy;
  }
  const pbo::ProblemInstance inst = pbo::generate(spec);
  pbo::save(inst, out);
  std::cout << inst.spec.id() << "\trho_bar=" << inst.rho_bar << '\n';
  return 0;
}

int cmd_run(const std::string& problem, const std::string& algo, const std::string& config, std::size_t repeats,
            std::uint64_t seed, std::size_t workers, const std::string& out) {
  pbo::SuiteSpec suite;
  suite.problems.push_back(pbo::load(problem));
  suite.algorithms = {algo};
  suite.repeats = repeats;
  suite.seed = seed;
  suite.workers = workers;
  if (!config.empty()) suite.configs = pbo::load_config(config);
  const pbo::SuiteResult res = pbo::run_suite(suite);
  for (const auto& f : res.failures) {
    std::cerr << "run failed: " << f.problem << ' ' << f.algorithm << " #" << f.repeat << ": " << f.message << '\n';
  }
  pbo::save_records(out, res.records);
  double best = 0.0;
  for (std::size_t k = 0; k < res.records.size(); ++k) best = k ? std::max(best, res.records[k].best_f) : res.records[k].best_f;
  std::cout << res.records.size() << " runs, best " << best << '\n';
  return res.failures.empty() ? 0 : 1;
}

int cmd_report(const std::vector<std::string>& files, std::size_t bins, const std::string& best_known_path,
               bool own_runs, const std::string& out) {
  std::vector<pbo::RunRecord> recs;
  for (const auto& f : files) {
    auto r = pbo::load_records(f);
    recs.insert(recs.end(), r.begin(), r.end());
  }
  if (recs.empty()) throw pbo::ValidationError("no records to report");
  pbo::BestKnown db;
  if (!best_known_path.empty()) db = pbo::load_best_known(best_known_path);
  for (const auto& r : recs) pbo::update_best_known(db, r.problem, r.best_f);
  if (!best_known_path.empty()) pbo::save_best_known(best_known_path, db);
  const auto rep = pbo::histogram(pbo::ratios_by_algorithm(recs, db, !own_runs), bins);
  if (out.empty() || out == "-") {
    rep.write_tsv(std::cout);
  } else {
    std::ofstream os(out);
    if (!os) throw pbo::ValidationError("cannot write '" + out + "'");
    rep.write_tsv(os);
  }
  return 0;
}

int cmd_oracle(const std::string& problem) {
  const pbo::ProblemInstance inst = pbo::load(problem);
  const pbo::Maximizer m = pbo::brute_force(inst.obj);
  std::cout << pbo::to_bitstring(m.x) << '\t' << m.value << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-Boolean optimization benchmark"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a random instance");
  std::size_t dim = 0;
  std::string dist;
  std::int64_t c = 100;
  std::int64_t tau = 0;
  double omega = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  gen->add_option("--dim", dim, "dimension")->required()->check(CLI::PositiveNumber);
  gen->add_option("--dist", dist, "entry law")->required()->check(CLI::IsMember({"uniform", "shifted", "density", "cauchy"}));
  gen->add_option("--c", c, "support half-width")->required();
  gen->add_option("--tau", tau, "shift (shifted law)");
  gen->add_option("--omega", omega, "nonzero density (density law)");
  gen->add_option("--seed", seed, "seed")->required();
  gen->add_option("--out", out, "output file")->required();

  auto* run = app.add_subcommand("run", "run an algorithm repeatedly on one instance");
  std::string problem;
  std::string algo;
  std::string config;
  std::size_t repeats = 1;
  std::size_t workers = 1;
  std::string records_out;
  run->add_option("--problem", problem, "instance file")->required();
  run->add_option("--algo", algo, "algorithm")->required()->check(CLI::IsMember(pbo::algorithm_ids()));
  run->add_option("--config", config, "key=value config file");
  run->add_option("--repeats", repeats, "number of runs")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "suite seed")->required();
  run->add_option("--workers", workers, "parallel runs");
  run->add_option("--out-records", records_out, "records file (.csv or .json)")->required();

  auto* report = app.add_subcommand("report", "histogram of relative ratios");
  std::vector<std::string> record_files;
  std::size_t bins = 5;
  std::string best_known;
  bool own_runs = false;
  std::string hist_out;
  report->add_option("--records", record_files, "record files")->required();
  report->add_option("--bins", bins, "bins per side")->check(CLI::PositiveNumber);
  report->add_option("--best-known", best_known, "best-known database, updated in place");
  report->add_flag("--own-runs", own_runs, "worst value from each algorithm's own runs");
  report->add_option("--out-hist", hist_out, "output TSV (default stdout)");

  auto* oracle = app.add_subcommand("oracle", "exact maximizer by enumeration (d <= 25)");
  oracle->add_option("--problem", problem, "instance file")->required();

  auto* defaults = app.add_subcommand("defaults", "print the default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen(dim, dist, c, tau, omega, seed, out);
    if (*run) return cmd_run(problem, algo, config, repeats, seed, workers, records_out);
    if (*report) return cmd_report(record_files, bins, best_known, own_runs, hist_out);
    if (*oracle) return cmd_oracle(problem);
    if (*defaults) {
      pbo::write_config(std::cout, pbo::AlgorithmConfigs{});
      return 0;
    }
  } catch (const pbo::GuardError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const pbo::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pbo::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pbo::ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
