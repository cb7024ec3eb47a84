#pragma once

// Experiment orchestration: relative-ratio scoring, histograms, suites of
// (problem, algorithm, repeat) cells, record I/O and key=value configs.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbo/annealing.hpp"
#include "pbo/cross_entropy.hpp"
#include "pbo/errors.hpp"
#include "pbo/local_search.hpp"
#include "pbo/objective.hpp"
#include "pbo/oracle.hpp"
#include "pbo/parallel.hpp"
#include "pbo/problems.hpp"
#include "pbo/record.hpp"
#include "pbo/rng.hpp"
#include "pbo/smc.hpp"

namespace pbo {

// ---------------------------------------------------------------- scoring

/// (f_k - worst) / (best_known - worst). With worst omitted the minimum of
/// values is used. A zero denominator maps every ratio to 1.
inline std::vector<double> relative_ratios(std::span<const double> values, double best_known,
                                           std::optional<double> worst = std::nullopt) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi > best_known) throw ContractViolation("relative_ratios: a value exceeds best_known (stale best-known data)");
  const double w = worst.value_or(*lo);
  if (w > *lo) throw ContractViolation("relative_ratios: worst exceeds a value");
  std::vector<double> out(values.size(), 1.0);
  const double span = best_known - w;
  if (span <= 0.0) return out;
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = std::clamp((values[k] - w) / span, 0.0, 1.0);
  return out;
}

struct HistogramBin {
  bool singleton = false;
  double lower = 0.0;  ///< the value itself for singletons
  double upper = 0.0;  ///< exclusive; equals lower for singletons
  std::vector<std::size_t> counts;  ///< one per algorithm

  std::string label() const {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, lower);
    return (singleton ? "" : "<") + std::string(buf, res.ptr);
  }
};

/// Bins in descending order: up to n singletons for the largest distinct
/// ratios, then n equal intervals below the smallest singleton.
struct HistogramReport {
  std::size_t n_bins = 5;
  std::vector<std::string> algorithms;
  std::vector<HistogramBin> bins;

  void write_tsv(std::ostream& os) const {
    os << "bin";
    for (const auto& a : algorithms) os << '\t' << a;
    os << '\n';
    for (const auto& b : bins) {
      os << b.label();
      for (std::size_t c : b.counts) os << '\t' << c;
      os << '\n';
    }
  }
};

inline HistogramReport histogram(const std::vector<std::pair<std::string, std::vector<double>>>& ratios,
                                 std::size_t n_bins = 5) {
  if (ratios.empty()) throw ContractViolation("histogram: need at least one algorithm");
  if (n_bins == 0) throw ContractViolation("histogram: n_bins must be positive");
  std::vector<double> pooled;
  for (const auto& [name, r] : ratios) {
    if (r.empty()) throw ContractViolation("histogram: algorithm '" + name + "' has no ratios");
    pooled.insert(pooled.end(), r.begin(), r.end());
  }
  std::sort(pooled.begin(), pooled.end(), std::greater<>());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  HistogramReport rep;
  rep.n_bins = n_bins;
  const std::size_t m = ratios.size();
  for (const auto& [name, r] : ratios) rep.algorithms.push_back(name);

  const std::size_t singles = std::min(n_bins, pooled.size());
  for (std::size_t k = 0; k < singles; ++k) rep.bins.push_back({true, pooled[k], pooled[k], std::vector<std::size_t>(m, 0)});
  if (pooled.size() > n_bins) {
    const double top = pooled[n_bins - 1];
    const double n = static_cast<double>(n_bins);
    for (std::size_t k = 1; k <= n_bins; ++k) {
      rep.bins.push_back({false, static_cast<double>(n_bins - k) / n * top, static_cast<double>(n_bins - k + 1) / n * top,
                          std::vector<std::size_t>(m, 0)});
    }
  }

  for (std::size_t a = 0; a < m; ++a) {
    for (double v : ratios[a].second) {
      for (auto& b : rep.bins) {
        if (b.singleton ? v == b.lower : v >= b.lower) {
          ++b.counts[a];
          break;
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------- configs

/// Configuration for every algorithm, addressed by flat "section.field" keys.
struct AlgorithmConfigs {
  SmcConfig smc{};
  CeConfig ce{};
  SaConfig sa{};
  LsConfig ls{};
};

namespace detail {

template <class T>
T parse_number(std::string_view key, std::string_view s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ValidationError("config: bad value '" + std::string(s) + "' for " + std::string(key));
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError("config: bad boolean '" + std::string(s) + "' for " + std::string(key));
}

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct ConfigField {
  std::string key;
  std::function<void(AlgorithmConfigs&, std::string_view)> set;
  std::function<std::string(const AlgorithmConfigs&)> get;
};

template <class Member>
ConfigField numeric_field(std::string key, Member member) {
  using T = std::remove_cvref_t<decltype(member(std::declval<AlgorithmConfigs&>()))>;
  return {key,
          [key, member](AlgorithmConfigs& c, std::string_view s) { member(c) = parse_number<T>(key, s); },
          [member](const AlgorithmConfigs& c) {
            const T v = member(const_cast<AlgorithmConfigs&>(c));
            if constexpr (std::is_floating_point_v<T>) {
              return format_number(v);
            } else {
              return std::to_string(v);
            }
          }};
}

template <class Member>
ConfigField bool_field(std::string key, Member member) {
  return {key, [key, member](AlgorithmConfigs& c, std::string_view s) { member(c) = parse_bool(key, s); },
          [member](const AlgorithmConfigs& c) {
            return std::string(member(const_cast<AlgorithmConfigs&>(c)) ? "true" : "false");
          }};
}

inline void add_fit_fields(std::vector<ConfigField>& out, const std::string& prefix,
                           FitOptions& (*fit)(AlgorithmConfigs&)) {
  out.push_back(numeric_field(prefix + "eps_clip", [fit](AlgorithmConfigs& c) -> double& { return fit(c).eps_clip; }));
  out.push_back(numeric_field(prefix + "penalty", [fit](AlgorithmConfigs& c) -> double& { return fit(c).penalty; }));
  out.push_back(numeric_field(prefix + "newton_tol", [fit](AlgorithmConfigs& c) -> double& { return fit(c).newton_tol; }));
  out.push_back(numeric_field(prefix + "max_iter", [fit](AlgorithmConfigs& c) -> int& { return fit(c).max_iter; }));
  out.push_back(
      numeric_field(prefix + "corr_screen", [fit](AlgorithmConfigs& c) -> double& { return fit(c).corr_screen; }));
  out.push_back(numeric_field(prefix + "penalty_escalations",
                              [fit](AlgorithmConfigs& c) -> int& { return fit(c).penalty_escalations; }));
}

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f;
    // smc
    f.push_back(numeric_field("smc.n", [](AlgorithmConfigs& c) -> std::size_t& { return c.smc.n; }));
    f.push_back(numeric_field("smc.beta", [](AlgorithmConfigs& c) -> double& { return c.smc.beta; }));
    f.push_back(numeric_field("smc.zeta_star", [](AlgorithmConfigs& c) -> double& { return c.smc.zeta_star; }));
    f.push_back(
        numeric_field("smc.zeta_delta_star", [](AlgorithmConfigs& c) -> double& { return c.smc.zeta_delta_star; }));
    f.push_back(numeric_field("smc.delta_term", [](AlgorithmConfigs& c) -> double& { return c.smc.delta_term; }));
    f.push_back(numeric_field("smc.d_star", [](AlgorithmConfigs& c) -> std::size_t& { return c.smc.d_star; }));
    f.push_back(numeric_field("smc.move_batch", [](AlgorithmConfigs& c) -> std::size_t& { return c.smc.move_batch; }));
    f.push_back({"smc.kernel", [](AlgorithmConfigs& c, std::string_view s) {
                   try {
                     c.smc.kernel = parse_kernel_kind(s);
                   } catch (const ContractViolation& e) {
                     throw ValidationError(std::string("config: ") + e.what());
                   }
                 },
                 [](const AlgorithmConfigs& c) { return std::string(to_string(c.smc.kernel)); }});
    f.push_back({"smc.symmetric_p",
                 [](AlgorithmConfigs& c, std::string_view s) {
                   std::vector<double> p;
                   std::size_t pos = 0;
                   while (pos <= s.size()) {
                     const std::size_t next = std::min(s.find(',', pos), s.size());
                     p.push_back(parse_number<double>("smc.symmetric_p", s.substr(pos, next - pos)));
                     pos = next + 1;
                   }
                   c.smc.symmetric_p = std::move(p);
                 },
                 [](const AlgorithmConfigs& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.smc.symmetric_p.size(); ++i) {
                     out += (i ? "," : "") + format_number(c.smc.symmetric_p[i]);
                   }
                   return out;
                 }});
    f.push_back({"smc.seq", [](AlgorithmConfigs& c, std::string_view s) {
                   try {
                     c.smc.seq = parse_sequence_tag(s);
                   } catch (const ContractViolation& e) {
                     throw ValidationError(std::string("config: ") + e.what());
                   }
                 },
                 [](const AlgorithmConfigs& c) { return std::string(to_string(c.smc.seq)); }});
    f.push_back(numeric_field("smc.workers", [](AlgorithmConfigs& c) -> std::size_t& { return c.smc.workers; }));
    f.push_back(
        numeric_field("smc.alpha_max_factor", [](AlgorithmConfigs& c) -> double& { return c.smc.alpha_max_factor; }));
    f.push_back(numeric_field("smc.step_tol", [](AlgorithmConfigs& c) -> double& { return c.smc.step_tol; }));
    f.push_back(numeric_field("smc.max_iters", [](AlgorithmConfigs& c) -> std::size_t& { return c.smc.max_iters; }));
    f.push_back(bool_field("smc.final_polish", [](AlgorithmConfigs& c) -> bool& { return c.smc.final_polish; }));
    f.push_back(bool_field("smc.progress", [](AlgorithmConfigs& c) -> bool& { return c.smc.progress; }));
    add_fit_fields(f, "smc.fit.", [](AlgorithmConfigs& c) -> FitOptions& { return c.smc.fit; });
    // ce
    f.push_back(numeric_field("ce.n", [](AlgorithmConfigs& c) -> std::size_t& { return c.ce.n; }));
    f.push_back(numeric_field("ce.beta", [](AlgorithmConfigs& c) -> double& { return c.ce.beta; }));
    f.push_back(numeric_field("ce.tau", [](AlgorithmConfigs& c) -> double& { return c.ce.tau; }));
    f.push_back({"ce.family", [](AlgorithmConfigs& c, std::string_view s) {
                   try {
                     c.ce.family = parse_family_kind(s);
                   } catch (const ContractViolation& e) {
                     throw ValidationError(std::string("config: ") + e.what());
                   }
                 },
                 [](const AlgorithmConfigs& c) { return std::string(to_string(c.ce.family)); }});
    f.push_back(numeric_field("ce.max_iters", [](AlgorithmConfigs& c) -> std::size_t& { return c.ce.max_iters; }));
    f.push_back(numeric_field("ce.stagnation_limit",
                              [](AlgorithmConfigs& c) -> std::size_t& { return c.ce.stagnation_limit; }));
    f.push_back(numeric_field("ce.d_star", [](AlgorithmConfigs& c) -> std::size_t& { return c.ce.d_star; }));
    f.push_back(numeric_field("ce.workers", [](AlgorithmConfigs& c) -> std::size_t& { return c.ce.workers; }));
    f.push_back(bool_field("ce.progress", [](AlgorithmConfigs& c) -> bool& { return c.ce.progress; }));
    add_fit_fields(f, "ce.fit.", [](AlgorithmConfigs& c) -> FitOptions& { return c.ce.fit; });
    // sa
    f.push_back(
        numeric_field("sa.budget_evals", [](AlgorithmConfigs& c) -> std::uint64_t& { return c.sa.budget.evaluations; }));
    f.push_back(numeric_field("sa.budget_seconds", [](AlgorithmConfigs& c) -> double& { return c.sa.budget.seconds; }));
    f.push_back(numeric_field("sa.window", [](AlgorithmConfigs& c) -> std::size_t& { return c.sa.window; }));
    f.push_back(numeric_field("sa.gain", [](AlgorithmConfigs& c) -> double& { return c.sa.gain; }));
    f.push_back(numeric_field("sa.rho0", [](AlgorithmConfigs& c) -> double& { return c.sa.rho0; }));
    f.push_back(bool_field("sa.progress", [](AlgorithmConfigs& c) -> bool& { return c.sa.progress; }));
    // ls
    f.push_back(
        numeric_field("ls.budget_evals", [](AlgorithmConfigs& c) -> std::uint64_t& { return c.ls.budget.evaluations; }));
    f.push_back(numeric_field("ls.budget_seconds", [](AlgorithmConfigs& c) -> double& { return c.ls.budget.seconds; }));
    f.push_back(numeric_field("ls.k", [](AlgorithmConfigs& c) -> std::size_t& { return c.ls.k; }));
    f.push_back(bool_field("ls.progress", [](AlgorithmConfigs& c) -> bool& { return c.ls.progress; }));
    return f;
  }();
  return fields;
}

}  // namespace detail

/// Reads "section.field = value" lines; '#' starts a comment. Unknown keys and
/// bad values raise ValidationError, as does any config failing validation.
inline AlgorithmConfigs parse_config(std::istream& is, AlgorithmConfigs base = {}) {
  const auto& fields = detail::config_fields();
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key=value");
    const std::string_view key = trim(s.substr(0, eq));
    const std::string_view val = trim(s.substr(eq + 1));
    const auto it = std::find_if(fields.begin(), fields.end(), [&](const auto& f) { return f.key == key; });
    if (it == fields.end()) throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
    it->set(base, val);
  }
  try {
    base.smc.validate();
    base.ce.validate();
    base.sa.validate();
    base.ls.validate();
  } catch (const ContractViolation& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return base;
}

inline AlgorithmConfigs load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read config '" + path + "'");
  return parse_config(is);
}

inline void write_config(std::ostream& os, const AlgorithmConfigs& c) {
  for (const auto& f : detail::config_fields()) os << f.key << " = " << f.get(c) << '\n';
}

// ---------------------------------------------------------------- algorithms

inline const std::vector<std::string>& algorithm_ids() {
  static const std::vector<std::string> ids{"smc", "smc-local", "ce", "sa", "ls"};
  return ids;
}

/// Runs one algorithm id on obj with the given seed.
inline RunRecord run_algorithm(const QuadraticObjective& obj, const std::string& algo, const AlgorithmConfigs& cfg,
                               std::uint64_t seed) {
  RunRecord rec;
  if (algo == "smc" || algo == "smc-local") {
    SmcConfig c = cfg.smc;
    c.seed = seed;
    if (algo == "smc-local") c.kernel = KernelKind::symmetric;
    rec = smc_optimize(obj, c);
  } else if (algo == "ce") {
    CeConfig c = cfg.ce;
    c.seed = seed;
    rec = ce_optimize(obj, c);
  } else if (algo == "sa") {
    SaConfig c = cfg.sa;
    c.seed = seed;
    rec = sa_optimize(obj, c);
  } else if (algo == "ls") {
    LsConfig c = cfg.ls;
    c.seed = seed;
    rec = local_search_kopt(obj, c);
  } else {
    throw ValidationError("unknown algorithm '" + algo + "'");
  }
  rec.algorithm = algo;
  return rec;
}

// ---------------------------------------------------------------- records

inline nlohmann::json to_json(const RunRecord& r) {
  return {{"algorithm", r.algorithm},   {"problem", r.problem},
          {"seed", r.seed},             {"best_x", to_bitstring(r.best_x)},
          {"best_f", r.best_f},         {"evaluations", r.evaluations},
          {"wall_seconds", r.wall_seconds}, {"iterations", r.iterations}};
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  try {
    r.algorithm = j.at("algorithm").get<std::string>();
    r.problem = j.at("problem").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.best_x = from_bitstring(j.at("best_x").get<std::string>());
    r.best_f = j.at("best_f").get<double>();
    r.evaluations = j.at("evaluations").get<std::uint64_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.iterations = j.at("iterations").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("record: ") + e.what());
  }
  return r;
}

inline void write_records_json(std::ostream& os, const std::vector<RunRecord>& recs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : recs) arr.push_back(to_json(r));
  os << arr.dump(1) << '\n';
}

inline std::vector<RunRecord> read_records_json(std::istream& is) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, e.what());
  }
  if (!arr.is_array()) throw ValidationError("records: expected a JSON array");
  std::vector<RunRecord> out;
  for (const auto& j : arr) out.push_back(record_from_json(j));
  return out;
}

inline constexpr std::string_view kCsvHeader = "algorithm,problem,seed,best_f,evaluations,wall_seconds,iterations,best_x";

inline void write_records_csv(std::ostream& os, const std::vector<RunRecord>& recs) {
  os << kCsvHeader << '\n';
  for (const auto& r : recs) {
    os << r.algorithm << ',' << r.problem << ',' << r.seed << ',' << detail::format_number(r.best_f) << ','
       << r.evaluations << ',' << detail::format_number(r.wall_seconds) << ',' << r.iterations << ','
       << to_bitstring(r.best_x) << '\n';
  }
}

inline std::vector<RunRecord> read_records_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<RunRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != kCsvHeader) throw ParseError(lineno, "unexpected CSV header");
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 8) throw ParseError(lineno, "expected 8 fields");
    RunRecord r;
    try {
      r.algorithm = cells[0];
      r.problem = cells[1];
      r.seed = detail::parse_number<std::uint64_t>("seed", cells[2]);
      r.best_f = detail::parse_number<double>("best_f", cells[3]);
      r.evaluations = detail::parse_number<std::uint64_t>("evaluations", cells[4]);
      r.wall_seconds = detail::parse_number<double>("wall_seconds", cells[5]);
      r.iterations = detail::parse_number<std::uint64_t>("iterations", cells[6]);
      r.best_x = from_bitstring(cells[7]);
    } catch (const std::exception& e) {
      throw ParseError(lineno, e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Reads records, choosing the format from the file extension (.json or .csv).
inline std::vector<RunRecord> load_records(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read records '" + path + "'");
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return read_records_json(is);
  return read_records_csv(is);
}

inline void save_records(const std::string& path, const std::vector<RunRecord>& recs) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write records '" + path + "'");
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    write_records_json(os, recs);
  } else {
    write_records_csv(os, recs);
  }
}

// ---------------------------------------------------------------- best known

using BestKnown = std::map<std::string, double>;

/// Raises entries of `db` to `value`; never lowers them.
inline void update_best_known(BestKnown& db, const std::string& problem, double value) {
  const auto it = db.find(problem);
  if (it == db.end() || value > it->second) db[problem] = value;
}

/// One "problem<TAB>value" per line. A missing file is an empty database.
inline BestKnown load_best_known(const std::string& path) {
  BestKnown db;
  std::ifstream is(path);
  if (!is) return db;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "expected problem<TAB>value");
    try {
      update_best_known(db, line.substr(0, tab), detail::parse_number<double>("value", line.substr(tab + 1)));
    } catch (const ValidationError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return db;
}

inline void save_best_known(const std::string& path, const BestKnown& db) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write best-known file '" + path + "'");
  for (const auto& [k, v] : db) os << k << '\t' << detail::format_number(v) << '\n';
}

/// Ratios per algorithm, computed problem by problem. In pooled mode the worst
/// value of a problem is taken over all algorithms, otherwise over the
/// algorithm's own runs only. Algorithms appear in first-seen order.
inline std::vector<std::pair<std::string, std::vector<double>>> ratios_by_algorithm(
    const std::vector<RunRecord>& recs, const BestKnown& best_known, bool pooled = true) {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  auto slot = [&](const std::string& a) -> std::vector<double>& {
    for (auto& [name, v] : out) {
      if (name == a) return v;
    }
    out.emplace_back(a, std::vector<double>{});
    return out.back().second;
  };
  std::map<std::string, std::map<std::string, std::vector<double>>> by_problem;
  for (const auto& r : recs) {
    slot(r.algorithm);
    by_problem[r.problem][r.algorithm].push_back(r.best_f);
  }
  for (const auto& [problem, algos] : by_problem) {
    double best = -std::numeric_limits<double>::infinity();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& [a, v] : algos) {
      best = std::max(best, *std::max_element(v.begin(), v.end()));
      worst = std::min(worst, *std::min_element(v.begin(), v.end()));
    }
    if (const auto it = best_known.find(problem); it != best_known.end()) best = std::max(best, it->second);
    for (const auto& [a, v] : algos) {
      const double w = pooled ? worst : *std::min_element(v.begin(), v.end());
      const auto r = relative_ratios(v, best, w);
      auto& dst = slot(a);
      dst.insert(dst.end(), r.begin(), r.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------- suites

struct SuiteSpec {
  std::vector<ProblemInstance> problems;
  std::vector<std::string> algorithms;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  AlgorithmConfigs configs{};
  std::size_t n_bins = 5;
  std::string best_known_path;  ///< empty disables persistence
};

struct CellFailure {
  std::string problem;
  std::string algorithm;
  std::size_t repeat = 0;
  std::string message;
};

struct SuiteResult {
  std::vector<RunRecord> records;
  std::vector<CellFailure> failures;
  BestKnown best_known;
  HistogramReport report;
};

/// 64-bit FNV-1a, used to fold identifiers into seeds.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t cell_seed(std::uint64_t suite_seed, const std::string& problem, const std::string& algo,
                               std::size_t repeat) {
  return derive_key({suite_seed, fnv1a(problem), fnv1a(algo), static_cast<std::uint64_t>(repeat)});
}

/// Runs every (problem, algorithm, repeat) cell. Failed cells are reported in
/// `failures` and skipped. Records come back sorted by problem, algorithm and
/// repeat whatever the worker count.
inline SuiteResult run_suite(const SuiteSpec& spec) {
  struct Cell {
    std::size_t p, a, r;
  };
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < spec.problems.size(); ++p) {
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
      for (std::size_t r = 0; r < spec.repeats; ++r) cells.push_back({p, a, r});
    }
  }
  std::vector<std::optional<RunRecord>> results(cells.size());
  std::vector<std::string> errors(cells.size());
  parallel_for(spec.workers, cells.size(), [&](std::size_t c) {
    const Cell& cell = cells[c];
    const ProblemInstance& inst = spec.problems[cell.p];
    const std::string pid = inst.spec.id();
    const std::string& algo = spec.algorithms[cell.a];
    try {
      RunRecord rec = run_algorithm(inst.obj, algo, spec.configs, cell_seed(spec.seed, pid, algo, cell.r));
      rec.problem = pid;
      results[c] = std::move(rec);
    } catch (const std::exception& e) {
      errors[c] = e.what();
    }
  });

  SuiteResult out;
  if (!spec.best_known_path.empty()) out.best_known = load_best_known(spec.best_known_path);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const ProblemInstance& inst = spec.problems[cells[c].p];
    if (results[c]) {
      update_best_known(out.best_known, results[c]->problem, results[c]->best_f);
      out.records.push_back(std::move(*results[c]));
    } else {
      out.failures.push_back({inst.spec.id(), spec.algorithms[cells[c].a], cells[c].r, errors[c]});
    }
  }
  for (const auto& inst : spec.problems) {
    if (inst.obj.dim() <= kMaxBruteForceDim) update_best_known(out.best_known, inst.spec.id(), brute_force(inst.obj).value);
  }
  if (!spec.best_known_path.empty()) save_best_known(spec.best_known_path, out.best_known);
  if (!out.records.empty()) out.report = histogram(ratios_by_algorithm(out.records, out.best_known), spec.n_bins);
  return out;
}

}  // namespace pbo
