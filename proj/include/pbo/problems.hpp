#pragma once

// Random UQBO instances with integer entries and a plain-text file format:
//
//   uqbo d=<d> dist=<law> seed=<seed>
//   <d lines of d space-separated numbers>
//
// with <law> one of uniform:C, shifted:C:TAU, density:C:OMEGA, cauchy:C, custom.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pbo/errors.hpp"
#include "pbo/objective.hpp"
#include "pbo/rng.hpp"

namespace pbo {

enum class EntryLaw { uniform, shifted, density, cauchy, custom };

/// The Cauchy law is truncated at +-kCauchyTruncation * c.
inline constexpr std::int64_t kCauchyTruncation = 10'000;

struct ProblemSpec {
  std::size_t d = 0;
  EntryLaw law = EntryLaw::uniform;
  std::int64_t c = 100;
  std::int64_t tau = 0;
  double omega = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (d == 0) throw ContractViolation("problem: dimension must be positive");
    if (law == EntryLaw::custom) return;
    if (c < 1) throw ContractViolation("problem: c must be a positive integer");
    if (law == EntryLaw::shifted && (tau < -c || tau > c)) throw ContractViolation("problem: tau must lie in [-c, c]");
    if (law == EntryLaw::density && !(omega > 0.0 && omega <= 1.0)) {
      throw ContractViolation("problem: omega must lie in (0, 1]");
    }
  }

  /// Law token used in file headers, e.g. "shifted:100:-50".
  std::string law_token() const {
    auto num = [](double v) {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, res.ptr);
    };
    switch (law) {
      case EntryLaw::uniform: return "uniform:" + std::to_string(c);
      case EntryLaw::shifted: return "shifted:" + std::to_string(c) + ":" + std::to_string(tau);
      case EntryLaw::density: return "density:" + std::to_string(c) + ":" + num(omega);
      case EntryLaw::cauchy: return "cauchy:" + std::to_string(c);
      case EntryLaw::custom: return "custom";
    }
    return "?";
  }

  /// Short identifier used in run records.
  std::string id() const { return law_token() + "/d" + std::to_string(d) + "/s" + std::to_string(seed); }

  bool operator==(const ProblemSpec&) const = default;
};

/// Parses a law token as written by ProblemSpec::law_token into `spec`.
inline void parse_law_token(std::string_view token, ProblemSpec& spec) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = token.find(':', pos);
    parts.push_back(token.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  auto integer = [&](std::string_view s) {
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ContractViolation("bad integer '" + std::string(s) + "' in law '" + std::string(token) + "'");
    }
    return v;
  };
  auto real = [&](std::string_view s) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ContractViolation("bad number '" + std::string(s) + "' in law '" + std::string(token) + "'");
    }
    return v;
  };
  const std::string_view name = parts[0];
  if (name == "uniform" && parts.size() == 2) {
    spec.law = EntryLaw::uniform;
    spec.c = integer(parts[1]);
  } else if (name == "shifted" && parts.size() == 3) {
    spec.law = EntryLaw::shifted;
    spec.c = integer(parts[1]);
    spec.tau = integer(parts[2]);
  } else if (name == "density" && parts.size() == 3) {
    spec.law = EntryLaw::density;
    spec.c = integer(parts[1]);
    spec.omega = real(parts[2]);
  } else if (name == "cauchy" && parts.size() == 2) {
    spec.law = EntryLaw::cauchy;
    spec.c = integer(parts[1]);
  } else if (name == "custom" && parts.size() == 1) {
    spec.law = EntryLaw::custom;
  } else {
    throw ContractViolation("unknown law '" + std::string(token) + "'");
  }
}

/// Difficulty indicator for shifted instances; 1/2 for unshifted ones.
inline double rho_bar(std::int64_t c, std::int64_t tau) {
  if (c < 1) throw ContractViolation("rho_bar: c must be positive");
  const double cd = static_cast<double>(c);
  const double td = static_cast<double>(tau);
  return 0.5 + (td + 2.0 * td * cd) / (2.0 * (td * td + cd * cd + cd));
}

struct ProblemInstance {
  ProblemSpec spec;
  QuadraticObjective obj;
  double rho_bar = 0.5;

  bool operator==(const ProblemInstance&) const = default;
};

/// Inverse-CDF sampler for the discrete law proportional to 1 / (1 + (k/c)^2)
/// on the integers in [-T c, T c].
class CauchyTable {
 public:
  explicit CauchyTable(std::int64_t c) : c_(c), half_(kCauchyTruncation * c) {
    cdf_.resize(static_cast<std::size_t>(2 * half_ + 1));
    double acc = 0.0;
    const double cd = static_cast<double>(c);
    for (std::int64_t k = -half_; k <= half_; ++k) {
      const double r = static_cast<double>(k) / cd;
      acc += 1.0 / (1.0 + r * r);
      cdf_[static_cast<std::size_t>(k + half_)] = acc;
    }
    for (double& v : cdf_) v /= acc;
    cdf_.back() = 1.0;
  }

  std::int64_t sample(RandomStream& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::int64_t>(it - cdf_.begin()) - half_;
  }

  /// Normalized probability of k.
  double pmf(std::int64_t k) const {
    if (k < -half_ || k > half_) return 0.0;
    const auto idx = static_cast<std::size_t>(k + half_);
    return idx == 0 ? cdf_[0] : cdf_[idx] - cdf_[idx - 1];
  }

  std::int64_t c() const noexcept { return c_; }

 private:
  std::int64_t c_;
  std::int64_t half_;
  std::vector<double> cdf_;
};

/// Draws F_ij for i <= j in row-major order from one stream and mirrors them.
/// A shifted instance uses exactly the draws of its unshifted counterpart, so
/// F_tau = F_0 + tau * 1 1^T holds entrywise.
inline ProblemInstance generate(const ProblemSpec& spec) {
  spec.validate();
  if (spec.law == EntryLaw::custom) throw ContractViolation("generate: custom instances must be loaded from file");
  const std::size_t d = spec.d;
  RandomStream rng{spec.seed, 0x9b0eu};
  const auto width = static_cast<std::uint64_t>(2 * spec.c + 1);
  auto uniform_entry = [&] { return static_cast<std::int64_t>(rng.below(width)) - spec.c; };

  std::optional<CauchyTable> cauchy;
  if (spec.law == EntryLaw::cauchy) cauchy.emplace(spec.c);

  std::vector<double> F(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      std::int64_t v = 0;
      switch (spec.law) {
        case EntryLaw::uniform: v = uniform_entry(); break;
        case EntryLaw::shifted: v = uniform_entry() + spec.tau; break;
        case EntryLaw::density: v = rng.uniform() < spec.omega ? uniform_entry() : 0; break;
        case EntryLaw::cauchy: v = cauchy->sample(rng); break;
        case EntryLaw::custom: break;
      }
      F[i * d + j] = F[j * d + i] = static_cast<double>(v);
    }
  }
  return ProblemInstance{spec, QuadraticObjective(d, std::move(F)),
                         rho_bar(spec.c, spec.law == EntryLaw::shifted ? spec.tau : 0)};
}

namespace detail {

inline std::string format_entry(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

inline void write_instance(std::ostream& os, const ProblemInstance& inst) {
  const std::size_t d = inst.obj.dim();
  os << "uqbo d=" << d << " dist=" << inst.spec.law_token() << " seed=" << inst.spec.seed << '\n';
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) os << (j ? " " : "") << detail::format_entry(inst.obj(i, j));
    os << '\n';
  }
}

/// Parses an instance. Syntax errors raise ParseError with the 1-based line;
/// wrong row counts or lengths and asymmetric matrices raise ValidationError.
inline ProblemInstance read_instance(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      if (!detail::split_ws(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError(lineno + 1, "missing header");
  const auto head = detail::split_ws(line);
  if (head.empty() || head[0] != "uqbo") throw ParseError(lineno, "header must start with 'uqbo'");

  ProblemSpec spec;
  spec.law = EntryLaw::custom;
  bool have_d = false;
  for (std::size_t t = 1; t < head.size(); ++t) {
    const std::string_view kv = head[t];
    const std::size_t eq = kv.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key=value, got '" + std::string(kv) + "'");
    const std::string_view key = kv.substr(0, eq);
    const std::string_view val = kv.substr(eq + 1);
    if (key == "d") {
      const auto res = std::from_chars(val.data(), val.data() + val.size(), spec.d);
      if (res.ec != std::errc{} || res.ptr != val.data() + val.size() || spec.d == 0) {
        throw ParseError(lineno, "bad dimension '" + std::string(val) + "'");
      }
      have_d = true;
    } else if (key == "seed") {
      const auto res = std::from_chars(val.data(), val.data() + val.size(), spec.seed);
      if (res.ec != std::errc{} || res.ptr != val.data() + val.size()) {
        throw ParseError(lineno, "bad seed '" + std::string(val) + "'");
      }
    } else if (key == "dist") {
      try {
        parse_law_token(val, spec);
      } catch (const ContractViolation& e) {
        throw ParseError(lineno, e.what());
      }
    } else {
      throw ParseError(lineno, "unknown header key '" + std::string(key) + "'");
    }
  }
  if (!have_d) throw ParseError(lineno, "header lacks d=<dimension>");

  const std::size_t d = spec.d;
  std::vector<double> F;
  F.reserve(d * d);
  std::size_t rows = 0;
  while (next_line()) {
    const auto cells = detail::split_ws(line);
    if (rows == d) throw ValidationError("line " + std::to_string(lineno) + ": more than d=" + std::to_string(d) + " rows");
    if (cells.size() != d) {
      throw ValidationError("line " + std::to_string(lineno) + ": expected " + std::to_string(d) + " entries, found " +
                            std::to_string(cells.size()));
    }
    for (const std::string_view cell : cells) {
      double v = 0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(lineno, "bad number '" + std::string(cell) + "'");
      }
      F.push_back(v);
    }
    ++rows;
  }
  if (rows != d) throw ValidationError("expected " + std::to_string(d) + " rows, found " + std::to_string(rows));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (F[i * d + j] != F[j * d + i]) {
        throw ValidationError("matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  const double rb = spec.law == EntryLaw::custom ? 0.5 : rho_bar(spec.c, spec.law == EntryLaw::shifted ? spec.tau : 0);
  return ProblemInstance{spec, QuadraticObjective(d, std::move(F)), rb};
}

inline void save(const ProblemInstance& inst, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write '" + path + "'");
  write_instance(os, inst);
  if (!os) throw ValidationError("write to '" + path + "' failed");
}

inline ProblemInstance load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read '" + path + "'");
  return read_instance(is);
}

}  // namespace pbo
