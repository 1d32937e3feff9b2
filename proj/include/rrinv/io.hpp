#pragma once

// Text formats. Every data line carries complex numbers as two decimal
// fields printed with 17 significant digits; `#` starts a comment.
//
//   signal     x re im                       (uniform, strictly increasing x)
//   spectrum   branch j, then n re im [mult]
//   cauchy     omega re im, block K1, <signal>, block K2, <signal>
//   problem    key = value (a, alpha, beta_re, beta_im, h_re, h_im,
//              potential = <path> | zero | const:re[,im] | sine:c1,c2,
//              n_points for built-in potentials)

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rrinv/cauchy/data.hpp"
#include "rrinv/core.hpp"
#include "rrinv/error.hpp"
#include "rrinv/pipeline/invert.hpp"
#include "rrinv/problem.hpp"

namespace rrinv {

/// Malformed file content, with the source and line in the message.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ValidationError(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}
  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

namespace io {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt(cplx z) { return fmt(z.real()) + " " + fmt(z.imag()); }

struct Line {
  std::size_t number;
  std::vector<std::string> fields;
};

/// Non-empty, non-comment lines split on whitespace.
inline std::vector<Line> tokenize(std::istream& in) {
  std::vector<Line> out;
  std::string s;
  std::size_t k = 0;
  while (std::getline(in, s)) {
    ++k;
    if (auto p = s.find('#'); p != std::string::npos) s.erase(p);
    std::istringstream ls(s);
    Line l{k, {}};
    std::string f;
    while (ls >> f) l.fields.push_back(f);
    if (!l.fields.empty()) out.push_back(std::move(l));
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& src, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e || !std::isfinite(v)) throw ParseError(src, line, "not a finite number: '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s, const std::string& src, std::size_t line) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(src, line, "not an integer: '" + s + "'");
  return v;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw ValidationError("cannot open " + p.string());
  return f;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw ValidationError("cannot write " + p.string());
  return f;
}

// ---- signals

inline void write_signal(std::ostream& out, const ComplexSignal& u) {
  for (std::size_t i = 0; i < u.size(); ++i) out << fmt(u.grid().node(i)) << ' ' << fmt(u[i]) << '\n';
}

/// Builds a signal from parsed `x re im` lines. The nodes must be uniform on
/// [0,a] or [-a,a]; `expected_a` pins a when given.
inline ComplexSignal signal_from_lines(const std::vector<Line>& lines, const std::string& src,
                                       std::optional<double> expected_a = std::nullopt) {
  if (lines.size() < 2) throw ParseError(src, lines.empty() ? 0 : lines[0].number, "a signal needs at least two lines");
  std::vector<double> x;
  std::vector<cplx> v;
  for (const auto& l : lines) {
    if (l.fields.size() != 3) throw ParseError(src, l.number, "expected 'x re im'");
    double xi = parse_double(l.fields[0], src, l.number);
    if (!x.empty() && !(xi > x.back())) throw ParseError(src, l.number, "x is not strictly increasing");
    x.push_back(xi);
    v.emplace_back(parse_double(l.fields[1], src, l.number), parse_double(l.fields[2], src, l.number));
  }
  const double lo = x.front(), hi = x.back();
  const double h = (hi - lo) / static_cast<double>(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (std::abs(x[i] - x[i - 1] - h) > 1e-6 * h) throw ParseError(src, lines[i].number, "x is not uniformly spaced");
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(hi));
  std::optional<Grid> g;
  if (std::abs(lo) < tol) {
    g = Grid::half(hi, x.size());
  } else if (std::abs(lo + hi) < tol) {
    if (x.size() % 2 == 0) throw ParseError(src, lines.back().number, "a symmetric signal needs an odd number of nodes");
    g = Grid::symmetric(hi, x.size());
  } else {
    throw ParseError(src, lines[0].number, "nodes must span [0,a] or [-a,a]");
  }
  if (expected_a && std::abs(*expected_a - hi) > tol) {
    throw ParseError(src, lines.back().number, "last node " + fmt(hi) + " does not match a = " + fmt(*expected_a));
  }
  return ComplexSignal(*g, std::move(v));
}

inline ComplexSignal read_signal(std::istream& in, const std::string& src = "<signal>",
                                 std::optional<double> expected_a = std::nullopt) {
  return signal_from_lines(tokenize(in), src, expected_a);
}

inline ComplexSignal read_signal_file(const std::filesystem::path& p, std::optional<double> expected_a = std::nullopt) {
  auto f = open_in(p);
  return read_signal(f, p.string(), expected_a);
}

// ---- spectra

inline void write_spectrum(std::ostream& out, const Spectrum& s) {
  out << "# n re im multiplicity\nbranch " << s.branch() << '\n';
  for (const auto& e : s.entries()) out << e.n << ' ' << fmt(e.value) << ' ' << e.multiplicity << '\n';
}

inline void write_sequence(std::ostream& out, int branch, const IndexedSequence& s) {
  out << "# n re im\nbranch " << branch << '\n';
  for (const auto& e : s) out << e.n << ' ' << fmt(e.value) << '\n';
}

struct SpectrumFile {
  std::optional<int> branch;
  IndexedSequence values;
  std::vector<int> multiplicities;  // empty unless every line carries one

  /// Spectrum with the stored multiplicities, or with coincident values
  /// grouped when none were stored.
  Spectrum to_spectrum(std::optional<int> fallback_branch = std::nullopt) const {
    std::optional<int> j = branch ? branch : fallback_branch;
    if (!j) throw ValidationError("spectrum file has no 'branch' line");
    if (multiplicities.empty()) return Spectrum::from_values(*j, values);
    std::vector<SpectrumEntry> e;
    for (std::size_t i = 0; i < values.size(); ++i) e.push_back({values[i].n, values[i].value, multiplicities[i]});
    return Spectrum(*j, std::move(e));
  }
};

inline SpectrumFile read_spectrum(std::istream& in, const std::string& src = "<spectrum>") {
  SpectrumFile sf;
  bool all_mult = true;
  for (const auto& l : tokenize(in)) {
    if (l.fields[0] == "branch") {
      if (l.fields.size() != 2) throw ParseError(src, l.number, "expected 'branch j'");
      int j = parse_int(l.fields[1], src, l.number);
      if (j != 0 && j != 1) throw ParseError(src, l.number, "branch must be 0 or 1");
      sf.branch = j;
      continue;
    }
    if (l.fields.size() != 3 && l.fields.size() != 4) throw ParseError(src, l.number, "expected 'n re im [multiplicity]'");
    int n = parse_int(l.fields[0], src, l.number);
    if (!sf.values.empty() && n <= sf.values.back().n) throw ParseError(src, l.number, "indices must increase");
    sf.values.push_back({n, {parse_double(l.fields[1], src, l.number), parse_double(l.fields[2], src, l.number)}});
    if (l.fields.size() == 4) {
      int m = parse_int(l.fields[3], src, l.number);
      if (m < 1) throw ParseError(src, l.number, "multiplicity must be positive");
      sf.multiplicities.push_back(m);
    } else {
      all_mult = false;
    }
  }
  if (!all_mult) sf.multiplicities.clear();
  if (sf.values.empty()) throw ParseError(src, 0, "no eigenvalues");
  return sf;
}

inline SpectrumFile read_spectrum_file(const std::filesystem::path& p) {
  auto f = open_in(p);
  return read_spectrum(f, p.string());
}

// ---- Cauchy data

inline void write_cauchy(std::ostream& out, const CauchyData& d) {
  out << "omega " << fmt(d.omega) << "\nblock K1\n";
  write_signal(out, d.K1);
  out << "block K2\n";
  write_signal(out, d.K2);
}

inline CauchyData read_cauchy(std::istream& in, const std::string& src = "<cauchy>") {
  std::optional<cplx> omega;
  std::map<std::string, std::vector<Line>> blocks;
  std::string current;
  for (auto& l : tokenize(in)) {
    if (l.fields[0] == "omega") {
      if (l.fields.size() != 3) throw ParseError(src, l.number, "expected 'omega re im'");
      omega = cplx(parse_double(l.fields[1], src, l.number), parse_double(l.fields[2], src, l.number));
    } else if (l.fields[0] == "block") {
      if (l.fields.size() != 2 || (l.fields[1] != "K1" && l.fields[1] != "K2")) {
        throw ParseError(src, l.number, "expected 'block K1' or 'block K2'");
      }
      current = l.fields[1];
      if (blocks.count(current)) throw ParseError(src, l.number, "duplicate block " + current);
      blocks[current];
    } else {
      if (current.empty()) throw ParseError(src, l.number, "data line before any block");
      blocks[current].push_back(std::move(l));
    }
  }
  if (!omega) throw ParseError(src, 0, "missing 'omega' line");
  if (!blocks.count("K1") || !blocks.count("K2")) throw ParseError(src, 0, "missing K1 or K2 block");
  auto K1 = signal_from_lines(blocks["K1"], src);
  auto K2 = signal_from_lines(blocks["K2"], src);
  if (!(K1.grid() == K2.grid()) || K1.grid().kind() != GridKind::half) {
    throw ParseError(src, blocks["K2"].front().number, "K1 and K2 must share one grid on [0,a]");
  }
  return {K1, K2, *omega};
}

inline CauchyData read_cauchy_file(const std::filesystem::path& p) {
  auto f = open_in(p);
  return read_cauchy(f, p.string());
}

// ---- key = value configs

struct KeyValue {
  std::string value;
  std::size_t line;
};

inline std::map<std::string, KeyValue> read_key_values(std::istream& in, const std::string& src) {
  std::map<std::string, KeyValue> out;
  std::string s;
  std::size_t k = 0;
  auto trim = [](std::string x) {
    const char* ws = " \t\r";
    x.erase(0, x.find_first_not_of(ws));
    x.erase(x.find_last_not_of(ws) + 1);
    return x;
  };
  while (std::getline(in, s)) {
    ++k;
    if (auto p = s.find('#'); p != std::string::npos) s.erase(p);
    s = trim(s);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(src, k, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
    if (key.empty() || val.empty()) throw ParseError(src, k, "empty key or value");
    if (out.count(key)) throw ParseError(src, k, "duplicate key '" + key + "'");
    out[key] = {val, k};
  }
  return out;
}

/// Comma-separated list of numbers.
inline std::vector<double> parse_list(const std::string& s, const std::string& src, std::size_t line) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    std::string f = s.substr(start, end - start);
    f.erase(0, f.find_first_not_of(" \t"));
    f.erase(f.find_last_not_of(" \t") + 1);
    out.push_back(parse_double(f, src, line));
    start = end + 1;
  }
  return out;
}

inline cplx parse_complex(const std::string& s, const std::string& src, std::size_t line) {
  auto v = parse_list(s, src, line);
  if (v.size() == 1) return v[0];
  if (v.size() == 2) return {v[0], v[1]};
  throw ParseError(src, line, "expected 're' or 're,im'");
}

inline RobinReggeProblem read_problem(std::istream& in, const std::string& src = "<problem>",
                                      const std::filesystem::path& base_dir = {}) {
  auto kv = read_key_values(in, src);
  static const std::vector<std::string> known{"a", "alpha", "beta_re", "beta_im", "h_re", "h_im", "potential", "n_points"};
  for (const auto& [k, v] : kv) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ParseError(src, v.line, "unknown key '" + k + "'");
  }
  auto num = [&](const std::string& key, std::optional<double> def) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (!def) throw ParseError(src, 0, "missing key '" + key + "'");
      return *def;
    }
    return parse_double(it->second.value, src, it->second.line);
  };
  const double a = num("a", 1.0);
  const double alpha = num("alpha", std::nullopt);
  const cplx beta{num("beta_re", 0.0), num("beta_im", 0.0)};
  const cplx h{num("h_re", 0.0), num("h_im", 0.0)};
  if (!(a > 0.0)) throw ParseError(src, kv.count("a") ? kv["a"].line : 0, "a must be positive");
  if (!(alpha > 0.0) || alpha == 1.0) throw ParseError(src, kv["alpha"].line, "alpha must be positive and != 1");
  std::size_t npts = 513;
  if (auto it = kv.find("n_points"); it != kv.end()) {
    int v = parse_int(it->second.value, src, it->second.line);
    if (v < 5) throw ParseError(src, it->second.line, "n_points must be at least 5");
    npts = static_cast<std::size_t>(v);
  }
  auto pit = kv.find("potential");
  const std::string pot = pit == kv.end() ? "zero" : pit->second.value;
  const std::size_t pline = pit == kv.end() ? 0 : pit->second.line;
  const Grid g = Grid::half(a, npts);
  std::optional<ComplexSignal> q;
  if (pot == "zero") {
    q = ComplexSignal::zeros(g);
  } else if (pot.rfind("const:", 0) == 0) {
    cplx c = parse_complex(pot.substr(6), src, pline);
    q = ComplexSignal::sample(g, [c](double) { return c; });
  } else if (pot.rfind("sine:", 0) == 0) {
    auto v = parse_list(pot.substr(5), src, pline);
    if (v.size() != 2) throw ParseError(src, pline, "expected 'sine:c1,c2'");
    cplx amp{v[0], v[1]};
    q = ComplexSignal::sample(g, [amp, a](double x) { return amp * std::sin(pi * x / a); });
  } else {
    std::filesystem::path p(pot);
    if (p.is_relative()) p = base_dir / p;
    auto f = open_in(p);
    auto s = read_signal(f, p.string(), a);
    if (s.grid().kind() != GridKind::half) throw ParseError(p.string(), 0, "potential must be sampled on [0,a]");
    q = s;
  }
  RobinReggeProblem prob{a, *q, h, alpha, beta};
  prob.validate();
  return prob;
}

inline RobinReggeProblem read_problem_file(const std::filesystem::path& p) {
  auto f = open_in(p);
  return read_problem(f, p.string(), p.parent_path());
}

// ---- inversion report

/// Header of `key value` lines, then the recovered potential as a signal block.
inline void write_report(std::ostream& out, const InversionReport& r,
                         const std::map<std::string, std::string>& extra = {}) {
  out << "alpha_hat " << fmt(r.fit.alpha_hat) << '\n'
      << "branch " << r.fit.j_hat << '\n'
      << "omega_hat " << fmt(r.fit.omega_hat) << '\n'
      << "P_hat " << fmt(r.fit.P_hat) << '\n'
      << "h " << fmt(r.h) << '\n'
      << "Lambda " << (r.Lambda ? fmt(*r.Lambda) : std::string("NA")) << '\n'
      << "max_delta_residual " << fmt(r.max_delta_residual()) << '\n'
      << "delta_scale " << fmt(r.delta_scale) << '\n'
      << "moment_residual " << fmt(r.moment_residual) << '\n'
      << "gram_condition " << fmt(r.gram_condition) << '\n'
      << "regularization " << fmt(r.regularization_used) << '\n'
      << "iterations " << r.iterations << '\n';
  for (const auto& [k, v] : extra) out << k << ' ' << v << '\n';
  for (const auto& w : r.warnings) out << "# warning: " << w << '\n';
  out << "block q\n";
  write_signal(out, r.q);
}

inline void write_delta_residuals(std::ostream& out, const InversionReport& r) {
  out << "n,abs_delta_residual\n";
  for (const auto& e : r.delta_residuals) out << e.n << ',' << fmt(e.value) << '\n';
}

}  // namespace io
}  // namespace rrinv
