#pragma once

// Stability experiment: forward spectrum of a reference problem, seeded
// perturbations at several Lambda levels, inversion of each, and a CSV table
// of errors against the reference.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rrinv/error.hpp"
#include "rrinv/forward/spectrum.hpp"
#include "rrinv/io.hpp"
#include "rrinv/pipeline/invert.hpp"
#include "rrinv/pipeline/perturb.hpp"
#include "rrinv/problem.hpp"

namespace rrinv {

/// beta for which the free problem (q = 0, h = 0) on [0,a] has a double
/// eigenvalue. With x = lambda a, a double zero of Delta needs
/// g(x) = -sin(2x)/2 - x + (i alpha/2)(1 + cos 2x) = 0; then
/// beta = lambda tan(x) - i alpha lambda. The root near -2 + 0.5i is used.
struct DoubleEigenvalue {
  cplx lambda;
  cplx beta;
};

inline DoubleEigenvalue double_eigenvalue_beta(double a, double alpha) {
  if (!(a > 0.0) || !(alpha > 0.0) || alpha == 1.0) throw ValidationError("need a > 0, alpha > 0, alpha != 1");
  cplx x{-2.0, 0.5};
  for (int it = 0; it < 100; ++it) {
    cplx g = -0.5 * std::sin(2.0 * x) - x + 0.5 * I * alpha * (1.0 + std::cos(2.0 * x));
    cplx dg = -std::cos(2.0 * x) - 1.0 - I * alpha * std::sin(2.0 * x);
    cplx step = g / dg;
    x -= step;
    if (std::abs(step) < 1e-15) break;
  }
  const cplx lam = x / a;
  return {lam, lam * std::tan(x) - I * alpha * lam};
}

struct ExperimentConfig {
  RobinReggeProblem problem;
  std::string problem_label;
  std::vector<double> levels;  // ascending, >= 0
  int trials = 5;
  std::uint64_t seed = 1;
  int N = 64;
  std::size_t grid = 513;
  std::filesystem::path output;  // empty: caller decides
  PerturbMode mode = PerturbMode::smooth_decay;
  double epsilon_max = 1e-2;

  void validate() const {
    if (levels.empty()) throw ValidationError("at least one Lambda level is required");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!(levels[i] >= 0.0) || !std::isfinite(levels[i])) throw ValidationError("levels must be finite and >= 0");
      if (i > 0 && !(levels[i] > levels[i - 1])) throw ValidationError("levels must be strictly ascending");
    }
    if (trials < 1) throw ValidationError("trials must be >= 1");
    if (N < 1) throw ValidationError("N must be positive");
    if (grid < 5) throw ValidationError("grid needs at least five points");
  }
};

/// Reads an experiment config (`key = value`):
///   problem = <problem file> | double:alpha[,a]   (free problem with a double eigenvalue)
///   levels = 1e-4, 1e-3, 1e-2     trials = 5      seed = 1
///   N = 64    grid = 513    output = <dir>    mode = smooth | split    epsilon_max = 1e-2
/// Paths are relative to the config file. Levels are sorted on read.
inline ExperimentConfig read_experiment_config(std::istream& in, const std::string& src,
                                               const std::filesystem::path& base_dir = {}) {
  auto kv = io::read_key_values(in, src);
  static const std::vector<std::string> known{"problem", "levels", "trials", "seed", "N",
                                              "grid",    "output", "mode",   "epsilon_max"};
  for (const auto& [k, v] : kv) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ParseError(src, v.line, "unknown key '" + k + "'");
  }
  auto need = [&](const std::string& k) -> const io::KeyValue& {
    auto it = kv.find(k);
    if (it == kv.end()) throw ParseError(src, 0, "missing key '" + k + "'");
    return it->second;
  };
  auto integer = [&](const std::string& k, long long def, long long lo) {
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    long long v = 0;
    const auto& s = it->second.value;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v < lo) {
      throw ParseError(src, it->second.line, k + " must be an integer >= " + std::to_string(lo));
    }
    return v;
  };

  ExperimentConfig c{};
  const auto& prob = need("problem");
  if (prob.value.rfind("double:", 0) == 0) {
    auto v = io::parse_list(prob.value.substr(7), src, prob.line);
    if (v.empty() || v.size() > 2) throw ParseError(src, prob.line, "expected 'double:alpha[,a]'");
    const double alpha = v[0], a = v.size() == 2 ? v[1] : 1.0;
    auto d = double_eigenvalue_beta(a, alpha);
    c.problem = {a, ComplexSignal::zeros(Grid::half(a, 513)), 0.0, alpha, d.beta};
  } else {
    std::filesystem::path p(prob.value);
    if (p.is_relative()) p = base_dir / p;
    c.problem = io::read_problem_file(p);
  }
  c.problem_label = prob.value;

  const auto& lv = need("levels");
  c.levels = io::parse_list(lv.value, src, lv.line);
  std::sort(c.levels.begin(), c.levels.end());
  if (std::adjacent_find(c.levels.begin(), c.levels.end()) != c.levels.end()) {
    throw ParseError(src, lv.line, "duplicate Lambda level");
  }
  for (double L : c.levels) {
    if (L < 0.0) throw ParseError(src, lv.line, "levels must be >= 0");
  }
  c.trials = static_cast<int>(integer("trials", 5, 1));
  c.seed = static_cast<std::uint64_t>(integer("seed", 1, 0));
  c.N = static_cast<int>(integer("N", 64, 1));
  c.grid = static_cast<std::size_t>(integer("grid", 513, 5));
  if (auto it = kv.find("output"); it != kv.end()) {
    std::filesystem::path p(it->second.value);
    c.output = p.is_relative() ? base_dir / p : p;
  }
  if (auto it = kv.find("mode"); it != kv.end()) {
    if (it->second.value == "smooth") {
      c.mode = PerturbMode::smooth_decay;
    } else if (it->second.value == "split") {
      c.mode = PerturbMode::split_multiples;
    } else {
      throw ParseError(src, it->second.line, "mode must be 'smooth' or 'split'");
    }
  }
  if (auto it = kv.find("epsilon_max"); it != kv.end()) {
    c.epsilon_max = io::parse_double(it->second.value, src, it->second.line);
  }
  c.validate();
  return c;
}

inline ExperimentConfig read_experiment_config_file(const std::filesystem::path& p) {
  auto f = io::open_in(p);
  return read_experiment_config(f, p.string(), p.parent_path());
}

struct TrialRow {
  double level = 0.0;
  int trial = 0;
  double Lambda = 0.0;  // achieved metric
  double q_err = 0.0;
  double h_err = 0.0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct LevelSummary {
  double level = 0.0;
  int ok_trials = 0;
  double median_q_err = 0.0;
  double median_h_err = 0.0;
  std::optional<double> median_ratio_q;  // absent at Lambda = 0 or with no successful trial
  std::optional<double> median_ratio_h;
};

struct StabilityResult {
  std::vector<TrialRow> rows;
  std::vector<LevelSummary> levels;
  std::optional<double> spread_q;  // max/min of the median ratios over positive levels
  std::optional<double> spread_h;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) throw PreconditionError("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Seed for one (level, trial) pair; independent of the number of levels.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t level_index, int trial) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (level_index * 1000003ull + static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Reference potential resampled onto the grid of a recovered one.
inline ComplexSignal on_grid(const ComplexSignal& q, const Grid& g) {
  if (q.grid() == g) return q;
  CubicInterpolant f(q);
  return ComplexSignal::sample(g, [&](double x) { return f(x); });
}

inline std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace detail

/// Runs every (level, trial) pair in order. A failing trial becomes a row
/// with its error as status; the experiment continues.
inline StabilityResult run_stability(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& p = cfg.problem;
  const Spectrum base = detail::staged("forward spectrum", [&] { return compute_spectrum(p, cfg.N); });

  InversionOptions iopt;
  iopt.grid_points = cfg.grid;
  iopt.epsilon_max = cfg.epsilon_max;
  PerturbOptions popt;
  popt.mode = cfg.mode;

  StabilityResult res;
  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    const double L = cfg.levels[li];
    for (int t = 0; t < cfg.trials; ++t) {
      TrialRow row;
      row.level = L;
      row.trial = t;
      try {
        auto pert = detail::staged("perturbation",
                                   [&] { return perturb_spectrum(base, L, detail::trial_seed(cfg.seed, li, t), popt); });
        auto rep = invert_spectrum(pert, base, p.a, p.beta, cfg.N, iopt);
        row.Lambda = rep.Lambda.value_or(L);
        row.q_err = l2_norm(rep.q - detail::on_grid(p.q, rep.q.grid()));
        row.h_err = std::abs(rep.h - p.h);
      } catch (const Error& e) {
        row.status = std::string(dynamic_cast<const NumericError*>(&e) ? "numeric_error" : "error") +
                     (e.stage().empty() ? "" : " [" + e.stage() + "]") + ": " + detail::csv_safe(e.what());
      }
      res.rows.push_back(std::move(row));
    }
  }

  std::vector<double> pos_q, pos_h;
  for (double L : cfg.levels) {
    LevelSummary s;
    s.level = L;
    std::vector<double> qe, he;
    for (const auto& r : res.rows) {
      if (r.level == L && r.ok()) {
        qe.push_back(r.q_err);
        he.push_back(r.h_err);
      }
    }
    s.ok_trials = static_cast<int>(qe.size());
    if (!qe.empty()) {
      s.median_q_err = detail::median(qe);
      s.median_h_err = detail::median(he);
      if (L > 0.0) {
        s.median_ratio_q = s.median_q_err / L;
        s.median_ratio_h = s.median_h_err / L;
        pos_q.push_back(*s.median_ratio_q);
        pos_h.push_back(*s.median_ratio_h);
      }
    }
    res.levels.push_back(s);
  }
  auto spread = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.size() < 2) return std::nullopt;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 ? std::optional<double>(*hi / *lo) : std::nullopt;
  };
  res.spread_q = spread(pos_q);
  res.spread_h = spread(pos_h);
  return res;
}

/// Rows `Lambda,trial,q_err,h_err,ratio_q,ratio_h,status` then `#` footer
/// lines with per-level medians and the spread of the median ratios.
inline void write_stability_csv(std::ostream& out, const StabilityResult& r) {
  using io::fmt;
  auto opt = [](std::optional<double> v) { return v ? fmt(*v) : std::string("NA"); };
  out << "Lambda,trial,q_err,h_err,ratio_q,ratio_h,status\n";
  for (const auto& row : r.rows) {
    out << fmt(row.level) << ',' << row.trial << ',';
    if (row.ok()) {
      out << fmt(row.q_err) << ',' << fmt(row.h_err) << ',';
      out << (row.level > 0.0 ? fmt(row.q_err / row.level) : "NA") << ','
          << (row.level > 0.0 ? fmt(row.h_err / row.level) : "NA");
    } else {
      out << "NA,NA,NA,NA";
    }
    out << ',' << row.status << '\n';
  }
  for (const auto& s : r.levels) {
    out << "# median Lambda=" << fmt(s.level) << " ok=" << s.ok_trials << " q_err=" << fmt(s.median_q_err)
        << " h_err=" << fmt(s.median_h_err) << " ratio_q=" << opt(s.median_ratio_q)
        << " ratio_h=" << opt(s.median_ratio_h) << '\n';
  }
  out << "# spread ratio_q=" << opt(r.spread_q) << " ratio_h=" << opt(r.spread_h) << '\n';
}

}  // namespace rrinv
