// rrinv: forward spectra, inversion, stability experiments and Weyl
// diagnostics from the command line.
//
// Exit codes: 0 success, 1 numerical failure, 2 invalid input.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "rrinv/cauchy/weyl.hpp"
#include "rrinv/forward/goursat.hpp"
#include "rrinv/forward/spectrum.hpp"
#include "rrinv/harness.hpp"
#include "rrinv/io.hpp"
#include "rrinv/pipeline/invert.hpp"

namespace fs = std::filesystem;
using namespace rrinv;
using io::fmt;

namespace {

void ensure_dir(const fs::path& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw ValidationError("cannot create directory " + d.string() + ": " + ec.message());
}

cplx parse_beta(const std::string& s) { return io::parse_complex(s, "--beta", 1); }

int cmd_forward(const fs::path& problem, int num_eigs, const fs::path& out) {
  auto p = io::read_problem_file(problem);
  auto sp = detail::staged("forward spectrum", [&] { return compute_spectrum(p, num_eigs); });
  auto data = detail::staged("goursat kernel", [&] { return extract_cauchy_data(goursat_kernel(p)); });
  ensure_dir(out);
  {
    auto f = io::open_out(out / "spectrum.txt");
    io::write_spectrum(f, sp);
  }
  {
    auto f = io::open_out(out / "cauchy.txt");
    io::write_cauchy(f, data);
  }
  std::cout << "branch " << sp.branch() << "\neigenvalues " << sp.values().size() << "\nomega " << fmt(data.omega)
            << "\nwrote " << (out / "spectrum.txt").string() << " and " << (out / "cauchy.txt").string() << '\n';
  return 0;
}

struct InvertArgs {
  fs::path spectrum, out;
  double a = 1.0;
  std::string beta = "0";
  int N = 64;
  std::size_t grid = 513;
  std::optional<fs::path> base, reference;
  double epsilon_max = 1e-2;
  double regularization = 0.0;
  bool forward_check = false;
};

int cmd_invert(const InvertArgs& args) {
  const cplx beta = parse_beta(args.beta);
  auto pert = io::read_spectrum_file(args.spectrum);
  std::optional<Spectrum> base;
  if (args.base) base = io::read_spectrum_file(*args.base).to_spectrum();
  std::optional<RobinReggeProblem> ref;
  if (args.reference) ref = io::read_problem_file(*args.reference);

  InversionOptions opt;
  opt.grid_points = args.grid;
  opt.epsilon_max = args.epsilon_max;
  opt.regularization = args.regularization;
  opt.forward_check = args.forward_check;
  auto rep = invert_spectrum(pert.values, base, args.a, beta, args.N, opt);

  std::map<std::string, std::string> extra;
  if (ref) {
    auto qref = detail::on_grid(ref->q, rep.q.grid());
    const double qerr = l2_norm(rep.q - qref);
    const double qn = l2_norm(qref);
    extra["q_error"] = fmt(qerr);
    extra["q_relative_error"] = qn > 0.0 ? fmt(qerr / qn) : "NA";
    extra["h_error"] = fmt(std::abs(rep.h - ref->h));
  }
  if (args.forward_check) {
    double m = 0.0;
    for (const auto& r : rep.forward_residuals) m = std::max(m, r.value);
    extra["max_forward_residual"] = fmt(m);
  }
  extra["q_norm"] = fmt(l2_norm(rep.q));
  ensure_dir(args.out);
  {
    auto f = io::open_out(args.out / "report.txt");
    io::write_report(f, rep, extra);
  }
  {
    auto f = io::open_out(args.out / "delta_residuals.csv");
    io::write_delta_residuals(f, rep);
  }
  std::cout << "alpha_hat " << fmt(rep.fit.alpha_hat) << "\nomega_hat " << fmt(rep.fit.omega_hat) << "\nh "
            << fmt(rep.h) << "\nq_norm " << extra["q_norm"] << '\n';
  for (const auto& [k, v] : extra) {
    if (k != "q_norm") std::cout << k << ' ' << v << '\n';
  }
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_stability(const fs::path& config) {
  auto cfg = read_experiment_config_file(config);
  auto res = run_stability(cfg);
  if (cfg.output.empty()) {
    write_stability_csv(std::cout, res);
  } else {
    ensure_dir(cfg.output);
    auto f = io::open_out(cfg.output / "stability.csv");
    write_stability_csv(f, res);
    std::cout << "wrote " << (cfg.output / "stability.csv").string() << '\n';
  }
  std::cout << "spread ratio_q " << (res.spread_q ? fmt(*res.spread_q) : "NA") << "\nspread ratio_h "
            << (res.spread_h ? fmt(*res.spread_h) : "NA") << '\n';
  return 0;
}

void print_diagnostics(std::ostream& out, const WeylDiagnostics& d) {
  out << "n1 " << d.n1 << "\ngamma0_radius " << fmt(d.gamma0_radius) << '\n';
  out << "# n z_re z_im rho_re rho_im M_re M_im multiplicity\n";
  for (std::size_t n = 0; n < d.zeros.size(); ++n) {
    out << n << ' ' << fmt(d.zeros[n]) << ' ' << fmt(d.rho[n]) << ' ' << fmt(d.residues[n]) << ' '
        << d.multiplicities[n] << '\n';
  }
}

int cmd_diagnose(const fs::path& file, const std::optional<fs::path>& file2, int count) {
  auto data = io::read_cauchy_file(file);
  const double a = data.a();
  auto d = detail::staged("weyl diagnostics", [&] { return weyl_diagnostics(data, a, count); });
  print_diagnostics(std::cout, d);
  if (file2) {
    auto data2 = io::read_cauchy_file(*file2);
    auto pm = detail::staged("perturbation metrics", [&] { return perturbation_metrics(data, data2, a, count); });
    std::cout << "Xi " << fmt(pm.Xi) << "\nOmega " << fmt(pm.Omega) << "\n# n xi\n";
    for (std::size_t k = 0; k < pm.xi.size(); ++k) std::cout << pm.n1 + static_cast<int>(k) << ' ' << fmt(pm.xi[k]) << '\n';
  }
  return 0;
}

int report_error(const Error& e, int code) {
  std::cerr << "error";
  if (!e.stage().empty()) std::cerr << " in stage '" << e.stage() << "'";
  std::cerr << ": " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robin-Regge forward and inverse spectral solver"};
  app.require_subcommand(1);

  fs::path problem, fwd_out;
  int num_eigs = 64;
  auto* fwd = app.add_subcommand("forward", "Eigenvalues and Cauchy data of a problem");
  fwd->add_option("--problem", problem, "problem config file")->required();
  fwd->add_option("--num-eigs", num_eigs, "largest |n| to compute")->required()->check(CLI::PositiveNumber);
  fwd->add_option("--out", fwd_out, "output directory")->required();

  InvertArgs inv;
  auto* invc = app.add_subcommand("invert", "Recover q and h from an indexed spectrum");
  invc->add_option("--spectrum", inv.spectrum, "spectrum file")->required();
  invc->add_option("--a", inv.a, "interval length")->required();
  invc->add_option("--beta", inv.beta, "beta as RE,IM")->required();
  invc->add_option("--N", inv.N, "truncation |n| <= N")->required()->check(CLI::PositiveNumber);
  invc->add_option("--grid", inv.grid, "nodes on [0,a]")->default_val(513);
  invc->add_option("--out", inv.out, "output directory")->required();
  invc->add_option("--base", inv.base, "unperturbed spectrum file (enables Lambda and multiplicity repair)");
  invc->add_option("--reference", inv.reference, "problem config to compare against");
  invc->add_option("--epsilon-max", inv.epsilon_max, "Lambda above which a locality warning is issued")
      ->default_val(1e-2);
  invc->add_option("--regularization", inv.regularization, "Tikhonov parameter")->default_val(0.0);
  invc->add_flag("--forward-check", inv.forward_check, "evaluate Delta of the recovered problem");

  fs::path config;
  auto* stab = app.add_subcommand("stability", "Run the Lambda stability experiment");
  stab->add_option("--config", config, "experiment config file")->required();

  fs::path cauchy;
  std::optional<fs::path> cauchy2;
  int count = 16;
  auto* diag = app.add_subcommand("diagnose", "Zeros, residues and perturbation metrics of Cauchy data");
  diag->add_option("--cauchy", cauchy, "Cauchy data file")->required();
  diag->add_option("--cauchy2", cauchy2, "second Cauchy data file for Xi and Omega");
  diag->add_option("--count", count, "number of zeros z_n")->default_val(16);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*fwd) return cmd_forward(problem, num_eigs, fwd_out);
    if (*invc) return cmd_invert(inv);
    if (*stab) return cmd_stability(config);
    if (*diag) return cmd_diagnose(cauchy, cauchy2, count);
  } catch (const ValidationError& e) {
    return report_error(e, 2);
  } catch (const Error& e) {
    return report_error(e, 1);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
