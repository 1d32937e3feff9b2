#pragma once

// Spectrum -> potential: asymptotic constants, repaired moment system,
// even/odd data, Cauchy data on the edge x = a, and the Goursat fixed point.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rrinv/cauchy/data.hpp"
#include "rrinv/cauchy/reconstruct.hpp"
#include "rrinv/core.hpp"
#include "rrinv/detail/gauss.hpp"
#include "rrinv/error.hpp"
#include "rrinv/forward/ivp.hpp"
#include "rrinv/pipeline/asymptotics.hpp"
#include "rrinv/pipeline/perturb.hpp"
#include "rrinv/problem.hpp"
#include "rrinv/riesz/moment.hpp"

namespace rrinv {

struct InversionOptions {
  std::size_t grid_points = 513;  // nodes of the output grid on [0,a]
  double regularization = 0.0;
  bool auto_regularize = true;     // retry with 1e-10 when the moment matrix is ill-conditioned
  double fallback_regularization = 1e-10;
  ReconstructionOptions reconstruction{200, 1e-11, 3};
  double epsilon_max = 1e-2;       // Lambda above this attaches a locality warning
  bool forward_check = false;      // also evaluate the characteristic function of (q~, h~)
};

struct ResidualEntry {
  int n;
  double value;
};

struct InversionReport {
  ComplexSignal q;
  cplx h;
  AsymptoticFit fit;
  std::optional<double> Lambda;
  std::vector<ResidualEntry> delta_residuals;    // |Delta~(lambda~_n)| from the moment solution
  double delta_scale = 0.0;                      // max |f(lambda~_n)| + 1
  std::vector<ResidualEntry> forward_residuals;  // |Delta(lambda~_n)| for the recovered problem
  double moment_residual = 0.0;
  double gram_condition = 0.0;
  double regularization_used = 0.0;
  int iterations = 0;
  std::vector<double> iteration_history;
  CauchyData cauchy;
  ComplexSignal M;
  ComplexSignal N;
  std::vector<std::string> warnings;

  double max_delta_residual() const {
    double m = 0.0;
    for (const auto& r : delta_residuals) m = std::max(m, r.value);
    return m;
  }
};

/// Cauchy data from the even/odd functions, with conj M = K_x + beta K(a,.),
/// conj N = -K_t and K(a,t) = omega - int_t^a K_t:
///   K_x(a,t) = conj M(t) - beta int_t^a conj N - beta omega,  K_t(a,t) = -conj N(t).
inline CauchyData cauchy_from_MN(const ComplexSignal& M, const ComplexSignal& N, cplx beta, cplx omega) {
  auto Mh = restrict_to_half(M).conj();
  auto Nh = restrict_to_half(N).conj();
  const Grid& g = Mh.grid();
  const std::size_t n = g.size();
  std::vector<cplx> rev(Nh.values().rbegin(), Nh.values().rend());
  auto cum = cumulative_trapezoid(rev, g.spacing());  // cum[k] = int_{a - k dx}^{a}
  std::vector<cplx> kx(n), kt(n);
  for (std::size_t i = 0; i < n; ++i) {
    kx[i] = Mh[i] - beta * cum[n - 1 - i] - beta * omega;
    kt[i] = -Nh[i];
  }
  return {ComplexSignal(g, std::move(kt)), ComplexSignal(g, std::move(kx)), omega};
}

namespace detail {

inline IndexedSequence truncate(const IndexedSequence& s, int N) {
  IndexedSequence out;
  for (const auto& e : s) {
    if (std::abs(e.n) <= N) out.push_back(e);
  }
  return out;
}

/// Runs f, tagging any library error with the stage name.
template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (Error& e) {
    e.set_stage(stage);
    throw;
  }
}

}  // namespace detail

/// Recovers (q, h) from an indexed (possibly perturbed) spectrum. With a base
/// spectrum the asymptotic constants are fitted on it, multiple base values
/// are repaired by Hermite interpolation, and Lambda is reported; without it
/// only numerically coincident values are treated as multiple.
inline InversionReport invert_spectrum(const IndexedSequence& perturbed, const std::optional<Spectrum>& base, double a,
                                       cplx beta, int N, const InversionOptions& opt = {}) {
  if (!(a > 0.0)) throw ValidationError("interval length must be positive");
  if (N < 1) throw ValidationError("truncation N must be positive");
  if (opt.grid_points < 5) throw ValidationError("grid needs at least five points");

  const IndexedSequence pert = detail::truncate(perturbed, N);
  AsymptoticFit fit = detail::staged("asymptotic fit", [&] {
    return base ? asymptotic_fit(*base, a, beta) : asymptotic_fit(pert, a, beta);
  });
  const int j = fit.j_hat;

  auto clustered = detail::staged("clustering", [&] {
    Spectrum ref;
    if (base) {
      if (base->branch() != j) throw FitError("fitted branch disagrees with the base spectrum");
      std::vector<SpectrumEntry> kept;
      for (const auto& e : base->entries()) {
        if (std::abs(e.n) <= N) kept.push_back(e);
      }
      ref = Spectrum(j, std::move(kept), base->coincidence_tol());
    } else {
      ref = Spectrum::from_values(j, pert);
    }
    if (N < ref.tail_index() + 8) {
      throw PreconditionError("truncation N = " + std::to_string(N) + " must be at least n0 + 8 = " +
                              std::to_string(ref.tail_index() + 8));
    }
    return cluster_spectrum(ref, pert);
  });
  auto sys = detail::staged("moment system", [&] {
    return build_repaired_system(clustered, a, fit.alpha_hat, beta, fit.omega_hat);
  });

  const Grid sym = Grid::symmetric(a, 2 * opt.grid_points - 1);
  double reg = opt.regularization;
  auto sol = detail::staged("moment solve", [&] {
    try {
      return solve_moment_system(sys, sym, reg);
    } catch (const NumericError&) {
      if (!opt.auto_regularize || reg != 0.0) throw;
      reg = opt.fallback_regularization;
      return solve_moment_system(sys, sym, reg);
    }
  });

  auto [M, Nn] = assemble_MN(sol.U, fit.alpha_hat);
  CauchyData data = detail::staged("cauchy data", [&] { return cauchy_from_MN(M, Nn, beta, fit.omega_hat); });
  auto rec = detail::staged("reconstruction", [&] { return reconstruct_from_cauchy(data, a, opt.reconstruction); });

  InversionReport rep{rec.q, rec.h, fit, std::nullopt, {}, 0.0, {}, sol.max_residual, sol.gram_condition, reg,
                      rec.iterations, rec.history, data, M, Nn, {}};
  if (reg != opt.regularization) {
    rep.warnings.push_back("moment matrix ill-conditioned; solved with regularization " + std::to_string(reg));
  }

  // Delta~(lambda) = f(lambda) + int conj(U~) e^{i lambda t}, evaluated with the
  // analytic trial-space representation of U~.
  double lam_max = 0.0;
  for (const auto& e : pert) lam_max = std::max(lam_max, std::abs(e.value));
  const auto rule = detail::composite_gauss(-a, a, lam_max + sol.space->max_frequency() + 1.0);
  std::vector<cplx> ubar(rule.nodes.size());
  for (std::size_t k = 0; k < ubar.size(); ++k) ubar[k] = std::conj(sol(rule.nodes[k]));
  for (const auto& e : pert) {
    cplx s = f_background(a, fit.alpha_hat, beta, fit.omega_hat, e.value, 0);
    rep.delta_scale = std::max(rep.delta_scale, std::abs(s) + 1.0);
    for (std::size_t k = 0; k < ubar.size(); ++k) s += rule.weights[k] * ubar[k] * std::exp(I * e.value * rule.nodes[k]);
    rep.delta_residuals.push_back({e.n, std::abs(s)});
  }

  if (opt.forward_check) {
    detail::staged("forward check", [&] {
      RobinReggeProblem p{a, rec.q, rec.h, fit.alpha_hat, beta};
      ForwardSolver solver(p);
      for (const auto& e : pert) rep.forward_residuals.push_back({e.n, std::abs(solver.delta(e.value))});
    });
  }

  if (base) {
    rep.Lambda = lambda_metric(clustered.base.values(), pert);
    if (*rep.Lambda > opt.epsilon_max) {
      rep.warnings.push_back("Lambda = " + std::to_string(*rep.Lambda) + " exceeds epsilon_max = " +
                             std::to_string(opt.epsilon_max) + "; outside the verified locality regime");
    }
  }
  return rep;
}

}  // namespace rrinv
