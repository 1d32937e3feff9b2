#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "rrinv/detail/argument_principle.hpp"
#include "rrinv/forward/ivp.hpp"
#include "rrinv/problem.hpp"

namespace rrinv {

struct SpectrumOptions {
  double margin = -1.0;        // strip half-height H; negative selects |c| + 2 + ||q||_L1
  double cluster_tol = -1.0;   // negative selects 1e-6 pi/a
  double close_tol = 1e-8;     // contours closer than this (in |Delta/Delta'|) are moved
  int max_retries = 5;
};

namespace detail {

/// Sorts by real part, breaking near-ties by imaginary part.
inline void sort_eigenvalues(std::vector<cplx>& z, double tie_tol) {
  std::sort(z.begin(), z.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
  for (std::size_t i = 1; i < z.size(); ++i) {
    for (std::size_t k = i; k > 0; --k) {
      cplx &x = z[k - 1], &y = z[k];
      if (std::abs(x.real() - y.real()) < tie_tol && y.imag() < x.imag()) {
        std::swap(x, y);
      } else {
        break;
      }
    }
  }
}

/// Assigns consecutive indices of Z_j (before removing n = 1) to sorted zeros
/// and removes the n = 1 entry.
inline Spectrum index_zeros(int j, int n_max, const std::vector<cplx>& sorted, const std::vector<int>& mult) {
  std::vector<int> slots;
  for (int n = -n_max; n <= n_max; ++n) {
    if (!(j == 1 && n == 0)) slots.push_back(n);
  }
  if (slots.size() != sorted.size()) throw NumericError("zero count does not match the index range");
  std::vector<SpectrumEntry> e;
  for (std::size_t i = 0; i < sorted.size(); ++i) e.push_back({slots[i], sorted[i], mult[i]});
  auto it = std::find_if(e.begin(), e.end(), [](const SpectrumEntry& s) { return s.n == 1; });
  if (it != e.end()) {
    cplx v = it->value;
    e.erase(it);
    for (auto& s : e) {
      if (s.value == v) --s.multiplicity;
    }
  }
  return Spectrum(j, std::move(e));
}

}  // namespace detail

/// All zeros of Delta in the strip |Im lambda - c| <= H, |Re lambda| < R,
/// with R halfway between the n_max-th eigenvalue and the next one. The
/// result carries 2 n_max (j=0) or 2 n_max - 1 (j=1) entries after the
/// excluded index n = 1 is dropped.
inline Spectrum compute_spectrum(const RobinReggeProblem& problem, int n_max, const SpectrumOptions& opt = {}) {
  problem.validate();
  if (n_max < 1) throw ValidationError("n_max must be positive");
  const ForwardSolver solver(problem);
  const detail::JetFunction f = [&solver](cplx z) { return solver.delta_jet(z); };

  const double a = problem.a;
  const int j = problem.branch();
  const double c = problem.c();
  double q_l1 = 0.0;
  {
    std::vector<cplx> absq(problem.q.size());
    for (std::size_t i = 0; i < absq.size(); ++i) absq[i] = std::abs(problem.q[i]);
    q_l1 = trapezoid(absq, problem.q.grid().spacing()).real();
  }
  const double H = opt.margin > 0.0 ? opt.margin : std::abs(c) + 2.0 + q_l1;
  const double y0 = c - H, y1 = c + H;
  const double R = (j == 0 ? n_max : n_max - 0.5) * pi / a;

  detail::LocatorOptions lopt;
  lopt.cluster_tol = opt.cluster_tol > 0.0 ? opt.cluster_tol : 1e-6 * pi / a;
  lopt.phase.close_tol = opt.close_tol;

  // Vertical cut lines a quarter period away from the free zeros.
  std::vector<double> xs{-R};
  for (int k = -4 * n_max - 4; k <= 4 * n_max + 4; ++k) {
    double x = (0.5 * k + 0.25) * pi / a;
    if (x > -R + 1e-9 && x < R - 1e-9) xs.push_back(x);
  }
  xs.push_back(R);

  const double shift = 0.1 * pi / (4.0 * a);
  std::vector<double> vphase(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::optional<double> ph;
    for (int attempt = 0; attempt <= opt.max_retries && !ph; ++attempt) {
      double x = xs[i] + (i + 1 == xs.size() ? 1.0 : -1.0) * shift * attempt;
      ph = detail::phase_change(f, {x, y0}, {x, y1}, lopt.phase);
      if (ph) xs[i] = x;
    }
    if (!ph) throw NumericError("eigenvalue search: contour stays too close to a zero near Re = " + std::to_string(xs[i]));
    vphase[i] = *ph;
  }

  std::vector<detail::LocatedZero> zeros;
  int total = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    auto bottom = detail::phase_change(f, {xs[i], y0}, {xs[i + 1], y0}, lopt.phase);
    auto top = detail::phase_change(f, {xs[i + 1], y1}, {xs[i], y1}, lopt.phase);
    if (!bottom || !top) throw NumericError("eigenvalue search: zero on the strip boundary; increase the margin");
    auto count = detail::phase_to_count(*bottom + vphase[i + 1] + *top - vphase[i]);
    if (!count) throw NumericError("eigenvalue search: non-integer winding number");
    total += *count;
    auto found = detail::locate_zeros(f, {{xs[i], y0}, {xs[i + 1], y1}}, *count, lopt);
    zeros.insert(zeros.end(), found.begin(), found.end());
  }

  const int expected = j == 0 ? 2 * n_max + 1 : 2 * n_max;
  if (total != expected) {
    throw NumericError("eigenvalue search found " + std::to_string(total) + " zeros, expected " +
                       std::to_string(expected) + "; widen the strip margin");
  }

  std::vector<cplx> values;
  std::vector<int> mult;
  std::vector<cplx> centers;
  for (const auto& z : zeros) centers.push_back(z.z);
  detail::sort_eigenvalues(centers, 1e-7 * pi / a);
  for (cplx zc : centers) {
    auto it = std::find_if(zeros.begin(), zeros.end(), [&](const auto& z) { return z.z == zc; });
    for (int r = 0; r < it->multiplicity; ++r) {
      values.push_back(zc);
      mult.push_back(it->multiplicity);
    }
  }
  return detail::index_zeros(j, n_max, values, mult);
}

}  // namespace rrinv
