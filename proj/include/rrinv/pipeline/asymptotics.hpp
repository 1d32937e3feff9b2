#pragma once

// Constants alpha, j, P and omega read off the eigenvalue asymptotics
//   lambda_n = (|n| - (j+1)/2) pi/a sgn n + i c + P/n + gamma_n/n.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "rrinv/core.hpp"
#include "rrinv/error.hpp"
#include "rrinv/problem.hpp"

namespace rrinv {

inline constexpr int min_fit_points_per_side = 16;

/// Raised when the real parts follow neither the integer nor the
/// half-integer lattice, or the fitted constants leave the admissible range.
class FitError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {

/// Median of |d - round(d)| with d = Re(lambda) a / pi; 0.5 for half-integers.
inline int detect_branch(const IndexedSequence& tail, double a) {
  std::vector<double> frac;
  for (const auto& e : tail) {
    double d = e.value.real() * a / pi;
    frac.push_back(std::abs(d - std::round(d)));
  }
  std::nth_element(frac.begin(), frac.begin() + static_cast<long>(frac.size() / 2), frac.end());
  return frac[frac.size() / 2] > 0.25 ? 0 : 1;
}

}  // namespace detail

/// Least-squares fit of lambda_n - leading_term(j,n) against
/// [1, 1/n, 1/n^2 and 1/n^3 separately for each sign of n] over the simple
/// tail |n| >= max(n0, N/4). The imaginary part of the constant column is c,
/// the 1/n column is P.
inline AsymptoticFit asymptotic_fit(const IndexedSequence& seq, double a, cplx beta, int tail_start = 1) {
  if (!(a > 0.0)) throw ValidationError("interval length must be positive");
  int N = 0;
  for (const auto& e : seq) N = std::max(N, std::abs(e.n));
  const int lo = std::max({tail_start, (N + 3) / 4, 2});
  IndexedSequence tail;
  int pos = 0, neg = 0;
  for (const auto& e : seq) {
    if (std::abs(e.n) >= lo) {
      tail.push_back(e);
      (e.n > 0 ? pos : neg)++;
    }
  }
  if (pos < min_fit_points_per_side || neg < min_fit_points_per_side) {
    throw PreconditionError("asymptotic fit needs at least " + std::to_string(min_fit_points_per_side) +
                            " tail eigenvalues on each side (|n| >= " + std::to_string(lo) + "), got " +
                            std::to_string(neg) + " and " + std::to_string(pos));
  }

  AsymptoticFit fit;
  fit.j_hat = detail::detect_branch(tail, a);
  const auto m = static_cast<Eigen::Index>(tail.size());
  Eigen::MatrixXcd A(m, 6);
  Eigen::VectorXcd b(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const int n = tail[static_cast<std::size_t>(r)].n;
    const double x = 1.0 / n;
    A.row(r) << 1.0, x, n > 0 ? x * x : 0.0, n < 0 ? x * x : 0.0, n > 0 ? x * x * x : 0.0, n < 0 ? x * x * x : 0.0;
    b[r] = tail[static_cast<std::size_t>(r)].value - leading_term(fit.j_hat, n, a);
  }
  Eigen::VectorXcd coef = A.colPivHouseholderQr().solve(b);
  const double max_res = (A * coef - b).cwiseAbs().maxCoeff();
  const double lattice_tol = 0.05 * pi / a;
  if (max_res > lattice_tol || std::abs(coef[0].real()) > lattice_tol) {
    throw FitError("eigenvalue real parts do not follow the branch-" + std::to_string(fit.j_hat) +
                   " lattice (max fit residual " + std::to_string(max_res) + ")");
  }

  fit.c_hat = coef[0].imag();
  fit.P_hat = coef[1];
  const double E = std::exp(2.0 * a * fit.c_hat);
  if (!(fit.c_hat > 0.0) || !std::isfinite(E) || E - 1.0 < 1e-12) {
    throw FitError("fitted Im(lambda) = " + std::to_string(fit.c_hat) + " gives no admissible alpha");
  }
  fit.alpha_hat = fit.j_hat == 0 ? (E + 1.0) / (E - 1.0) : (E - 1.0) / (E + 1.0);
  fit.omega_hat = pi * fit.P_hat + beta / (fit.alpha_hat * fit.alpha_hat - 1.0);

  double s2 = 0.0;
  for (const auto& e : seq) {
    if (e.n == 0) continue;
    cplx g = static_cast<double>(e.n) * (e.value - leading_term(fit.j_hat, e.n, a) - I * fit.c_hat) - fit.P_hat;
    fit.residuals[e.n] = g;
    s2 += std::norm(g);
  }
  fit.residual_l2 = std::sqrt(s2);
  return fit;
}

inline AsymptoticFit asymptotic_fit(const Spectrum& spectrum, double a, cplx beta) {
  return asymptotic_fit(spectrum.values(), a, beta, spectrum.tail_index());
}

}  // namespace rrinv
