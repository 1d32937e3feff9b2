#pragma once

// Recovery of (q, h) from Cauchy data by fixed-point iteration on the
// Goursat problem marched backward from the edge x = a.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rrinv/cauchy/data.hpp"
#include "rrinv/core.hpp"
#include "rrinv/error.hpp"
#include "rrinv/forward/goursat.hpp"

namespace rrinv {

/// The iteration grew for several consecutive steps. Carries the change
/// history ||q^{k+1} - q^k||.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::vector<double> history)
      : NumericError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// max_iter reached without meeting the tolerance.
class NonConvergenceError : public NumericError {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : NumericError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }
  double last_change() const { return history_.empty() ? 0.0 : history_.back(); }

 private:
  std::vector<double> history_;
};

struct ReconstructionOptions {
  int max_iter = 100;
  double tol = 1e-10;
  int divergence_window = 3;
};

struct Reconstruction {
  ComplexSignal q;
  cplx h;
  int iterations = 0;
  std::vector<double> history;
};

namespace detail {

/// Slope of the least-squares quadratic through five consecutive samples
/// (window shifted inward at the ends), evaluated at each node.
inline std::vector<cplx> lsq_derivative5(std::span<const cplx> D, double d) {
  const std::size_t m = D.size();
  if (m < 5) throw DimensionError("derivative needs at least five samples");
  // weights[off] for the node at position off = k - lo inside the window
  std::array<std::array<double, 5>, 5> weights{};
  for (int off = 0; off < 5; ++off) {
    Eigen::Matrix<double, 5, 3> V;
    for (int r = 0; r < 5; ++r) {
      double x = (r - off) * d;
      V(r, 0) = 1.0;
      V(r, 1) = x;
      V(r, 2) = x * x;
    }
    Eigen::Matrix<double, 3, 5> pinv = (V.transpose() * V).inverse() * V.transpose();
    for (int r = 0; r < 5; ++r) weights[off][r] = pinv(1, r);
  }
  std::vector<cplx> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t lo = k < 2 ? 0 : std::min(k - 2, m - 5);
    const auto& w = weights[k - lo];
    cplx s = 0.0;
    for (int r = 0; r < 5; ++r) s += w[r] * D[lo + r];
    out[k] = s;
  }
  return out;
}

/// Fills anti-diagonals s = S-2 .. 0 of H from rows S and S-1.
inline void march_backward(Lattice& H, std::span<const cplx> qf, double delta) {
  const std::size_t S = H.size();
  for (std::size_t s = S - 1; s-- > 0;) {
    const cplx e = delta * delta * qf[s + 1] / 4.0;
    for (std::size_t i = 0; i <= s; ++i) {
      const std::size_t j = s - i;
      H(i, j) = cell_backward(H(i, j + 1), H(i + 1, j), H(i + 1, j + 1), e);
    }
  }
}

/// Rows S (x = a) and S-1 (x = a - delta) of the lattice from the Cauchy
/// data. Row S-1 comes from a second-order Taylor step in x using
/// K_xx = K_tt + q(a) K on the edge.
inline void seed_edge_rows(Lattice& H, const CauchyData& data, cplx q_at_a) {
  const Grid& g = data.grid();
  const std::size_t n = g.size() - 1, S = H.size();
  const double dx = g.spacing(), delta = 0.5 * dx;

  auto Ka = extend_from_half(data.edge_values(), 1.0);
  auto K2 = extend_from_half(data.K2, 1.0);
  std::vector<cplx> K1p(n + 1);
  {
    const auto& k1 = data.K1;
    if (n >= 2) {
      K1p[0] = (-3.0 * k1[0] + 4.0 * k1[1] - k1[2]) / (2.0 * dx);
      K1p[n] = (3.0 * k1[n] - 4.0 * k1[n - 1] + k1[n - 2]) / (2.0 * dx);
      for (std::size_t k = 1; k < n; ++k) K1p[k] = (k1[k + 1] - k1[k - 1]) / (2.0 * dx);
    }
  }
  auto Ktt = extend_from_half(ComplexSignal(g, std::move(K1p)), 1.0);

  const double lo = -g.a();
  auto mid = [&](const ComplexSignal& s) { return refine_by_two(s.values(), lo, dx); };
  auto KaF = mid(Ka), K2F = mid(K2), KttF = mid(Ktt);
  for (std::size_t i = 0; i <= S; ++i) H(i, S - i) = KaF[2 * i];
  for (std::size_t i = 0; i < S; ++i) {
    const std::size_t f = 2 * i + 1;
    H(i, S - 1 - i) = KaF[f] - delta * K2F[f] + 0.5 * delta * delta * (KttF[f] + q_at_a * KaF[f]);
  }
}

}  // namespace detail

/// Kernel on the whole triangle from the Cauchy data and a given potential.
inline GoursatKernel backward_kernel(const CauchyData& data, const ComplexSignal& q) {
  if (!(q.grid() == data.grid())) throw DimensionError("potential and Cauchy data use different grids");
  const std::size_t S = 2 * (q.size() - 1);
  auto qf = detail::refine_potential(q.values());
  detail::Lattice H(S);
  detail::seed_edge_rows(H, data, q[q.size() - 1]);
  detail::march_backward(H, qf, 0.5 * q.grid().spacing());
  return GoursatKernel(q.grid(), std::move(qf), std::move(H));
}

/// Fixed-point iteration q^{k+1} = 2 d/dx K^k(x,x), where K^k is the kernel
/// marched backward from the data with potential q^k, starting from q = 0.
inline Reconstruction reconstruct_from_cauchy(const CauchyData& data, double a,
                                              const ReconstructionOptions& opt = {}) {
  const Grid& g = data.grid();
  if (std::abs(g.a() - a) > 1e-12 * a) throw DimensionError("Cauchy data grid does not match the interval length");
  if (g.size() < 5) throw DimensionError("Cauchy data needs at least five nodes");
  if (opt.max_iter < 1) throw ValidationError("max_iter must be positive");
  const std::size_t n = g.size() - 1;
  const double delta = 0.5 * g.spacing();

  ComplexSignal q = ComplexSignal::zeros(g);
  std::vector<double> history;
  int rising = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    auto kernel = backward_kernel(data, q);
    const auto& H = kernel.lattice();
    std::vector<cplx> D(2 * n + 1);
    for (std::size_t s = 0; s <= 2 * n; ++s) D[s] = H(s, 0);
    auto dD = detail::lsq_derivative5(D, delta);
    std::vector<cplx> qn(n + 1);
    for (std::size_t k = 0; k <= n; ++k) qn[k] = 2.0 * dD[2 * k];
    for (cplx v : qn) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw DivergenceError("reconstruction produced non-finite values at iteration " + std::to_string(it),
                              history);
      }
    }
    ComplexSignal next(g, std::move(qn));
    const double change = l2_norm(next - q);
    rising = !history.empty() && change > history.back() ? rising + 1 : 0;
    history.push_back(change);
    q = std::move(next);
    if (change < opt.tol) {
      cplx h = data.omega - 0.5 * integrate(q);
      return {std::move(q), h, it, std::move(history)};
    }
    if (rising >= opt.divergence_window) {
      throw DivergenceError("reconstruction diverging: change grew for " + std::to_string(rising) +
                                " consecutive iterations (last " + std::to_string(change) + ")",
                            history);
    }
  }
  throw NonConvergenceError("reconstruction did not converge in " + std::to_string(opt.max_iter) +
                                " iterations; last change " + std::to_string(history.back()),
                            history);
}

}  // namespace rrinv
