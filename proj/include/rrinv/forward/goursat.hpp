#pragma once

// Transmutation kernel K(x,t) on the triangle |t| <= x <= a.
//
// In characteristic coordinates xi = (x+t)/2, eta = (x-t)/2 the kernel
// H(xi,eta) = K(xi+eta, xi-eta) solves H_{xi eta} = q(xi+eta) H with
// H(xi,0) = H(0,xi) = h + (1/2) int_0^xi q. The lattice step in xi and eta is
// delta = dx/2, so lattice node (i,j) sits at x = (i+j) delta, t = (i-j) delta
// and every potential-grid point (x_k, t_m) is the node (k+m, k-m).

#include <cmath>
#include <span>
#include <vector>

#include "rrinv/cauchy/data.hpp"
#include "rrinv/core.hpp"
#include "rrinv/forward/ivp.hpp"
#include "rrinv/problem.hpp"

namespace rrinv {

namespace detail {

/// Potential on the doubled grid (original nodes plus cubic midpoints).
inline std::vector<cplx> refine_potential(std::span<const cplx> q) {
  const std::size_t n = q.size() - 1;
  std::vector<cplx> out(2 * n + 1);
  for (std::size_t k = 0; k <= n; ++k) out[2 * k] = q[k];
  if (n < 3) {
    for (std::size_t k = 0; k < n; ++k) out[2 * k + 1] = 0.5 * (q[k] + q[k + 1]);
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    cplx s;
    if (k == 0) {
      s = (5.0 * q[0] + 15.0 * q[1] - 5.0 * q[2] + q[3]) / 16.0;
    } else if (k == n - 1) {
      s = (q[n - 3] - 5.0 * q[n - 2] + 15.0 * q[n - 1] + 5.0 * q[n]) / 16.0;
    } else {
      s = (-q[k - 1] + 9.0 * q[k] + 9.0 * q[k + 1] - q[k + 2]) / 16.0;
    }
    out[2 * k + 1] = s;
  }
  return out;
}

/// Square (S+1)x(S+1) storage; only nodes with i + j <= S are used.
class Lattice {
 public:
  explicit Lattice(std::size_t S) : S_(S), data_((S + 1) * (S + 1), cplx{}) {}
  std::size_t size() const { return S_; }
  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * (S_ + 1) + j]; }
  cplx operator()(std::size_t i, std::size_t j) const { return data_[i * (S_ + 1) + j]; }

 private:
  std::size_t S_;
  std::vector<cplx> data_;
};

/// Discrete cell relation: with e = delta^2 q_c / 4 at the cell centre,
/// H11 - H10 - H01 + H00 = e (H00 + H01 + H10 + H11).
inline cplx cell_forward(cplx h00, cplx h01, cplx h10, cplx e) {
  return (h01 + h10 - h00 + e * (h01 + h10 + h00)) / (1.0 - e);
}
inline cplx cell_backward(cplx h01, cplx h10, cplx h11, cplx e) {
  return ((1.0 + e) * (h01 + h10) - (1.0 - e) * h11) / (1.0 - e);
}

/// K_x(a,t_m), K_t(a,t_m) for m = 0..n from the characteristic identities
/// H_xi(i,j) = q(i delta)/2 + int_0^{eta} q H d eta' (and symmetrically).
inline std::pair<std::vector<cplx>, std::vector<cplx>> edge_derivatives(const Lattice& H, std::span<const cplx> qf,
                                                                        double delta) {
  const std::size_t S = H.size(), n = S / 2;
  std::vector<cplx> Kx(n + 1), Kt(n + 1), buf;
  for (std::size_t m = 0; m <= n; ++m) {
    const std::size_t i = n + m, j = n - m;
    buf.resize(j + 1);
    for (std::size_t r = 0; r <= j; ++r) buf[r] = qf[i + r] * H(i, r);
    cplx Hxi = 0.5 * qf[i] + trapezoid(buf, delta);
    buf.resize(i + 1);
    for (std::size_t s = 0; s <= i; ++s) buf[s] = qf[s + j] * H(s, j);
    cplx Heta = 0.5 * qf[j] + trapezoid(buf, delta);
    Kx[m] = 0.5 * (Hxi + Heta);
    Kt[m] = 0.5 * (Hxi - Heta);
  }
  return {Kx, Kt};
}

}  // namespace detail

class GoursatKernel {
 public:
  GoursatKernel(Grid grid, std::vector<cplx> fine_q, detail::Lattice H)
      : grid_(grid), qf_(std::move(fine_q)), H_(std::move(H)) {}

  const Grid& grid() const { return grid_; }
  double a() const { return grid_.a(); }
  cplx omega() const { return H_(H_.size(), 0); }
  cplx h() const { return H_(0, 0); }

  /// K(x_k, t_m) on the potential grid, |m| <= k.
  cplx K(std::size_t k, long m) const {
    std::size_t am = static_cast<std::size_t>(std::labs(m));
    if (am > k || k >= grid_.size()) throw DimensionError("kernel node outside the triangle");
    return H_(k + am, k - am);
  }

  /// K(x,x) on the potential grid.
  ComplexSignal diagonal() const {
    std::vector<cplx> v(grid_.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = H_(2 * k, 0);
    return ComplexSignal(grid_, std::move(v));
  }

  /// K(a,t) for t in [0,a].
  ComplexSignal edge() const {
    const std::size_t n = grid_.size() - 1;
    std::vector<cplx> v(n + 1);
    for (std::size_t m = 0; m <= n; ++m) v[m] = H_(n + m, n - m);
    return ComplexSignal(grid_, std::move(v));
  }

  const detail::Lattice& lattice() const { return H_; }
  const std::vector<cplx>& fine_potential() const { return qf_; }
  double lattice_step() const { return 0.5 * grid_.spacing(); }

 private:
  Grid grid_;
  std::vector<cplx> qf_;
  detail::Lattice H_;
};

/// Solves the Goursat problem by marching the discrete cell relation along
/// anti-diagonals i + j = s. The scheme is explicit, so there is no sweep to
/// converge.
inline GoursatKernel goursat_kernel(const RobinReggeProblem& problem) {
  problem.validate();
  const Grid& g = problem.q.grid();
  const std::size_t n = g.size() - 1, S = 2 * n;
  const double delta = 0.5 * g.spacing();
  auto qf = detail::refine_potential(problem.q.values());
  auto Q = cumulative_integral4(qf, delta);
  detail::Lattice H(S);
  for (std::size_t s = 0; s <= S; ++s) {
    cplx v = problem.h + 0.5 * Q[s];
    H(s, 0) = v;
    H(0, s) = v;
  }
  for (std::size_t s = 2; s <= S; ++s) {
    const cplx e = delta * delta * qf[s - 1] / 4.0;
    for (std::size_t i = 1; i < s; ++i) {
      const std::size_t j = s - i;
      H(i, j) = detail::cell_forward(H(i - 1, j - 1), H(i - 1, j), H(i, j - 1), e);
    }
  }
  for (std::size_t i = 0; i <= S; ++i) {
    for (std::size_t j = 0; i + j <= S; ++j) {
      if (!std::isfinite(std::abs(H(i, j)))) throw NumericError("Goursat kernel overflow");
    }
  }
  return GoursatKernel(g, std::move(qf), std::move(H));
}

/// Cauchy data K1 = K_t(a,.), K2 = K_x(a,.) and omega = K(a,a).
inline CauchyData extract_cauchy_data(const GoursatKernel& kernel) {
  auto [Kx, Kt] = detail::edge_derivatives(kernel.lattice(), kernel.fine_potential(), kernel.lattice_step());
  return {ComplexSignal(kernel.grid(), std::move(Kt)), ComplexSignal(kernel.grid(), std::move(Kx)), kernel.omega()};
}

/// The functions M (even) and N (odd) on [-a,a] whose conjugates are
/// conj M(t) = K_x(a,|t|) + beta K(a,|t|) and conj N(t) = -K_t(a,t).
inline std::pair<ComplexSignal, ComplexSignal> boundary_functions(const CauchyData& data, cplx beta) {
  auto Ka = data.edge_values();
  std::vector<cplx> m(data.grid().size()), nn(data.grid().size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = std::conj(data.K2[i] + beta * Ka[i]);
    nn[i] = std::conj(-data.K1[i]);
  }
  return {extend_from_half(ComplexSignal(data.grid(), std::move(m)), 1.0),
          extend_from_half(ComplexSignal(data.grid(), std::move(nn)), -1.0)};
}

/// Delta(lambda) = f(lambda) + int_{-a}^{a} conj(U(t)) e^{i lambda t} dt with
/// U = (M + alpha N)/2, i.e. f(lambda) + (U, e^{i lambda t}).
inline cplx delta_from_cauchy(const CauchyData& data, double alpha, cplx beta, cplx lambda) {
  auto [M, N] = boundary_functions(data, beta);
  std::vector<cplx> v(M.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * std::conj(M[i] + alpha * N[i]);
  const Grid& g = M.grid();
  return f_background(data.a(), alpha, beta, data.omega, lambda, 0) + filon_exp(v, g.lo(), g.spacing(), lambda);
}

}  // namespace rrinv
