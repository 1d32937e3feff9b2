#pragma once

// Hermite interpolation in Newton form and divided differences of
// lambda -> exp(i lambda t) that stay accurate for nearly coincident nodes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "rrinv/core.hpp"

namespace rrinv {

inline constexpr int max_hermite_nodes = 8;
inline constexpr double max_hermite_diameter = 0.5;

/// p(z) = c_0 + (z - z_0)(c_1 + (z - z_1)(c_2 + ...)).
class NewtonPolynomial {
 public:
  NewtonPolynomial(std::vector<cplx> nodes, std::vector<cplx> coeffs) : z_(std::move(nodes)), c_(std::move(coeffs)) {
    if (z_.size() != c_.size() || c_.empty()) throw DimensionError("Newton form needs one coefficient per node");
  }

  const std::vector<cplx>& nodes() const { return z_; }
  const std::vector<cplx>& coefficients() const { return c_; }
  std::size_t degree() const { return c_.size() - 1; }

  /// p^{(nu)}(x).
  cplx derivative(cplx x, int nu) const {
    auto w = derivative_weights(z_, x, nu);
    cplx s = 0.0;
    for (std::size_t k = 0; k < c_.size(); ++k) s += w[k] * c_[k];
    return s;
  }
  cplx operator()(cplx x) const { return derivative(x, 0); }

  /// w_k with p^{(nu)}(x) = sum_k w_k c_k; w_k = nu! [u^nu] prod_{i<k} (u + x - z_i).
  static std::vector<cplx> derivative_weights(const std::vector<cplx>& nodes, cplx x, int nu) {
    const std::size_t m = nodes.size();
    std::vector<cplx> w(m, cplx{});
    std::vector<cplx> poly{1.0};  // coefficients in u = z - x
    double fact = 1.0;
    for (int r = 2; r <= nu; ++r) fact *= r;
    for (std::size_t k = 0; k < m; ++k) {
      if (static_cast<std::size_t>(nu) < poly.size()) w[k] = fact * poly[static_cast<std::size_t>(nu)];
      if (k + 1 == m) break;
      std::vector<cplx> next(poly.size() + 1, cplx{});
      const cplx d = x - nodes[k];
      for (std::size_t r = 0; r < poly.size(); ++r) {
        next[r + 1] += poly[r];
        next[r] += d * poly[r];
      }
      poly = std::move(next);
    }
    return w;
  }

 private:
  std::vector<cplx> z_;
  std::vector<cplx> c_;
};

namespace detail {

inline void check_hermite_nodes(const std::vector<cplx>& z) {
  if (z.empty()) throw DimensionError("Hermite interpolation needs at least one node");
  if (static_cast<int>(z.size()) > max_hermite_nodes) {
    throw PreconditionError("Hermite interpolation supports at most " + std::to_string(max_hermite_nodes) + " nodes");
  }
  double diam = 0.0;
  for (cplx x : z) {
    for (cplx y : z) diam = std::max(diam, std::abs(x - y));
  }
  if (diam >= max_hermite_diameter) {
    throw PreconditionError("Hermite nodes span a set of diameter " + std::to_string(diam) + " >= 1/2");
  }
}

/// Reorders nodes so that exactly repeated values are adjacent.
inline std::vector<cplx> group_repeated(std::vector<cplx> z) {
  std::vector<cplx> out;
  std::vector<bool> used(z.size(), false);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (used[i]) continue;
    for (std::size_t k = i; k < z.size(); ++k) {
      if (!used[k] && z[k] == z[i]) {
        out.push_back(z[k]);
        used[k] = true;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Hermite interpolant of degree <= m-1 through the nodes (repeated nodes
/// prescribe derivatives). `data(z, k)` must return the k-th derivative of
/// the target at z.
inline NewtonPolynomial hermite_interpolate(const std::vector<cplx>& nodes,
                                            const std::function<cplx(cplx, int)>& data) {
  detail::check_hermite_nodes(nodes);
  const std::vector<cplx> z = detail::group_repeated(nodes);
  const std::size_t m = z.size();
  // table[i] holds DD[z_i .. z_{i+k}] after pass k.
  std::vector<cplx> table(m);
  for (std::size_t i = 0; i < m; ++i) table[i] = data(z[i], 0);
  std::vector<cplx> coeffs{table[0]};
  double fact = 1.0;
  for (std::size_t k = 1; k < m; ++k) {
    fact *= static_cast<double>(k);
    for (std::size_t i = 0; i + k < m; ++i) {
      if (z[i + k] == z[i]) {
        table[i] = data(z[i], static_cast<int>(k)) / fact;
      } else {
        table[i] = (table[i + 1] - table[i]) / (z[i + k] - z[i]);
      }
    }
    coeffs.push_back(table[0]);
  }
  return {z, coeffs};
}

/// Divided differences of lambda -> exp(i lambda t) over the prefixes
/// z_0..z_k of a node list, evaluated through the Taylor expansion about a
/// centre c:  DD_k(t) = e^{ict} sum_{r>=k} (it)^r / r! h_{r-k}(z_0-c, .., z_k-c),
/// with h_j the complete homogeneous symmetric polynomials. No differences
/// of nearby exponentials are formed, so confluent and split nodes are
/// handled alike.
class ExpDividedDifferences {
 public:
  ExpDividedDifferences(std::vector<cplx> nodes, cplx center, double t_max)
      : z_(std::move(nodes)), c_(center) {
    const std::size_t m = z_.size();
    double rho = 0.0;
    for (cplx z : z_) rho = std::max(rho, std::abs(z - c_));
    terms_ = m + 40 + static_cast<std::size_t>(std::ceil(std::exp(1.0) * std::abs(t_max) * (1.0 + rho)));
    // hom_[p][j] = h_j(y_0..y_p)
    hom_.assign(m, std::vector<cplx>(terms_ + 1, cplx{}));
    for (std::size_t p = 0; p < m; ++p) {
      const cplx y = z_[p] - c_;
      hom_[p][0] = 1.0;
      for (std::size_t j = 1; j <= terms_; ++j) {
        cplx prev = p > 0 ? hom_[p - 1][j] : cplx{};
        hom_[p][j] = prev + y * hom_[p][j - 1];
      }
    }
  }

  const std::vector<cplx>& nodes() const { return z_; }
  cplx center() const { return c_; }
  std::size_t size() const { return z_.size(); }

  /// DD_0(t) .. DD_{m-1}(t).
  std::vector<cplx> evaluate(double t) const {
    const std::size_t m = z_.size();
    std::vector<cplx> out(m);
    if (m == 1 && z_[0] == c_) {
      out[0] = std::exp(I * c_ * t);
      return out;
    }
    std::vector<cplx> pw(terms_ + m + 1);  // (it)^r / r!
    pw[0] = 1.0;
    for (std::size_t r = 1; r < pw.size(); ++r) pw[r] = pw[r - 1] * (I * t) / static_cast<double>(r);
    const cplx e = std::exp(I * c_ * t);
    for (std::size_t k = 0; k < m; ++k) {
      cplx s = 0.0;
      for (std::size_t j = 0; j <= terms_; ++j) s += pw[k + j] * hom_[k][j];
      out[k] = e * s;
    }
    return out;
  }

 private:
  std::vector<cplx> z_;
  cplx c_;
  std::size_t terms_ = 0;
  std::vector<std::vector<cplx>> hom_;
};

}  // namespace rrinv
