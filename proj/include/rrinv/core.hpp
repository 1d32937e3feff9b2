#pragma once

// Uniform grids, sampled complex functions and the quadrature helpers shared
// by every other module.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rrinv/error.hpp"

namespace rrinv {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

enum class GridKind { half, symmetric };

/// Uniform grid on [0,a] (half) or [-a,a] (symmetric). Symmetric grids have an
/// odd number of nodes so that t=0 is a node and t -> -t is an index map.
class Grid {
 public:
  static Grid half(double a, std::size_t n_points) { return Grid(a, n_points, GridKind::half); }

  static Grid symmetric(double a, std::size_t n_points) {
    if (n_points % 2 == 0) {
      throw DimensionError("symmetric grid needs an odd number of nodes, got " +
                           std::to_string(n_points));
    }
    return Grid(a, n_points, GridKind::symmetric);
  }

  double a() const { return a_; }
  std::size_t size() const { return n_; }
  GridKind kind() const { return kind_; }
  double lo() const { return kind_ == GridKind::half ? 0.0 : -a_; }
  double hi() const { return a_; }
  double span() const { return hi() - lo(); }
  double spacing() const { return span() / static_cast<double>(n_ - 1); }
  double node(std::size_t i) const { return lo() + spacing() * static_cast<double>(i); }

  /// Index of t=0 on a symmetric grid.
  std::size_t center() const { return (n_ - 1) / 2; }

  /// Half grid on [0,a] with the same spacing as this symmetric grid.
  Grid half_part() const { return Grid::half(a_, center() + 1); }
  /// Symmetric grid on [-a,a] with the same spacing as this half grid.
  Grid symmetric_extension() const { return Grid::symmetric(a_, 2 * n_ - 1); }

  bool operator==(const Grid& other) const = default;

 private:
  Grid(double a, std::size_t n, GridKind kind) : a_(a), n_(n), kind_(kind) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DimensionError("grid length must be positive");
    if (n < 2) throw DimensionError("grid needs at least two nodes");
  }

  double a_;
  std::size_t n_;
  GridKind kind_;
};

/// Complex samples of a function, one per grid node.
class ComplexSignal {
 public:
  ComplexSignal(Grid grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw DimensionError("signal has " + std::to_string(values_.size()) + " values for " +
                           std::to_string(grid_.size()) + " nodes");
    }
    for (const cplx& v : values_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw NumericError("signal contains a non-finite value");
      }
    }
  }

  static ComplexSignal zeros(const Grid& grid) {
    return ComplexSignal(grid, std::vector<cplx>(grid.size(), cplx{}));
  }

  template <class F>
  static ComplexSignal sample(const Grid& grid, F&& f) {
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = cplx(f(grid.node(i)));
    return ComplexSignal(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  cplx operator[](std::size_t i) const { return values_[i]; }

  ComplexSignal conj() const {
    std::vector<cplx> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), [](cplx z) { return std::conj(z); });
    return ComplexSignal(grid_, std::move(v));
  }

  friend ComplexSignal operator+(const ComplexSignal& x, const ComplexSignal& y) {
    return combine(x, y, [](cplx a, cplx b) { return a + b; });
  }
  friend ComplexSignal operator-(const ComplexSignal& x, const ComplexSignal& y) {
    return combine(x, y, [](cplx a, cplx b) { return a - b; });
  }
  friend ComplexSignal operator*(cplx s, const ComplexSignal& x) {
    std::vector<cplx> v(x.values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * x.values_[i];
    return ComplexSignal(x.grid_, std::move(v));
  }

 private:
  template <class Op>
  static ComplexSignal combine(const ComplexSignal& x, const ComplexSignal& y, Op op) {
    if (!(x.grid_ == y.grid_)) throw DimensionError("signals live on different grids");
    std::vector<cplx> v(x.values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(x.values_[i], y.values_[i]);
    return ComplexSignal(x.grid_, std::move(v));
  }

  Grid grid_;
  std::vector<cplx> values_;
};

// ---------------------------------------------------------------------------
// Quadrature on uniform samples.

inline cplx trapezoid(std::span<const cplx> f, double h) {
  if (f.size() < 2) return {};
  cplx s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

/// F[k] = integral of f from node 0 to node k, composite trapezoid.
inline std::vector<cplx> cumulative_trapezoid(std::span<const cplx> f, double h) {
  std::vector<cplx> out(f.size(), cplx{});
  for (std::size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
  return out;
}

/// Fourth-order cumulative integral (exact for cubics), falls back to the
/// trapezoid rule below four samples.
inline std::vector<cplx> cumulative_integral4(std::span<const cplx> f, double h) {
  const std::size_t n = f.size();
  if (n < 4) return cumulative_trapezoid(f, h);
  std::vector<cplx> out(n, cplx{});
  const double c = h / 24.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    cplx piece;
    if (k == 0) {
      piece = c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    } else if (k + 2 == n) {
      piece = c * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]);
    } else {
      piece = c * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]);
    }
    out[k + 1] = out[k] + piece;
  }
  return out;
}

inline cplx integrate(const ComplexSignal& u) { return trapezoid(u.values(), u.grid().spacing()); }

/// (g1, g2) = integral of conj(g1) * g2, conjugating the first argument.
inline cplx inner_product(const ComplexSignal& g1, const ComplexSignal& g2) {
  if (!(g1.grid() == g2.grid())) throw DimensionError("inner_product: grid mismatch");
  std::vector<cplx> prod(g1.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = std::conj(g1[i]) * g2[i];
  return trapezoid(prod, g1.grid().spacing());
}

inline double l2_norm(const ComplexSignal& u) {
  std::vector<cplx> sq(u.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(u[i]);
  return std::sqrt(std::max(0.0, trapezoid(sq, u.grid().spacing()).real()));
}

/// Raw parity parts: even(t) = u(t) + u(-t), odd(t) = u(t) - u(-t).
inline std::pair<ComplexSignal, ComplexSignal> parity_split(const ComplexSignal& u) {
  if (u.grid().kind() != GridKind::symmetric) {
    throw DimensionError("parity_split needs a symmetric grid");
  }
  const std::size_t n = u.size();
  std::vector<cplx> ev(n), od(n);
  for (std::size_t i = 0; i < n; ++i) {
    ev[i] = u[i] + u[n - 1 - i];
    od[i] = u[i] - u[n - 1 - i];
  }
  return {ComplexSignal(u.grid(), std::move(ev)), ComplexSignal(u.grid(), std::move(od))};
}

/// Restriction of a symmetric signal to [0,a].
inline ComplexSignal restrict_to_half(const ComplexSignal& u) {
  if (u.grid().kind() != GridKind::symmetric) throw DimensionError("restrict_to_half needs a symmetric grid");
  const std::size_t c = u.grid().center();
  return ComplexSignal(u.grid().half_part(), {u.values().begin() + static_cast<std::ptrdiff_t>(c), u.values().end()});
}

/// Extension of a [0,a] signal to [-a,a]: sign=+1 even, sign=-1 odd.
inline ComplexSignal extend_from_half(const ComplexSignal& u, double sign) {
  if (u.grid().kind() != GridKind::half) throw DimensionError("extend_from_half needs a half grid");
  const std::size_t n = u.size();
  std::vector<cplx> v(2 * n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    v[n - 1 + k] = u[k];
    v[n - 1 - k] = sign * u[k];
  }
  return ComplexSignal(u.grid().symmetric_extension(), std::move(v));
}

/// Four-point Lagrange interpolation of uniform samples, stencil clamped at
/// the ends. Exact for cubics.
class CubicInterpolant {
 public:
  CubicInterpolant(std::vector<cplx> values, double x0, double h)
      : v_(std::move(values)), x0_(x0), h_(h) {
    if (v_.size() < 2) throw DimensionError("interpolant needs two samples");
  }
  explicit CubicInterpolant(const ComplexSignal& s)
      : CubicInterpolant({s.values().begin(), s.values().end()}, s.grid().lo(), s.grid().spacing()) {}

  cplx operator()(double x) const {
    const std::size_t n = v_.size();
    if (n < 4) {
      double s = std::clamp((x - x0_) / h_, 0.0, static_cast<double>(n - 1));
      std::size_t k = std::min(static_cast<std::size_t>(s), n - 2);
      double f = s - static_cast<double>(k);
      return (1.0 - f) * v_[k] + f * v_[k + 1];
    }
    double s = (x - x0_) / h_;
    long k = static_cast<long>(std::floor(s)) - 1;
    k = std::clamp(k, 0L, static_cast<long>(n) - 4);
    double u = s - static_cast<double>(k);  // stencil nodes at u = 0,1,2,3
    double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    auto kk = static_cast<std::size_t>(k);
    return l0 * v_[kk] + l1 * v_[kk + 1] + l2 * v_[kk + 2] + l3 * v_[kk + 3];
  }

 private:
  std::vector<cplx> v_;
  double x0_;
  double h_;
};

/// Samples on a grid refined by two (the original nodes plus all midpoints).
inline std::vector<cplx> refine_by_two(std::span<const cplx> v, double x0, double h) {
  CubicInterpolant interp({v.begin(), v.end()}, x0, h);
  std::vector<cplx> out(2 * v.size() - 1);
  for (std::size_t k = 0; k < v.size(); ++k) out[2 * k] = v[k];
  for (std::size_t k = 0; k + 1 < v.size(); ++k) out[2 * k + 1] = interp(x0 + (static_cast<double>(k) + 0.5) * h);
  return out;
}

/// Integral of g(t) e^{i lambda t} over a uniform grid starting at x0, with g
/// taken piecewise linear between samples and the exponential integrated
/// exactly. The error is O(h^2 g'') independent of lambda.
inline cplx filon_exp(std::span<const cplx> g, double x0, double h, cplx lambda) {
  if (g.size() < 2) return {};
  const cplx th = lambda * h;
  cplx A, B;  // int_0^1 (1-u) e^{i th u} du and int_0^1 u e^{i th u} du
  if (std::abs(th) < 0.5) {
    cplx p = 1.0;
    double fact = 1.0;
    A = 0.0;
    B = 0.0;
    for (int k = 0; k < 24; ++k) {
      A += p / (fact * (k + 1.0) * (k + 2.0));
      B += p / (fact * (k + 2.0));
      p *= I * th;
      fact *= (k + 1.0);
    }
  } else {
    cplx e = std::exp(I * th);
    B = e / (I * th) + (e - 1.0) / (th * th);
    A = (e - 1.0) / (I * th) - B;
  }
  const cplx back = B * std::exp(-I * th);
  const std::size_t n = g.size();
  cplx sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cplx w = (k + 1 < n ? A : cplx{}) + (k > 0 ? back : cplx{});
    sum += w * g[k] * std::exp(I * lambda * (x0 + h * static_cast<double>(k)));
  }
  return h * sum;
}

/// sin(lambda t)/lambda, by series when |lambda t| is tiny.
inline cplx sin_over(cplx lambda, double t) {
  cplx z = lambda * t;
  if (std::abs(z) < 1e-4) {
    cplx z2 = z * z;
    return t * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
  }
  return std::sin(z) / lambda;
}

}  // namespace rrinv
