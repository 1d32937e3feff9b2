#pragma once

// Zero counting and location for analytic functions by the argument
// principle. The winding number is obtained by tracking arg f continuously
// along each edge with adaptive steps rather than by quadrature of f'/f.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "rrinv/core.hpp"

namespace rrinv::detail {

struct Jet {
  cplx value;
  cplx deriv;
};
using JetFunction = std::function<Jet(cplx)>;

struct PhaseOptions {
  double close_tol = 1e-8;  // reject contours where |f/f'| drops below this
  double min_step = 1e-14;
  std::size_t max_evaluations = 400000;
};

inline double newton_radius(const Jet& j) {
  double d = std::abs(j.deriv);
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(j.value) / d;
}

/// Continuous change of arg f along the segment z0 -> z1. Empty when the
/// segment passes too close to a zero of f.
inline std::optional<double> phase_change(const JetFunction& f, cplx z0, cplx z1, const PhaseOptions& opt = {}) {
  struct Node {
    cplx z;
    Jet j;
  };
  Node left{z0, f(z0)};
  if (newton_radius(left.j) < opt.close_tol) return std::nullopt;
  std::vector<Node> pending{{z1, f(z1)}};
  if (newton_radius(pending.back().j) < opt.close_tol) return std::nullopt;
  std::size_t evals = 2;
  double total = 0.0;
  while (!pending.empty()) {
    const Node& right = pending.back();
    double dphi = std::arg(right.j.value / left.j.value);
    double len = std::abs(right.z - left.z);
    double reach = 0.7 * std::min(newton_radius(left.j), newton_radius(right.j));
    if (std::abs(dphi) < pi / 4.0 && len < reach) {
      total += dphi;
      left = right;
      pending.pop_back();
      continue;
    }
    if (len < opt.min_step || ++evals > opt.max_evaluations) return std::nullopt;
    cplx zm = 0.5 * (left.z + right.z);
    Node mid{zm, f(zm)};
    if (newton_radius(mid.j) < opt.close_tol) return std::nullopt;
    pending.push_back(mid);
  }
  return total;
}

struct Rect {
  cplx lo;  // lower-left corner
  cplx hi;  // upper-right corner

  double width() const { return hi.real() - lo.real(); }
  double height() const { return hi.imag() - lo.imag(); }
  double diameter() const { return std::abs(hi - lo); }
  cplx center() const { return 0.5 * (lo + hi); }
  bool contains(cplx z, double slack = 0.0) const {
    return z.real() >= lo.real() - slack && z.real() <= hi.real() + slack && z.imag() >= lo.imag() - slack &&
           z.imag() <= hi.imag() + slack;
  }
};

/// Turns a total phase into an integer winding number, rejecting results
/// that are not close to a multiple of 2 pi.
inline std::optional<int> phase_to_count(double total) {
  double w = total / (2.0 * pi);
  double r = std::round(w);
  if (std::abs(w - r) > 0.1 || r < 0) return std::nullopt;
  return static_cast<int>(r);
}

/// Number of zeros inside the rectangle, counted with multiplicity.
inline std::optional<int> count_zeros(const JetFunction& f, const Rect& r, const PhaseOptions& opt = {}) {
  const cplx a = r.lo, b{r.hi.real(), r.lo.imag()}, c = r.hi, d{r.lo.real(), r.hi.imag()};
  double total = 0.0;
  for (auto [p, q] : std::array<std::pair<cplx, cplx>, 4>{{{a, b}, {b, c}, {c, d}, {d, a}}}) {
    auto ph = phase_change(f, p, q, opt);
    if (!ph) return std::nullopt;
    total += *ph;
  }
  return phase_to_count(total);
}

/// Number of zeros inside the circle |z - center| < radius.
inline std::optional<int> count_zeros_in_disk(const JetFunction& f, cplx center, double radius, int sides = 64,
                                              const PhaseOptions& opt = {}) {
  double total = 0.0;
  for (int k = 0; k < sides; ++k) {
    cplx p = center + std::polar(radius, 2.0 * pi * k / sides);
    cplx q = center + std::polar(radius, 2.0 * pi * (k + 1) / sides);
    auto ph = phase_change(f, p, q, opt);
    if (!ph) return std::nullopt;
    total += *ph;
  }
  // The polygon is inscribed; callers keep zeros away from the rim.
  return phase_to_count(total);
}

struct LocatedZero {
  cplx z;
  int multiplicity = 1;
};

struct LocatorOptions {
  double cluster_tol = 1e-6;
  int newton_max = 50;
  PhaseOptions phase;
};

namespace impl {

inline std::optional<cplx> newton(const JetFunction& f, cplx z, int m, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    Jet j = f(z);
    if (j.value == cplx{}) return z;
    if (j.deriv == cplx{}) return std::nullopt;
    cplx dz = static_cast<double>(m) * j.value / j.deriv;
    z -= dz;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
    if (std::abs(dz) <= 1e-14 * (1.0 + std::abs(z))) return z;
  }
  return std::nullopt;
}

inline void locate(const JetFunction& f, const Rect& r, int count, const LocatorOptions& opt,
                   std::vector<LocatedZero>& out, int depth) {
  if (count <= 0) return;
  if (depth > 200) throw NumericError("zero location did not terminate");
  const double slack = 1e-12 * (1.0 + std::abs(r.center()));
  if (count == 1) {
    if (auto z = newton(f, r.center(), 1, opt.newton_max); z && r.contains(*z, slack)) {
      out.push_back({*z, 1});
      return;
    }
  }
  if (r.diameter() < opt.cluster_tol) {
    cplx z = r.center();
    if (count > 1) {
      if (auto zz = newton(f, z, count, 8); zz && r.contains(*zz, opt.cluster_tol)) z = *zz;
    }
    out.push_back({z, count});
    return;
  }
  static constexpr std::array<double, 6> fractions{0.5, 0.45, 0.55, 0.4, 0.6, 0.35};
  const bool split_re = r.width() >= r.height();
  for (double fr : fractions) {
    Rect first = r, second = r;
    if (split_re) {
      double x = r.lo.real() + fr * r.width();
      first.hi = {x, r.hi.imag()};
      second.lo = {x, r.lo.imag()};
    } else {
      double y = r.lo.imag() + fr * r.height();
      first.hi = {r.hi.real(), y};
      second.lo = {r.lo.real(), y};
    }
    auto c1 = count_zeros(f, first, opt.phase);
    if (!c1) continue;
    auto c2 = count_zeros(f, second, opt.phase);
    if (!c2 || *c1 + *c2 != count) continue;
    locate(f, first, *c1, opt, out, depth + 1);
    locate(f, second, *c2, opt, out, depth + 1);
    return;
  }
  throw NumericError("could not subdivide a rectangle around a zero cluster near " +
                     std::to_string(r.center().real()) + "+" + std::to_string(r.center().imag()) + "i");
}

}  // namespace impl

/// Locates the `count` zeros (with multiplicity) known to lie inside `r`.
inline std::vector<LocatedZero> locate_zeros(const JetFunction& f, const Rect& r, int count,
                                             const LocatorOptions& opt = {}) {
  std::vector<LocatedZero> out;
  impl::locate(f, r, count, opt, out, 0);
  return out;
}

}  // namespace rrinv::detail
