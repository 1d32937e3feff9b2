#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rrinv/core.hpp"

namespace rrinv::detail {

/// Legendre polynomials P_0..P_{n} at x, by the three-term recurrence.
inline std::vector<double> legendre_values(int n, double x) {
  std::vector<double> p(static_cast<std::size_t>(n) + 1);
  p[0] = 1.0;
  if (n >= 1) p[1] = x;
  for (int k = 1; k < n; ++k) {
    p[k + 1] = ((2.0 * k + 1.0) * x * p[k] - k * p[k - 1]) / (k + 1.0);
  }
  return p;
}

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1,1] (Newton on P_n from Chebyshev guesses).
inline QuadratureRule gauss_legendre(int n) {
  QuadratureRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < n; ++k) {
        double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[static_cast<std::size_t>(i)] = x;
    r.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

/// Composite 16-point Gauss-Legendre rule on [lo,hi] with panels short enough
/// that oscillations up to angular frequency kappa are resolved to rounding.
inline QuadratureRule composite_gauss(double lo, double hi, double kappa) {
  static const QuadratureRule base = gauss_legendre(16);
  const double len = hi - lo;
  auto panels = static_cast<std::size_t>(std::ceil(std::max(1.0, kappa) * len / 8.0));
  panels = std::max<std::size_t>(panels, 4);
  const double w = len / static_cast<double>(panels);
  QuadratureRule r;
  r.nodes.reserve(panels * 16);
  r.weights.reserve(panels * 16);
  for (std::size_t p = 0; p < panels; ++p) {
    double mid = lo + (static_cast<double>(p) + 0.5) * w;
    for (std::size_t k = 0; k < base.nodes.size(); ++k) {
      r.nodes.push_back(mid + 0.5 * w * base.nodes[k]);
      r.weights.push_back(0.5 * w * base.weights[k]);
    }
  }
  return r;
}

}  // namespace rrinv::detail
