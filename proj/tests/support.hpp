#pragma once

#include <cmath>

#include "rrinv/core.hpp"
#include "rrinv/problem.hpp"

namespace rrinv::testing {

inline ComplexSignal sine_potential(double a, std::size_t n_points, cplx amplitude) {
  return ComplexSignal::sample(Grid::half(a, n_points),
                               [&](double x) { return amplitude * std::sin(pi * x / a); });
}

/// q(x) = (1 + 0.5i) sin(pi x / a), h = 0.2 - 0.1i.
inline RobinReggeProblem smooth_problem(double alpha = 3.0, cplx beta = 0.1, std::size_t n_points = 513,
                                        double a = 1.0) {
  return {a, sine_potential(a, n_points, {1.0, 0.5}), {0.2, -0.1}, alpha, beta};
}

inline RobinReggeProblem free_problem(double alpha, double a = 1.0, std::size_t n_points = 513, cplx h = 0.0,
                                      cplx beta = 0.0) {
  return {a, ComplexSignal::zeros(Grid::half(a, n_points)), h, alpha, beta};
}

inline double rel_l2(const ComplexSignal& x, const ComplexSignal& ref) { return l2_norm(x - ref) / l2_norm(ref); }

}  // namespace rrinv::testing
