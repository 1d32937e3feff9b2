#pragma once

// Boundary traces phi(a,lambda), phi'(a,lambda), the characteristic function
// and the background function f.
//
// The initial value problem is integrated with the fourth-order Magnus
// method on the potential grid. Each step is the exact exponential of a
// traceless 2x2 matrix, so the free equation is propagated exactly and the
// error does not grow with |lambda| for smooth q.

#include <array>
#include <cmath>
#include <vector>

#include "rrinv/core.hpp"
#include "rrinv/detail/argument_principle.hpp"
#include "rrinv/problem.hpp"

namespace rrinv {

struct BoundaryTrace {
  cplx lambda;
  cplx phi;        // phi(a, lambda)
  cplx phi_prime;  // phi'(a, lambda)
};

/// Traces together with their lambda-derivatives.
struct TraceJet {
  BoundaryTrace trace;
  cplx dphi;
  cplx dphi_prime;
};

namespace detail {

/// cosh(r), sinh(r)/r and (cosh r - sinh(r)/r)/r^2 as functions of sigma = r^2.
struct ExpCoefficients {
  cplx C, S, D;
};

inline ExpCoefficients exp_coefficients(cplx sigma) {
  if (std::abs(sigma) < 0.1) {
    cplx C = 0.0, S = 0.0, D = 0.0, p = 1.0;
    double f2k = 1.0;  // (2k)!
    for (int k = 0; k < 14; ++k) {
      double f2k1 = f2k * (2 * k + 1);
      double f2k2 = f2k1 * (2 * k + 2);
      double f2k3 = f2k2 * (2 * k + 3);
      C += p / f2k;
      S += p / f2k1;
      D += p * (1.0 / f2k2 - 1.0 / f2k3);
      p *= sigma;
      f2k = f2k2;
    }
    return {C, S, D};
  }
  cplx r = std::sqrt(sigma);
  cplx C = std::cosh(r);
  cplx S = std::sinh(r) / r;
  return {C, S, (C - S) / sigma};
}

using Mat2 = std::array<cplx, 4>;  // row-major

inline std::array<cplx, 2> apply(const Mat2& m, const std::array<cplx, 2>& v) {
  return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

}  // namespace detail

/// Precomputes potential samples at the Gauss points of every step and
/// evaluates traces for any number of lambda values.
class ForwardSolver {
 public:
  explicit ForwardSolver(const RobinReggeProblem& problem) : p_(problem) {
    p_.validate();
    const Grid& g = p_.q.grid();
    h_ = g.spacing();
    CubicInterpolant qi(p_.q);
    const double off = h_ * std::sqrt(3.0) / 6.0;
    steps_.resize(g.size() - 1);
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
      double mid = g.node(k) + 0.5 * h_;
      cplx q1 = qi(mid - off), q2 = qi(mid + off);
      steps_[k] = {std::sqrt(3.0) * h_ * h_ / 12.0 * (q1 - q2), 0.5 * (q1 + q2)};
    }
  }

  const RobinReggeProblem& problem() const { return p_; }

  BoundaryTrace trace(cplx lambda) const {
    std::array<cplx, 2> v{1.0, p_.h};
    const cplx l2 = lambda * lambda;
    for (const Step& s : steps_) {
      cplx pbar = s.qbar - l2;
      cplx sigma = s.kappa * s.kappa + h_ * h_ * pbar;
      auto e = detail::exp_coefficients(sigma);
      detail::Mat2 E{e.C + e.S * s.kappa, e.S * h_, e.S * h_ * pbar, e.C - e.S * s.kappa};
      v = detail::apply(E, v);
    }
    check_finite(v[0], v[1], lambda);
    return {lambda, v[0], v[1]};
  }

  TraceJet trace_jet(cplx lambda) const {
    std::array<cplx, 2> v{1.0, p_.h};
    std::array<cplx, 2> dv{0.0, 0.0};
    const cplx l2 = lambda * lambda;
    const cplx dsigma = -2.0 * lambda * h_ * h_;
    for (const Step& s : steps_) {
      cplx pbar = s.qbar - l2;
      cplx sigma = s.kappa * s.kappa + h_ * h_ * pbar;
      auto e = detail::exp_coefficients(sigma);
      detail::Mat2 Om{s.kappa, h_, h_ * pbar, -s.kappa};
      detail::Mat2 E{e.C + e.S * Om[0], e.S * Om[1], e.S * Om[2], e.C + e.S * Om[3]};
      // d(e^Omega) = (S/2) dsigma I + (D/2) dsigma Omega + S dOmega,
      // with dOmega = [[0,0],[-2 lambda h, 0]].
      cplx a0 = 0.5 * e.S * dsigma, a1 = 0.5 * e.D * dsigma;
      detail::Mat2 dE{a0 + a1 * Om[0], a1 * Om[1], a1 * Om[2] - e.S * 2.0 * lambda * h_, a0 + a1 * Om[3]};
      auto nv = detail::apply(E, v);
      auto t1 = detail::apply(dE, v);
      auto t2 = detail::apply(E, dv);
      dv = {t1[0] + t2[0], t1[1] + t2[1]};
      v = nv;
    }
    check_finite(v[0], v[1], lambda);
    check_finite(dv[0], dv[1], lambda);
    return {{lambda, v[0], v[1]}, dv[0], dv[1]};
  }

  /// Delta(lambda) = phi'(a) + (i lambda alpha + beta) phi(a).
  cplx delta(cplx lambda) const {
    auto t = trace(lambda);
    return t.phi_prime + (I * lambda * p_.alpha + p_.beta) * t.phi;
  }

  detail::Jet delta_jet(cplx lambda) const {
    auto t = trace_jet(lambda);
    cplx b = I * lambda * p_.alpha + p_.beta;
    return {t.trace.phi_prime + b * t.trace.phi, t.dphi_prime + I * p_.alpha * t.trace.phi + b * t.dphi};
  }

 private:
  struct Step {
    cplx kappa;  // commutator term of the Magnus expansion
    cplx qbar;   // mean of q over the two Gauss points
  };

  static void check_finite(cplx x, cplx y, cplx lambda) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()) || !std::isfinite(y.real()) ||
        !std::isfinite(y.imag())) {
      throw NumericError("overflow integrating the initial value problem at lambda = " +
                         std::to_string(lambda.real()) + "+" + std::to_string(lambda.imag()) + "i");
    }
  }

  RobinReggeProblem p_;
  double h_ = 0.0;
  std::vector<Step> steps_;
};

inline BoundaryTrace solve_ivp(const RobinReggeProblem& problem, cplx lambda) {
  return ForwardSolver(problem).trace(lambda);
}

inline cplx char_delta(const RobinReggeProblem& problem, cplx lambda) {
  return ForwardSolver(problem).delta(lambda);
}

namespace detail {

/// d^k/dx^k of sin(x) and cos(x), i.e. sin(x + k pi/2) and cos(x + k pi/2).
inline cplx sin_shift(cplx x, int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return std::sin(x);
    case 1: return std::cos(x);
    case 2: return -std::sin(x);
    default: return -std::cos(x);
  }
}
inline cplx cos_shift(cplx x, int k) { return sin_shift(x, k + 1); }

}  // namespace detail

inline constexpr int max_background_order = 4;

/// nu-th lambda-derivative of
///   f(lambda) = -lambda (sin(lambda a) - i alpha cos(lambda a))
///               + (omega + beta) cos(lambda a) + i alpha omega sin(lambda a).
inline cplx f_background(double a, double alpha, cplx beta, cplx omega, cplx lambda, int nu) {
  if (nu < 0 || nu > max_background_order) {
    throw PreconditionError("f_background supports derivative orders 0.." + std::to_string(max_background_order) +
                            ", got " + std::to_string(nu));
  }
  const cplx x = lambda * a;
  auto s = [&](int k) { return k < 0 ? cplx{} : std::pow(a, k) * detail::sin_shift(x, k); };
  auto c = [&](int k) { return k < 0 ? cplx{} : std::pow(a, k) * detail::cos_shift(x, k); };
  const double n = nu;
  return -(lambda * s(nu) + n * s(nu - 1)) + I * alpha * (lambda * c(nu) + n * c(nu - 1)) +
         (omega + beta) * c(nu) + I * alpha * omega * s(nu);
}

}  // namespace rrinv
