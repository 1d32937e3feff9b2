#pragma once

// Functions eta_1, eta_2 built from Cauchy data, the zeros z_n of eta_2 in
// z = lambda^2, the Weyl function M = eta_1/eta_2 with its residues, and the
// perturbation metrics Xi and Omega.

#include <algorithm>
#include <cmath>
#include <vector>

#include "rrinv/cauchy/data.hpp"
#include "rrinv/core.hpp"
#include "rrinv/detail/argument_principle.hpp"
#include "rrinv/error.hpp"

namespace rrinv {

struct EtaValues {
  cplx eta1;
  cplx eta2;
};

namespace detail {

inline void check_length(const CauchyData& data, double a) {
  if (std::abs(data.a() - a) > 1e-12 * a) throw DimensionError("Cauchy data grid does not match the interval length");
}

/// int_0^a g(t) cos(lambda t) dt and int_0^a g(t) sin(lambda t) dt.
inline std::pair<cplx, cplx> cos_sin_moments(const ComplexSignal& g, cplx lambda) {
  const double h = g.grid().spacing();
  cplx ep = filon_exp(g.values(), 0.0, h, lambda);
  cplx em = filon_exp(g.values(), 0.0, h, -lambda);
  return {0.5 * (ep + em), (ep - em) / (2.0 * I)};
}

/// int_0^a g(t) sin(lambda t)/lambda dt, accurate as lambda -> 0.
inline cplx sin_over_moment(const ComplexSignal& g, cplx lambda) {
  if (std::abs(lambda) * g.grid().a() < 1e-3) {
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = g[i] * sin_over(lambda, g.grid().node(i));
    return trapezoid(v, g.grid().spacing());
  }
  return cos_sin_moments(g, lambda).second / lambda;
}

}  // namespace detail

/// eta_1 = cos(lambda a) + omega sin(lambda a)/lambda - int K1 sin(lambda t)/lambda,
/// eta_2 = -lambda sin(lambda a) + omega cos(lambda a) + int K2 cos(lambda t).
inline EtaValues eta_functions(const CauchyData& data, double a, cplx lambda) {
  detail::check_length(data, a);
  cplx e1 = std::cos(lambda * a) + data.omega * sin_over(lambda, a) - detail::sin_over_moment(data.K1, lambda);
  cplx e2 = -lambda * std::sin(lambda * a) + data.omega * std::cos(lambda * a) +
            detail::cos_sin_moments(data.K2, lambda).first;
  return {e1, e2};
}

/// d eta_2 / dz with z = lambda^2.
inline cplx eta2_z_derivative(const CauchyData& data, double a, cplx lambda) {
  detail::check_length(data, a);
  std::vector<cplx> tk(data.K2.size());
  for (std::size_t i = 0; i < tk.size(); ++i) tk[i] = data.grid().node(i) * data.K2[i];
  ComplexSignal tK2(data.grid(), std::move(tk));
  return -0.5 * sin_over(lambda, a) - 0.5 * a * std::cos(lambda * a) - 0.5 * data.omega * a * sin_over(lambda, a) -
         0.5 * detail::sin_over_moment(tK2, lambda);
}

/// Principal square root with z = 0 mapped to 0 and Re rho >= 0.
inline cplx rho_of(cplx z) { return z == cplx{} ? cplx{} : std::sqrt(z); }

struct WeylSample {
  cplx z;
  cplx M;
};

struct WeylDiagnostics {
  std::vector<cplx> zeros;         // z_0, z_1, ..., repeated by multiplicity
  std::vector<cplx> rho;           // sqrt(z_n)
  std::vector<int> multiplicities; // k_n for each n
  int n1 = 1;
  double gamma0_radius = 0.0;
  std::vector<cplx> residues;      // M_n for every n < zeros.size()
  std::vector<WeylSample> weyl_samples;
};

inline constexpr int weyl_contour_samples = 256;

/// Zeros of eta_2 in the z-plane. The tail zeros are found by Newton in
/// lambda from n pi / a; the head inside a disk by the argument principle.
/// `count` zeros z_0 .. z_{count-1} are returned.
inline WeylDiagnostics eta2_zeros(const CauchyData& data, double a, int count) {
  detail::check_length(data, a);
  if (count < 4) throw ValidationError("eta2_zeros needs count >= 4");
  const double step = pi / a;

  auto lam_newton = [&](cplx lam) -> std::optional<cplx> {
    for (int it = 0; it < 60; ++it) {
      cplx e2 = eta_functions(data, a, lam).eta2;
      cplx d = 2.0 * lam * eta2_z_derivative(data, a, lam);
      if (d == cplx{}) return std::nullopt;
      cplx dl = e2 / d;
      lam -= dl;
      if (std::abs(dl) < 1e-14 * (1.0 + std::abs(lam))) return lam;
    }
    return std::nullopt;
  };
  const detail::JetFunction fz = [&](cplx z) {
    cplx lam = rho_of(z);
    return detail::Jet{eta_functions(data, a, lam).eta2, eta2_z_derivative(data, a, lam)};
  };

  for (int nh = 2; nh < count; nh += 2) {
    // tail: n = nh+1 .. count-1, each in its own annulus
    std::vector<cplx> tail;
    bool ok = true;
    for (int n = nh + 1; n < count && ok; ++n) {
      auto r = lam_newton(cplx(n * step, 0.0));
      if (!r || std::abs(r->real() - n * step) > 0.25 * step) {
        ok = false;
      } else {
        tail.push_back((*r) * (*r));
      }
    }
    if (!ok) continue;
    const double R = std::pow((nh + 0.5) * step, 2);
    auto disk = detail::count_zeros_in_disk(fz, cplx{}, R);
    if (!disk || *disk != nh + 1) continue;
    auto inside = detail::count_zeros(fz, {cplx(-R, -R), cplx(R, R)});
    if (!inside) continue;
    detail::LocatorOptions lopt;
    lopt.cluster_tol = 1e-6 * step * step;
    auto found = detail::locate_zeros(fz, {cplx(-R, -R), cplx(R, R)}, *inside, lopt);
    std::vector<detail::LocatedZero> head;
    int located = 0;
    for (const auto& z : found) {
      if (std::abs(z.z) < R) {
        head.push_back(z);
        located += z.multiplicity;
      }
    }
    if (located != *disk) {
      throw NumericError("eta_2 zero count mismatch: contour gives " + std::to_string(*disk) + ", located " +
                         std::to_string(located));
    }
    std::sort(head.begin(), head.end(), [](const auto& x, const auto& y) { return std::abs(x.z) < std::abs(y.z); });

    WeylDiagnostics d;
    for (const auto& z : head) {
      for (int r = 0; r < z.multiplicity; ++r) {
        d.zeros.push_back(z.z);
        d.multiplicities.push_back(z.multiplicity);
      }
    }
    for (cplx z : tail) {
      d.zeros.push_back(z);
      d.multiplicities.push_back(1);
    }
    for (cplx z : d.zeros) d.rho.push_back(rho_of(z));

    // smallest n1 >= 1 with simple zeros from n1 on and |z_{n1}| > |z_{n1-1}|
    const int m = static_cast<int>(d.zeros.size());
    int n1 = m - 1;
    while (n1 > 1 && d.multiplicities[n1 - 1] == 1 && std::abs(d.zeros[n1 - 1]) > std::abs(d.zeros[n1 - 2]))
      --n1;
    d.n1 = n1;
    d.gamma0_radius = 0.5 * (std::abs(d.zeros[n1]) + std::abs(d.zeros[n1 - 1]));
    return d;
  }
  throw NumericError("could not separate the zeros of eta_2 into head and tail");
}

/// Weyl function M = eta_1/eta_2.
inline cplx weyl_function(const CauchyData& data, double a, cplx z) {
  auto e = eta_functions(data, a, rho_of(z));
  return e.eta1 / e.eta2;
}

/// Fills residues M_n and samples of M on the boundary of Gamma_0.
/// Simple zeros with n >= n1 use eta_1/eta_2'; the head uses small-circle
/// quadrature of (z - z_n)^v M(z) for v = 0 .. k_n - 1.
inline void weyl_residues(const CauchyData& data, double a, WeylDiagnostics& d) {
  detail::check_length(data, a);
  const std::size_t m = d.zeros.size();
  d.residues.assign(m, cplx{});
  for (std::size_t n = static_cast<std::size_t>(d.n1); n < m; ++n) {
    cplx lam = d.rho[n];
    cplx dz = eta2_z_derivative(data, a, lam);
    if (std::abs(dz) < 1e-12) throw NumericError("eta_2' nearly vanishes at z_" + std::to_string(n));
    d.residues[n] = eta_functions(data, a, lam).eta1 / dz;
  }
  std::size_t n = 0;
  while (n < static_cast<std::size_t>(d.n1)) {
    const cplx zn = d.zeros[n];
    const int k = d.multiplicities[n];
    double gap = std::numeric_limits<double>::infinity();
    for (cplx z : d.zeros) {
      if (z != zn) gap = std::min(gap, std::abs(z - zn));
    }
    if (!std::isfinite(gap)) gap = 1.0;
    const double r = 1e-3 * gap;
    constexpr int samples = 64;
    for (int v = 0; v < k; ++v) {
      cplx s = 0.0;
      for (int p = 0; p < samples; ++p) {
        cplx u = std::polar(r, 2.0 * pi * p / samples);
        s += std::pow(u, v) * weyl_function(data, a, zn + u) * u;
      }
      d.residues[n + static_cast<std::size_t>(v)] = s / static_cast<double>(samples);
    }
    n += static_cast<std::size_t>(k);
  }
  d.weyl_samples.clear();
  for (int p = 0; p < weyl_contour_samples; ++p) {
    cplx z = std::polar(d.gamma0_radius, 2.0 * pi * p / weyl_contour_samples);
    d.weyl_samples.push_back({z, weyl_function(data, a, z)});
  }
}

inline WeylDiagnostics weyl_diagnostics(const CauchyData& data, double a, int count) {
  auto d = eta2_zeros(data, a, count);
  weyl_residues(data, a, d);
  return d;
}

struct PerturbationMetrics {
  double Xi = 0.0;
  double Omega = 0.0;
  std::vector<double> xi;  // xi_n for n >= n1, indexed from n1
  int n1 = 1;
};

/// Xi = max(||K1 - K1~||, ||K2 - K2~||).
inline double cauchy_distance(const CauchyData& x, const CauchyData& y) {
  if (!(x.grid() == y.grid())) throw DimensionError("Cauchy data on different grids");
  return std::max(l2_norm(x.K1 - y.K1), l2_norm(x.K2 - y.K2));
}

/// Xi, the sequence xi_n = |rho_n - rho~_n| + |M_n - M~_n| for n >= n1 and
/// Omega = max(sup over the boundary of Gamma_0 of |M - M~|, sqrt(sum (n xi_n)^2)).
/// Gamma_0 and n1 are taken from the unperturbed data.
inline PerturbationMetrics perturbation_metrics(const CauchyData& data, const CauchyData& data_tilde, double a,
                                                int count = 32) {
  PerturbationMetrics pm;
  pm.Xi = cauchy_distance(data, data_tilde);
  auto d = weyl_diagnostics(data, a, count);
  auto dt = eta2_zeros(data_tilde, a, count);
  dt.n1 = d.n1;
  dt.gamma0_radius = d.gamma0_radius;
  weyl_residues(data_tilde, a, dt);
  pm.n1 = d.n1;
  double sup = 0.0;
  for (std::size_t p = 0; p < d.weyl_samples.size(); ++p) {
    sup = std::max(sup, std::abs(d.weyl_samples[p].M - dt.weyl_samples[p].M));
  }
  double s2 = 0.0;
  const std::size_t m = std::min(d.zeros.size(), dt.zeros.size());
  for (std::size_t n = static_cast<std::size_t>(d.n1); n < m; ++n) {
    double x = std::abs(d.rho[n] - dt.rho[n]) + std::abs(d.residues[n] - dt.residues[n]);
    pm.xi.push_back(x);
    s2 += std::pow(static_cast<double>(n) * x, 2);
  }
  pm.Omega = std::max(sup, std::sqrt(s2));
  return pm;
}

}  // namespace rrinv
