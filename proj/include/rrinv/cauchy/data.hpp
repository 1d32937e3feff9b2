#pragma once

#include "rrinv/core.hpp"

namespace rrinv {

/// Edge traces of the transmutation kernel at x = a:
/// K1(t) = K_t(a,t), K2(t) = K_x(a,t) on [0,a], and omega = K(a,a).
struct CauchyData {
  ComplexSignal K1;
  ComplexSignal K2;
  cplx omega{};

  CauchyData(ComplexSignal k1, ComplexSignal k2, cplx om) : K1(std::move(k1)), K2(std::move(k2)), omega(om) {
    if (!(K1.grid() == K2.grid())) throw DimensionError("Cauchy data signals must share one grid");
    if (K1.grid().kind() != GridKind::half) throw DimensionError("Cauchy data live on a half grid [0,a]");
    if (!std::isfinite(omega.real()) || !std::isfinite(omega.imag())) throw NumericError("omega is not finite");
  }

  static CauchyData zero(const Grid& grid, cplx omega) {
    return {ComplexSignal::zeros(grid), ComplexSignal::zeros(grid), omega};
  }

  const Grid& grid() const { return K1.grid(); }
  double a() const { return K1.grid().a(); }

  /// K(a,t) = omega - int_t^a K1(s) ds.
  ComplexSignal edge_values() const {
    auto cum = cumulative_integral4(K1.values(), grid().spacing());
    std::vector<cplx> v(cum.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = omega - (cum.back() - cum[i]);
    return ComplexSignal(grid(), std::move(v));
  }
};

}  // namespace rrinv
