#include <gtest/gtest.h>

#include <cmath>

#include "rrinv/core.hpp"
#include "rrinv/problem.hpp"
#include "support.hpp"

using namespace rrinv;

TEST(Grid, ConstructionAndNodes) {
  auto h = Grid::half(2.0, 5);
  EXPECT_DOUBLE_EQ(h.spacing(), 0.5);
  EXPECT_DOUBLE_EQ(h.node(0), 0.0);
  EXPECT_DOUBLE_EQ(h.node(4), 2.0);
  auto s = Grid::symmetric(1.0, 5);
  EXPECT_DOUBLE_EQ(s.node(0), -1.0);
  EXPECT_DOUBLE_EQ(s.node(s.center()), 0.0);
  EXPECT_EQ(h.symmetric_extension(), Grid::symmetric(2.0, 9));
  EXPECT_EQ(Grid::symmetric(2.0, 9).half_part(), h);
  EXPECT_THROW(Grid::half(1.0, 1), DimensionError);
  EXPECT_THROW(Grid::half(-1.0, 4), DimensionError);
  EXPECT_THROW(Grid::symmetric(1.0, 4), DimensionError);
}

TEST(ComplexSignal, RejectsBadInput) {
  auto g = Grid::half(1.0, 3);
  EXPECT_THROW(ComplexSignal(g, {1.0, 2.0}), DimensionError);
  EXPECT_THROW(ComplexSignal(g, {1.0, 2.0, std::nan("")}), NumericError);
  auto u = ComplexSignal::sample(g, [](double x) { return x; });
  EXPECT_THROW(u + ComplexSignal::zeros(Grid::half(1.0, 4)), DimensionError);
  EXPECT_EQ((u - u)[2], cplx(0.0));
  EXPECT_EQ(u.conj()[1], cplx(0.5));
}

TEST(InnerProduct, ConstantOnes) {
  auto g = Grid::symmetric(1.0, 11);
  auto one = ComplexSignal::sample(g, [](double) { return 1.0; });
  EXPECT_NEAR(std::abs(inner_product(one, one) - 2.0), 0.0, 1e-14);
}

TEST(InnerProduct, ConjugatesFirstArgument) {
  auto g = Grid::symmetric(1.0, 11);
  auto ii = ComplexSignal::sample(g, [](double) { return I; });
  auto one = ComplexSignal::sample(g, [](double) { return 1.0; });
  EXPECT_NEAR(std::abs(inner_product(ii, one) - cplx(0.0, -2.0)), 0.0, 1e-14);
}

TEST(InnerProduct, UnitModulusExponential) {
  auto g = Grid::symmetric(1.0, 2049);
  auto e = ComplexSignal::sample(g, [](double t) { return std::exp(I * pi * t); });
  EXPECT_NEAR(std::abs(inner_product(e, e) - 2.0), 0.0, 1e-8);
}

TEST(InnerProduct, GridMismatch) {
  auto a = ComplexSignal::zeros(Grid::symmetric(1.0, 11));
  auto b = ComplexSignal::zeros(Grid::symmetric(1.0, 13));
  EXPECT_THROW(inner_product(a, b), DimensionError);
}

TEST(InnerProduct, HermitianAndPositive) {
  auto g = Grid::symmetric(1.5, 301);
  auto u = ComplexSignal::sample(g, [](double t) { return std::exp(cplx(0.3, 1.7) * t) + I * t * t; });
  auto v = ComplexSignal::sample(g, [](double t) { return std::cos(2.0 * t) - cplx(0.1, 0.4) * t; });
  cplx uv = inner_product(u, v), vu = inner_product(v, u), uu = inner_product(u, u);
  EXPECT_LT(std::abs(uv - std::conj(vu)), 1e-13);
  EXPECT_GE(uu.real(), 0.0);
  EXPECT_LT(std::abs(uu.imag()), 1e-12 * uu.real());
}

TEST(InnerProduct, SecondOrderConvergence) {
  auto err = [](std::size_t n) {
    auto g = Grid::symmetric(1.0, n);
    auto u = ComplexSignal::sample(g, [](double t) { return std::exp(cplx(0.5, 2.0) * t); });
    auto v = ComplexSignal::sample(g, [](double t) { return std::exp(cplx(-0.2, 1.0) * t); });
    // conj(e^{(0.5+2i)t}) e^{(-0.2+i)t} = e^{(0.3-i)t}
    const cplx k{0.3, -1.0};
    cplx exact = (std::exp(k) - std::exp(-k)) / k;
    return std::abs(inner_product(u, v) - exact);
  };
  for (std::size_t n : {33u, 65u, 129u}) EXPECT_GE(err(n) / err(2 * n - 1), 3.9);
}

TEST(ParitySplit, Examples) {
  auto g = Grid::symmetric(1.0, 21);
  auto check = [&](auto f, auto ev, auto od) {
    auto [e, o] = parity_split(ComplexSignal::sample(g, f));
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_LT(std::abs(e[i] - cplx(ev(g.node(i)))), 1e-15);
      EXPECT_LT(std::abs(o[i] - cplx(od(g.node(i)))), 1e-15);
    }
  };
  check([](double t) { return t; }, [](double) { return 0.0; }, [](double t) { return 2.0 * t; });
  check([](double t) { return t * t; }, [](double t) { return 2.0 * t * t; }, [](double) { return 0.0; });
  check([](double t) { return 1.0 + I * t; }, [](double) { return 2.0; }, [](double t) { return 2.0 * I * t; });
}

TEST(ParitySplit, ReconstructsExactly) {
  auto g = Grid::symmetric(2.0, 41);
  auto u = ComplexSignal::sample(g, [](double t) { return std::exp(cplx(0.4, 1.1) * t) + t * t * t; });
  auto [e, o] = parity_split(u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(e[i], e[g.size() - 1 - i]);
    EXPECT_EQ(o[i], -o[g.size() - 1 - i]);
    EXPECT_LT(std::abs(e[i] / 2.0 + o[i] / 2.0 - u[i]), 1e-15);
  }
  EXPECT_THROW(parity_split(ComplexSignal::zeros(Grid::half(1.0, 5))), DimensionError);
}

TEST(L2Norm, Examples) {
  auto g = Grid::half(1.0, 1025);
  EXPECT_EQ(l2_norm(ComplexSignal::zeros(g)), 0.0);
  EXPECT_NEAR(l2_norm(ComplexSignal::sample(g, [](double) { return 1.0; })), 1.0, 1e-14);
  EXPECT_NEAR(l2_norm(ComplexSignal::sample(g, [](double x) { return std::sin(pi * x); })), 1.0 / std::sqrt(2.0),
              1e-8);
}

TEST(HalfAndSymmetric, RestrictAndExtend) {
  auto g = Grid::half(1.0, 6);
  auto u = ComplexSignal::sample(g, [](double x) { return cplx(x, x * x); });
  auto ev = extend_from_half(u, 1.0), od = extend_from_half(u, -1.0);
  ASSERT_EQ(ev.size(), 11u);
  EXPECT_EQ(ev[0], u[5]);
  EXPECT_EQ(od[0], -u[5]);
  auto back = restrict_to_half(ev);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(back[i], u[i]);
}

TEST(Quadrature, CumulativeIntegral4IsFourthOrder) {
  auto err = [](std::size_t n) {
    double h = 1.0 / (n - 1);
    std::vector<cplx> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(I * 3.0 * (h * i));
    auto F = cumulative_integral4(f, h);
    return std::abs(F.back() - (std::exp(I * 3.0) - 1.0) / (I * 3.0));
  };
  EXPECT_GT(err(33) / err(65), 12.0);
}

TEST(Quadrature, FilonMatchesClosedForm) {
  auto g = Grid::symmetric(1.0, 401);
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.node(i);
  for (cplx l : {cplx(0.0), cplx(1e-3, 0.0), cplx(40.0, 0.5)}) {
    cplx exact = std::abs(l) < 1e-6 ? cplx(0.0)
                                    : -2.0 * I * (std::cos(l) / l - std::sin(l) / (l * l));
    EXPECT_LT(std::abs(filon_exp(v, g.lo(), g.spacing(), l) - exact), 1e-10) << l;
  }
}

TEST(Problem, ValidationAndConstants) {
  auto p = rrinv::testing::free_problem(3.0);
  EXPECT_EQ(p.branch(), 0);
  EXPECT_NEAR(p.c(), 0.5 * std::log(2.0), 1e-15);
  p.alpha = 1.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p.alpha = 0.5;
  EXPECT_EQ(p.branch(), 1);
  EXPECT_NEAR(p.c(), 0.5 * std::log(3.0), 1e-15);
  p.alpha = -2.0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Spectrum, IndexSetsAndAssumptionN) {
  EXPECT_EQ(index_set(0, 2), (std::vector<int>{-2, -1, 0, 2}));
  EXPECT_EQ(index_set(1, 2), (std::vector<int>{-2, -1, 2}));
  EXPECT_THROW(Spectrum(0, {{1, 1.0, 1}}), ValidationError);
  EXPECT_THROW(Spectrum(1, {{0, 1.0, 1}}), ValidationError);
  // equal values at non-neighbouring indices
  EXPECT_THROW(Spectrum::from_values(0, {{-1, 1.0}, {0, 2.0}, {2, 1.0}}), ValidationError);
  // wrong multiplicity flag
  EXPECT_THROW(Spectrum(0, {{-2, 0.0, 1}, {-1, 1.0, 2}, {0, 2.0, 1}, {2, 3.0, 1}}), ValidationError);
  auto s = Spectrum::from_values(0, {{-2, -3.0}, {-1, 1.0}, {0, 1.0}, {2, 4.0}});
  EXPECT_EQ(s.entries()[1].multiplicity, 2);
  EXPECT_EQ(s.representatives(), (std::vector<int>{-2, -1, 2}));
  EXPECT_EQ(s.tail_index(), 2);
  EXPECT_EQ(*s.at(2), cplx(4.0));
  EXPECT_FALSE(s.at(1).has_value());
}
