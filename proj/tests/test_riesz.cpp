#include <gtest/gtest.h>

#include <cmath>

#include "rrinv/forward/goursat.hpp"
#include "rrinv/forward/spectrum.hpp"
#include "rrinv/riesz/hermite.hpp"
#include "rrinv/riesz/moment.hpp"
#include "support.hpp"

using namespace rrinv;
using rrinv::testing::free_problem;
using rrinv::testing::smooth_problem;

namespace {

const double c_free = 0.5 * std::log(2.0);

Spectrum free_spectrum_j0(int N, double a = 1.0) {
  IndexedSequence s;
  for (int n : index_set(0, N)) s.push_back({n, n == 0 ? cplx(0.0) : cplx(leading_term(0, n, a), c_free / a)});
  return Spectrum::from_values(0, s);
}

// int_{-a}^{a} conj(t + i cos(pi t/a)) e^{i lambda t} dt in closed form.
cplx u0_moment(cplx lambda, double a) {
  auto F = [a](cplx l) { return std::abs(l) < 1e-8 ? cplx(2.0 * a) : 2.0 * std::sin(l * a) / l; };
  cplx t_term;
  if (std::abs(lambda) < 1e-3) {
    t_term = 2.0 * I * lambda * a * a * a / 3.0;
  } else {
    t_term = -2.0 * I * (a * std::cos(lambda * a) / lambda - std::sin(lambda * a) / (lambda * lambda));
  }
  return t_term - I * 0.5 * (F(lambda + pi / a) + F(lambda - pi / a));
}

double sup_distance(const BasisFunction& f, const std::function<cplx(double)>& g, double a) {
  double worst = 0.0;
  for (int k = 0; k <= 400; ++k) {
    double t = -a + 2.0 * a * k / 400.0;
    worst = std::max(worst, std::abs(f(t) - g(t)));
  }
  return worst;
}

}  // namespace

TEST(BuildBasis, SimpleRealFrequenciesAreOrthogonal) {
  IndexedSequence s;
  for (int n : index_set(0, 6)) s.push_back({n, (n - 0.5) * pi});
  auto sp = Spectrum::from_values(0, s);
  auto g = Grid::symmetric(1.0, 4097);
  auto basis = build_basis(sp, g);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t k = 0; k < basis.size(); ++k) {
      cplx ip = inner_product(basis[i], basis[k]);
      EXPECT_LT(std::abs(ip - (i == k ? 2.0 : 0.0)), 1e-8);
    }
  }
}

TEST(BuildBasis, DoubleValueGivesPolynomialFactor) {
  const cplx mu{1.3, 0.2};
  auto sp = Spectrum(0, {{-1, {-2.0, 0.0}, 1}, {0, mu, 2}, {2, mu, 2}, {3, {5.0, 0.3}, 1}});
  auto g = Grid::symmetric(1.0, 101);
  auto basis = build_basis(sp, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double t = g.node(i);
    EXPECT_LT(std::abs(basis[1][i] - std::exp(I * mu * t)), 1e-14);
    EXPECT_LT(std::abs(basis[2][i] - I * t * std::exp(I * mu * t)), 1e-14);
  }
}

TEST(BuildBasis, GramMatrixInvertible) {
  IndexedSequence s;
  for (int n : index_set(0, 10)) s.push_back({n, cplx((n - 0.5) * pi, 0.3)});
  auto sys = build_repaired_system(cluster_spectrum(Spectrum::from_values(0, s), s), 1.0, 3.0, 0.0, 0.0);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram_matrix(sys));
  double cond = svd.singularValues()[0] / svd.singularValues()[svd.singularValues().size() - 1];
  EXPECT_TRUE(std::isfinite(cond));
  EXPECT_LT(cond, 1e3);
}

TEST(Hermite, SingleNodeIsConstant) {
  auto p = hermite_interpolate({cplx(0.3, 0.1)}, [](cplx z, int) { return std::exp(z); });
  EXPECT_EQ(p.degree(), 0u);
  EXPECT_LT(std::abs(p(cplx(5.0)) - std::exp(cplx(0.3, 0.1))), 1e-15);
}

TEST(Hermite, ConfluentPairIsTaylorPolynomial) {
  const cplx z0{0.2, -0.1};
  auto f = [](cplx z, int k) { return k == 0 ? std::sin(z) : std::cos(z); };
  auto p = hermite_interpolate({z0, z0}, f);
  for (cplx z : {cplx(0.0), cplx(1.0, 1.0)}) EXPECT_LT(std::abs(p(z) - (std::sin(z0) + std::cos(z0) * (z - z0))), 1e-15);
  EXPECT_LT(std::abs(p.derivative(z0, 1) - std::cos(z0)), 1e-15);
}

TEST(Hermite, ReproducesDerivativeData) {
  const cplx z0{0.1, 0.05}, z1{0.25, -0.02};
  auto f = [](cplx z, int k) { return std::pow(cplx(I), k) * std::exp(I * z); };
  auto p = hermite_interpolate({z0, z1, z0, z1, z0}, f);
  for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(p.derivative(z0, k) - f(z0, k)), 1e-12);
  for (int k = 0; k < 2; ++k) EXPECT_LT(std::abs(p.derivative(z1, k) - f(z1, k)), 1e-12);
}

TEST(Hermite, CubicErrorAtCentroidObeysBound) {
  const cplx z0{0.1, 0.2};
  const double r = 0.1;
  std::vector<cplx> nodes;
  for (int k = 0; k < 3; ++k) nodes.push_back(z0 + std::polar(r, 2.0 * pi * k / 3.0 + 0.3));
  auto cube = [](cplx z, int k) { return k == 0 ? z * z * z : k == 1 ? 3.0 * z * z : 6.0 * z; };
  auto p = hermite_interpolate(nodes, cube);
  double err = std::abs(p(z0) - z0 * z0 * z0);
  EXPECT_GT(err, 0.0);
  double sup = std::pow(std::abs(z0) + 1.0, 3);
  EXPECT_LE(err, r * r * r * sup);
}

TEST(Hermite, PreconditionsEnforced) {
  auto f = [](cplx z, int) { return z; };
  EXPECT_THROW(hermite_interpolate({cplx(0.0), cplx(0.6)}, f), PreconditionError);
  EXPECT_THROW(hermite_interpolate(std::vector<cplx>(9, cplx(0.0)), f), PreconditionError);
}

TEST(ExpDividedDifferences, MatchesDifferenceQuotientsAndConfluentLimit) {
  const double t = 0.7;
  const cplx z0{1.0, 0.3}, z1{1.2, 0.25}, z2{0.9, 0.4};
  ExpDividedDifferences dd({z0, z1, z2}, z0, 1.0);
  auto e = [&](cplx z) { return std::exp(I * z * t); };
  auto v = dd.evaluate(t);
  cplx d01 = (e(z1) - e(z0)) / (z1 - z0), d12 = (e(z2) - e(z1)) / (z2 - z1);
  EXPECT_LT(std::abs(v[0] - e(z0)), 1e-14);
  EXPECT_LT(std::abs(v[1] - d01), 1e-13);
  EXPECT_LT(std::abs(v[2] - (d12 - d01) / (z2 - z0)), 1e-12);

  ExpDividedDifferences conf({z0, z0, z0}, z0, 1.0);
  auto w = conf.evaluate(t);
  EXPECT_LT(std::abs(w[1] - I * t * e(z0)), 1e-14);
  EXPECT_LT(std::abs(w[2] - 0.5 * std::pow(I * t, 2) * e(z0)), 1e-14);
}

TEST(RepairedSystem, ZeroPerturbationReproducesTaylorData) {
  const cplx mu{-2.0, 0.5};
  const double a = 1.0, alpha = 3.0;
  const cplx beta{0.4, 0.1}, omega{0.2, -0.3};
  Spectrum sp(0, {{-2, {-4.0, 0.3}, 1}, {-1, mu, 2}, {0, mu, 2}, {2, {2.0, 0.3}, 1}, {3, {5.0, 0.3}, 1}});
  auto sys = build_system(sp, a, alpha, beta, omega);
  ASSERT_EQ(sys.size(), 5u);
  EXPECT_LT(sup_distance(sys.basis[1], [&](double t) { return std::exp(I * mu * t); }, a), 1e-13);
  EXPECT_LT(sup_distance(sys.basis[2], [&](double t) { return I * t * std::exp(I * mu * t); }, a), 1e-13);
  EXPECT_LT(std::abs(sys.targets[1] + f_background(a, alpha, beta, omega, mu, 0)), 1e-12);
  EXPECT_LT(std::abs(sys.targets[2] + f_background(a, alpha, beta, omega, mu, 1)), 1e-12);
  EXPECT_LT(std::abs(sys.targets[4] + f_background(a, alpha, beta, omega, cplx(5.0, 0.3), 0)), 1e-12);
}

TEST(RepairedSystem, SplitDoubleConvergesToConfluentBasis) {
  const cplx mu{-2.0, 0.5};
  Spectrum sp(0, {{-2, {-5.0, 0.3}, 1}, {-1, mu, 2}, {0, mu, 2}, {2, {2.0, 0.3}, 1}});
  std::vector<double> errs;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    IndexedSequence pert = sp.values();
    pert[2].value += eps * cplx(0.6, 0.8);
    auto cs = cluster_spectrum(sp, pert);
    ASSERT_EQ(cs.blocks[1].count, 2u);
    EXPECT_EQ(cs.blocks[1].sub_representatives.size(), 2u);
    auto sys = build_repaired_system(cs, 1.0, 3.0, 0.0, 0.0);
    // E_k is the line through e^{i z1 t}, e^{i z2 t}; its derivative is the divided difference.
    cplx z1 = pert[1].value, z2 = pert[2].value;
    double dq = sup_distance(sys.basis[2], [&](double t) { return (std::exp(I * z2 * t) - std::exp(I * z1 * t)) / (z2 - z1); }, 1.0);
    EXPECT_LT(dq, 1e-10);
    double e = std::max(sup_distance(sys.basis[1], [&](double t) { return std::exp(I * mu * t); }, 1.0),
                        sup_distance(sys.basis[2], [&](double t) { return I * t * std::exp(I * mu * t); }, 1.0));
    errs.push_back(e / eps);
  }
  // sup error <= C * split with one C
  EXPECT_LT(*std::max_element(errs.begin(), errs.end()), 2.0 * *std::min_element(errs.begin(), errs.end()));
}

TEST(RepairedSystem, BlockwiseDistanceScalesWithPerturbation) {
  auto sp = free_spectrum_j0(16);
  std::vector<double> C;
  for (double Lam : {1e-4, 1e-3}) {
    IndexedSequence pert = sp.values();
    double s2 = 0.0;
    for (auto& e : pert) {
      cplx d = Lam * std::polar(1.0, 0.7 * e.n) / std::pow(e.n * e.n + 1.0, 1.0);
      e.value += d;
    }
    auto base_sys = build_system(sp, 1.0, 3.0, 0.0, 0.0);
    auto sys = build_repaired_system(cluster_spectrum(sp, pert), 1.0, 3.0, 0.0, 0.0);
    auto g = Grid::symmetric(1.0, 1025);
    for (std::size_t k = 0; k < sys.size(); ++k) {
      double d = l2_norm(sys.basis[k].sample(g) - base_sys.basis[k].sample(g));
      s2 += std::pow(sys.indices[k], 2) * d * d;
    }
    C.push_back(std::sqrt(s2) / Lam);
  }
  EXPECT_LT(C[0] / C[1], 2.0);
  EXPECT_GT(C[0] / C[1], 0.5);
}

TEST(ClusterSpectrum, RejectsEscapedValues) {
  auto sp = free_spectrum_j0(4);
  auto pert = sp.values();
  pert[3].value += 2.0;
  EXPECT_THROW(cluster_spectrum(sp, pert), PreconditionError);
  pert.pop_back();
  EXPECT_THROW(cluster_spectrum(sp, pert), DimensionError);
}

TEST(SolveMoment, RecoversKnownFunction) {
  const double a = 1.0;
  auto sp = free_spectrum_j0(48, a);
  auto sys = build_system(sp, a, 3.0, 0.0, 0.0);
  for (std::size_t k = 0; k < sys.size(); ++k) sys.targets[k] = u0_moment(*sp.at(sys.indices[k]), a);
  auto g = Grid::symmetric(a, 2049);
  auto sol = solve_moment_system(sys, g);
  auto U0 = ComplexSignal::sample(g, [&](double t) { return t + I * std::cos(pi * t / a); });
  EXPECT_LT(l2_norm(sol.U - U0), 1e-6);
  EXPECT_TRUE(std::isfinite(sol.gram_condition));
  EXPECT_LT(sol.max_residual, 1e-8 * (1.0 + 2.0));
}

TEST(SolveMoment, ZeroTargetsGiveZero) {
  auto sys = build_system(free_spectrum_j0(12), 1.0, 3.0, 0.0, 0.0);
  for (auto& w : sys.targets) w = 0.0;
  auto sol = solve_moment_system(sys, Grid::symmetric(1.0, 257));
  EXPECT_EQ(l2_norm(sol.U), 0.0);
}

TEST(SolveMoment, FreeProblemTargetsVanish) {
  auto sp = compute_spectrum(free_problem(3.0), 16);
  auto sys = build_system(sp, 1.0, 3.0, 0.0, 0.0);
  auto sol = solve_moment_system(sys, Grid::symmetric(1.0, 257));
  EXPECT_LT(l2_norm(sol.U), 1e-10);
}

TEST(SolveMoment, IllConditionedSystemNeedsRegularization) {
  IndexedSequence s;
  for (int n : index_set(0, 8)) s.push_back({n, cplx(leading_term(0, n, 1.0), 0.3)});
  s[3].value = s[4].value + 1e-9;  // nearly coincident, treated as distinct
  auto sp = Spectrum::from_values(0, s, 1e-12);
  auto sys = build_system(sp, 1.0, 3.0, 0.0, 0.0);
  auto g = Grid::symmetric(1.0, 129);
  EXPECT_THROW(solve_moment_system(sys, g), NumericError);
  EXPECT_NO_THROW(solve_moment_system(sys, g, 1e-10));
}

TEST(SolveMoment, RieszBoundsStableUnderRefinement) {
  std::vector<double> smin, smax;
  for (int N : {16, 32}) {
    IndexedSequence s;
    for (int n : index_set(0, N)) s.push_back({n, cplx(leading_term(0, n, 1.0) + 0.1 / (n == 0 ? 1 : n), 0.35)});
    auto sys = build_system(Spectrum::from_values(0, s), 1.0, 3.0, 0.0, 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram_matrix(sys));
    smin.push_back(es.eigenvalues().minCoeff());
    smax.push_back(es.eigenvalues().maxCoeff());
  }
  EXPECT_GT(smin[1], 0.0);
  EXPECT_LT(smin[0] / smin[1], 2.0);
  EXPECT_LT(smax[1] / smax[0], 2.0);
}

TEST(AssembleMN, ExplicitFunction) {
  auto g = Grid::symmetric(1.0, 201);
  auto U = ComplexSignal::sample(g, [](double t) { return std::exp(-t); });
  auto [M, N] = assemble_MN(U, 2.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double t = g.node(i);
    EXPECT_LT(std::abs(M[i] - (std::exp(-t) + std::exp(t))), 1e-14);
    EXPECT_LT(std::abs(N[i] - (std::exp(-t) - std::exp(t)) / 2.0), 1e-14);
    EXPECT_EQ(M[i], M[g.size() - 1 - i]);
    EXPECT_EQ(N[i], -N[g.size() - 1 - i]);
    EXPECT_LT(std::abs(0.5 * (M[i] + 2.0 * N[i]) - U[i]), 1e-15);
  }
  auto [M0, N0] = assemble_MN(ComplexSignal::zeros(g), 2.0);
  EXPECT_EQ(l2_norm(M0) + l2_norm(N0), 0.0);
}

TEST(AssembleMN, RoundTripWithForwardKernel) {
  auto p = smooth_problem();
  auto sp = compute_spectrum(p, 64);
  auto data = extract_cauchy_data(goursat_kernel(p));
  auto [M, N] = boundary_functions(data, p.beta);
  auto sys = build_system(sp, p.a, p.alpha, p.beta, p.omega());
  auto sol = solve_moment_system(sys, M.grid());
  auto [Mt, Nt] = assemble_MN(sol.U, p.alpha);
  EXPECT_LT(l2_norm(Mt - M), 1e-4);
  EXPECT_LT(l2_norm(Nt - N), 1e-4);
}
