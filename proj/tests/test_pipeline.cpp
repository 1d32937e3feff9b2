#include <gtest/gtest.h>

#include <cmath>

#include "rrinv/forward/goursat.hpp"
#include "rrinv/forward/spectrum.hpp"
#include "rrinv/pipeline/asymptotics.hpp"
#include "rrinv/pipeline/invert.hpp"
#include "rrinv/pipeline/perturb.hpp"
#include "support.hpp"

using namespace rrinv;
using rrinv::testing::rel_l2;
using rrinv::testing::smooth_problem;

namespace {

IndexedSequence synthetic(int j, int N, double c, cplx P, double a = 1.0) {
  IndexedSequence s;
  for (int n : index_set(j, N)) s.push_back({n, n == 0 ? cplx(0.0, c) : leading_term(j, n, a) + I * c + P / double(n)});
  return s;
}

const Spectrum& smooth_spectrum() {
  static const Spectrum s = compute_spectrum(smooth_problem(), 64);
  return s;
}

}  // namespace

TEST(AsymptoticFit, FreeBranchZero) {
  auto fit = asymptotic_fit(synthetic(0, 64, 0.5 * std::log(2.0), 0.0), 1.0, 0.0);
  EXPECT_EQ(fit.j_hat, 0);
  EXPECT_NEAR(fit.alpha_hat, 3.0, 1e-10);
  EXPECT_LT(std::abs(fit.P_hat), 1e-10);
  EXPECT_LT(std::abs(fit.omega_hat), 1e-10);
}

TEST(AsymptoticFit, RecoversShiftP) {
  auto fit = asymptotic_fit(synthetic(0, 64, 0.5 * std::log(2.0), 0.5), 1.0, 0.0);
  EXPECT_LT(std::abs(fit.P_hat - 0.5), 1e-3);
  EXPECT_NEAR(std::abs(fit.omega_hat), 0.5 * pi, 1e-2);
}

TEST(AsymptoticFit, FreeBranchOne) {
  // alpha = 1/3: |(alpha+1)/(1-alpha)| = 2
  auto fit = asymptotic_fit(synthetic(1, 64, 0.5 * std::log(2.0), 0.0), 1.0, 0.0);
  EXPECT_EQ(fit.j_hat, 1);
  EXPECT_NEAR(fit.alpha_hat, 1.0 / 3.0, 1e-10);
}

TEST(AsymptoticFit, ComputedSpectrumConstants) {
  auto p = smooth_problem();
  auto fit = asymptotic_fit(smooth_spectrum(), p.a, p.beta);
  EXPECT_LT(std::abs(fit.alpha_hat - p.alpha) / p.alpha, 1e-3);
  EXPECT_LT(std::abs(fit.omega_hat - p.omega()) / std::abs(p.omega()), 1e-3);
  EXPECT_TRUE(std::isfinite(fit.residual_l2));
}

TEST(AsymptoticFit, Errors) {
  EXPECT_THROW(asymptotic_fit(synthetic(0, 12, 0.3, 0.0), 1.0, 0.0), PreconditionError);
  auto bad = synthetic(0, 64, 0.3, 0.0);
  for (auto& e : bad) e.value += 0.2 * std::sin(7.0 * e.n);  // real parts off both lattices
  EXPECT_THROW(asymptotic_fit(bad, 1.0, 0.0), FitError);
  EXPECT_THROW(asymptotic_fit(synthetic(0, 64, 0.0, 0.0), 1.0, 0.0), FitError);
}

TEST(LambdaMetric, Examples) {
  auto b = synthetic(0, 8, 0.3, 0.0);
  EXPECT_EQ(lambda_metric(b, b), 0.0);
  auto p = b;
  const cplx d{3e-4, -4e-4};
  for (auto& e : p) {
    if (e.n == 5) e.value += d;
  }
  EXPECT_NEAR(lambda_metric(b, p), std::sqrt(26.0) * std::abs(d), 1e-14);
  p.pop_back();
  EXPECT_THROW(lambda_metric(b, p), DimensionError);
}

TEST(LambdaMetric, DecayingPerturbationConverges) {
  const double delta = 1e-3;
  double expected = 0.0;
  for (int N : {64, 256}) {
    auto b = synthetic(0, N, 0.3, 0.0);
    auto p = b;
    expected = 0.0;
    for (auto& e : p) {
      if (e.n == 0) continue;
      const double n2 = double(e.n) * e.n;
      e.value += delta / n2;
      expected += (n2 + 1.0) / (n2 * n2);
    }
    EXPECT_NEAR(lambda_metric(b, p), delta * std::sqrt(expected), 1e-12);
  }
  EXPECT_LT(delta * std::sqrt(expected), delta * std::sqrt(2.0 * (pi * pi / 6.0 + pi * pi * pi * pi / 90.0)));
}

TEST(PerturbSpectrum, ExactScaling) {
  auto b = Spectrum::from_values(0, synthetic(0, 32, 0.3, 0.1));
  auto same = perturb_spectrum(b, 0.0, 1);
  for (std::size_t i = 0; i < same.size(); ++i) EXPECT_EQ(same[i].value, b.entries()[i].value);
  for (double L : {1e-4, 1e-3, 1e-2}) EXPECT_NEAR(lambda_metric(b, perturb_spectrum(b, L, 7)), L, 1e-12 * (1.0 + L));
  auto x = perturb_spectrum(b, 1e-3, 7), y = perturb_spectrum(b, 1e-3, 7), z = perturb_spectrum(b, 1e-3, 8);
  EXPECT_EQ(x[3].value, y[3].value);
  EXPECT_NE(x[3].value, z[3].value);
}

TEST(PerturbSpectrum, SplitMultiplesClustersBack) {
  auto vals = synthetic(0, 24, 0.3, 0.0);
  vals[24].value = vals[23].value;  // indices -1 and 0 share a double value
  auto b = Spectrum::from_values(0, vals);
  ASSERT_EQ(b.entries()[23].multiplicity, 2);
  PerturbOptions opt;
  opt.mode = PerturbMode::split_multiples;
  auto p = perturb_spectrum(b, 1e-3, 3, opt);
  EXPECT_GT(std::abs(p[23].value - p[24].value), 1e-6);
  auto cs = cluster_spectrum(b, p);
  bool found = false;
  for (const auto& blk : cs.blocks) {
    if (blk.count == 2) {
      found = true;
      EXPECT_EQ(blk.sub_representatives.size(), 2u);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_THROW(perturb_spectrum(Spectrum::from_values(0, synthetic(0, 8, 0.3, 0.0)), 1e-3, 1, opt), PreconditionError);
}

TEST(CauchyFromMN, ReproducesForwardData) {
  auto p = smooth_problem();
  auto data = extract_cauchy_data(goursat_kernel(p));
  auto [M, N] = boundary_functions(data, p.beta);
  auto back = cauchy_from_MN(M, N, p.beta, data.omega);
  EXPECT_LT(l2_norm(back.K1 - data.K1), 1e-14);
  EXPECT_LT(l2_norm(back.K2 - data.K2), 1e-5);
}

TEST(InvertSpectrum, FreeProblemGivesZero) {
  auto sp = compute_spectrum(rrinv::testing::free_problem(3.0), 32);
  auto rep = invert_spectrum(sp.values(), sp, 1.0, 0.0, 32);
  EXPECT_LT(l2_norm(rep.q), 1e-6);
  EXPECT_LT(std::abs(rep.h), 1e-6);
  ASSERT_TRUE(rep.Lambda.has_value());
  EXPECT_EQ(*rep.Lambda, 0.0);
}

TEST(InvertSpectrum, SmoothProblemRoundTrip) {
  auto p = smooth_problem();
  const auto& sp = smooth_spectrum();
  InversionOptions opt;
  opt.forward_check = true;
  auto rep = invert_spectrum(sp.values(), sp, p.a, p.beta, 64, opt);
  EXPECT_LT(rel_l2(rep.q, p.q), 1e-2);
  EXPECT_LT(std::abs(rep.h - p.h), 1e-2);
  EXPECT_LE(rep.max_delta_residual(), 1e-6 * rep.delta_scale);
  EXPECT_EQ(rep.h, rep.fit.omega_hat - 0.5 * integrate(rep.q));
  double fwd = 0.0;
  for (const auto& r : rep.forward_residuals) fwd = std::max(fwd, r.value);
  EXPECT_LT(fwd, 1e-2 * rep.delta_scale);
  for (std::size_t i = 0; i < rep.M.size(); ++i) {
    EXPECT_EQ(rep.M[i], rep.M[rep.M.size() - 1 - i]);
    EXPECT_EQ(rep.N[i], -rep.N[rep.N.size() - 1 - i]);
  }
  EXPECT_TRUE(rep.warnings.empty());
}

TEST(InvertSpectrum, LocalStabilityBound) {
  auto p = smooth_problem();
  const auto& sp = smooth_spectrum();
  auto data = extract_cauchy_data(goursat_kernel(p));
  std::vector<double> Cq, Ch, Ck;
  for (double L : {1e-4, 1e-3, 1e-2}) {
    auto pert = perturb_spectrum(sp, L, 11);
    auto rep = invert_spectrum(pert, sp, p.a, p.beta, 64);
    EXPECT_NEAR(*rep.Lambda, L, 1e-12);
    EXPECT_LE(rep.max_delta_residual(), 1e-6 * rep.delta_scale);
    Cq.push_back(l2_norm(rep.q - p.q) / L);
    Ch.push_back(std::abs(rep.h - p.h) / L);
    Ck.push_back((l2_norm(rep.cauchy.K2 - data.K2) + l2_norm(rep.cauchy.K1 - data.K1)) / L);
  }
  for (const auto* C : {&Cq, &Ch, &Ck}) {
    auto [lo, hi] = std::minmax_element(C->begin(), C->end());
    EXPECT_LT(*hi / *lo, 5.0);
  }
}

TEST(InvertSpectrum, LocalityWarning) {
  const auto& sp = smooth_spectrum();
  InversionOptions opt;
  opt.epsilon_max = 1e-5;
  auto rep = invert_spectrum(perturb_spectrum(sp, 1e-4, 2), sp, 1.0, 0.1, 64, opt);
  ASSERT_EQ(rep.warnings.size(), 1u);
  EXPECT_NE(rep.warnings[0].find("locality"), std::string::npos);
}

TEST(InvertSpectrum, WithoutBaseTreatsValuesAsSimple) {
  auto p = smooth_problem();
  const auto& sp = smooth_spectrum();
  auto rep = invert_spectrum(sp.values(), std::nullopt, p.a, p.beta, 64);
  EXPECT_FALSE(rep.Lambda.has_value());
  EXPECT_LT(rel_l2(rep.q, p.q), 1e-2);
}
