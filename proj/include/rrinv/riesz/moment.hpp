#pragma once

// Exponential systems, their Hermite repair after a multiple eigenvalue
// splits, and the moment problem (U, u_n) = w_n on L^2(-a,a).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "rrinv/core.hpp"
#include "rrinv/detail/gauss.hpp"
#include "rrinv/forward/ivp.hpp"
#include "rrinv/problem.hpp"
#include "rrinv/riesz/hermite.hpp"

namespace rrinv {

/// u(t) = sum_k weights[k] DD_k(t), a combination of divided differences of
/// exp(i lambda t) over one block of nodes. A simple eigenvalue is a block of
/// one node with weight 1, i.e. a pure exponential.
class BasisFunction {
 public:
  BasisFunction(std::shared_ptr<const ExpDividedDifferences> block, std::vector<cplx> weights)
      : block_(std::move(block)), w_(std::move(weights)) {}

  static BasisFunction exponential(cplx lambda, double a) {
    return {std::make_shared<ExpDividedDifferences>(std::vector<cplx>{lambda}, lambda, a), {1.0}};
  }

  cplx operator()(double t) const {
    auto dd = block_->evaluate(t);
    cplx s = 0.0;
    for (std::size_t k = 0; k < w_.size(); ++k) s += w_[k] * dd[k];
    return s;
  }

  ComplexSignal sample(const Grid& g) const {
    return ComplexSignal::sample(g, [&](double t) { return (*this)(t); });
  }

  const ExpDividedDifferences& block() const { return *block_; }
  const std::vector<cplx>& weights() const { return w_; }

 private:
  std::shared_ptr<const ExpDividedDifferences> block_;
  std::vector<cplx> w_;
};

/// Basis functions and targets of a moment problem, indexed like the spectrum.
struct MomentSystem {
  double a = 1.0;
  int branch = 0;
  std::vector<int> indices;
  std::vector<BasisFunction> basis;
  std::vector<cplx> targets;

  std::size_t size() const { return basis.size(); }

  std::vector<ComplexSignal> sampled_basis(const Grid& g) const {
    std::vector<ComplexSignal> out;
    out.reserve(basis.size());
    for (const auto& b : basis) out.push_back(b.sample(g));
    return out;
  }

  /// Largest |Re lambda| over the nodes, which bounds the oscillation rate.
  double max_frequency() const {
    double k = 0.0;
    for (const auto& b : basis) {
      for (cplx z : b.block().nodes()) k = std::max(k, std::abs(z.real()) + std::abs(z.imag()));
    }
    return k;
  }
};

/// Perturbed eigenvalues grouped around the distinct base values.
struct ClusterBlock {
  std::size_t first = 0;   // position in the index order
  std::size_t count = 1;   // multiplicity m_k of the base value
  cplx base_value{};
  std::vector<int> sub_representatives;  // indices of distinct perturbed values
};

struct ClusteredSpectrum {
  Spectrum base;
  IndexedSequence perturbed;
  std::vector<ClusterBlock> blocks;
  double radius = 0.0;
};

/// Half the smallest gap between distinct base values.
inline double cluster_radius(const Spectrum& base) {
  std::vector<cplx> distinct;
  for (int n : base.representatives()) distinct.push_back(*base.at(n));
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    for (std::size_t k = i + 1; k < distinct.size(); ++k) gap = std::min(gap, std::abs(distinct[i] - distinct[k]));
  }
  return 0.5 * gap;
}

inline ClusteredSpectrum cluster_spectrum(const Spectrum& base, const IndexedSequence& perturbed) {
  if (perturbed.size() != base.size()) throw DimensionError("perturbed and base spectra have different lengths");
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    if (perturbed[i].n != base.entries()[i].n) throw DimensionError("perturbed and base spectra use different indices");
  }
  ClusteredSpectrum cs{base, perturbed, {}, cluster_radius(base)};
  const auto& e = base.entries();
  std::size_t i = 0;
  while (i < e.size()) {
    std::size_t k = i + 1;
    while (k < e.size() && std::abs(e[k].value - e[i].value) < base.coincidence_tol()) ++k;
    ClusterBlock b{i, k - i, e[i].value, {}};
    for (std::size_t r = i; r < k; ++r) {
      if (std::abs(perturbed[r].value - b.base_value) >= cs.radius) {
        throw PreconditionError("perturbed eigenvalue " + std::to_string(perturbed[r].n) +
                                " left the cluster radius of its base value");
      }
      bool fresh = true;
      for (std::size_t s = i; s < r; ++s) fresh = fresh && std::abs(perturbed[s].value - perturbed[r].value) >= base.coincidence_tol();
      if (fresh) b.sub_representatives.push_back(perturbed[r].n);
    }
    cs.blocks.push_back(std::move(b));
    i = k;
  }
  return cs;
}

/// Divided-difference coefficients of -f over the block nodes, computed from
/// f = A+ lambda e^{ia lambda} + A- lambda e^{-ia lambda} + B+ e^{ia lambda} + B- e^{-ia lambda}.
inline std::vector<cplx> background_divided_differences(const std::vector<cplx>& nodes, cplx center, double a,
                                                        double alpha, cplx beta, cplx omega) {
  const cplx Ap = 0.5 * I * (1.0 + alpha), Am = 0.5 * I * (alpha - 1.0);
  const cplx Bp = 0.5 * (omega + beta + alpha * omega), Bm = 0.5 * (omega + beta - alpha * omega);
  ExpDividedDifferences dd(nodes, center, a);
  auto ep = dd.evaluate(a), em = dd.evaluate(-a);
  std::vector<cplx> out(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    // (lambda g)[z_0..z_k] = z_k g[z_0..z_k] + g[z_0..z_{k-1}]
    cplx lp = nodes[k] * ep[k] + (k > 0 ? ep[k - 1] : cplx{});
    cplx lm = nodes[k] * em[k] + (k > 0 ? em[k - 1] : cplx{});
    out[k] = -(Ap * lp + Am * lm + Bp * ep[k] + Bm * em[k]);
  }
  return out;
}

/// Hermite-repaired system. Simple base values give e^{i lambda~ t} and
/// -f(lambda~); a block of multiplicity m gives the nu-th lambda-derivatives
/// (nu < m) at the base value of the interpolants E_k(t, .) of e^{i . t} and
/// F_k of -f through the perturbed nodes.
inline MomentSystem build_repaired_system(const ClusteredSpectrum& cs, double a, double alpha, cplx beta, cplx omega) {
  MomentSystem sys;
  sys.a = a;
  sys.branch = cs.base.branch();
  for (const auto& b : cs.blocks) {
    std::vector<cplx> nodes;
    for (std::size_t r = 0; r < b.count; ++r) {
      nodes.push_back(cs.perturbed[b.first + r].value);
      sys.indices.push_back(cs.perturbed[b.first + r].n);
    }
    if (b.count == 1) {
      sys.basis.push_back(BasisFunction::exponential(nodes[0], a));
      sys.targets.push_back(-f_background(a, alpha, beta, omega, nodes[0], 0));
      continue;
    }
    detail::check_hermite_nodes(nodes);
    auto block = std::make_shared<ExpDividedDifferences>(nodes, b.base_value, a);
    auto fcoef = background_divided_differences(nodes, b.base_value, a, alpha, beta, omega);
    for (std::size_t nu = 0; nu < b.count; ++nu) {
      auto w = NewtonPolynomial::derivative_weights(nodes, b.base_value, static_cast<int>(nu));
      cplx target = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) target += w[k] * fcoef[k];
      sys.basis.emplace_back(block, std::move(w));
      sys.targets.push_back(target);
    }
  }
  return sys;
}

/// The unrepaired system u_{n+nu}(t) = (it)^nu e^{i lambda_n t},
/// w_{n+nu} = -f^{(nu)}(lambda_n).
inline MomentSystem build_system(const Spectrum& spectrum, double a, double alpha, cplx beta, cplx omega) {
  return build_repaired_system(cluster_spectrum(spectrum, spectrum.values()), a, alpha, beta, omega);
}

/// The functions (it)^nu e^{i lambda_n t} sampled on a symmetric grid, one per
/// entry of the spectrum.
inline std::vector<ComplexSignal> build_basis(const Spectrum& spectrum, const Grid& grid) {
  if (grid.kind() != GridKind::symmetric) throw DimensionError("basis functions live on [-a,a]");
  std::vector<ComplexSignal> out;
  const auto& e = spectrum.entries();
  for (std::size_t i = 0; i < e.size(); ++i) {
    int nu = 0;
    while (nu < static_cast<int>(i) && std::abs(e[i - 1 - static_cast<std::size_t>(nu)].value - e[i].value) <
                                           spectrum.coincidence_tol()) {
      ++nu;
    }
    out.push_back(ComplexSignal::sample(grid, [&](double t) { return std::pow(I * t, nu) * std::exp(I * e[i].value * t); }));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solving the moment problem.

/// Trial space for U: 2N - P exponentials e^{i mu_m t}/sqrt(2a) of the
/// orthonormal frame (mu_m in (Z + 1/2) pi/a for j = 0, Z pi/a for j = 1) and
/// P Legendre polynomials orthogonalised against the frame and each other.
/// The polynomials absorb the mismatch between a non-periodic U and the
/// (anti)periodic frame.
class TrialSpace {
 public:
  static constexpr std::size_t default_polynomials = 4;

  TrialSpace(double a, int branch, std::size_t dimension, std::size_t polynomials = default_polynomials)
      : a_(a), np_(std::min(polynomials, dimension)) {
    const std::size_t nf = dimension - np_;
    // The nf frame frequencies closest to zero, symmetric whenever the
    // count allows it.
    std::vector<double> cand;
    const long reach = static_cast<long>(nf) + 2;
    for (long k = -reach; k <= reach; ++k) cand.push_back((branch == 0 ? k + 0.5 : static_cast<double>(k)) * pi / a);
    std::stable_sort(cand.begin(), cand.end(), [](double x, double y) {
      return std::abs(x) < std::abs(y) - 1e-12 || (std::abs(std::abs(x) - std::abs(y)) <= 1e-12 && x < y);
    });
    mu_.assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(nf));
    std::sort(mu_.begin(), mu_.end());
    orthogonalise();
  }

  std::size_t dimension() const { return mu_.size() + np_; }
  const std::vector<double>& frequencies() const { return mu_; }
  double max_frequency() const {
    double k = 0.0;
    for (double m : mu_) k = std::max(k, std::abs(m));
    return k;
  }

  /// Values of all trial functions at t.
  Eigen::VectorXcd values(double t) const {
    const std::size_t nf = mu_.size();
    Eigen::VectorXcd v(static_cast<Eigen::Index>(dimension()));
    const double s = 1.0 / std::sqrt(2.0 * a_);
    Eigen::VectorXcd frame(static_cast<Eigen::Index>(nf));
    for (std::size_t m = 0; m < nf; ++m) frame[static_cast<Eigen::Index>(m)] = s * std::exp(I * mu_[m] * t);
    v.head(static_cast<Eigen::Index>(nf)) = frame;
    if (np_ > 0) {
      auto leg = detail::legendre_values(static_cast<int>(np_) - 1, t / a_);
      Eigen::VectorXcd lv(static_cast<Eigen::Index>(np_));
      for (std::size_t p = 0; p < np_; ++p) lv[static_cast<Eigen::Index>(p)] = leg[p];
      v.tail(static_cast<Eigen::Index>(np_)) = poly_coef_ * lv + frame_coef_ * frame;
    }
    return v;
  }

 private:
  void orthogonalise() {
    if (np_ == 0) return;
    const std::size_t nf = mu_.size();
    auto rule = detail::composite_gauss(-a_, a_, max_frequency() + 1.0);
    const auto Q = static_cast<Eigen::Index>(rule.nodes.size());
    Eigen::MatrixXcd F(Q, static_cast<Eigen::Index>(nf));
    Eigen::MatrixXcd L(Q, static_cast<Eigen::Index>(np_));
    Eigen::VectorXd w(Q);
    const double s = 1.0 / std::sqrt(2.0 * a_);
    for (Eigen::Index q = 0; q < Q; ++q) {
      double t = rule.nodes[static_cast<std::size_t>(q)];
      w[q] = rule.weights[static_cast<std::size_t>(q)];
      for (std::size_t m = 0; m < nf; ++m) F(q, static_cast<Eigen::Index>(m)) = s * std::exp(I * mu_[m] * t);
      auto leg = detail::legendre_values(static_cast<int>(np_) - 1, t / a_);
      for (std::size_t p = 0; p < np_; ++p) L(q, static_cast<Eigen::Index>(p)) = leg[p];
    }
    poly_coef_ = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(np_), static_cast<Eigen::Index>(np_));
    frame_coef_ = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(np_), static_cast<Eigen::Index>(nf));
    auto eval = [&](Eigen::Index p) -> Eigen::VectorXcd {
      return L * poly_coef_.row(p).transpose() + F * frame_coef_.row(p).transpose();
    };
    auto inner = [&](const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
      return (x.conjugate().array() * y.array() * w.array().cast<cplx>()).sum();
    };
    for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(np_); ++p) {
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXcd g = eval(p);
        for (std::size_t m = 0; m < nf; ++m) {
          frame_coef_(p, static_cast<Eigen::Index>(m)) -= inner(F.col(static_cast<Eigen::Index>(m)), g);
        }
        for (Eigen::Index r = 0; r < p; ++r) {
          cplx c = inner(eval(r), g);
          poly_coef_.row(p) -= c * poly_coef_.row(r);
          frame_coef_.row(p) -= c * frame_coef_.row(r);
        }
      }
      double nrm = std::sqrt(std::abs(inner(eval(p), eval(p))));
      poly_coef_.row(p) /= nrm;
      frame_coef_.row(p) /= nrm;
    }
  }

  double a_;
  std::size_t np_;
  std::vector<double> mu_;
  Eigen::MatrixXcd poly_coef_;
  Eigen::MatrixXcd frame_coef_;
};

struct MomentSolution {
  std::shared_ptr<const TrialSpace> space;
  Eigen::VectorXcd coefficients;  // U = sum_m coefficients[m] psi_m
  ComplexSignal U;                // samples on the requested symmetric grid
  double gram_condition = 0.0;    // cond(A)^2 of the moment matrix A_{nm} = (psi_m, u_n)
  std::vector<double> singular_values;
  double max_residual = 0.0;      // max_n |(U, u_n) - w_n|

  /// U(t) at any t in [-a,a].
  cplx operator()(double t) const { return space->values(t).transpose() * coefficients; }
};

inline constexpr double max_gram_condition = 1e12;

/// Gauss rule fine enough for products of trial and basis functions.
inline detail::QuadratureRule moment_quadrature(const MomentSystem& sys, double extra_frequency) {
  return detail::composite_gauss(-sys.a, sys.a, sys.max_frequency() + extra_frequency + 1.0);
}

/// Gram matrix G_{nm} = (u_n, u_m) of the basis functions.
inline Eigen::MatrixXcd gram_matrix(const MomentSystem& sys) {
  auto rule = moment_quadrature(sys, sys.max_frequency());
  const auto Q = static_cast<Eigen::Index>(rule.nodes.size());
  const auto K = static_cast<Eigen::Index>(sys.size());
  Eigen::MatrixXcd B(Q, K);
  for (Eigen::Index q = 0; q < Q; ++q) {
    double t = rule.nodes[static_cast<std::size_t>(q)];
    double sw = std::sqrt(rule.weights[static_cast<std::size_t>(q)]);
    for (Eigen::Index k = 0; k < K; ++k) B(q, k) = sw * sys.basis[static_cast<std::size_t>(k)](t);
  }
  return B.adjoint() * B;
}

/// Solves (U, u_n) = w_n in the trial space of matching dimension. With
/// regularization r > 0 the solve is Tikhonov-filtered with parameter
/// r * sigma_max^2; with r = 0 an ill-conditioned system is an error.
inline MomentSolution solve_moment_system(const MomentSystem& sys, const Grid& grid, double regularization = 0.0) {
  if (grid.kind() != GridKind::symmetric || std::abs(grid.a() - sys.a) > 1e-12 * sys.a) {
    throw DimensionError("moment solution must be sampled on the symmetric grid [-a,a]");
  }
  if (sys.targets.size() != sys.basis.size()) throw DimensionError("moment system: basis and targets differ in length");
  if (regularization < 0.0) throw ValidationError("regularization must be nonnegative");
  const auto K = static_cast<Eigen::Index>(sys.size());
  auto space = std::make_shared<TrialSpace>(sys.a, sys.branch, sys.size());

  auto rule = moment_quadrature(sys, space->max_frequency());
  const auto Q = static_cast<Eigen::Index>(rule.nodes.size());
  Eigen::MatrixXcd B(K, Q), Psi(Q, K);
  for (Eigen::Index q = 0; q < Q; ++q) {
    double t = rule.nodes[static_cast<std::size_t>(q)];
    double w = rule.weights[static_cast<std::size_t>(q)];
    for (Eigen::Index k = 0; k < K; ++k) B(k, q) = w * sys.basis[static_cast<std::size_t>(k)](t);
    Psi.row(q) = space->values(t).conjugate().transpose();
  }
  // (psi_m, u_n) = int conj(psi_m) u_n
  Eigen::MatrixXcd A = B * Psi;
  Eigen::VectorXcd w(K);
  for (Eigen::Index k = 0; k < K; ++k) w[k] = sys.targets[static_cast<std::size_t>(k)];

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv[0], smin = sv[K - 1];
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  const double gram_cond = cond * cond;
  Eigen::VectorXcd x;
  if (regularization == 0.0) {
    if (!(gram_cond <= max_gram_condition)) {
      throw NumericError("moment system is ill-conditioned (Gram condition " + std::to_string(gram_cond) +
                         "); retry with a positive regularization such as 1e-10");
    }
    x = svd.solve(w);
  } else {
    Eigen::VectorXcd uw = svd.matrixU().adjoint() * w;
    const double r = regularization * smax * smax;
    for (Eigen::Index k = 0; k < K; ++k) uw[k] *= sv[k] / (sv[k] * sv[k] + r);
    x = svd.matrixV() * uw;
  }
  // A x = w means (U, u_n) = w_n for U = sum conj(x_m) psi_m.
  Eigen::VectorXcd d = x.conjugate();
  double resid = (A * x - w).cwiseAbs().maxCoeff();

  std::vector<cplx> samples(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) samples[i] = space->values(grid.node(i)).transpose() * d;
  MomentSolution sol{space, d, ComplexSignal(grid, std::move(samples)), gram_cond, {}, resid};
  sol.singular_values.assign(sv.data(), sv.data() + sv.size());
  return sol;
}

/// M(t) = U(t) + U(-t) (even) and N(t) = (U(t) - U(-t))/alpha (odd), so that
/// (M + alpha N)/2 = U.
inline std::pair<ComplexSignal, ComplexSignal> assemble_MN(const ComplexSignal& U, double alpha) {
  auto [even, odd] = parity_split(U);
  return {even, (1.0 / alpha) * odd};
}

}  // namespace rrinv
