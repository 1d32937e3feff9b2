#pragma once

// The forward problem and indexed spectra.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rrinv/core.hpp"

namespace rrinv {

/// -y'' + q y = lambda^2 y on [0,a],  y'(0) - h y(0) = 0,
/// y'(a) + (i lambda alpha + beta) y(a) = 0.
struct RobinReggeProblem {
  double a = 1.0;
  ComplexSignal q = ComplexSignal::zeros(Grid::half(1.0, 513));
  cplx h{};
  double alpha = 3.0;
  cplx beta{};

  RobinReggeProblem() = default;
  RobinReggeProblem(double a_, ComplexSignal q_, cplx h_, double alpha_, cplx beta_)
      : a(a_), q(std::move(q_)), h(h_), alpha(alpha_), beta(beta_) {
    validate();
  }

  void validate() const {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("interval length a must be positive");
    if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
      throw ValidationError("alpha must be positive and different from 1");
    }
    if (q.grid().kind() != GridKind::half || std::abs(q.grid().a() - a) > 1e-12 * a) {
      throw DimensionError("potential must be sampled on a half grid of length a");
    }
  }

  int branch() const { return alpha > 1.0 ? 0 : 1; }
  /// Limit of Im lambda_n.
  double c() const { return std::log(std::abs((alpha + 1.0) / (1.0 - alpha))) / (2.0 * a); }
  /// omega = h + (1/2) int_0^a q = K(a,a).
  cplx omega() const { return h + 0.5 * integrate(q); }
  /// Coefficient of 1/n in the eigenvalue asymptotics.
  cplx P() const { return (omega() - beta / (alpha * alpha - 1.0)) / pi; }
};

/// True when n belongs to Z_j^- (Z without 1, and without 0 when j = 1).
inline bool in_index_set(int j, int n) { return n != 1 && !(j == 1 && n == 0); }

/// Z_j^- intersected with [-N, N], increasing.
inline std::vector<int> index_set(int j, int N) {
  std::vector<int> out;
  for (int n = -N; n <= N; ++n) {
    if (in_index_set(j, n)) out.push_back(n);
  }
  return out;
}

/// Leading real part (|n| - (j+1)/2) pi/a sgn n of the eigenvalue asymptotics.
inline double leading_term(int j, int n, double a) {
  if (n == 0) return 0.0;
  double s = n > 0 ? 1.0 : -1.0;
  return s * (std::abs(n) - 0.5 * (j + 1)) * pi / a;
}

struct Eigenvalue {
  int n = 0;
  cplx value{};
};
using IndexedSequence = std::vector<Eigenvalue>;

struct SpectrumEntry {
  int n = 0;
  cplx value{};
  int multiplicity = 1;
};

/// Indexed eigenvalues with multiplicities. A multiple value appears once per
/// unit of multiplicity, on consecutive indices of Z_j^-.
class Spectrum {
 public:
  static constexpr double default_coincidence_tol = 1e-9;

  Spectrum() = default;
  Spectrum(int branch, std::vector<SpectrumEntry> entries, double coincidence_tol = default_coincidence_tol)
      : branch_(branch), entries_(std::move(entries)), tol_(coincidence_tol) {
    validate();
  }

  /// Builds a spectrum from bare values, declaring multiplicity only for
  /// numerically coincident consecutive entries.
  static Spectrum from_values(int branch, const IndexedSequence& seq,
                              double coincidence_tol = default_coincidence_tol) {
    std::vector<SpectrumEntry> e;
    e.reserve(seq.size());
    for (const auto& ev : seq) e.push_back({ev.n, ev.value, 1});
    std::size_t i = 0;
    while (i < e.size()) {
      std::size_t k = i + 1;
      while (k < e.size() && std::abs(e[k].value - e[i].value) < coincidence_tol) ++k;
      for (std::size_t r = i; r < k; ++r) e[r].multiplicity = static_cast<int>(k - i);
      i = k;
    }
    return Spectrum(branch, std::move(e), coincidence_tol);
  }

  int branch() const { return branch_; }
  const std::vector<SpectrumEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double coincidence_tol() const { return tol_; }

  IndexedSequence values() const {
    IndexedSequence out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back({e.n, e.value});
    return out;
  }

  std::optional<cplx> at(int n) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), n,
                               [](const SpectrumEntry& e, int k) { return e.n < k; });
    if (it == entries_.end() || it->n != n) return std::nullopt;
    return it->value;
  }

  /// Indices n whose value differs from all earlier values (the set S_j).
  std::vector<int> representatives() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (i == 0 || std::abs(entries_[i].value - entries_[i - 1].value) >= tol_) out.push_back(entries_[i].n);
    }
    return out;
  }

  /// Smallest n0 >= 1 with multiplicity one for every |n| >= n0.
  int tail_index() const {
    int n0 = 1;
    for (const auto& e : entries_) {
      if (e.multiplicity > 1) n0 = std::max(n0, std::abs(e.n) + 1);
    }
    return n0;
  }

  int max_index() const {
    int m = 0;
    for (const auto& e : entries_) m = std::max(m, std::abs(e.n));
    return m;
  }

 private:
  void validate() const {
    if (branch_ != 0 && branch_ != 1) throw ValidationError("branch must be 0 or 1");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (!in_index_set(branch_, e.n)) {
        throw ValidationError("index " + std::to_string(e.n) + " is not in the index set of branch " +
                              std::to_string(branch_));
      }
      if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag())) {
        throw ValidationError("eigenvalue " + std::to_string(e.n) + " is not finite");
      }
      if (e.multiplicity < 1) throw ValidationError("multiplicity must be positive");
      if (i > 0 && entries_[i - 1].n >= e.n) throw ValidationError("spectrum indices must increase");
    }
    // Equal values must occupy consecutive slots, and the group size must
    // match the recorded multiplicity (groups cut by truncation excepted).
    std::size_t i = 0;
    while (i < entries_.size()) {
      std::size_t k = i + 1;
      while (k < entries_.size() && std::abs(entries_[k].value - entries_[i].value) < tol_) ++k;
      for (std::size_t r = k; r < entries_.size(); ++r) {
        if (std::abs(entries_[r].value - entries_[i].value) < tol_) {
          throw ValidationError("equal eigenvalues at non-neighbouring indices " + std::to_string(entries_[i].n) +
                                " and " + std::to_string(entries_[r].n));
        }
      }
      const auto group = static_cast<int>(k - i);
      bool truncated = (i == 0 || k == entries_.size()) && entries_[i].multiplicity > group;
      for (std::size_t r = i; r < k; ++r) {
        if (entries_[r].multiplicity != group && !truncated) {
          throw ValidationError("multiplicity flag at index " + std::to_string(entries_[r].n) +
                                " does not match the number of coincident values");
        }
      }
      i = k;
    }
  }

  int branch_ = 0;
  std::vector<SpectrumEntry> entries_;
  double tol_ = default_coincidence_tol;
};

/// Constants read off the eigenvalue asymptotics.
struct AsymptoticFit {
  double alpha_hat = 0.0;
  int j_hat = 0;
  double c_hat = 0.0;
  cplx P_hat{};
  cplx omega_hat{};
  std::map<int, cplx> residuals;  // gamma_{j,n} over the fitted tail
  double residual_l2 = 0.0;
};

}  // namespace rrinv
