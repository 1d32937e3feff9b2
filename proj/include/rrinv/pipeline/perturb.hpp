#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rrinv/core.hpp"
#include "rrinv/error.hpp"
#include "rrinv/problem.hpp"

namespace rrinv {

/// Lambda = sqrt(sum (n^2 + 1) |lambda_n - lambda~_n|^2) over the common indices.
inline double lambda_metric(const IndexedSequence& base, const IndexedSequence& perturbed) {
  if (base.size() != perturbed.size()) throw DimensionError("spectra have different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i].n != perturbed[i].n) {
      throw DimensionError("index mismatch at position " + std::to_string(i) + ": " + std::to_string(base[i].n) +
                           " vs " + std::to_string(perturbed[i].n));
    }
    const double n = base[i].n;
    s += (n * n + 1.0) * std::norm(base[i].value - perturbed[i].value);
  }
  return std::sqrt(s);
}

inline double lambda_metric(const Spectrum& base, const IndexedSequence& perturbed) {
  return lambda_metric(base.values(), perturbed);
}

enum class PerturbMode { smooth_decay, split_multiples };

struct PerturbOptions {
  PerturbMode mode = PerturbMode::smooth_decay;
  double decay_excess = 0.25;  // magnitudes ~ (n^2+1)^{-(1/2 + decay_excess)}
};

/// Random perturbation with Lambda(base, result) = target. Members of a
/// multiple block move together, except that split_multiples spreads the
/// first multiple block over distinct values around its common shift.
inline IndexedSequence perturb_spectrum(const Spectrum& base, double target, std::uint64_t seed,
                                        const PerturbOptions& opt = {}) {
  if (target < 0.0 || !std::isfinite(target)) throw ValidationError("target Lambda must be finite and >= 0");
  IndexedSequence out = base.values();
  if (target == 0.0) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const auto& e = base.entries();
  std::vector<cplx> dz(e.size());
  bool split_done = opt.mode != PerturbMode::split_multiples;
  std::size_t i = 0;
  while (i < e.size()) {
    std::size_t k = i + 1;
    while (k < e.size() && std::abs(e[k].value - e[i].value) < base.coincidence_tol()) ++k;
    const double n = e[i].n;
    const double mag = std::pow(n * n + 1.0, -(0.5 + opt.decay_excess));
    const cplx shift = mag * cplx(gauss(rng), gauss(rng));
    for (std::size_t r = i; r < k; ++r) dz[r] = shift;
    if (!split_done && k - i > 1) {
      const double m = static_cast<double>(k - i);
      for (std::size_t r = i; r < k; ++r) dz[r] += mag * std::polar(1.0, 2.0 * pi * static_cast<double>(r - i) / m + 0.3);
      split_done = true;
    }
    i = k;
  }
  if (!split_done) throw PreconditionError("split_multiples needs a multiple eigenvalue in the base spectrum");

  double s = 0.0;
  for (std::size_t r = 0; r < e.size(); ++r) s += (std::pow(e[r].n, 2) + 1.0) * std::norm(dz[r]);
  const double scale = target / std::sqrt(s);
  for (std::size_t r = 0; r < e.size(); ++r) out[r].value += scale * dz[r];
  return out;
}

}  // namespace rrinv
