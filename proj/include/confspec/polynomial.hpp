#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"

namespace confspec {

using cplx = std::complex<double>;

/// Horner evaluation; coefficients are in ascending powers.
inline cplx poly_eval(std::span<const cplx> coeffs, cplx w) {
  cplx acc{0.0, 0.0};
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * w + *it;
  return acc;
}

inline std::vector<cplx> poly_derivative(std::span<const cplx> coeffs) {
  std::vector<cplx> out;
  for (std::size_t k = 1; k < coeffs.size(); ++k) out.push_back(coeffs[k] * static_cast<double>(k));
  return out;
}

/// Drops trailing (highest-degree) coefficients that are exactly zero.
inline std::vector<cplx> poly_trim(std::span<const cplx> coeffs) {
  std::vector<cplx> out(coeffs.begin(), coeffs.end());
  while (!out.empty() && out.back() == cplx{0.0, 0.0}) out.pop_back();
  return out;
}

struct RootCluster {
  cplx location;
  int multiplicity = 1;
};

/// All complex roots of a polynomial by Aberth-Ehrlich simultaneous iteration.
inline std::vector<cplx> aberth_roots(std::span<const cplx> coeffs_in, int max_iter = 500) {
  const auto coeffs = poly_trim(coeffs_in);
  if (coeffs.size() < 2) return {};
  const std::size_t degree = coeffs.size() - 1;
  const auto deriv = poly_derivative(coeffs);

  // Initial guesses on a circle bounded by the Cauchy radius.
  double radius = 0.0;
  for (std::size_t k = 0; k < degree; ++k) radius = std::max(radius, std::abs(coeffs[k] / coeffs[degree]));
  radius = 1.0 + radius;
  const double seed_radius = std::pow(std::abs(coeffs[0] / coeffs[degree]), 1.0 / static_cast<double>(degree));
  const double r0 = seed_radius > 0.0 ? std::min(seed_radius, radius) : 0.5 * radius;
  std::vector<cplx> z(degree);
  for (std::size_t k = 0; k < degree; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(degree) + 0.4;
    z[k] = std::polar(r0, angle);
  }
  if (degree == 1) return {-coeffs[0] / coeffs[1]};

  double scale = 0.0;
  for (const auto& c : coeffs) scale += std::abs(c);

  for (int iter = 0; iter < max_iter; ++iter) {
    bool done = true;
    for (std::size_t k = 0; k < degree; ++k) {
      const cplx p = poly_eval(coeffs, z[k]);
      if (std::abs(p) <= 1e-15 * scale * std::max(1.0, std::pow(std::abs(z[k]), static_cast<double>(degree)))) continue;
      const cplx ratio = p / poly_eval(deriv, z[k]);
      cplx repulsion{0.0, 0.0};
      for (std::size_t j = 0; j < degree; ++j) {
        if (j != k) repulsion += 1.0 / (z[k] - z[j]);
      }
      const cplx step = ratio / (1.0 - ratio * repulsion);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) continue;
      z[k] -= step;
      if (std::abs(step) > 1e-14 * std::max(1.0, std::abs(z[k]))) done = false;
    }
    if (done) return z;
  }
  // Multiple roots converge only linearly; accept if residuals are small.
  for (const auto& root : z) {
    const double bound = 1e-8 * scale * std::max(1.0, std::pow(std::abs(root), static_cast<double>(degree)));
    if (!(std::abs(poly_eval(coeffs, root)) <= bound)) {
      fail(ErrorKind::RootFindingFailure, "Aberth iteration did not converge");
    }
  }
  return z;
}

/// Groups numerically split multiple roots; the cluster centroid is the
/// well-conditioned estimate of a multiple root.
inline std::vector<RootCluster> cluster_roots(std::vector<cplx> roots, double tol = 1e-4) {
  std::vector<RootCluster> clusters;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    cplx sum = roots[i];
    int count = 1;
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (!used[j] && std::abs(roots[j] - roots[i]) < tol) {
        used[j] = true;
        sum += roots[j];
        ++count;
      }
    }
    clusters.push_back({sum / static_cast<double>(count), count});
  }
  return clusters;
}

}  // namespace confspec
