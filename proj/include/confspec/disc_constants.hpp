#pragma once

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace confspec {

/// Closed-form upper bound for the (r, q) Poincare-Sobolev constant of the
/// unit disc, delta = 1/q - 1/r.
struct DiscConstant {
  double r = 1.0;
  double q = 1.0;
  double delta = 0.0;
  double value = 0.0;
};

inline DiscConstant poincare_disc_bound(double r, double q) {
  if (!(r >= 1.0) || !(q >= 1.0)) fail(ErrorKind::ParameterOutOfRange, "require r >= 1 and q >= 1");
  if (!(r >= q)) fail(ErrorKind::ParameterOutOfRange, "require r >= q");
  const double delta = 1.0 / q - 1.0 / r;
  if (delta >= 0.5) fail(ErrorKind::DeltaOutOfRange, "delta = 1/q - 1/r must be < 1/2");
  const double value =
      2.0 / std::pow(std::numbers::pi, delta) * std::pow((1.0 - delta) / (0.5 - delta), 1.0 - delta);
  return {r, q, delta, value};
}

/// pi_p = 2 pi (p-1)^(1/p) / (p sin(pi/p)).
inline double pi_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) fail(ErrorKind::ParameterOutOfRange, "pi_p requires 1 < p < inf");
  return 2.0 * std::numbers::pi * std::pow(p - 1.0, 1.0 / p) / (p * std::sin(std::numbers::pi / p));
}

/// (pi_p / d)^p: lower bound for mu_p known for convex domains of diameter d.
inline double convex_comparison_bound(double p, double diameter) {
  if (!(diameter > 0.0)) fail(ErrorKind::ParameterOutOfRange, "diameter must be positive");
  return std::pow(pi_p(p) / diameter, p);
}

}  // namespace confspec
