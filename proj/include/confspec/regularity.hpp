#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "conformal_maps.hpp"
#include "disc_quadrature.hpp"

namespace confspec {

inline constexpr double kAlphaProbeCap = 64.0;

struct RegularityProfile {
  /// Midpoint of the final bracket; std::nullopt when every probe up to the
  /// cap converged (reported as ">= 64").
  std::optional<double> alpha_max_estimate;
  double bracket_lo = 0.0;  // largest converged probe
  double bracket_hi = 0.0;  // smallest non-converged probe (cap if unbounded)
  bool is_conformal_regular = false;
  std::vector<std::pair<double, IntegralResult>> probe_log;
};

/// Supremum of alpha with a finite integral of |psi'|^alpha: doubling search
/// from 2 up to the cap, then bisection to width tol_alpha.
inline RegularityProfile estimate_alpha_max(const ConformalMap& map, double tol_alpha = 0.01, double tol = 1e-8) {
  if (!(tol_alpha > 0.0)) fail(ErrorKind::ParameterOutOfRange, "tol_alpha must be positive");
  const PowerIntegrator integrator(map);
  RegularityProfile profile;
  auto probe = [&](double alpha) {
    const IntegralResult r = integrator.integrate(alpha, {tol, 12});
    profile.probe_log.emplace_back(alpha, r);
    if (r.usable() && alpha > 2.0) profile.is_conformal_regular = true;
    return r.usable();
  };

  double lo = 0.0;
  double hi = 0.0;
  bool found_divergent = false;
  for (double alpha = 2.0; alpha <= kAlphaProbeCap; alpha *= 2.0) {
    if (probe(alpha)) {
      lo = alpha;
    } else {
      hi = alpha;
      found_divergent = true;
      break;
    }
  }
  if (!found_divergent) {
    profile.bracket_lo = kAlphaProbeCap;
    profile.bracket_hi = kAlphaProbeCap;
    return profile;
  }
  if (hi == 2.0) {
    // Exponent 0 always integrates to the disc area.
    probe(0.0);
    lo = 0.0;
  }
  while (hi - lo > tol_alpha) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  profile.bracket_lo = lo;
  profile.bracket_hi = hi;
  profile.alpha_max_estimate = 0.5 * (lo + hi);
  return profile;
}

}  // namespace confspec
