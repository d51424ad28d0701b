#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "conformal_maps.hpp"
#include "disc_constants.hpp"
#include "disc_quadrature.hpp"
#include "errors.hpp"
#include "optimize.hpp"

namespace confspec {

/// Integrability exponents of |psi'| known to hold for every simply connected
/// domain: [alpha0, alpha_sup).
struct BrennanRange {
  double alpha0 = -1.752;
  double alpha_sup = 2.0 / 3.0;

  double abs_alpha0() const { return std::abs(alpha0); }
};

struct ParameterWindow {
  double p = 0.0;
  double p_lower = 0.0;  // strict lower threshold enforced for p
  double q_min = 1.0;
  double q_max = 0.0;
  double r_min = 1.0;
  double r_max = 0.0;
  std::optional<double> s_max;
  std::optional<double> alpha;
  BrennanRange brennan;
};

namespace detail {
inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}
}  // namespace detail

inline ParameterWindow make_window(double p, const BrennanRange& brennan = {}, std::optional<double> alpha = {}) {
  const double a = brennan.abs_alpha0();
  if (!(brennan.alpha0 > -2.0 && brennan.alpha0 < 0.0)) {
    fail(ErrorKind::ParameterOutOfRange, "alpha0 must lie in (-2, 0)");
  }
  if (alpha && !(*alpha > 2.0)) fail(ErrorKind::AlphaNotRegular, "alpha = " + detail::fmt(*alpha) + " must exceed 2");

  const double base = (a + 2.0) / (a + 1.0);
  if (!(p > base)) {
    fail(ErrorKind::ParameterOutOfRange,
         "p > (|alpha0|+2)/(|alpha0|+1) = " + detail::fmt(base) + " violated by p = " + detail::fmt(p));
  }
  if (!(p < 2.0)) fail(ErrorKind::ParameterOutOfRange, "p < 2 violated by p = " + detail::fmt(p));
  double lower = base;
  if (alpha) {
    const double alpha_threshold = std::max(4.0 / 3.0, (*alpha + 2.0) / *alpha);
    if (!(p > alpha_threshold)) {
      fail(ErrorKind::ParameterOutOfRange, "p > max{4/3, (alpha+2)/alpha} = " + detail::fmt(alpha_threshold) +
                                               " violated by p = " + detail::fmt(p));
    }
    lower = std::max(lower, alpha_threshold);
  }

  ParameterWindow w;
  w.p = p;
  w.p_lower = lower;
  w.q_max = p * a / (2.0 + a - p);
  w.r_max = (2.0 * p / (2.0 - p)) * (a / (2.0 + a));
  w.alpha = alpha;
  if (alpha) w.s_max = ((*alpha - 2.0) / *alpha) * w.r_max;
  w.brennan = brennan;
  return w;
}

enum class BoundTarget { EigenvalueBound, UnweightedConstant, WeightedConstant, SmoothDomain };

inline std::string_view to_string(BoundTarget t) {
  switch (t) {
    case BoundTarget::EigenvalueBound: return "eigenvalue_bound";
    case BoundTarget::UnweightedConstant: return "unweighted_constant";
    case BoundTarget::WeightedConstant: return "weighted_constant";
    case BoundTarget::SmoothDomain: return "smooth_domain_bound";
  }
  return "unknown";
}

struct BoundReport {
  BoundTarget target = BoundTarget::EigenvalueBound;
  double p = 0.0;
  double r_or_s = 0.0;
  std::optional<double> alpha;
  double best_q = 0.0;
  double bound_value = 0.0;
  std::map<std::string, double> factors;
  std::vector<IntegralStatus> quadrature_statuses;
  ParameterWindow window;
  Interval feasible_q;
  int objective_evaluations = 0;
};

struct EngineOptions {
  double tol = 1e-8;
  BrennanRange brennan;
  OptimizeOptions optimizer;
};

/// Composition-operator norm bound with its underlying integral.
struct KNorm {
  double value = 0.0;
  double exponent = 0.0;  // (p-2)q/(p-q)
  IntegralResult integral;
};

inline KNorm k_norm(const PowerIntegrator& integrator, double p, double q, double tol = 1e-8) {
  if (!(q >= 1.0 && q < p && p < 2.0)) fail(ErrorKind::ParameterOutOfRange, "k_norm requires 1 <= q < p < 2");
  KNorm out;
  out.exponent = (p - 2.0) * q / (p - q);
  out.integral = integrator.integrate(out.exponent, {tol, 12});
  if (!out.integral.usable()) {
    fail(ErrorKind::KNormDivergent, "integral of |psi'|^" + detail::fmt(out.exponent) + " is " +
                                        std::string(to_string(out.integral.status)));
  }
  out.value = std::pow(out.integral.value, (p - q) / (p * q));
  return out;
}

inline KNorm k_norm(const ConformalMap& map, double p, double q, double tol = 1e-8) {
  return k_norm(PowerIntegrator(map), p, q, tol);
}

/// q-interval on which B_{r,q}(disc) is defined (q <= r, delta < 1/2) within
/// the Brennan q-window.
inline Interval poincare_feasible_q(double r, const ParameterWindow& window) {
  const double pole = 2.0 * r / (2.0 + r);
  Interval iv;
  iv.lo = std::max(window.q_min, pole);
  iv.lo_open = pole >= window.q_min;
  iv.hi = std::min(window.q_max, r);
  return iv;
}

namespace detail {

/// Tracks why objective evaluations failed so an all-infeasible optimisation
/// can report the underlying error.
struct FailureLog {
  std::optional<Error> first;

  template <typename F>
  double guard(F&& f) {
    try {
      return f();
    } catch (const Error& e) {
      if (!first) first = e;
      return std::numeric_limits<double>::infinity();
    }
  }

  OptimizeResult optimize(const std::function<double(double)>& objective, Interval feasible,
                          const OptimizeOptions& opt) {
    if (feasible.empty()) fail(ErrorKind::InfeasibleParameters, "empty feasible q-interval");
    try {
      return optimize_q(objective, feasible, opt);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InfeasibleParameters && first) throw *first;
      throw;
    }
  }
};

inline double weighted_objective(const PowerIntegrator& integrator, double p, double r, double q, double tol) {
  const DiscConstant b = poincare_disc_bound(r, q);
  return k_norm(integrator, p, q, tol).value * b.value;
}

inline void check_report(const BoundReport& report) {
  if (!(std::isfinite(report.bound_value) && report.bound_value > 0.0)) {
    fail(ErrorKind::InfeasibleParameters, "bound value is not finite and positive");
  }
  for (auto s : report.quadrature_statuses) {
    if (s != IntegralStatus::Converged) fail(ErrorKind::KNormDivergent, "unconverged integral in report");
  }
}

}  // namespace detail

inline BoundReport weighted_constant(const PowerIntegrator& integrator, double p, double r,
                                     const ParameterWindow& window, const EngineOptions& opt = {}) {
  if (!(r >= window.r_min && r <= window.r_max)) {
    fail(ErrorKind::ParameterOutOfRange,
         "r in [1, r_max = " + detail::fmt(window.r_max) + "] violated by r = " + detail::fmt(r));
  }
  const Interval feasible = poincare_feasible_q(r, window);
  detail::FailureLog log;
  auto objective = [&](double q) {
    return log.guard([&] { return detail::weighted_objective(integrator, p, r, q, opt.tol); });
  };
  const OptimizeResult best = log.optimize(objective, feasible, opt.optimizer);

  BoundReport report;
  report.target = BoundTarget::WeightedConstant;
  report.p = p;
  report.r_or_s = r;
  report.alpha = window.alpha;
  report.best_q = best.best_q;
  report.bound_value = best.best_value;
  report.window = window;
  report.feasible_q = feasible;
  report.objective_evaluations = best.evaluations;
  const KNorm k = k_norm(integrator, p, best.best_q, opt.tol);
  report.factors["k_norm"] = k.value;
  report.factors["disc_constant"] = poincare_disc_bound(r, best.best_q).value;
  report.factors["r"] = r;
  report.quadrature_statuses = {k.integral.status};
  detail::check_report(report);
  return report;
}

inline BoundReport weighted_constant(const ConformalMap& map, double p, double r, const ParameterWindow& window,
                                     const EngineOptions& opt = {}) {
  return weighted_constant(PowerIntegrator(map), p, r, window, opt);
}

struct EmbeddingFactor {
  double value = 0.0;
  IntegralResult integral;
};

/// (integral of |psi'|^alpha)^((2/alpha)(1/s)).
inline EmbeddingFactor embedding_factor(const PowerIntegrator& integrator, double alpha, double s, double tol = 1e-8) {
  if (!(alpha > 2.0)) fail(ErrorKind::AlphaNotRegular, "alpha must exceed 2");
  if (!(s >= 1.0)) fail(ErrorKind::ParameterOutOfRange, "s must be >= 1");
  EmbeddingFactor out;
  out.integral = integrator.integrate(alpha, {tol, 12});
  if (!out.integral.usable()) {
    fail(ErrorKind::AlphaNotRegularForMap, "integral of |psi'|^" + detail::fmt(alpha) + " is " +
                                               std::string(to_string(out.integral.status)) + " for map '" +
                                               integrator.map().label() + "'");
  }
  out.value = std::pow(out.integral.value, (2.0 / alpha) / s);
  return out;
}

inline EmbeddingFactor embedding_factor(const ConformalMap& map, double alpha, double s, double tol = 1e-8) {
  return embedding_factor(PowerIntegrator(map), alpha, s, tol);
}

inline BoundReport unweighted_constant(const PowerIntegrator& integrator, double p, double s, double alpha,
                                       const EngineOptions& opt = {}) {
  const ParameterWindow window = make_window(p, opt.brennan, alpha);
  if (!(s >= 1.0 && s <= *window.s_max)) {
    fail(ErrorKind::ParameterOutOfRange,
         "s in [1, s_max = " + detail::fmt(*window.s_max) + "] violated by s = " + detail::fmt(s));
  }
  const double r = alpha * s / (alpha - 2.0);
  const EmbeddingFactor emb = embedding_factor(integrator, alpha, s, opt.tol);
  BoundReport report = weighted_constant(integrator, p, r, window, opt);
  const double weighted = report.bound_value;
  report.target = BoundTarget::UnweightedConstant;
  report.r_or_s = s;
  report.bound_value = emb.value * weighted;
  report.factors["embedding_factor"] = emb.value;
  report.factors["weighted_constant"] = weighted;
  report.factors["alpha_norm"] = std::pow(emb.integral.value, 1.0 / alpha);
  report.quadrature_statuses.insert(report.quadrature_statuses.begin(), emb.integral.status);
  detail::check_report(report);
  return report;
}

inline BoundReport unweighted_constant(const ConformalMap& map, double p, double s, double alpha,
                                       const EngineOptions& opt = {}) {
  return unweighted_constant(PowerIntegrator(map), p, s, alpha, opt);
}

/// Upper bound for 1/mu_p:
///   inf_q ||psi'||_alpha^2 (int |psi'|^((p-2)q/(p-q)))^((p-q)/q) B_{r,q}^p,
/// r = alpha p / (alpha - 2), over the q-set where every factor is defined.
inline BoundReport eigenvalue_bound(const PowerIntegrator& integrator, double p, double alpha,
                                    const EngineOptions& opt = {}) {
  const ParameterWindow window = make_window(p, opt.brennan, alpha);
  const double r = alpha * p / (alpha - 2.0);
  if (!(r <= window.r_max)) {
    fail(ErrorKind::ParameterOutOfRange,
         "r = alpha p/(alpha-2) = " + detail::fmt(r) + " exceeds r_max = " + detail::fmt(window.r_max));
  }
  const IntegralResult alpha_integral = integrator.integrate(alpha, {opt.tol, 12});
  if (!alpha_integral.usable()) {
    fail(ErrorKind::AlphaNotRegularForMap, "integral of |psi'|^" + detail::fmt(alpha) + " is " +
                                               std::string(to_string(alpha_integral.status)) + " for map '" +
                                               integrator.map().label() + "'");
  }
  const double alpha_norm_sq = std::pow(alpha_integral.value, 2.0 / alpha);

  const Interval feasible = poincare_feasible_q(r, window);
  detail::FailureLog log;
  auto objective = [&](double q) {
    return log.guard([&] {
      const DiscConstant b = poincare_disc_bound(r, q);
      const KNorm k = k_norm(integrator, p, q, opt.tol);
      return alpha_norm_sq * std::pow(k.value, p) * std::pow(b.value, p);
    });
  };
  const OptimizeResult best = log.optimize(objective, feasible, opt.optimizer);

  BoundReport report;
  report.target = BoundTarget::EigenvalueBound;
  report.p = p;
  report.r_or_s = p;
  report.alpha = alpha;
  report.best_q = best.best_q;
  report.bound_value = best.best_value;
  report.window = window;
  report.feasible_q = feasible;
  report.objective_evaluations = best.evaluations;
  const KNorm k = k_norm(integrator, p, best.best_q, opt.tol);
  const DiscConstant b = poincare_disc_bound(r, best.best_q);
  report.factors["alpha_norm"] = std::pow(alpha_integral.value, 1.0 / alpha);
  report.factors["k_norm"] = k.value;
  report.factors["disc_constant"] = b.value;
  report.factors["delta"] = b.delta;
  report.factors["r"] = r;
  report.quadrature_statuses = {alpha_integral.status, k.integral.status};
  detail::check_report(report);
  return report;
}

inline BoundReport eigenvalue_bound(const ConformalMap& map, double p, double alpha, const EngineOptions& opt = {}) {
  return eigenvalue_bound(PowerIntegrator(map), p, alpha, opt);
}

/// sup|psi'|^p / mu_p(disc), an upper bound for 1/mu_p on smooth domains.
inline double smooth_domain_bound(const ConformalMap& map, double p, double mu_p_disc) {
  if (!(p > 1.0 && p <= 2.0)) fail(ErrorKind::ParameterOutOfRange, "smooth_domain_bound requires 1 < p <= 2");
  if (!(mu_p_disc > 0.0)) fail(ErrorKind::ParameterOutOfRange, "mu_p of the disc must be positive");
  const auto sup = sup_deriv(map);
  if (!sup) fail(ErrorKind::SupNormUnbounded, "|psi'| is unbounded on the disc for map '" + map.label() + "'");
  return std::pow(*sup, p) / mu_p_disc;
}

}  // namespace confspec
