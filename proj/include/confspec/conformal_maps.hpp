#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "polynomial.hpp"

namespace confspec {

enum class MapKind { Identity, Cardioid, Koebe, Polynomial, PowerMap };

inline std::string short_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

/// Closed-form conformal map psi from the unit disc onto a target domain.
class ConformalMap {
 public:
  static ConformalMap identity() { return ConformalMap(MapKind::Identity, {}, 1.0, "identity"); }
  static ConformalMap cardioid() { return ConformalMap(MapKind::Cardioid, {}, 2.0, "cardioid"); }
  static ConformalMap koebe() { return ConformalMap(MapKind::Koebe, {}, 1.0, "koebe"); }

  /// psi(w) = sum_k coeffs[k] w^k.
  static ConformalMap polynomial(std::vector<cplx> coeffs, std::string label = "polynomial") {
    if (coeffs.empty()) fail(ErrorKind::InvalidMapSpec, "polynomial coefficient list is empty");
    if (poly_trim(poly_derivative(coeffs)).empty()) {
      fail(ErrorKind::InvalidMapSpec, "polynomial derivative is identically zero");
    }
    return ConformalMap(MapKind::Polynomial, std::move(coeffs), 1.0, std::move(label));
  }

  /// psi(w) = (1 + w)^k on the principal branch.
  static ConformalMap power(double exponent, std::string label = "") {
    if (!(exponent > 0.0) || !std::isfinite(exponent)) {
      fail(ErrorKind::InvalidMapSpec, "power map exponent must be positive");
    }
    if (label.empty()) label = "power(" + short_number(exponent) + ")";
    return ConformalMap(MapKind::PowerMap, {}, exponent, std::move(label));
  }

  MapKind kind() const { return kind_; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  double exponent() const { return exponent_; }
  const std::string& label() const { return label_; }

  /// Same map multiplied by a real factor (coefficients scaled for polynomials).
  ConformalMap scaled_polynomial(double factor) const {
    if (kind_ != MapKind::Polynomial) fail(ErrorKind::InvalidMapSpec, "scaling is defined for polynomial maps");
    auto c = coeffs_;
    for (auto& v : c) v *= factor;
    return polynomial(std::move(c), label_ + "*" + short_number(factor));
  }

 private:
  ConformalMap(MapKind kind, std::vector<cplx> coeffs, double exponent, std::string label)
      : kind_(kind), coeffs_(std::move(coeffs)), exponent_(exponent), label_(std::move(label)) {}

  MapKind kind_;
  std::vector<cplx> coeffs_;
  double exponent_;
  std::string label_;
};

/// A point of the closed disc where |psi'| vanishes or blows up. `order` is the
/// local exponent: |psi'(w)| ~ |w - location|^order for zeros and
/// |w - location|^-order for poles. It is an integer for analytic zeros and
/// fractional for the branch point of a power map.
struct DerivZero {
  cplx location;
  double order = 1.0;
  bool on_boundary = false;
};

inline constexpr double kBoundaryTol = 1e-9;
inline constexpr double kPoleTol = 1e-12;

/// Points within kBoundaryTol of the unit circle are moved onto it.
inline cplx snap_to_circle(cplx z) {
  const double r = std::abs(z);
  return std::abs(1.0 - r) < kBoundaryTol ? z / r : z;
}

namespace detail {
inline void check_in_disc(cplx w) {
  if (std::abs(w) > 1.0 + kBoundaryTol) fail(ErrorKind::ParameterOutOfRange, "|w| > 1");
}
inline void check_koebe_pole(cplx w) {
  if (std::abs(w - 1.0) < kPoleTol) fail(ErrorKind::PoleAtBoundary, "Koebe map is singular at w = 1");
}
}  // namespace detail

inline cplx eval_map(const ConformalMap& map, cplx w) {
  detail::check_in_disc(w);
  switch (map.kind()) {
    case MapKind::Identity: return w;
    case MapKind::Cardioid: return (w + 1.0) * (w + 1.0);
    case MapKind::Koebe: {
      detail::check_koebe_pole(w);
      const cplx d = 1.0 - w;
      return w / (d * d);
    }
    case MapKind::Polynomial: return poly_eval(map.coeffs(), w);
    case MapKind::PowerMap: return std::pow(1.0 + w, map.exponent());
  }
  return w;
}

/// Analytic psi'(w).
inline cplx eval_deriv(const ConformalMap& map, cplx w) {
  detail::check_in_disc(w);
  switch (map.kind()) {
    case MapKind::Identity: return {1.0, 0.0};
    case MapKind::Cardioid: return 2.0 * (w + 1.0);
    case MapKind::Koebe: {
      detail::check_koebe_pole(w);
      const cplx d = 1.0 - w;
      return (1.0 + w) / (d * d * d);
    }
    case MapKind::Polynomial: return poly_eval(poly_derivative(map.coeffs()), w);
    case MapKind::PowerMap: {
      const cplx base = 1.0 + w;
      if (base == cplx{0.0, 0.0}) {
        const double k = map.exponent();
        if (k > 1.0) return {0.0, 0.0};
        if (k == 1.0) return {1.0, 0.0};
        return {std::numeric_limits<double>::infinity(), 0.0};
      }
      return map.exponent() * std::pow(base, map.exponent() - 1.0);
    }
  }
  return {1.0, 0.0};
}

inline double eval_deriv_abs(const ConformalMap& map, cplx w) { return std::abs(eval_deriv(map, w)); }

/// Evaluates log|psi'| at points given as anchor + offset. Every factor
/// (a - w) is formed as (a - anchor) - offset, so points a tiny offset away
/// from a singular anchor keep full relative precision. Polynomial
/// derivatives are evaluated in factored form over their root clusters.
class DerivEvaluator {
 public:
  explicit DerivEvaluator(const ConformalMap& map) : map_(map) {
    if (map.kind() == MapKind::Polynomial) {
      const auto deriv = poly_trim(poly_derivative(map.coeffs()));
      lead_ = deriv.back();
      clusters_ = cluster_roots(aberth_roots(deriv));
      for (auto& c : clusters_) c.location = snap_to_circle(c.location);
    }
  }

  double log_abs(cplx w) const { return log_abs(cplx{0.0, 0.0}, w); }

  double log_abs(cplx anchor, cplx offset) const {
    auto dist = [&](cplx a) { return std::abs((a - anchor) - offset); };
    switch (map_.kind()) {
      case MapKind::Identity: return 0.0;
      case MapKind::Cardioid: return std::log(2.0 * dist({-1.0, 0.0}));
      case MapKind::Koebe: return std::log(dist({-1.0, 0.0})) - 3.0 * std::log(dist({1.0, 0.0}));
      case MapKind::PowerMap:
        return std::log(map_.exponent()) + (map_.exponent() - 1.0) * std::log(dist({-1.0, 0.0}));
      case MapKind::Polynomial: {
        double acc = std::log(std::abs(lead_));
        for (const auto& c : clusters_) acc += c.multiplicity * std::log(dist(c.location));
        return acc;
      }
    }
    return 0.0;
  }

 private:
  ConformalMap map_;
  cplx lead_{1.0, 0.0};
  std::vector<RootCluster> clusters_;
};

/// Zeros of psi' in the closed unit disc.
inline std::vector<DerivZero> deriv_zeros(const ConformalMap& map) {
  auto classify = [](cplx z, double order) {
    return DerivZero{z, order, std::abs(1.0 - std::abs(z)) < 1e-12};
  };
  switch (map.kind()) {
    case MapKind::Identity: return {};
    case MapKind::Cardioid: return {classify({-1.0, 0.0}, 1.0)};
    case MapKind::Koebe: return {classify({-1.0, 0.0}, 1.0)};
    case MapKind::PowerMap:
      if (map.exponent() > 1.0) return {classify({-1.0, 0.0}, map.exponent() - 1.0)};
      return {};
    case MapKind::Polynomial: {
      const auto deriv = poly_derivative(map.coeffs());
      std::vector<DerivZero> out;
      for (const auto& cluster : cluster_roots(aberth_roots(deriv))) {
        if (std::abs(cluster.location) <= 1.0 + kBoundaryTol) {
          out.push_back(classify(snap_to_circle(cluster.location), static_cast<double>(cluster.multiplicity)));
        }
      }
      return out;
    }
  }
  return {};
}

/// Poles of psi' on the closed disc (only boundary poles occur in the catalog).
inline std::vector<DerivZero> deriv_poles(const ConformalMap& map) {
  switch (map.kind()) {
    case MapKind::Koebe: return {DerivZero{{1.0, 0.0}, 3.0, true}};
    case MapKind::PowerMap:
      if (map.exponent() < 1.0) return {DerivZero{{-1.0, 0.0}, 1.0 - map.exponent(), true}};
      return {};
    default: return {};
  }
}

}  // namespace confspec
