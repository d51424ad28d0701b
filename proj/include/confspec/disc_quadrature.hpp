#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conformal_maps.hpp"
#include "errors.hpp"
#include "gauss_legendre.hpp"
#include "parallel.hpp"

namespace confspec {

/// A point where the integrand behaves like |w - center|^local_exponent.
/// Inside a radius of patch_radius the point's local polar sub-rule carries
/// the full integrand; 0 selects the radius from the patch separation.
struct SingularPatch {
  cplx center;
  double patch_radius = 0.0;
  std::optional<double> local_exponent;
};

struct DiscRule {
  int radial_order = 8;      // Gauss-Legendre points per radial cell
  int angular_count = 64;    // trapezoid points in angle (base rule and interior patches)
  int radial_cells = 8;      // base-rule radial cells
  double grading_exponent = 1.0;
  std::vector<SingularPatch> singular_patches;
  int shells = 40;           // geometric shells per patch, ratio 1/2 toward the centre
};

enum class IntegralStatus { Converged, Divergent, MaxRefinementReached };

inline std::string_view to_string(IntegralStatus s) {
  switch (s) {
    case IntegralStatus::Converged: return "Converged";
    case IntegralStatus::Divergent: return "Divergent";
    case IntegralStatus::MaxRefinementReached: return "MaxRefinementReached";
  }
  return "Unknown";
}

struct IntegralResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  IntegralStatus status = IntegralStatus::Converged;
  int refinement_levels_used = 0;

  bool usable() const { return status == IntegralStatus::Converged; }
};

struct QuadratureOptions {
  double tol = 1e-8;   // relative
  int max_levels = 12;
};

namespace detail {

inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

/// Partition of unity over the patches: weight j is identically 1 near patch
/// j and identically 0 within isolation/2 of every other patch centre.
class PatchPartition {
 public:
  PatchPartition(std::vector<cplx> centers, std::vector<double> isolation)
      : centers_(std::move(centers)), isolation_(std::move(isolation)) {}

  double weight(std::size_t j, cplx w) const {
    if (centers_.size() == 1) return 1.0;
    double total = 0.0;
    double mine = 0.0;
    for (std::size_t i = 0; i < centers_.size(); ++i) {
      const double b = bump(i, w);
      total += b;
      if (i == j) mine = b;
    }
    return mine / total;
  }

 private:
  double bump(std::size_t j, cplx w) const {
    double b = 1.0;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
      if (k == j) continue;
      b *= smooth_step(2.0 * std::abs(w - centers_[k]) / isolation_[k] - 1.0);
      if (b == 0.0) break;
    }
    return b;
  }

  std::vector<cplx> centers_;
  std::vector<double> isolation_;
};

struct PreparedPatch {
  cplx center;
  bool on_boundary = false;
  std::optional<double> local_exponent;
};

/// Nodes of one refinement level. Buckets: 0 is the base rule; patch p owns
/// buckets 1 + p*(shells+1) + k for shell k, with k == shells the tail term
/// whose weight still has to be divided by (2 + local exponent).
struct NodeSet {
  std::vector<cplx> offsets;  // node = anchor of its bucket + offset
  std::vector<double> weights;
  std::vector<std::uint32_t> bucket;
  std::size_t bucket_count = 1;
  std::vector<cplx> bucket_anchor;

  cplx anchor(std::size_t i) const { return bucket_anchor[bucket[i]]; }
};

inline std::vector<PreparedPatch> prepare_patches(const DiscRule& rule, std::vector<double>* isolation) {
  std::vector<PreparedPatch> out;
  for (const auto& patch : rule.singular_patches) {
    const double r = std::abs(patch.center);
    if (r > 1.0 + kBoundaryTol) fail(ErrorKind::ParameterOutOfRange, "singular patch centre outside the disc");
    PreparedPatch p{patch.center, false, patch.local_exponent};
    if (std::abs(1.0 - r) < kBoundaryTol) {
      p.center = patch.center / r;
      p.on_boundary = true;
    }
    out.push_back(p);
  }
  isolation->assign(out.size(), 2.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (i != j) sep = std::min(sep, std::abs(out[i].center - out[j].center));
    }
    if (sep == 0.0) fail(ErrorKind::ParameterOutOfRange, "coincident singular patches");
    double iso = std::isfinite(sep) ? sep / 2.0 : 2.0;
    if (rule.singular_patches[i].patch_radius > 0.0) iso = std::min(iso, 2.0 * rule.singular_patches[i].patch_radius);
    (*isolation)[i] = iso;
  }
  return out;
}

inline void append_base_nodes(const DiscRule& rule, int level, NodeSet& set) {
  const auto gl = gauss_legendre(rule.radial_order);
  const int cells = rule.radial_cells << level;
  const int angular = rule.angular_count << level;
  const double dtheta = 2.0 * std::numbers::pi / angular;
  auto edge = [&](int i) {
    const double x = 1.0 - static_cast<double>(i) / cells;
    return 1.0 - std::pow(x, rule.grading_exponent);
  };
  for (int c = 0; c < cells; ++c) {
    const double r0 = edge(c);
    const double r1 = edge(c + 1);
    const double half = 0.5 * (r1 - r0);
    for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
      const double r = r0 + half * (gl.nodes[g] + 1.0);
      const double wr = half * gl.weights[g] * r * dtheta;
      for (int a = 0; a < angular; ++a) {
        set.offsets.push_back(std::polar(r, dtheta * a));
        set.weights.push_back(wr);
        set.bucket.push_back(0);
      }
    }
  }
}

/// Local polar sub-rule around one patch centre. Rays run from the centre to
/// the unit circle: w = z0 + t * L(phi) e^{i phi}, t in (0, 1], with t graded
/// geometrically toward 0 and an analytic tail below the innermost shell.
inline void append_patch_nodes(const DiscRule& rule, int level, std::size_t index, const PreparedPatch& patch,
                               const PatchPartition& partition, NodeSet& set) {
  const auto gl = gauss_legendre(rule.radial_order);
  // Refinement subdivides the outer shells, which carry the partition-of-unity
  // transition; inner shells are geometrically self-similar and stay fixed.
  auto cells_in_shell = [level](int k) { return k > level + 2 ? 1 : (4 << level) >> k; };
  const std::uint32_t first_bucket = static_cast<std::uint32_t>(1 + index * (rule.shells + 1));

  struct Direction {
    double phi;
    double weight;
    double length;
  };
  std::vector<Direction> dirs;
  const cplx z0 = patch.center;
  const double slack = 1.0 - std::norm(z0);
  if (patch.on_boundary) {
    // phi measured from the inward normal; the ray length is 2 sin(u) with
    // u = pi/2 - |phi|, graded toward u = 0 where the length vanishes.
    const double normal = std::arg(-z0);
    for (int side = -1; side <= 1; side += 2) {
      for (int k = 0; k < rule.shells; ++k) {
        const double hi = 0.5 * std::numbers::pi * std::ldexp(1.0, -k);
        const double lo = 0.5 * hi;
        const int sub = cells_in_shell(k);
        for (int s = 0; s < sub; ++s) {
          const double a = lo + (hi - lo) * s / sub;
          const double b = lo + (hi - lo) * (s + 1) / sub;
          const double half = 0.5 * (b - a);
          for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
            const double u = a + half * (gl.nodes[g] + 1.0);
            dirs.push_back({normal + side * (0.5 * std::numbers::pi - u), half * gl.weights[g], 2.0 * std::sin(u)});
          }
        }
      }
    }
  } else {
    const int count = rule.angular_count << level;
    for (int a = 0; a < count; ++a) {
      const double phi = 2.0 * std::numbers::pi * (a + 0.5) / count;
      const double b = (std::conj(z0) * std::polar(1.0, phi)).real();
      const double root = std::sqrt(b * b + slack);
      const double length = b > 0.0 ? slack / (b + root) : root - b;
      dirs.push_back({phi, 2.0 * std::numbers::pi / count, length});
    }
  }

  for (int k = 0; k < rule.shells; ++k) {
    const double hi = std::ldexp(1.0, -k);
    const double lo = 0.5 * hi;
    const int sub = cells_in_shell(k);
    for (int s = 0; s < sub; ++s) {
      const double a = lo + (hi - lo) * s / sub;
      const double b = lo + (hi - lo) * (s + 1) / sub;
      const double half = 0.5 * (b - a);
      for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
        const double t = a + half * (gl.nodes[g] + 1.0);
        const double wt = half * gl.weights[g] * t;
        for (const auto& d : dirs) {
          const cplx offset = std::polar(t * d.length, d.phi);
          const double weight = wt * d.weight * d.length * d.length * partition.weight(index, z0 + offset);
          if (weight == 0.0) continue;
          set.offsets.push_back(offset);
          set.weights.push_back(weight);
          set.bucket.push_back(first_bucket + static_cast<std::uint32_t>(k));
        }
      }
    }
  }
  const double t_min = std::ldexp(1.0, -rule.shells);
  for (const auto& d : dirs) {
    set.offsets.push_back(std::polar(t_min * d.length, d.phi));
    set.weights.push_back(d.weight * t_min * t_min * d.length * d.length);
    set.bucket.push_back(first_bucket + static_cast<std::uint32_t>(rule.shells));
  }
}

inline NodeSet build_nodes(const DiscRule& rule, int level, std::vector<PreparedPatch>& patches) {
  if (rule.radial_order < 1 || rule.angular_count < 1 || rule.radial_cells < 1 || rule.grading_exponent < 1.0 ||
      rule.shells < 2) {
    fail(ErrorKind::ParameterOutOfRange, "invalid disc rule");
  }
  std::vector<double> isolation;
  patches = prepare_patches(rule, &isolation);
  NodeSet set;
  set.bucket_count = 1 + patches.size() * (rule.shells + 1);
  set.bucket_anchor.assign(set.bucket_count, cplx{0.0, 0.0});
  for (std::size_t p = 0; p < patches.size(); ++p) {
    for (int k = 0; k <= rule.shells; ++k) set.bucket_anchor[1 + p * (rule.shells + 1) + k] = patches[p].center;
  }
  if (patches.empty()) {
    append_base_nodes(rule, level, set);
    return set;
  }
  std::vector<cplx> centers;
  for (const auto& p : patches) centers.push_back(p.center);
  const PatchPartition partition(centers, isolation);
  for (std::size_t i = 0; i < patches.size(); ++i) append_patch_nodes(rule, level, i, patches[i], partition, set);
  return set;
}

/// Sums value_of(i) * weights[i] per bucket with chunk-ordered compensated
/// summation, independent of the worker count.
template <typename ValueOf>
std::vector<double> bucket_sums(std::span<const double> weights, std::span<const std::uint32_t> bucket,
                                std::size_t bucket_count, ValueOf&& value_of) {
  constexpr std::size_t kChunk = 16384;
  const std::size_t n = weights.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<CompensatedSum>> partial(chunks, std::vector<CompensatedSum>(bucket_count));
  std::vector<int> bad(chunks, 0);
  for_each_chunk(n, kChunk, [&](std::size_t begin, std::size_t end, std::size_t c) {
    auto& acc = partial[c];
    for (std::size_t i = begin; i < end; ++i) {
      const double v = value_of(i);
      if (!std::isfinite(v)) {
        bad[c] = 1;
        continue;
      }
      acc[bucket[i]].add(v * weights[i]);
    }
  });
  for (int b : bad) {
    if (b) fail(ErrorKind::NodeSingularity, "integrand is not finite at a quadrature node");
  }
  std::vector<double> out(bucket_count, 0.0);
  for (std::size_t b = 0; b < bucket_count; ++b) {
    CompensatedSum acc;
    for (std::size_t c = 0; c < chunks; ++c) acc.add(partial[c][b].value());
    out[b] = acc.value();
  }
  return out;
}

struct LevelSum {
  double value = 0.0;
  bool divergent = false;
};

/// Combines bucket sums of one level: shell monitor, tail term, total.
inline LevelSum assemble(std::span<const double> sums, std::span<const PreparedPatch> patches, int shells,
                         std::span<const std::optional<double>> exponents) {
  constexpr int kMonitor = 5;
  CompensatedSum total;
  total.add(sums[0]);
  std::vector<double> tails(patches.size(), 0.0);
  bool divergent = false;
  for (std::size_t p = 0; p < patches.size(); ++p) {
    const std::size_t first = 1 + p * (shells + 1);
    for (int k = 0; k < shells; ++k) total.add(sums[first + k]);
    const double tail_raw = sums[first + shells];
    const auto& lambda = exponents[p];
    if (lambda) {
      if (2.0 + *lambda <= 0.0) {
        divergent = true;
      } else {
        tails[p] = tail_raw / (2.0 + *lambda);
      }
    } else {
      const double last = sums[first + shells - 1];
      const double prev = sums[first + shells - 2];
      const double ratio = prev != 0.0 ? last / prev : 0.0;
      if (ratio > 0.0 && ratio < 1.0) {
        tails[p] = tail_raw / (-std::log2(ratio));
      } else if (ratio >= 1.0) {
        divergent = true;
      }
    }
  }
  const double partial = total.value();
  // Heuristic monitor: the innermost shells keep growing and dominate.
  for (std::size_t p = 0; p < patches.size() && !divergent; ++p) {
    const std::size_t first = 1 + p * (shells + 1);
    bool growing = true;
    double recent = 0.0;
    for (int k = shells - kMonitor; k < shells; ++k) {
      recent += sums[first + k];
      if (k > shells - kMonitor && !(std::abs(sums[first + k]) > std::abs(sums[first + k - 1]))) growing = false;
    }
    if (growing && std::abs(recent) > 0.5 * std::abs(partial)) divergent = true;
  }
  if (divergent) return {partial, true};
  for (double t : tails) total.add(t);
  return {total.value(), false};
}

template <typename LevelFn>
IntegralResult refine_until_converged(LevelFn&& level_sum, const QuadratureOptions& opt) {
  if (!(opt.tol > 0.0)) fail(ErrorKind::ParameterOutOfRange, "quadrature tolerance must be positive");
  LevelSum prev = level_sum(0);
  if (prev.divergent) return {prev.value, std::numeric_limits<double>::infinity(), IntegralStatus::Divergent, 0};
  for (int level = 1; level <= opt.max_levels; ++level) {
    const LevelSum cur = level_sum(level);
    if (cur.divergent) return {cur.value, std::numeric_limits<double>::infinity(), IntegralStatus::Divergent, level};
    const double err = std::abs(cur.value - prev.value);
    if (err <= opt.tol * std::max(1.0, std::abs(cur.value))) {
      return {cur.value, err, IntegralStatus::Converged, level};
    }
    prev = cur;
    if (level == opt.max_levels) return {cur.value, err, IntegralStatus::MaxRefinementReached, level};
  }
  return {prev.value, std::numeric_limits<double>::infinity(), IntegralStatus::MaxRefinementReached, opt.max_levels};
}

}  // namespace detail

/// Integral of a pure real-valued f over the unit disc, refined by doubling
/// until two successive levels agree to opt.tol (relative).
template <typename F>
IntegralResult integrate_disc(F&& f, const DiscRule& rule, const QuadratureOptions& opt = {}) {
  std::vector<std::optional<double>> exponents;
  for (const auto& p : rule.singular_patches) exponents.push_back(p.local_exponent);
  return detail::refine_until_converged(
      [&](int level) {
        std::vector<detail::PreparedPatch> patches;
        const auto nodes = detail::build_nodes(rule, level, patches);
        const auto sums = detail::bucket_sums(nodes.weights, nodes.bucket, nodes.bucket_count,
                                              [&](std::size_t i) { return static_cast<double>(f(nodes.anchor(i) + nodes.offsets[i])); });
        return detail::assemble(sums, patches, rule.shells, exponents);
      },
      opt);
}

/// Singular points of |psi'| as (location, signed strength): positive for
/// zeros, negative for poles.
inline std::vector<std::pair<cplx, double>> deriv_singularities(const ConformalMap& map) {
  std::vector<std::pair<cplx, double>> out;
  for (const auto& z : deriv_zeros(map)) out.emplace_back(z.location, z.order);
  for (const auto& z : deriv_poles(map)) out.emplace_back(z.location, -z.order);
  return out;
}

/// Integrals of |psi'|^e for one map at many exponents. Quadrature nodes and
/// log|psi'| at the nodes are computed once per refinement level and reused.
class PowerIntegrator {
 public:
  explicit PowerIntegrator(ConformalMap map, DiscRule base = {}) : map_(std::move(map)), rule_(std::move(base)) {
    rule_.singular_patches.clear();
    for (const auto& [loc, strength] : deriv_singularities(map_)) {
      rule_.singular_patches.push_back({loc, 0.0, std::nullopt});
      strengths_.push_back(strength);
    }
  }

  const ConformalMap& map() const { return map_; }
  const DiscRule& rule() const { return rule_; }

  IntegralResult integrate(double e, const QuadratureOptions& opt = {}) const {
    std::vector<std::optional<double>> exponents;
    for (double s : strengths_) exponents.emplace_back(e * s);
    // Known local exponent at or below -2: divergent without evaluating
    // (the integrand would also overflow at the innermost shells).
    for (const auto& lambda : exponents) {
      if (2.0 + *lambda <= 0.0) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf, IntegralStatus::Divergent, 0};
      }
    }
    return detail::refine_until_converged(
        [&](int level) {
          const Level& lv = level_data(level);
          const auto sums = detail::bucket_sums(lv.weights, lv.bucket, lv.bucket_count,
                                                [&](std::size_t i) { return std::exp(e * lv.log_abs[i]); });
          return detail::assemble(sums, lv.patches, rule_.shells, exponents);
        },
        opt);
  }

 private:
  struct Level {
    std::vector<double> log_abs;
    std::vector<double> weights;
    std::vector<std::uint32_t> bucket;
    std::size_t bucket_count = 1;
    std::vector<detail::PreparedPatch> patches;
  };

  const Level& level_data(int level) const {
    std::lock_guard lock(mutex_);
    if (levels_.size() <= static_cast<std::size_t>(level)) levels_.resize(level + 1);
    auto& slot = levels_[level];
    if (!slot) {
      auto lv = std::make_unique<Level>();
      auto nodes = detail::build_nodes(rule_, level, lv->patches);
      const DerivEvaluator deriv(map_);
      lv->log_abs.resize(nodes.offsets.size());
      for_each_chunk(nodes.offsets.size(), 16384, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) lv->log_abs[i] = deriv.log_abs(nodes.anchor(i), nodes.offsets[i]);
      });
      lv->weights = std::move(nodes.weights);
      lv->bucket = std::move(nodes.bucket);
      lv->bucket_count = nodes.bucket_count;
      slot = std::move(lv);
    }
    return *slot;
  }

  ConformalMap map_;
  DiscRule rule_;
  std::vector<double> strengths_;
  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<Level>> levels_;
};

/// Integral of |psi'|^e over the unit disc.
inline IntegralResult integrate_power(const ConformalMap& map, double e, double tol = 1e-8) {
  return PowerIntegrator(map).integrate(e, {tol, 12});
}

/// Essential supremum of |psi'| over the disc; std::nullopt means unbounded.
/// |psi'| is the modulus of an analytic function, so the maximum sits on the
/// unit circle.
inline std::optional<double> sup_deriv(const ConformalMap& map, double tol = 1e-10) {
  if (!deriv_poles(map).empty()) return std::nullopt;
  constexpr int kSamples = 4096;
  auto on_circle = [&](double theta) { return eval_deriv_abs(map, std::polar(1.0, theta)); };
  double best = -1.0;
  int best_i = 0;
  for (int i = 0; i < kSamples; ++i) {
    const double v = on_circle(2.0 * std::numbers::pi * i / kSamples);
    if (!std::isfinite(v)) return std::nullopt;
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  // Golden-section refinement of the maximum between neighbouring samples.
  const double step = 2.0 * std::numbers::pi / kSamples;
  double a = (best_i - 1) * step;
  double b = (best_i + 1) * step;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = on_circle(c);
  double fd = on_circle(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = on_circle(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = on_circle(d);
    }
  }
  return std::max({best, fc, fd});
}

}  // namespace confspec
