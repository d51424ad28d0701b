#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace confspec {

/// Closed interval [lo, hi]; lo_open marks a lower end where the objective
/// has a pole and is never evaluated.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;

  bool empty() const { return lo > hi || (lo_open && lo >= hi); }
};

struct OptimizeResult {
  double best_q = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

struct OptimizeOptions {
  int grid_points = 129;
  double q_tol = 1e-6;
};

/// Coarse grid followed by golden-section refinement around the grid
/// minimiser. Non-finite objective values count as +inf. The returned value is
/// the smallest value actually evaluated, so any feasible sample bounds it.
inline OptimizeResult optimize_q(const std::function<double(double)>& objective, Interval feasible,
                                 const OptimizeOptions& opt = {}) {
  if (feasible.empty()) fail(ErrorKind::InfeasibleParameters, "empty feasible q-interval");
  OptimizeResult best;
  auto eval = [&](double q) {
    double v = objective(q);
    ++best.evaluations;
    if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
    if (v < best.best_value) {
      best.best_value = v;
      best.best_q = q;
    }
    return v;
  };

  if (feasible.lo == feasible.hi) {
    eval(feasible.lo);
    if (!std::isfinite(best.best_value)) fail(ErrorKind::InfeasibleParameters, "objective infinite at the only feasible q");
    return best;
  }

  const int n = std::max(3, opt.grid_points);
  const double h = (feasible.hi - feasible.lo) / (n - 1);
  std::vector<double> grid(n);
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = i == n - 1 ? feasible.hi : feasible.lo + h * i;
    values[i] = (i == 0 && feasible.lo_open) ? std::numeric_limits<double>::infinity() : eval(grid[i]);
  }
  if (!std::isfinite(best.best_value)) fail(ErrorKind::InfeasibleParameters, "objective infinite on the whole q-grid");

  const int i_best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  double a = grid[std::max(0, i_best - 1)];
  double b = grid[std::min(n - 1, i_best + 1)];
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > opt.q_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = eval(d);
    }
  }
  return best;
}

}  // namespace confspec
