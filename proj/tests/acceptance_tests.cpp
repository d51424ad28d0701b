// Prints one PASS/FAIL line per acceptance criterion; exit status is the
// number of failing criteria.

#include <confspec/bound_engine.hpp>
#include <confspec/disc_constants.hpp>
#include <confspec/eigen_oracle.hpp>
#include <confspec/parallel.hpp>
#include <confspec/regularity.hpp>
#include <confspec/report.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"

using namespace confspec;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome area_identity() {
  const auto t0 = Clock::now();
  const IntegralResult r = integrate_power(ConformalMap::cardioid(), 2.0);
  const double secs = seconds_since(t0);
  const double rel = std::abs(r.value / (6 * kPi) - 1.0);
  return {r.usable() && rel < 1e-6 && secs < 1.0, fmt("value=%.12g rel_err=%.2e time=%.3fs", r.value, rel, secs)};
}

Outcome brennan_floor() {
  bool ok = true;
  std::ostringstream os;
  const std::vector<ConformalMap> catalog = {ConformalMap::identity(), ConformalMap::cardioid(), ConformalMap::koebe(),
                                             ConformalMap::power(1.5), ConformalMap::polynomial({0, 1, 0.25})};
  for (const auto& m : catalog) {
    for (double a : {-1.7, -1.0, 0.5}) {
      const IntegralResult r = integrate_power(m, a);
      if (!r.usable()) {
        ok = false;
        os << m.label() << "@" << a << " " << to_string(r.status) << "; ";
      }
    }
  }
  const bool koebe_div = integrate_power(ConformalMap::koebe(), 0.7).status == IntegralStatus::Divergent;
  const RegularityProfile prof = estimate_alpha_max(ConformalMap::koebe());
  const bool bracket = prof.alpha_max_estimate && prof.bracket_lo >= 2.0 / 3.0 - 0.05 &&
                       prof.bracket_hi <= 2.0 / 3.0 + 0.05 && prof.bracket_lo <= 2.0 / 3.0 &&
                       prof.bracket_hi >= 2.0 / 3.0;
  os << fmt("koebe bracket=[%.4f, %.4f]", prof.bracket_lo, prof.bracket_hi) << " koebe@0.7 "
     << (koebe_div ? "Divergent" : "not divergent");
  return {ok && koebe_div && bracket, os.str()};
}

Outcome window_algebra() {
  const double a = 1.752;
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> up((a + 2) / (a + 1), 2.0);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const double p = up(rng);
    const double q = std::uniform_real_distribution<double>(1.0, p)(rng);
    const bool lhs = q <= make_window(p).q_max;
    const bool rhs = (p - 2) * q / (p - q) >= -a;
    mismatches += lhs != rhs;
  }
  int edge_failures = 0;
  const double lo = (a + 2) / (a + 1);
  for (int i = 1; i <= 50; ++i) {
    const double p = lo + (2 - lo) * i / 51.0;
    const ParameterWindow w = make_window(p);
    edge_failures += !(w.q_max < 2 * p / (4 - p)) + !(w.r_max < p / (2 - p));
  }
  return {mismatches == 0 && edge_failures == 0,
          fmt("equivalence mismatches=%g/1000 edge violations=%g/100", mismatches, edge_failures)};
}

Outcome disc_constants() {
  double worst = 0;
  for (double p : {1.2, 1.5, 2.0, 3.0, 5.0}) worst = std::max(worst, std::abs(pi_p(p) - oracle::pi_p_integral(p)));
  const double e2 = std::abs(pi_p(2.0) - kPi);
  double eb = 0;
  for (double r : {1.0, 1.7, 4.0}) eb = std::max(eb, std::abs(poincare_disc_bound(r, r).value - 4.0));
  return {worst < 1e-8 && e2 < 1e-12 && eb < 1e-12,
          fmt("pi_p vs integral max_err=%.2e pi_2 err=%.2e B(r=q) err=%.2e", worst, e2, eb)};
}

Outcome oracle_accuracy() {
  const double j = oracle::bessel_j1_prime_zero();
  const double ref = j * j;
  const auto t0 = Clock::now();
  const EigenSolution s = neumann_mu2(disc_mesh(128));
  const double secs = seconds_since(t0);
  const double rel = std::abs(s.value / ref - 1.0);
  return {rel < 3e-3 && secs < 30.0, fmt("mu2=%.8f bessel=%.8f rel_err=%.2e time=%.2fs", s.value, ref, rel, secs)};
}

Outcome bound_validity() {
  const auto t0 = Clock::now();
  const std::vector<ConformalMap> maps = {ConformalMap::identity(), ConformalMap::cardioid(), ConformalMap::power(1.5)};
  int pass = 0;
  int fail = 0;
  int skipped = 0;
  std::ostringstream os;
  for (const auto& m : maps) {
    for (double p : {1.6, 1.8, 1.9}) {
      for (double alpha : {4.0, 8.0}) {
        try {
          const ValidationVerdict v = validate_bound(m, p, alpha, 64);
          (v.pass ? pass : fail)++;
          std::printf("  [validity] %-12s p=%.1f alpha=%.0f lower=%.6e upper=%.6e q*=%.4f %s\n", m.label().c_str(), p,
                      alpha, v.lower_bound, v.upper_approx, v.bound.best_q, v.pass ? "PASS" : "FAIL");
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::ParameterOutOfRange) {
            ++skipped;
            std::printf("  [validity] %-12s p=%.1f alpha=%.0f skipped: %s\n", m.label().c_str(), p, alpha, e.what());
          } else {
            ++fail;
            std::printf("  [validity] %-12s p=%.1f alpha=%.0f error: %s\n", m.label().c_str(), p, alpha, e.what());
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  os << pass << " pass, " << fail << " fail, " << skipped << " out of window; " << fmt("time=%.1fs", secs);
  return {fail == 0 && pass > 0 && secs < 600.0, os.str()};
}

Outcome scale_covariance() {
  const ConformalMap base = ConformalMap::polynomial({1, 2, 1}, "cardioid-poly");
  const double p = 1.8;
  const BoundReport b = eigenvalue_bound(base, p, 4.0);
  double worst = 0;
  double dq = 0;
  for (double c : {0.5, 2.0, 10.0}) {
    const BoundReport s = eigenvalue_bound(base.scaled_polynomial(c), p, 4.0);
    worst = std::max(worst, std::abs(s.bound_value / (std::pow(c, p) * b.bound_value) - 1.0));
    dq = std::max(dq, std::abs(s.best_q - b.best_q));
  }
  return {worst < 1e-6 && dq < 1e-9, fmt("max rel dev from c^p=%.2e max |dq|=%.2e", worst, dq)};
}

Outcome smooth_domain_path() {
  const EigenSolution disc = neumann_mu2(disc_mesh(128));
  const double bound = smooth_domain_bound(ConformalMap::cardioid(), 2.0, disc.value);
  const double sup = *sup_deriv(ConformalMap::cardioid());
  const double hand = 16.0 / disc.value;
  const double by_factors = sup * sup / disc.value;
  const EigenSolution card = neumann_mu2(build_mesh(ConformalMap::cardioid(), 128));
  const bool formula = std::abs(bound - hand) <= 1e-9 * hand && std::abs(bound - by_factors) <= 1e-9 * hand;
  const bool valid = 1.0 / bound <= card.value * 1.05;
  return {formula && valid, fmt("bound=%.10f 16/mu2(disc)=%.10f 1/bound=%.6f mu2(cardioid)=%.6f", bound, hand,
                                1.0 / bound, card.value)};
}

Outcome determinism() {
  BoundConfig c;
  c.map = "cardioid";
  c.p = 1.8;
  c.alpha = 4.0;
  set_thread_count(1);
  const CommandResult a = cmd_bound(c);
  set_thread_count(4);
  const CommandResult b = cmd_bound(c);
  const CommandResult b2 = cmd_bound(c);
  set_thread_count(-1);
  return {a.exit_code == 0 && a.output == b.output && b.output == b2.output,
          fmt("bytes=%g identical=%g", static_cast<double>(a.output.size()), a.output == b.output ? 1.0 : 0.0)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"area identity", area_identity},         {"Brennan floor", brennan_floor},
      {"window algebra", window_algebra},       {"disc constants", disc_constants},
      {"oracle accuracy", oracle_accuracy},     {"bound validity", bound_validity},
      {"scale covariance", scale_covariance},   {"smooth-domain path", smooth_domain_path},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu (%s): %s  %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
