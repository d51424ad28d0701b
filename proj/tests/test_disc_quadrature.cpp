#include <gtest/gtest.h>

#include <confspec/disc_quadrature.hpp>
#include <confspec/parallel.hpp>

#include <chrono>
#include <numbers>

#include "oracles.hpp"

using namespace confspec;
constexpr double kPi = std::numbers::pi;

TEST(IntegrateDisc, Polynomials) {
  EXPECT_NEAR(integrate_disc([](cplx) { return 1.0; }, {}).value, kPi, 1e-13);
  EXPECT_NEAR(integrate_disc([](cplx w) { return std::norm(w); }, {}).value, kPi / 2, 1e-13);
  EXPECT_NEAR(integrate_disc([](cplx w) { return w.real(); }, {}).value, 0.0, 1e-13);
}

TEST(IntegrateDisc, NonFiniteNodeRaises) {
  try {
    integrate_disc([](cplx) { return std::nan(""); }, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NodeSingularity);
  }
}

class CardioidPower : public ::testing::TestWithParam<double> {};

TEST_P(CardioidPower, MatchesGammaClosedForm) {
  const double e = GetParam();
  const IntegralResult r = integrate_power(ConformalMap::cardioid(), e, 1e-10);
  ASSERT_EQ(r.status, IntegralStatus::Converged);
  EXPECT_NEAR(r.value / oracle::cardioid_power(e) - 1.0, 0.0, 1e-8) << "e=" << e;
}

INSTANTIATE_TEST_SUITE_P(Exponents, CardioidPower,
                         ::testing::Values(-1.95, -1.75, -1.0, -0.5, 0.5, 1.0, 2.0, 3.3, 4.0, 16.0, 64.0));

TEST(IntegratePower, OracleSanity) {
  EXPECT_NEAR(oracle::cardioid_power(2.0), 6 * kPi, 1e-12);
  EXPECT_NEAR(oracle::disc_shift_power(-1.0), 4.0, 1e-12);
  EXPECT_NEAR(oracle::cardioid_power(4.0), 160 * kPi / 3, 1e-10);
}

TEST(IntegratePower, CardioidArea) {
  const auto t0 = std::chrono::steady_clock::now();
  const IntegralResult r = integrate_power(ConformalMap::cardioid(), 2.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_NEAR(r.value / (6 * kPi) - 1.0, 0.0, 1e-6);
  EXPECT_LT(secs, 1.0);
}

TEST(IntegratePower, Identity) {
  for (double e : {-3.0, 0.7, 5.0}) EXPECT_NEAR(integrate_power(ConformalMap::identity(), e).value, kPi, 1e-12);
}

TEST(IntegratePower, PowerMaps) {
  for (double k : {0.5, 1.5, 3.0}) {
    for (double e : {-1.0, 0.5, 2.0, 4.0}) {
      if ((k - 1.0) * e <= -2.0) continue;
      const IntegralResult r = integrate_power(ConformalMap::power(k), e, 1e-10);
      ASSERT_EQ(r.status, IntegralStatus::Converged) << k << " " << e;
      EXPECT_NEAR(r.value / oracle::power_map_power(k, e) - 1.0, 0.0, 1e-8) << k << " " << e;
    }
  }
}

TEST(IntegratePower, DivergenceDetected) {
  EXPECT_EQ(integrate_power(ConformalMap::koebe(), 0.7).status, IntegralStatus::Divergent);
  EXPECT_EQ(integrate_power(ConformalMap::koebe(), 0.65).status, IntegralStatus::Converged);
  EXPECT_EQ(integrate_power(ConformalMap::cardioid(), -2.0).status, IntegralStatus::Divergent);
  EXPECT_EQ(integrate_power(ConformalMap::cardioid(), -2.5).status, IntegralStatus::Divergent);
  EXPECT_EQ(integrate_power(ConformalMap::power(0.5), 4.0).status, IntegralStatus::Divergent);
}

TEST(IntegratePower, InteriorZero) {
  // psi = w^2/2 + w/4 has psi' = w + 1/4, zero at -1/4 inside the disc.
  const ConformalMap m = ConformalMap::polynomial({0, 0.25, 0.5});
  // Integral of |w + 1/4|^2 is pi/2 + pi/16.
  const IntegralResult r2 = integrate_power(m, 2.0, 1e-10);
  EXPECT_NEAR(r2.value, kPi * (0.5 + 1.0 / 16.0), 1e-9);
  EXPECT_EQ(integrate_power(m, -1.0).status, IntegralStatus::Converged);
  EXPECT_EQ(integrate_power(m, -2.0).status, IntegralStatus::Divergent);
}

TEST(IntegratePower, ThreadCountInvariant) {
  set_thread_count(1);
  const double a = integrate_power(ConformalMap::koebe(), 0.5).value;
  set_thread_count(4);
  const double b = integrate_power(ConformalMap::koebe(), 0.5).value;
  set_thread_count(-1);
  EXPECT_EQ(a, b);
}

TEST(SupDeriv, Catalog) {
  EXPECT_NEAR(*sup_deriv(ConformalMap::cardioid()), 4.0, 1e-9);
  EXPECT_NEAR(*sup_deriv(ConformalMap::identity()), 1.0, 1e-12);
  EXPECT_FALSE(sup_deriv(ConformalMap::koebe()).has_value());
  EXPECT_NEAR(*sup_deriv(ConformalMap::power(1.5)), 1.5 * std::sqrt(2.0), 1e-9);
}
