#include <gtest/gtest.h>

#include <confspec/regularity.hpp>

using namespace confspec;

TEST(Regularity, KoebeBracketsTwoThirds) {
  const RegularityProfile prof = estimate_alpha_max(ConformalMap::koebe());
  ASSERT_TRUE(prof.alpha_max_estimate.has_value());
  EXPECT_NEAR(*prof.alpha_max_estimate, 2.0 / 3.0, 0.02);
  EXPECT_LE(prof.bracket_lo, 2.0 / 3.0);
  EXPECT_GE(prof.bracket_hi, 2.0 / 3.0);
  EXPECT_LE(prof.bracket_hi - prof.bracket_lo, 0.01);
  EXPECT_FALSE(prof.is_conformal_regular);
}

TEST(Regularity, CatalogRegularMapsReachCap) {
  for (const auto& m : {ConformalMap::identity(), ConformalMap::cardioid(), ConformalMap::power(1.5)}) {
    const RegularityProfile prof = estimate_alpha_max(m);
    EXPECT_FALSE(prof.alpha_max_estimate.has_value()) << m.label();
    EXPECT_TRUE(prof.is_conformal_regular);
    EXPECT_EQ(prof.bracket_lo, kAlphaProbeCap);
  }
}

TEST(Regularity, FractionalPowerThreshold) {
  // psi = (1+w)^(1/2): |psi'|^a ~ |1+w|^(-a/2), integrable iff a < 4.
  const RegularityProfile prof = estimate_alpha_max(ConformalMap::power(0.5));
  ASSERT_TRUE(prof.alpha_max_estimate.has_value());
  EXPECT_NEAR(*prof.alpha_max_estimate, 4.0, 0.02);
  EXPECT_TRUE(prof.is_conformal_regular);
}

TEST(Regularity, BrennanFloorProbes) {
  for (const auto& m : {ConformalMap::identity(), ConformalMap::cardioid(), ConformalMap::koebe()}) {
    for (double a : {-1.7, -1.0, 0.5}) {
      EXPECT_EQ(integrate_power(m, a).status, IntegralStatus::Converged) << m.label() << " " << a;
    }
  }
}

TEST(Regularity, ProbeLogRecordsEveryProbe) {
  const RegularityProfile prof = estimate_alpha_max(ConformalMap::koebe(), 0.1);
  ASSERT_GE(prof.probe_log.size(), 3u);
  EXPECT_EQ(prof.probe_log.front().first, 2.0);
  EXPECT_EQ(prof.probe_log.front().second.status, IntegralStatus::Divergent);
  EXPECT_THROW(estimate_alpha_max(ConformalMap::koebe(), 0.0), Error);
}
