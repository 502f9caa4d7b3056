#include <gtest/gtest.h>

#include <cmath>

#include "acc_api.h"

namespace {

void expectInRange(const AccCommand& c) {
  EXPECT_TRUE(std::isfinite(c.throttle));
  EXPECT_TRUE(std::isfinite(c.brake));
  EXPECT_GE(c.throttle, 0.0);
  EXPECT_LE(c.throttle, 1.0);
  EXPECT_GE(c.brake, 0.0);
  EXPECT_LE(c.brake, 1.0);
}

}  // namespace

TEST(AccSuite, EmergencyBelowTimeGap) {
  const AccCommand c = computeAccCommand(10.0, 0.0, 3.0, -2.0);
  EXPECT_TRUE(c.emergency);
  EXPECT_GT(c.brake, 0.0);
  EXPECT_EQ(c.throttle, 0.0);
}

TEST(AccSuite, NoEmergencyAtExactClearance) {
  EXPECT_FALSE(computeAccCommand(10.0, 0.0, 15.0, 0.0).emergency);
}

TEST(AccSuite, StandstillUsesMinimumClearance) {
  EXPECT_TRUE(computeAccCommand(0.0, 0.0, 1.5, 0.0).emergency);
  EXPECT_FALSE(computeAccCommand(0.0, 0.0, 2.0, 0.0).emergency);
}

TEST(AccSuite, EmergencyBrakeIsPositive) {
  const AccCommand c = computeAccCommand(20.0, 0.0, 6.0, -6.0);
  EXPECT_TRUE(c.emergency);
  EXPECT_GT(c.brake, 0.0);
  EXPECT_LE(c.brake, 1.0);
}

TEST(AccSuite, LargeGapThrottles) {
  const AccCommand c = computeAccCommand(4.0, 0.0, 30.0, 0.0);
  EXPECT_GT(c.throttle, 0.0);
  EXPECT_EQ(c.brake, 0.0);
}

TEST(AccSuite, ClosingInBrakes) {
  const AccCommand c = computeAccCommand(4.0, 0.0, 9.0, -3.0);
  EXPECT_FALSE(c.emergency);
  EXPECT_GT(c.brake, 0.0);
  EXPECT_EQ(c.throttle, 0.0);
}

TEST(AccSuite, OpeningGapThrottles) {
  const AccCommand c = computeAccCommand(4.0, 0.0, 10.0, 2.0);
  EXPECT_GT(c.throttle, 0.0);
  EXPECT_EQ(c.brake, 0.0);
}

TEST(AccSuite, EquilibriumIsNeutral) {
  const AccCommand c = computeAccCommand(4.0, 0.0, 10.0, 0.0);
  EXPECT_NEAR(c.throttle, 0.0, 1e-9);
  EXPECT_NEAR(c.brake, 0.0, 1e-9);
  EXPECT_FALSE(c.emergency);
}

TEST(AccSuite, OutputsStayInUnitInterval) {
  for (double v = 0.0; v <= 30.0; v += 2.5) {
    for (double gap = -5.0; gap <= 60.0; gap += 5.0) {
      for (double rel = -10.0; rel <= 10.0; rel += 2.5) {
        expectInRange(computeAccCommand(v, 0.0, gap, rel));
      }
    }
  }
}

TEST(AccSuite, NormalBrakingStaysBelowLimit) {
  // Full pedal outside an emergency equals the deceleration limit itself.
  for (double gap = 7.0; gap <= 10.0; gap += 0.5) {
    for (double rel = -6.0; rel <= 0.0; rel += 1.0) {
      const AccCommand c = computeAccCommand(4.0, 0.0, gap, rel);
      if (!c.emergency) EXPECT_LT(c.brake, 1.0);
    }
  }
}

TEST(AccSuite, ExtremeInputsAreFinite) {
  expectInRange(computeAccCommand(30.0, 3.0, 200.0, 30.0));
  expectInRange(computeAccCommand(30.0, -8.0, -10.0, -30.0));
}

TEST(AccSuite, ThrottleSaturatesFarBehind) {
  const AccCommand c = computeAccCommand(4.0, 0.0, 120.0, 5.0);
  EXPECT_NEAR(c.throttle, 1.0, 1e-9);
}
