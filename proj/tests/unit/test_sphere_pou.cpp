#include "layerpot/sphere_pou.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace layerpot;

TEST(Bump, Values) {
  EXPECT_DOUBLE_EQ(bump(0.0), 1.0);
  EXPECT_NEAR(bump(0.5), 0.71653131057378925, 1e-15);
  EXPECT_EQ(bump(1.0), 0.0);
  EXPECT_EQ(bump(-1.5), 0.0);
}

TEST(Pou, SumsToOneAndRespectsSupport) {
  const PouParams p;
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  for (int t = 0; t < 2000; ++t) {
    const Vec3 u = Vec3(g(rng), g(rng), g(rng)).normalized();
    const auto s = pou_weights(u, p);
    EXPECT_NEAR(s[0] + s[1] + s[2], 1.0, 1e-14);
    for (int i = 0; i < 3; ++i) {
      EXPECT_GE(s[i], 0.0);
      if (std::abs(u[i]) < p.cos_theta()) EXPECT_EQ(s[i], 0.0);
    }
  }
}

TEST(Pou, AxisDirectionBelongsToOneChart) {
  const auto s = pou_weights(Vec3(0.0, 0.0, -1.0));
  EXPECT_EQ(s[2], 1.0);
  EXPECT_EQ(s[0], 0.0);
}

TEST(Pou, SymmetricDiagonal) {
  const auto s = pou_weights(Vec3::Ones().normalized());
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s[i], 1.0 / 3.0, 1e-15);
}

TEST(Pou, AngleRange) {
  EXPECT_THROW(PouParams::from_degrees(50.0), Error);
  EXPECT_THROW(PouParams::from_degrees(90.0), Error);
  EXPECT_NO_THROW(PouParams::from_degrees(60.0));
}
