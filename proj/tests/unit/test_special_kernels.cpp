#include "layerpot/regularized_kernels.hpp"
#include "layerpot/special_functions.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace layerpot;

TEST(Erfcx, MatchesHighPrecisionValues) {
  // mpmath, 40 digits
  EXPECT_NEAR(erfcx(0.3), 0.7345993345676551, 1e-15);
  EXPECT_NEAR(erfcx(5.0) / 0.1107046377330686, 1.0, 1e-14);
  EXPECT_NEAR(erfcx(30.0) / 0.01879588886141675, 1.0, 1e-14);
}

TEST(Erfcx, AccurateOnBothSidesOfAsymptoticSwitch) {
  const double ref = 0.02168358485056290662;  // erfcx(26)
  EXPECT_NEAR(erfcx(26.0) / ref, 1.0, 1e-14);
  EXPECT_NEAR(erfcx(std::nextafter(26.0, 0.0)) / ref, 1.0, 1e-14);
}

TEST(Erfcx, LargeArgumentBehavesLikeInverseSqrtPi) {
  const double x = 1e8;
  EXPECT_NEAR(erfcx(x) * x * std::sqrt(pi), 1.0, 1e-15);
}

TEST(SingleKernel, ValuesAtOrigin) {
  const Smoothing near(0.1);
  const Smoothing on(0.1, KernelVariant::on_surface);
  EXPECT_NEAR(single_kernel(Vec3::Zero(), near), -std::pow(pi, -1.5) / (2.0 * 0.1), 1e-14);
  EXPECT_NEAR(single_kernel(Vec3::Zero(), on), -(4.0 / 3.0) * std::pow(pi, -1.5) / 0.1, 1e-13);
}

TEST(SingleKernel, AtOneDelta) {
  EXPECT_NEAR(single_kernel(Vec3(0, 0, 1), Smoothing(1.0)), -0.06705999837270347, 1e-15);
}

TEST(SingleKernel, FarFieldIsPlainKernel) {
  const Smoothing sm(0.05);
  const Vec3 y(0.3, -0.4, 0.2);
  EXPECT_NEAR(single_kernel(y, sm), -1.0 / (4.0 * pi * y.norm()), 1e-15);
}

TEST(SingleKernel, SmoothAcrossSeriesSwitch) {
  const Smoothing sm(1.0);
  const double a = single_kernel(Vec3(0, 0, 0.999999e-6), sm);
  const double b = single_kernel(Vec3(0, 0, 1.000001e-6), sm);
  EXPECT_NEAR(a, b, 1e-15);
}

TEST(GradKernel, ZeroAtOriginAndProfileValue) {
  EXPECT_EQ(grad_kernel(Vec3::Zero(), Smoothing(0.2)).norm(), 0.0);
  EXPECT_NEAR(grad_factor(1.0, Smoothing(1.0)), 0.4275932955291202, 1e-15);
}

TEST(GradKernel, ProfileAccurateAcrossSeriesSwitch) {
  // s(rho)/rho^3 from mpmath at rho = 0.3 (series), 0.5 and 0.7 (closed form)
  const double rho[] = {0.3, 0.5, 0.7};
  const double near[] = {0.71290691012735232, 0.64886870676259313, 0.56533175379020837};
  const double on[] = {1.4004141832066610, 1.2347237593862230, 1.0261816607305674};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(detail::grad_profile(rho[i], KernelVariant::near), near[i], 1e-14);
    EXPECT_NEAR(detail::grad_profile(rho[i], KernelVariant::on_surface), on[i], 1e-14);
  }
}

TEST(GradKernel, TenDeltaMatchesPlainGradient) {
  const Smoothing sm(0.1);
  const Vec3 y = Vec3(1.0, 2.0, -2.0).normalized() * 1.0;
  const Vec3 exact = y / (4.0 * pi * std::pow(y.norm(), 3));
  EXPECT_LT((grad_kernel(y, sm) - exact).norm(), 1e-12 * exact.norm());
}

TEST(GradKernel, IsGradientOfNearSingleKernel) {
  const Smoothing sm(0.3);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int t = 0; t < 20; ++t) {
    const Vec3 y(u(rng), u(rng), u(rng));
    double prev = 0.0;
    for (const double step : {1e-3, 5e-4}) {
      Vec3 fd;
      for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = step;
        fd[i] = (single_kernel(y + e, sm) - single_kernel(y - e, sm)) / (2.0 * step);
      }
      const double err = (fd - grad_kernel(y, sm)).norm();
      if (prev > 1e-11) EXPECT_LT(err, 0.3 * prev);
      prev = err;
      EXPECT_LT(err, 1e-5);
    }
  }
}

TEST(SingleKernel, PlaneMomentOfOnSurfaceVariantVanishes) {
  // int_{R^2} (G_d - G) dA = -(delta/2) int_0^inf (s(r) - 1) dr, by composite Simpson.
  auto integral = [](KernelVariant v, double delta) {
    const Smoothing sm(delta, v);
    const int n = 20000;
    const double R = 8.0;
    const double hs = R / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double r = i * hs;
      const double f = -0.5 * delta * (single_factor(r * delta, sm) - 1.0);
      sum += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return sum * hs / 3.0;
  };
  EXPECT_LT(std::abs(integral(KernelVariant::on_surface, 0.1)), 1e-12);
  const double a = integral(KernelVariant::near, 0.1);
  const double b = integral(KernelVariant::near, 0.05);
  EXPECT_NEAR(a, 0.1 / (2.0 * std::sqrt(pi)), 1e-12);
  EXPECT_NEAR(a / b, 2.0, 1e-10);
}

TEST(Smoothing, RejectsNonPositiveDelta) {
  EXPECT_THROW(Smoothing(0.0), Error);
  EXPECT_THROW(Smoothing(-1.0), Error);
}
