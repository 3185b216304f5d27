#include "layerpot/summation.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace layerpot;

namespace {

SourceSet random_sources(std::size_t m, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SourceSet s;
  s.charges.resize(2);
  s.dipoles.resize(1);
  for (std::size_t j = 0; j < m; ++j) {
    // points on a unit sphere, as a surface-like distribution
    s.positions.push_back(Vec3(u(rng), u(rng), u(rng)).normalized());
    s.charges[0].push_back(u(rng));
    s.charges[1].push_back(1.0);
    s.dipoles[0].push_back(Vec3(u(rng), u(rng), u(rng)));
  }
  return s;
}

std::vector<Vec3> random_targets(std::size_t m, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.1, 1.1);
  std::vector<Vec3> t;
  for (std::size_t i = 0; i < m; ++i) t.emplace_back(u(rng), u(rng), u(rng));
  return t;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(DirectSum, MatchesNaiveLoop) {
  const SourceSet src = random_sources(300, 1);
  const auto tg = random_targets(40, 2);
  const Smoothing sm(0.05);
  const SumResult r = direct_sum(tg, src, sm);
  ASSERT_EQ(r.channels, 3u);
  for (std::size_t t = 0; t < tg.size(); ++t) {
    double q0 = 0.0, q1 = 0.0, d0 = 0.0;
    for (std::size_t j = 0; j < src.size(); ++j) {
      const Vec3 y = src.positions[j] - tg[t];
      q0 += single_kernel(y, sm) * src.charges[0][j];
      q1 += single_kernel(y, sm) * src.charges[1][j];
      d0 += grad_kernel(y, sm).dot(src.dipoles[0][j]);
    }
    EXPECT_NEAR(r(t, 0, 0), q0, 1e-12);
    EXPECT_NEAR(r(t, 0, 1), q1, 1e-12);
    EXPECT_NEAR(r(t, 0, 2), d0, 1e-12);
  }
}

TEST(DirectSum, PermutationInvariant) {
  SourceSet src = random_sources(200, 3);
  const auto tg = random_targets(20, 4);
  const Smoothing sm(0.1);
  const SumResult a = direct_sum(tg, src, sm);
  std::vector<std::size_t> perm(src.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(5));
  SourceSet p = src;
  for (std::size_t j = 0; j < perm.size(); ++j) {
    p.positions[j] = src.positions[perm[j]];
    for (std::size_t c = 0; c < 2; ++c) p.charges[c][j] = src.charges[c][perm[j]];
    p.dipoles[0][j] = src.dipoles[0][perm[j]];
  }
  const SumResult b = direct_sum(tg, p, sm);
  for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(a.data[i], b.data[i], 1e-12);
}

TEST(DirectSum, SeveralSmoothingsEqualSeparateRuns) {
  const SourceSet src = random_sources(250, 6);
  const auto tg = random_targets(30, 7);
  const std::vector<Smoothing> sms{Smoothing(0.03), Smoothing(0.09), Smoothing(0.2)};
  const SumResult all = direct_sum(tg, src, sms);
  for (std::size_t s = 0; s < sms.size(); ++s) {
    const SumResult one = direct_sum(tg, src, sms[s]);
    for (std::size_t t = 0; t < tg.size(); ++t) {
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(all(t, s, c), one(t, 0, c), 1e-13);
    }
  }
}

TEST(DirectSum, NoSmoothingRejected) {
  const SourceSet src = random_sources(10, 8);
  const auto tg = random_targets(2, 9);
  EXPECT_THROW(direct_sum(tg, src, std::span<const Smoothing>{}), Error);
}

TEST(MomentIntegrals, BothBranchesMatchQuadrature) {
  for (const double c : {0.0, 0.3, 4.0, 11.0, 40.0}) {
    const int p = 10;
    std::vector<double> J(p + 1);
    detail::moment_integrals(c, p, J.data());
    for (int m = 0; m <= p; ++m) {
      // Simpson on [0, 1]
      const int n = 4000;
      double s = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double x = static_cast<double>(i) / n;
        const double f = std::pow(x, 2 * m) * std::exp(-c * x * x);
        s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
      }
      s /= 3.0 * n;
      EXPECT_NEAR(J[m] / s, 1.0, 1e-10) << "c=" << c << " m=" << m;
    }
  }
}

TEST(Treecode, SmallSeparationReproducesDirectSum) {
  const SourceSet src = random_sources(3000, 10);
  const auto tg = random_targets(200, 11);
  const Smoothing sm(0.05);
  TreecodeParams tp;
  tp.separation = 0.15;
  const SumResult tc = treecode_sum(tg, src, sm, tp);
  const SumResult dir = direct_sum(tg, src, sm);
  std::vector<double> diff(dir.data.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = tc.data[i] - dir.data[i];
  EXPECT_LT(max_abs(diff), 1e-11 * max_abs(dir.data));
}

TEST(Treecode, ErrorDecreasesWithDegree) {
  const SourceSet src = random_sources(3000, 12);
  const auto tg = random_targets(200, 13);
  const Smoothing sm(0.05);
  const SumResult dir = direct_sum(tg, src, sm);
  double prev = 1e300;
  for (const int p : {2, 4, 8, 12}) {
    TreecodeParams tp;
    tp.taylor_degree = p;
    const SumResult tc = treecode_sum(tg, src, sm, tp);
    std::vector<double> diff(dir.data.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = tc.data[i] - dir.data[i];
    const double err = max_abs(diff);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-5 * max_abs(dir.data));
}

TEST(Treecode, RejectsOnSurfaceKernelAndBadParameters) {
  const SourceSet src = random_sources(50, 14);
  EXPECT_THROW(Treecode(src, Smoothing(0.1, KernelVariant::on_surface), TreecodeParams{}),
               UnsupportedKernel);
  TreecodeParams bad;
  bad.separation = 1.5;
  EXPECT_THROW(Treecode(src, Smoothing(0.1), bad), Error);
}

TEST(Treecode, EmptySourcesGiveZero) {
  SourceSet src;
  src.charges.resize(1);
  const auto tg = random_targets(3, 15);
  const Treecode tc(src, Smoothing(0.1), TreecodeParams{});
  for (double v : tc.evaluate(tg)) EXPECT_EQ(v, 0.0);
}
