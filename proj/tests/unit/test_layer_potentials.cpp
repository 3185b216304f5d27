#include "layerpot/layer_potentials.hpp"
#include "layerpot/surfaces.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace layerpot;

namespace {

struct Fixture {
  SurfacePtr surface;
  NodeSet set;

  Fixture(const std::string& id, int n) : surface(make_surface(id)) {
    const double L = 1.1;
    set = generate_nodes(*surface, 2.0 * L / n, PouParams{},
                         Box{Vec3::Constant(-L), Vec3::Constant(L)});
  }
};

// Points z + b n with |b| in [lo, hi], on the given side of the surface.
std::vector<Vec3> offset_points(const NodeSet& set, int count, double lo, double hi, int side,
                                unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
  std::uniform_real_distribution<double> mag(lo, hi);
  std::vector<Vec3> pts;
  for (int i = 0; i < count; ++i) {
    const auto& nd = set.nodes[pick(rng)];
    pts.push_back(nd.pos + side * mag(rng) * nd.n);
  }
  return pts;
}

}  // namespace

TEST(DensityFit, ReproducesConstant) {
  const Fixture s("sphere", 32);
  const LayerPotentials lp(s.surface, s.set);
  const Density d = Density::constant(s.set, 2.5);
  const SurfaceFit f = lp.density_fit(Vec3(0.6, 0.0, 0.8), d);
  EXPECT_NEAR(f.value, 2.5, 1e-13);
  EXPECT_LT(f.surface_grad.norm(), 1e-11);
  EXPECT_NEAR(f.laplacian, 0.0, 1e-9);
}

TEST(DensityFit, HeightFunctionOnSphere) {
  // phi = y3: grad_S phi = e3 - n3 n, Lap_S phi = -2 y3
  const Fixture s("sphere", 64);
  const LayerPotentials lp(s.surface, s.set);
  const Density d = Density::sample(s.set, [](const Vec3& y) { return y[2]; });
  const Vec3 z = Vec3(0.3, -0.5, 0.6).normalized();
  const SurfaceFit f = lp.density_fit(z, d);
  EXPECT_NEAR(f.value, z[2], 5e-6);
  EXPECT_LT((f.surface_grad - (Vec3::UnitZ() - z[2] * z)).norm(), 1e-4);
  EXPECT_NEAR(f.laplacian, -2.0 * z[2], 2e-2);
}

TEST(DensityFit, ChartDerivativesOnPlaneLikePatch) {
  // near the top of the sphere the chart along e3 has f_grad ~ 0, so the chart
  // derivatives of phi = y1 + 2 y2 are close to (1, 2)
  const Fixture s("sphere", 64);
  const LayerPotentials lp(s.surface, s.set);
  const Density d = Density::sample(s.set, [](const Vec3& y) { return y[0] + 2.0 * y[1]; });
  const Vec2 g = lp.chart_derivatives(Vec3::UnitZ(), d, 2);
  EXPECT_NEAR(g[0], 1.0, 1e-4);
  EXPECT_NEAR(g[1], 2.0, 1e-4);
}

TEST(DensityFit, TooSmallStencilIsReported) {
  const Fixture s("sphere", 32);
  EvalOptions o;
  o.fit.radius = 0.5;
  const LayerPotentials lp(s.surface, s.set, o);
  EXPECT_THROW(lp.density_fit(Vec3::UnitZ(), Density::constant(s.set, 1.0)), InsufficientStencil);
}

TEST(Density, ValidationCatchesSizeAndNaN) {
  const Fixture s("sphere", 16);
  Density d = Density::constant(s.set, 1.0);
  EXPECT_NO_THROW(d.validate(s.set));
  d.values[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(d.validate(s.set), Error);
  d.values.pop_back();
  EXPECT_THROW(d.validate(s.set), Error);
}

TEST(GaussLaw, ConstantDoubleLayerIsIndicator) {
  for (const std::string id : {"rot-ellipsoid", "torus"}) {
    const Fixture s(id, 32);
    const LayerPotentials lp(s.surface, s.set);
    const Density one = Density::constant(s.set, 1.0);
    const Density zero = Density::constant(s.set, 0.0);
    const double h = s.set.h;
    const std::vector<double> deltas{h, 2.0 * h};
    for (const int side : {-1, 1}) {
      const auto pts = offset_points(s.set, 20, 0.01 * h, 3.0 * h, side, 5);
      const BatchResult r = lp.evaluate_near(pts, one, zero, deltas);
      for (std::size_t t = 0; t < pts.size(); ++t) {
        for (std::size_t k = 0; k < deltas.size(); ++k) {
          EXPECT_NEAR(r.at(t, k).dbl.total, side < 0 ? 1.0 : 0.0, 1e-12) << id;
        }
      }
    }
    std::vector<std::size_t> ids{0, s.set.size() / 2, s.set.size() - 1};
    const BatchResult r = lp.evaluate_on(ids, one, zero, deltas);
    for (std::size_t t = 0; t < ids.size(); ++t) EXPECT_NEAR(r.at(t, 0).dbl.total, 0.5, 1e-12);
  }
}

TEST(SphereOracle, SingleLayerOfConstant) {
  // S[1] = -1 inside the unit sphere and -1/|x| outside
  const Fixture s("sphere", 32);
  const LayerPotentials lp(s.surface, s.set);
  const Density one = Density::constant(s.set, 1.0);
  const double h = s.set.h;
  for (const int side : {-1, 1}) {
    for (const Vec3& x : offset_points(s.set, 15, 0.0, 2.0 * h, side, 9)) {
      const double exact = x.norm() < 1.0 ? -1.0 : -1.0 / x.norm();
      EXPECT_NEAR(lp.single_layer_near(x, one, 2.0 * h).total, exact, 1e-3);
    }
  }
  EXPECT_NEAR(lp.single_layer_on(7, one, 2.0 * h).total, -1.0, 1e-3);
}

TEST(SphereOracle, DoubleLayerOfHeight) {
  // D[y3] = (2/3) x3 inside, -x3 / (3 |x|^3) outside, x3 / 6 on the surface
  const Fixture s("sphere", 32);
  const LayerPotentials lp(s.surface, s.set);
  const Density phi = Density::sample(s.set, [](const Vec3& y) { return y[2]; });
  const double h = s.set.h;
  for (const int side : {-1, 1}) {
    for (const Vec3& x : offset_points(s.set, 15, 0.0, 2.0 * h, side, 13)) {
      const double r = x.norm();
      const double exact = r < 1.0 ? 2.0 * x[2] / 3.0 : -x[2] / (3.0 * r * r * r);
      EXPECT_NEAR(lp.double_layer_near(x, phi, 2.0 * h).total, exact, 2e-3);
    }
  }
  const std::size_t node = s.set.size() / 3;
  EXPECT_NEAR(lp.double_layer_on(node, phi, 2.0 * h).total, s.set.nodes[node].pos[2] / 6.0, 2e-3);
}

TEST(LayerPotentials, TreecodeBackendMatchesDirectNearSurface) {
  const Fixture s("rot-ellipsoid", 32);
  EvalOptions o;
  o.backend = SumBackend::treecode;
  o.treecode.separation = 0.2;
  const LayerPotentials tc(s.surface, s.set, o);
  const LayerPotentials dir(s.surface, s.set);
  const Density phi = Density::sample(s.set, [](const Vec3& y) { return y[0] * y[1]; });
  const Density psi = Density::sample(s.set, [](const Vec3& y) { return 1.0 + y[2]; });
  const auto pts = offset_points(s.set, 10, 0.0, 0.1, 1, 2);
  const std::vector<double> deltas{0.1};
  const BatchResult a = tc.evaluate_near(pts, phi, psi, deltas);
  const BatchResult b = dir.evaluate_near(pts, phi, psi, deltas);
  for (std::size_t t = 0; t < pts.size(); ++t) {
    EXPECT_NEAR(a.at(t, 0).single.total, b.at(t, 0).single.total, 1e-10);
    EXPECT_NEAR(a.at(t, 0).dbl.total, b.at(t, 0).dbl.total, 1e-10);
  }
  const std::vector<std::size_t> ids{0};
  EXPECT_THROW(tc.evaluate_on(ids, phi, psi, deltas), UnsupportedKernel);
}

TEST(LayerPotentials, ReportPartsAddUp) {
  const Fixture s("rot-ellipsoid", 32);
  const LayerPotentials lp(s.surface, s.set);
  const Density psi = Density::sample(s.set, [](const Vec3& y) { return y[0]; });
  const PotentialReport r = lp.single_layer_near(s.set.nodes[10].pos + 0.02 * s.set.nodes[10].n, psi, 0.05);
  EXPECT_NEAR(r.total, r.raw_sum + r.t1_or_n1 + r.t2_or_n2 + r.jump_term, 1e-15);
  EXPECT_EQ(r.jump_term, 0.0);
}
