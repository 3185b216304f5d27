#include "layerpot/surface_quadrature.hpp"
#include "layerpot/surfaces.hpp"

#include <gtest/gtest.h>

using namespace layerpot;

namespace {

NodeSet nodes_for(const LevelSurface& s, int n) {
  const double L = 1.1;
  return generate_nodes(s, 2.0 * L / n, PouParams{}, Box{Vec3::Constant(-L), Vec3::Constant(L)});
}

}  // namespace

TEST(Quadrature, NodesLieOnSurfaceAndLattice) {
  const SurfacePtr s = make_surface("rot-ellipsoid");
  const NodeSet set = nodes_for(*s, 32);
  ASSERT_GT(set.size(), 1000u);
  const double cos_t = set.pou.cos_theta();
  for (const auto& nd : set.nodes) {
    EXPECT_NEAR(s->value(nd.pos), 0.0, 1e-11);
    EXPECT_NEAR(nd.zeta[0] + nd.zeta[1] + nd.zeta[2], 1.0, 1e-14);
    bool any = false;
    for (int k = 0; k < 3; ++k) {
      if (!nd.chart[k]) continue;
      any = true;
      EXPECT_GE(std::abs(nd.n[k]), cos_t);
      const auto [a, c] = chart_axes(k);
      EXPECT_NEAR(nd.pos[a], nd.lattice[k][0] * set.h, 1e-12);
      EXPECT_NEAR(nd.pos[c], nd.lattice[k][1] * set.h, 1e-12);
    }
    EXPECT_TRUE(any);
  }
}

TEST(Quadrature, SphereAreaConvergesRapidly) {
  const Sphere s(1.0);
  double prev = 0.0;
  for (const int n : {32, 64}) {
    const double err = std::abs(integrate_smooth(nodes_for(s, n), [](const Vec3&) { return 1.0; }) -
                                4.0 * pi) / (4.0 * pi);
    if (prev > 0.0) EXPECT_LT(err, prev / 16.0);
    prev = err;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Quadrature, OddIntegrandVanishes) {
  const Sphere s(1.0);
  EXPECT_NEAR(integrate_smooth(nodes_for(s, 32), [](const Vec3& x) { return x[0]; }), 0.0, 1e-12);
}

TEST(Quadrature, SecondMomentOfSphere) {
  const Sphere s(1.0);
  const double v = integrate_smooth(nodes_for(s, 64), [](const Vec3& x) { return x[2] * x[2]; });
  EXPECT_NEAR(v, 4.0 * pi / 3.0, 1e-4);
}

TEST(Quadrature, SurfaceOutsideBoxHasNoNodes) {
  const Sphere s(0.2, Vec3(5.0, 5.0, 5.0));
  EXPECT_EQ(nodes_for(s, 16).size(), 0u);
}

TEST(Quadrature, NoDuplicateNodes) {
  const SurfacePtr s = make_surface("torus");
  const NodeSet set = nodes_for(*s, 32);
  std::vector<std::array<double, 3>> pts;
  for (const auto& nd : set.nodes) pts.push_back({nd.pos[0], nd.pos[1], nd.pos[2]});
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec3 a(pts[i][0], pts[i][1], pts[i][2]);
    const Vec3 b(pts[i - 1][0], pts[i - 1][1], pts[i - 1][2]);
    EXPECT_GT((a - b).norm(), 1e-9);
  }
}

TEST(Quadrature, ChartIndexFindsNodes) {
  const Sphere s(1.0);
  const NodeSet set = nodes_for(s, 32);
  const ChartIndex idx(set);
  for (std::size_t i = 0; i < set.size(); i += 37) {
    const auto& nd = set.nodes[i];
    for (int k = 0; k < 3; ++k) {
      if (!nd.chart[k]) continue;
      const auto* hit = idx.at(k, nd.lattice[k][0], nd.lattice[k][1]);
      ASSERT_NE(hit, nullptr);
      EXPECT_NE(std::find(hit->begin(), hit->end(), i), hit->end());
    }
  }
}

TEST(Quadrature, WeightFormula) {
  QuadNode nd;
  nd.chart = {true, false, true};
  nd.zeta = {0.25, 0.5, 0.25};
  nd.w_axis = {2.0, 0.0, 4.0};
  EXPECT_DOUBLE_EQ(nd.weight(0.1), 0.01 * (0.5 + 1.0));
}
