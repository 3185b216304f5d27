#pragma once

#include "layerpot/surface_quadrature.hpp"

#include <span>
#include <unordered_map>

namespace layerpot {

/// Quadrature nodes bucketed in cubic cells for radius queries.
class NodeGrid {
 public:
  NodeGrid(const NodeSet& set, double cell) : set_(&set), cell_(cell) {
    if (!(cell > 0.0)) throw Error("node grid cell size must be positive");
    for (std::size_t i = 0; i < set.size(); ++i) cells_[key(cell_of(set.nodes[i].pos))].push_back(i);
  }

  /// Calls visit(i) for every node within distance r of x.
  template <class Visit>
  void for_each_within(const Vec3& x, double r, Visit&& visit) const {
    const auto lo = cell_of(x.array() - r);
    const auto hi = cell_of(x.array() + r);
    const double r2 = r * r;
    for (auto i = lo[0]; i <= hi[0]; ++i) {
      for (auto j = lo[1]; j <= hi[1]; ++j) {
        for (auto k = lo[2]; k <= hi[2]; ++k) {
          const auto it = cells_.find(key({i, j, k}));
          if (it == cells_.end()) continue;
          for (const std::size_t q : it->second) {
            if ((set_->nodes[q].pos - x).squaredNorm() <= r2) visit(q);
          }
        }
      }
    }
  }

 private:
  using Cell = std::array<std::int64_t, 3>;

  Cell cell_of(const Vec3& x) const {
    return {static_cast<std::int64_t>(std::floor(x[0] / cell_)),
            static_cast<std::int64_t>(std::floor(x[1] / cell_)),
            static_cast<std::int64_t>(std::floor(x[2] / cell_))};
  }
  static std::uint64_t key(const Cell& c) {
    const auto u = [](std::int64_t v) { return static_cast<std::uint64_t>(v + (1ll << 20)) & 0x1fffffu; };
    return (u(c[0]) << 42) | (u(c[1]) << 21) | u(c[2]);
  }

  const NodeSet* set_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

/// Local fit of a node-sampled density around a surface point z.
struct SurfaceFit {
  double value = 0.0;
  Vec3 surface_grad = Vec3::Zero();  // tangential gradient
  double laplacian = 0.0;            // surface Laplacian
  std::size_t stencil = 0;
};

struct FitOptions {
  double radius = 3.0;  // stencil radius in units of h
  int degree = 3;       // 2 or 3
  std::size_t min_nodes = 8;
};

/// Least-squares polynomial in tangent-plane coordinates (u, v) at z over the
/// nodes within radius * h of z whose normals agree with n(z). Near z the
/// surface is the graph of a function over its tangent plane with zero slope
/// at z, so the metric is the identity there and its first derivatives vanish:
/// the fitted d_u, d_v give the surface gradient and d_uu + d_vv the surface
/// Laplacian.
inline SurfaceFit fit_density(const Vec3& z, const Vec3& n_z, std::span<const double> values,
                              const NodeSet& set, const NodeGrid& grid, const FitOptions& fo = {}) {
  if (fo.degree != 2 && fo.degree != 3) throw Error("density fit degree must be 2 or 3");
  const double h = set.h;
  const Vec3 t1 = (std::abs(n_z[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(n_z).normalized();
  const Vec3 t2 = n_z.cross(t1);

  std::vector<std::size_t> picked;
  picked.reserve(48);
  grid.for_each_within(z, fo.radius * h, [&](std::size_t q) {
    if (set.nodes[q].n.dot(n_z) > 0.5) picked.push_back(q);
  });
  const Eigen::Index cols = fo.degree == 2 ? 6 : 10;
  const std::size_t need = std::max(fo.min_nodes, static_cast<std::size_t>(cols) + 2);
  if (picked.size() < need) {
    throw InsufficientStencil("only " + std::to_string(picked.size()) + " nodes near " +
                              format_point(z) + " for the density fit (need " +
                              std::to_string(need) + ")");
  }
  std::sort(picked.begin(), picked.end());

  // Columns 1, u, v, u^2/2, uv, v^2/2[, u^3, u^2 v, u v^2, v^3] in units of h.
  Eigen::MatrixXd A(static_cast<Eigen::Index>(picked.size()), cols);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(picked.size()));
  for (std::size_t r = 0; r < picked.size(); ++r) {
    const Vec3 d = (set.nodes[picked[r]].pos - z) / h;
    const double u = d.dot(t1);
    const double v = d.dot(t2);
    auto row = A.row(static_cast<Eigen::Index>(r));
    row.head<6>() << 1.0, u, v, 0.5 * u * u, u * v, 0.5 * v * v;
    if (cols == 10) row.tail<4>() << u * u * u, u * u * v, u * v * v, v * v * v;
    rhs[static_cast<Eigen::Index>(r)] = values[picked[r]];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < cols) {
    throw InsufficientStencil("degenerate density-fit stencil near " + format_point(z));
  }
  const Eigen::VectorXd c = qr.solve(rhs);

  SurfaceFit fit;
  fit.value = c[0];
  fit.surface_grad = (c[1] * t1 + c[2] * t2) / h;
  fit.laplacian = (c[3] + c[5]) / (h * h);
  fit.stencil = picked.size();
  return fit;
}

/// Derivatives d_r of the density in the chart coordinates of chart `axis`:
/// the chart point is (alpha, f(alpha)), so d_r = grad_S . (e_r + f_r e_axis).
inline Vec2 chart_gradient(const SurfaceFit& fit, const ChartGeometry& cg) {
  const auto [a, c] = chart_axes(cg.axis);
  Vec3 d1 = Vec3::Zero();
  Vec3 d2 = Vec3::Zero();
  d1[a] = 1.0;
  d1[cg.axis] = cg.f_grad[0];
  d2[c] = 1.0;
  d2[cg.axis] = cg.f_grad[1];
  return {fit.surface_grad.dot(d1), fit.surface_grad.dot(d2)};
}

}  // namespace layerpot
