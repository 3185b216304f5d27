#pragma once

#include "layerpot/level_surface.hpp"

#include <fftw3.h>

#include <cstdint>
#include <limits>
#include <mutex>

namespace layerpot {

/// Nodes x = -L + (i, j, k) h, 0 <= i, j, k <= N, of the box (-L, L)^3 with
/// h = 2L/N. The unknowns of the Poisson problem are the interior nodes
/// 1 <= i, j, k <= N - 1; with N even the nodes lie on the lattice h Z^3.
struct BoxGrid {
  double half_width = 1.1;
  int n = 64;

  BoxGrid() = default;
  BoxGrid(double L, int cells) : half_width(L), n(cells) {
    if (cells < 2) throw Error("grid needs at least two cells per side");
    if (!(L > 0.0)) throw Error("box half-width must be positive");
  }

  double h() const { return 2.0 * half_width / n; }
  int interior() const { return n - 1; }
  std::size_t interior_count() const {
    const auto m = static_cast<std::size_t>(interior());
    return m * m * m;
  }
  Box box() const { return {Vec3::Constant(-half_width), Vec3::Constant(half_width)}; }

  Vec3 node(int i, int j, int k) const {
    return Vec3(-half_width + i * h(), -half_width + j * h(), -half_width + k * h());
  }

  /// Linear index of interior node (i, j, k), each in 1..N-1.
  std::size_t index(int i, int j, int k) const {
    const auto m = static_cast<std::size_t>(interior());
    return (static_cast<std::size_t>(i - 1) * m + static_cast<std::size_t>(j - 1)) * m +
           static_cast<std::size_t>(k - 1);
  }

  std::array<int, 3> ijk(std::size_t idx) const {
    const auto m = static_cast<std::size_t>(interior());
    const int k = static_cast<int>(idx % m) + 1;
    const int j = static_cast<int>((idx / m) % m) + 1;
    const int i = static_cast<int>(idx / (m * m)) + 1;
    return {i, j, k};
  }

  Vec3 node(std::size_t idx) const {
    const auto c = ijk(idx);
    return node(c[0], c[1], c[2]);
  }
};

inline constexpr std::array<std::array<int, 3>, 6> stencil_offsets = {
    {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

enum class NodeKind : std::uint8_t { regular, irregular };

/// Interior nodes labeled by whether their 7-point stencil crosses the surface,
/// i.e. some stencil edge joins nodes on opposite sides of {phi > 0}.
struct Classification {
  std::vector<NodeKind> kind;             // per interior node
  std::vector<std::size_t> irregular;     // interior indices, increasing
  std::vector<std::size_t> targets;       // irregular nodes and their interior stencil neighbors
  std::vector<bool> inside;               // phi < 0 per interior node
};

inline Classification classify_nodes(const BoxGrid& grid, const LevelSurface& surface) {
  const int n = grid.n;
  const auto stride = static_cast<std::size_t>(n + 1);
  std::vector<std::uint8_t> outside(stride * stride * stride);
  const Box sb = surface.bounding_box();
  parallel_for(0, stride, [&](std::size_t i) {
    for (std::size_t j = 0; j < stride; ++j) {
      for (std::size_t k = 0; k < stride; ++k) {
        const Vec3 x = grid.node(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k));
        // Points outside the bounding box are outside the surface.
        const bool out = !sb.contains(x) || surface.value(x) > 0.0;
        outside[(i * stride + j) * stride + k] = out ? 1 : 0;
      }
    }
  });
  auto at = [&](int i, int j, int k) {
    return outside[(static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(j)) * stride +
                   static_cast<std::size_t>(k)];
  };

  Classification c;
  c.kind.assign(grid.interior_count(), NodeKind::regular);
  c.inside.assign(grid.interior_count(), false);
  std::vector<bool> is_target(grid.interior_count(), false);
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      for (int k = 1; k < n; ++k) {
        const std::uint8_t s = at(i, j, k);
        const std::size_t idx = grid.index(i, j, k);
        c.inside[idx] = s == 0;
        for (const auto& o : stencil_offsets) {
          if (at(i + o[0], j + o[1], k + o[2]) != s) {
            c.kind[idx] = NodeKind::irregular;
            break;
          }
        }
        if (c.kind[idx] == NodeKind::irregular) {
          c.irregular.push_back(idx);
          is_target[idx] = true;
          for (const auto& o : stencil_offsets) {
            const int a = i + o[0];
            const int b = j + o[1];
            const int d = k + o[2];
            if (a >= 1 && a < n && b >= 1 && b < n && d >= 1 && d < n) {
              is_target[grid.index(a, b, d)] = true;
            }
          }
        }
      }
    }
  }
  for (std::size_t idx = 0; idx < is_target.size(); ++idx) {
    if (is_target[idx]) c.targets.push_back(idx);
  }
  return c;
}

/// 7-point discrete Laplacian with zero values outside the interior.
inline std::vector<double> apply_laplacian(const BoxGrid& grid, const std::vector<double>& u) {
  const int n = grid.n;
  const double ih2 = 1.0 / (grid.h() * grid.h());
  std::vector<double> out(u.size(), 0.0);
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      for (int k = 1; k < n; ++k) {
        double s = -6.0 * u[grid.index(i, j, k)];
        for (const auto& o : stencil_offsets) {
          const int a = i + o[0];
          const int b = j + o[1];
          const int d = k + o[2];
          if (a >= 1 && a < n && b >= 1 && b < n && d >= 1 && d < n) s += u[grid.index(a, b, d)];
        }
        out[grid.index(i, j, k)] = s * ih2;
      }
    }
  }
  return out;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Solves the 7-point discrete Poisson equation lap_h u = f on the interior
/// nodes with zero Dirichlet data, by diagonalizing lap_h with the type-I
/// discrete sine transform in each direction.
inline std::vector<double> solve_poisson(const BoxGrid& grid, std::vector<double> f) {
  const int m = grid.interior();
  if (f.size() != grid.interior_count()) throw Error("forcing has the wrong size");
  fftw_plan plan = nullptr;
  {
    const std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    plan = fftw_plan_r2r_3d(m, m, m, f.data(), f.data(), FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00,
                            FFTW_ESTIMATE);
  }
  if (!plan) throw Error("FFTW could not plan the sine transform");
  fftw_execute(plan);

  const double h2 = grid.h() * grid.h();
  std::vector<double> eig(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) eig[static_cast<std::size_t>(k)] = 2.0 * std::cos(pi * (k + 1) / grid.n) - 2.0;
  // The unnormalized transform applied twice scales by 2N per direction.
  const double norm = 1.0 / std::pow(2.0 * grid.n, 3);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        const double lam = (eig[static_cast<std::size_t>(i)] + eig[static_cast<std::size_t>(j)] +
                            eig[static_cast<std::size_t>(k)]) / h2;
        f[grid.index(i + 1, j + 1, k + 1)] *= norm / lam;
      }
    }
  }
  fftw_execute(plan);
  {
    const std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return f;
}

/// Marker for interior nodes without a near-surface value.
inline constexpr double missing_value = std::numeric_limits<double>::quiet_NaN();

/// Extends values known near the surface to the whole grid: solves
/// lap_h u_h = lap_h u_near at irregular nodes and 0 at regular nodes, with zero
/// boundary data. `near_values` is indexed by interior node and must be finite
/// at every irregular node and its interior stencil neighbors.
inline std::vector<double> extend_potential(const BoxGrid& grid, const Classification& cls,
                                            const std::vector<double>& near_values) {
  if (near_values.size() != grid.interior_count()) throw Error("near values have the wrong size");
  const int n = grid.n;
  const double ih2 = 1.0 / (grid.h() * grid.h());
  std::vector<double> f(grid.interior_count(), 0.0);
  std::vector<std::size_t> missing;
  for (const std::size_t idx : cls.irregular) {
    const auto c = grid.ijk(idx);
    const double u0 = near_values[idx];
    if (!std::isfinite(u0)) missing.push_back(idx);
    double s = -6.0 * u0;
    for (const auto& o : stencil_offsets) {
      const int a = c[0] + o[0];
      const int b = c[1] + o[1];
      const int d = c[2] + o[2];
      if (!(a >= 1 && a < n && b >= 1 && b < n && d >= 1 && d < n)) continue;
      const std::size_t nb = grid.index(a, b, d);
      if (!std::isfinite(near_values[nb])) missing.push_back(nb);
      s += near_values[nb];
    }
    f[idx] = s * ih2;
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::string msg = std::to_string(missing.size()) + " stencil nodes lack near-surface values:";
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) {
      const auto c = grid.ijk(missing[i]);
      msg += " (" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + ")";
    }
    if (missing.size() > 10) msg += " ...";
    throw MissingValues(msg);
  }
  return solve_poisson(grid, std::move(f));
}

}  // namespace layerpot
