#pragma once

#include "layerpot/level_surface.hpp"
#include "layerpot/sphere_pou.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <unordered_map>

namespace layerpot {

/// A surface point that projects onto a lattice point of one or more
/// coordinate planes.
struct QuadNode {
  Vec3 pos;
  Vec3 n;
  std::array<double, 3> zeta{};    // sigma(n(pos)), sums to one
  std::array<double, 3> w_axis{};  // 1/|n.e_k| for member charts, 0 otherwise
  std::array<bool, 3> chart{};     // membership in R_{h,k,theta}
  std::array<std::array<std::int64_t, 2>, 3> lattice{};  // (j1, j2) per member chart

  /// h^2 sum_k zeta_k / |n.e_k| over the member charts.
  double weight(double h) const {
    double w = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (chart[k]) w += zeta[k] * w_axis[k];
    }
    return h * h * w;
  }
};

struct NodeSet {
  double h = 0.0;
  PouParams pou;
  std::vector<QuadNode> nodes;
  std::array<std::size_t, 3> counts{};  // nodes per chart
  double h0 = 0.0;                      // resolution estimate 2 C1 cos(theta) / C2
  std::vector<std::string> warnings;

  std::size_t size() const { return nodes.size(); }

  std::vector<double> weights() const {
    std::vector<double> w(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) w[i] = nodes[i].weight(h);
    return w;
  }
};

struct LineSearchOptions {
  double rel_tolerance = 1e-13;  // times the box width
  int max_iterations = 200;
};

namespace detail {

// Root of t -> phi(x with x_axis = t) in [t0, t1], given a sign change.
inline double refine_root(const LevelSurface& s, Vec3 x, int axis, double t0, double t1,
                          double f0, double tol, int max_iter, bool& ok) {
  double lo = t0;
  double hi = t1;
  double flo = f0;
  double t = 0.5 * (lo + hi);
  ok = false;
  for (int it = 0; it < max_iter; ++it) {
    x[axis] = t;
    const double f = s.value(x);
    if (f == 0.0) {
      ok = true;
      return t;
    }
    if ((f > 0.0) == (flo > 0.0)) {
      lo = t;
      flo = f;
    } else {
      hi = t;
    }
    if (hi - lo <= tol) {
      ok = true;
      return 0.5 * (lo + hi);
    }
    const double df = s.gradient(x)[axis];
    double next = df != 0.0 ? t - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    // Newton has converged when its step drops below the tolerance.
    if (std::abs(next - t) <= 0.25 * tol) {
      ok = true;
      return next;
    }
    t = next;
  }
  return t;
}

inline bool on_lattice(double c, double h, std::int64_t& j) {
  const double t = c / h;
  const double r = std::round(t);
  if (std::abs(t - r) <= 1e-10) {
    j = static_cast<std::int64_t>(r);
    return true;
  }
  return false;
}

}  // namespace detail

/// Quadrature nodes R_{h,k,theta}, k = 1..3, for the part of the surface inside
/// `box`: along every lattice line parallel to e_k, phi is sampled at spacing h,
/// each sign change is refined to a root, and the root is kept when
/// |n.e_k| >= cos(theta). Ordering is (axis, j1, j2, root along the line).
inline NodeSet generate_nodes(const LevelSurface& surface, double h, const PouParams& pou,
                              const Box& box, const LineSearchOptions& opts = {}) {
  pou.validate();
  NodeSet set;
  set.h = h;
  set.pou = pou;

  Box sb = surface.bounding_box();
  sb.lo = sb.lo.cwiseMax(box.lo);
  sb.hi = sb.hi.cwiseMin(box.hi);
  const double width = (box.hi - box.lo).maxCoeff();
  const double tol = opts.rel_tolerance * width;
  const double cos_t = pou.cos_theta();

  std::vector<QuadNode> raw;
  std::vector<int> raw_axis;
  for (int axis = 0; axis < 3; ++axis) {
    const auto [a, c] = chart_axes(axis);
    const auto j1_lo = static_cast<std::int64_t>(std::ceil(sb.lo[a] / h));
    const auto j1_hi = static_cast<std::int64_t>(std::floor(sb.hi[a] / h));
    const auto j2_lo = static_cast<std::int64_t>(std::ceil(sb.lo[c] / h));
    const auto j2_hi = static_cast<std::int64_t>(std::floor(sb.hi[c] / h));
    const auto m_lo = static_cast<std::int64_t>(std::floor(sb.lo[axis] / h)) - 1;
    const auto m_hi = static_cast<std::int64_t>(std::ceil(sb.hi[axis] / h)) + 1;
    for (std::int64_t j1 = j1_lo; j1 <= j1_hi; ++j1) {
      for (std::int64_t j2 = j2_lo; j2 <= j2_hi; ++j2) {
        Vec3 x;
        x[a] = static_cast<double>(j1) * h;
        x[c] = static_cast<double>(j2) * h;
        x[axis] = static_cast<double>(m_lo) * h;
        double f_prev = surface.value(x);
        for (std::int64_t m = m_lo; m < m_hi; ++m) {
          const double t0 = static_cast<double>(m) * h;
          const double t1 = static_cast<double>(m + 1) * h;
          x[axis] = t1;
          const double f_next = surface.value(x);
          if ((f_prev > 0.0) != (f_next > 0.0)) {
            bool ok = false;
            const double root = detail::refine_root(surface, x, axis, t0, t1, f_prev, tol,
                                                    opts.max_iterations, ok);
            if (!ok) {
              throw RootRefinementFailure("root refinement failed on the line along axis " +
                                          std::to_string(axis) + " at (j1, j2) = (" +
                                          std::to_string(j1) + ", " + std::to_string(j2) + ")");
            }
            Vec3 p = x;
            p[axis] = root;
            const Vec3 n = normal(surface, p);
            if (std::abs(n[axis]) >= cos_t) {
              QuadNode node;
              node.pos = p;
              node.n = n;
              node.zeta = pou_weights(n, pou);
              node.chart[axis] = true;
              node.w_axis[axis] = 1.0 / std::abs(n[axis]);
              node.lattice[axis] = {j1, j2};
              raw.push_back(node);
              raw_axis.push_back(axis);
            }
          }
          f_prev = f_next;
        }
      }
    }
  }

  // A point on the lattice lines of two planes is found once per plane; keep
  // the copy from the lowest axis and mark every chart it belongs to.
  set.nodes.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    QuadNode node = raw[i];
    const int own = raw_axis[i];
    bool drop = false;
    for (int k = 0; k < 3 && !drop; ++k) {
      if (k == own || std::abs(node.n[k]) < cos_t) continue;
      const auto [a, c] = chart_axes(k);
      std::int64_t j1 = 0;
      std::int64_t j2 = 0;
      if (detail::on_lattice(node.pos[a], h, j1) && detail::on_lattice(node.pos[c], h, j2)) {
        if (k < own) {
          drop = true;
        } else {
          node.chart[k] = true;
          node.w_axis[k] = 1.0 / std::abs(node.n[k]);
          node.lattice[k] = {j1, j2};
        }
      }
    }
    if (!drop) set.nodes.push_back(node);
  }
  for (const auto& node : set.nodes) {
    for (int k = 0; k < 3; ++k) set.counts[k] += node.chart[k] ? 1 : 0;
  }

  // Resolution diagnostic over the generated nodes.
  double c1 = 1e300;
  double c2 = 0.0;
  for (const auto& node : set.nodes) {
    c1 = std::min(c1, surface.gradient(node.pos).norm());
    const Eigen::SelfAdjointEigenSolver<Mat3> es(surface.hessian(node.pos), Eigen::EigenvaluesOnly);
    c2 = std::max(c2, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  set.h0 = c2 > 0.0 ? 2.0 * c1 * cos_t / c2 : 1e300;
  if (!set.nodes.empty() && h >= set.h0) {
    set.warnings.push_back("h = " + std::to_string(h) + " exceeds the resolution estimate h0 = " +
                           std::to_string(set.h0) + "; roots may be missed");
  }
  return set;
}

/// h^2 sum_k sum_{x in R_{h,k,theta}} sigma_k(n(x)) f(x) / |n(x).e_k|.
template <class Field>
double integrate_smooth(const NodeSet& set, Field&& f) {
  double sum = 0.0;
  for (const auto& node : set.nodes) sum += node.weight(set.h) * f(node.pos);
  return sum;
}

/// One node per line: x y z nx ny nz zeta1 zeta2 zeta3 w1 w2 w3.
inline void write_nodes(std::ostream& out, const NodeSet& set) {
  char buf[512];
  for (const auto& nd : set.nodes) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  nd.pos[0], nd.pos[1], nd.pos[2], nd.n[0], nd.n[1], nd.n[2], nd.zeta[0],
                  nd.zeta[1], nd.zeta[2], nd.w_axis[0], nd.w_axis[1], nd.w_axis[2]);
    out << buf;
  }
}

inline void write_nodes(const std::string& path, const NodeSet& set) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open node dump file '" + path + "'");
  write_nodes(out, set);
}

/// Nodes of each chart keyed by their lattice point, for stencil lookups.
class ChartIndex {
 public:
  explicit ChartIndex(const NodeSet& set) : h_(set.h) {
    for (std::size_t i = 0; i < set.nodes.size(); ++i) {
      const auto& nd = set.nodes[i];
      for (int k = 0; k < 3; ++k) {
        if (nd.chart[k]) maps_[k][key(nd.lattice[k][0], nd.lattice[k][1])].push_back(i);
      }
    }
  }

  /// Node indices of chart `axis` whose lattice point is (j1, j2).
  const std::vector<std::size_t>* at(int axis, std::int64_t j1, std::int64_t j2) const {
    const auto it = maps_[axis].find(key(j1, j2));
    return it == maps_[axis].end() ? nullptr : &it->second;
  }

  double h() const { return h_; }

 private:
  static std::uint64_t key(std::int64_t j1, std::int64_t j2) {
    return (static_cast<std::uint64_t>(j1 + (1ll << 30)) << 32) ^
           static_cast<std::uint64_t>(j2 + (1ll << 30));
  }

  double h_;
  std::array<std::unordered_map<std::uint64_t, std::vector<std::size_t>>, 3> maps_;
};

}  // namespace layerpot
