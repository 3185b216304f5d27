#pragma once

#include "layerpot/common.hpp"

#include <memory>

namespace layerpot {

/// A closed surface given as the zero set of a level-set function phi, with
/// phi < 0 inside the enclosed region and phi > 0 outside. Implementations
/// supply analytic first and second derivatives.
class LevelSurface {
 public:
  virtual ~LevelSurface() = default;

  virtual double value(const Vec3& x) const = 0;
  virtual Vec3 gradient(const Vec3& x) const = 0;
  virtual Mat3 hessian(const Vec3& x) const = 0;

  /// A box that contains the zero set.
  virtual Box bounding_box() const = 0;

  /// Length scale used to make tolerances relative.
  virtual double scale() const {
    const Box b = bounding_box();
    return (b.hi - b.lo).maxCoeff();
  }
};

/// Decomposition x = z + b n of a point near the surface.
struct NearPointFrame {
  Vec3 z;
  double b = 0.0;  // signed distance, negative inside
  Vec3 n;          // outward unit normal at z
  double lambda = 0.0;
  double mean_curvature = 0.0;
};

/// Monge-patch data for the chart x_axis = f(alpha) at a surface point.
struct ChartGeometry {
  int axis = 2;
  Mat2 g;
  Mat2 g_inv;
  double sqrt_g = 1.0;
  Vec2 nu;  // fractional lattice offsets of the chart coordinates, in [0,1)
  double gamma = 1.0;
  Vec2 f_grad;  // (f_1, f_2)
  Mat2 f_hess;  // f_ij
};

struct SurfaceLaplacianCoeffs {
  Mat2 g_inv;
  Vec2 c;
};

namespace detail {

inline Vec3 checked_gradient(const LevelSurface& s, const Vec3& x) {
  Vec3 g = s.gradient(x);
  const double norm = g.norm();
  if (!(norm > 1e-13 * std::max(1.0, s.scale()))) {
    throw DegenerateGradient("level-set gradient vanishes at " + format_point(x) +
                             "; the surface is under-resolved there");
  }
  return g;
}

// First and second derivatives of f in x_axis = f(alpha) by implicit
// differentiation of phi(alpha, f(alpha)) = 0.
inline void monge_derivatives(const Vec3& grad, const Mat3& hess, int axis, Vec2& f1, Mat2& f2) {
  const auto [a, c] = chart_axes(axis);
  const int idx[2] = {a, c};
  const double pk = grad[axis];
  for (int i = 0; i < 2; ++i) f1[i] = -grad[idx[i]] / pk;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const int ii = idx[i];
      const int jj = idx[j];
      f2(i, j) = -(hess(ii, jj) + hess(ii, axis) * f1[j] + hess(jj, axis) * f1[i] +
                   hess(axis, axis) * f1[i] * f1[j]) /
                 pk;
    }
  }
}

}  // namespace detail

/// Outward unit normal grad(phi)/|grad(phi)|.
inline Vec3 normal(const LevelSurface& surface, const Vec3& x) {
  return detail::checked_gradient(surface, x).normalized();
}

/// Mean curvature (k1 + k2)/2 from the level-set form
/// 2H = -|grad phi|^-3 (phi_ii phi_j^2 - phi_i phi_j phi_ij).
/// With the outward normal a sphere of radius R has H = -1/R.
inline double mean_curvature(const LevelSurface& surface, const Vec3& x) {
  const Vec3 g = detail::checked_gradient(surface, x);
  const Mat3 hs = surface.hessian(x);
  const double g2 = g.squaredNorm();
  const double num = hs.trace() * g2 - g.dot(hs * g);
  return -0.5 * num / (g2 * std::sqrt(g2));
}

/// Mean curvature from the Monge patch x_axis = f(alpha). The sign is positive
/// when phi increases along +e_axis.
inline double mean_curvature_monge(const LevelSurface& surface, const Vec3& x, int axis) {
  const Vec3 g = detail::checked_gradient(surface, x);
  if (std::abs(g[axis]) < 1e-14 * g.norm()) {
    throw ChartConditionViolated("Monge patch along axis " + std::to_string(axis) +
                                 " is singular at " + format_point(x));
  }
  Vec2 f1;
  Mat2 f2;
  detail::monge_derivatives(g, surface.hessian(x), axis, f1, f2);
  const double gdet = 1.0 + f1.squaredNorm();
  const double bracket = (1.0 + f1[1] * f1[1]) * f2(0, 0) + (1.0 + f1[0] * f1[0]) * f2(1, 1) -
                         2.0 * f1[0] * f1[1] * f2(0, 1);
  const double sign = g[axis] > 0.0 ? 1.0 : -1.0;
  return sign * 0.5 * bracket / (gdet * std::sqrt(gdet));
}

struct ProjectionOptions {
  double tolerance = 1e-12;
  int max_iterations = 50;
};

/// Closest point on the surface by damped Newton iteration on the Lagrange
/// system  z - x + mu grad phi(z) = 0,  phi(z) = 0.
inline NearPointFrame closest_point(const LevelSurface& surface, const Vec3& x, double delta,
                                    const ProjectionOptions& opts = {}) {
  const double scale = std::max(1.0, surface.scale());

  auto residual = [&](const Vec3& z, double mu, Eigen::Vector4d& r) {
    const Vec3 g = surface.gradient(z);
    r.head<3>() = z - x + mu * g;
    r[3] = surface.value(z);
  };

  Vec3 z = x;
  double mu = 0.0;
  {
    const double phi = surface.value(x);
    const Vec3 g = detail::checked_gradient(surface, x);
    const double g2 = g.squaredNorm();
    z = x - (phi / g2) * g;
    mu = phi / g2;
  }

  Eigen::Vector4d r;
  residual(z, mu, r);
  bool converged = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Vec3 g = surface.gradient(z);
    // Converged when z is on the surface and x - z is parallel to the normal.
    const Vec3 d = x - z;
    const double align = d.cross(g).norm() / std::max(g.norm(), 1e-300);
    if (std::abs(r[3]) <= opts.tolerance * g.norm() * scale && align <= opts.tolerance * scale) {
      converged = true;
      break;
    }
    Eigen::Matrix4d jac = Eigen::Matrix4d::Zero();
    jac.topLeftCorner<3, 3>() = Mat3::Identity() + mu * surface.hessian(z);
    jac.block<3, 1>(0, 3) = g;
    jac.block<1, 3>(3, 0) = g.transpose();
    const Eigen::Vector4d step = jac.fullPivLu().solve(-r);

    double t = 1.0;
    const double r0 = r.norm();
    Eigen::Vector4d r_new;
    for (int ls = 0; ls < 30; ++ls) {
      const Vec3 z_try = z + t * step.head<3>();
      const double mu_try = mu + t * step[3];
      residual(z_try, mu_try, r_new);
      if (r_new.norm() < r0 || t < 1e-6) {
        z = z_try;
        mu = mu_try;
        break;
      }
      t *= 0.5;
    }
    r = r_new;
  }
  if (!converged) {
    throw ProjectionFailure("closest-point iteration did not converge for x = " +
                            format_point(x) + "; refine h or move the point closer");
  }

  NearPointFrame frame;
  frame.z = z;
  frame.n = normal(surface, z);
  frame.b = (x - z).dot(frame.n);
  frame.lambda = frame.b / delta;
  frame.mean_curvature = mean_curvature(surface, z);
  return frame;
}

/// Fractional offset of a coordinate relative to the lattice h Z, in [0,1).
inline double lattice_offset(double coord, double h) {
  const double t = coord / h;
  double nu = t - std::floor(t);
  if (nu >= 1.0) nu = 0.0;
  if (nu < 0.0) nu = 0.0;
  return nu;
}

/// Metric data of the Monge chart along `axis` at surface point z.
/// Requires |n(z) . e_axis| >= min_gamma.
inline ChartGeometry chart_geometry(const LevelSurface& surface, const Vec3& z, int axis,
                                    double h, double min_gamma) {
  const Vec3 grad = detail::checked_gradient(surface, z);
  const double gamma = std::abs(grad[axis]) / grad.norm();
  if (gamma < min_gamma * (1.0 - 1e-12)) {
    throw ChartConditionViolated("chart " + std::to_string(axis) + " requested at " +
                                 format_point(z) + " where |n.e_k| = " + std::to_string(gamma));
  }
  ChartGeometry cg;
  cg.axis = axis;
  detail::monge_derivatives(grad, surface.hessian(z), axis, cg.f_grad, cg.f_hess);
  const double f1 = cg.f_grad[0];
  const double f2 = cg.f_grad[1];
  cg.g << 1.0 + f1 * f1, f1 * f2, f1 * f2, 1.0 + f2 * f2;
  const double det = 1.0 + f1 * f1 + f2 * f2;
  cg.g_inv << 1.0 + f2 * f2, -f1 * f2, -f1 * f2, 1.0 + f1 * f1;
  cg.g_inv /= det;
  cg.sqrt_g = std::sqrt(det);
  cg.gamma = gamma;
  const auto [a, c] = chart_axes(axis);
  cg.nu = Vec2(lattice_offset(z[a], h), lattice_offset(z[c], h));
  return cg;
}

/// Coefficients of the surface Laplacian in the Monge chart along `axis`:
///   Lap_S u = sum g^ij d_i d_j u + sum c_i d_i u,
///   c_i = g^-2 f_i [2 f_1 f_2 f_12 - (1 + f_2^2) f_11 - (1 + f_1^2) f_22].
inline SurfaceLaplacianCoeffs surface_laplacian_coeffs(const ChartGeometry& cg) {
  const double f1 = cg.f_grad[0];
  const double f2 = cg.f_grad[1];
  const double gdet = 1.0 + f1 * f1 + f2 * f2;
  const double bracket = 2.0 * f1 * f2 * cg.f_hess(0, 1) - (1.0 + f2 * f2) * cg.f_hess(0, 0) -
                         (1.0 + f1 * f1) * cg.f_hess(1, 1);
  SurfaceLaplacianCoeffs out;
  out.g_inv = cg.g_inv;
  out.c = cg.f_grad * (bracket / (gdet * gdet));
  return out;
}

inline SurfaceLaplacianCoeffs surface_laplacian_coeffs(const LevelSurface& surface, const Vec3& z,
                                                       int axis, double min_gamma) {
  return surface_laplacian_coeffs(chart_geometry(surface, z, axis, 1.0, min_gamma));
}

using SurfacePtr = std::shared_ptr<const LevelSurface>;

}  // namespace layerpot
