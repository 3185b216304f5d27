#pragma once

#include "layerpot/level_surface.hpp"

#include <string_view>

namespace layerpot {

/// |x - c|^2 - R^2
class Sphere final : public LevelSurface {
 public:
  explicit Sphere(double radius = 1.0, Vec3 center = Vec3::Zero())
      : radius_(radius), center_(std::move(center)) {}

  double value(const Vec3& x) const override { return (x - center_).squaredNorm() - radius_ * radius_; }
  Vec3 gradient(const Vec3& x) const override { return 2.0 * (x - center_); }
  Mat3 hessian(const Vec3&) const override { return 2.0 * Mat3::Identity(); }
  Box bounding_box() const override {
    return {center_.array() - radius_, center_.array() + radius_};
  }

  double radius() const { return radius_; }

 private:
  double radius_;
  Vec3 center_;
};

/// Signed distance to the plane through `point` with unit normal `n`. Not a
/// closed surface; used to check chart formulas and flat-lattice corrections.
class Plane final : public LevelSurface {
 public:
  explicit Plane(Vec3 n = Vec3::UnitZ(), Vec3 point = Vec3::Zero())
      : n_(n.normalized()), point_(std::move(point)) {}

  double value(const Vec3& x) const override { return n_.dot(x - point_); }
  Vec3 gradient(const Vec3&) const override { return n_; }
  Mat3 hessian(const Vec3&) const override { return Mat3::Zero(); }
  Box bounding_box() const override {
    return {Vec3::Constant(-10.0), Vec3::Constant(10.0)};
  }
  double scale() const override { return 1.0; }

 private:
  Vec3 n_;
  Vec3 point_;
};

/// x^2/a^2 + y^2/b^2 + z^2/c^2 - 1 in body coordinates, rotated by R:
/// phi(x) = q(R^T x).
class Ellipsoid final : public LevelSurface {
 public:
  Ellipsoid(double a, double b, double c, Mat3 rotation = Mat3::Identity())
      : axes_(a, b, c), rot_(std::move(rotation)) {
    diag_ = axes_.array().square().inverse().matrix();
  }

  double value(const Vec3& x) const override {
    const Vec3 y = rot_.transpose() * x;
    return y.cwiseProduct(y).dot(diag_) - 1.0;
  }
  Vec3 gradient(const Vec3& x) const override {
    const Vec3 y = rot_.transpose() * x;
    return rot_ * (2.0 * diag_.cwiseProduct(y));
  }
  Mat3 hessian(const Vec3&) const override {
    return rot_ * (2.0 * diag_.asDiagonal().toDenseMatrix()) * rot_.transpose();
  }
  Box bounding_box() const override {
    Vec3 ext;
    for (int i = 0; i < 3; ++i) {
      ext[i] = std::sqrt((rot_.row(i).transpose().cwiseProduct(axes_)).squaredNorm());
    }
    return {-ext, ext};
  }

 private:
  Vec3 axes_;
  Vec3 diag_;
  Mat3 rot_;
};

/// (sqrt(x^2 + y^2) - c)^2 + z^2 - a^2: tube radius a, center-line radius c.
class Torus final : public LevelSurface {
 public:
  Torus(double a = 0.3, double c = 0.7) : a_(a), c_(c) {}

  double value(const Vec3& x) const override {
    const double rho = std::hypot(x[0], x[1]);
    return (rho - c_) * (rho - c_) + x[2] * x[2] - a_ * a_;
  }
  Vec3 gradient(const Vec3& x) const override {
    const double rho = std::max(std::hypot(x[0], x[1]), 1e-300);
    const double u = rho - c_;
    return {2.0 * u * x[0] / rho, 2.0 * u * x[1] / rho, 2.0 * x[2]};
  }
  Mat3 hessian(const Vec3& x) const override {
    const double rho = std::max(std::hypot(x[0], x[1]), 1e-300);
    const double u = rho - c_;
    const double ex = x[0] / rho;
    const double ey = x[1] / rho;
    Mat3 hs = Mat3::Zero();
    hs(0, 0) = 2.0 * (ex * ex + u * (1.0 - ex * ex) / rho);
    hs(1, 1) = 2.0 * (ey * ey + u * (1.0 - ey * ey) / rho);
    hs(0, 1) = hs(1, 0) = 2.0 * (ex * ey - u * ex * ey / rho);
    hs(2, 2) = 2.0;
    return hs;
  }
  Box bounding_box() const override {
    const double r = a_ + c_;
    return {Vec3(-r, -r, -a_), Vec3(r, r, a_)};
  }

 private:
  double a_;
  double c_;
};

/// Level c of a sum of Gaussians centered at the atoms:
/// phi = c - sum_k exp(-|x - x_k|^2 / r^2).
class Molecule final : public LevelSurface {
 public:
  Molecule(std::vector<Vec3> centers, double r, double level)
      : centers_(std::move(centers)), r_(r), level_(level) {}

  /// The four-atom tetrahedral molecule with r = 0.5, c = 0.6.
  static Molecule four_atom() {
    const double s3 = std::sqrt(3.0);
    const double s6 = std::sqrt(6.0);
    return Molecule({Vec3(s3 / 3.0, 0.0, -s6 / 12.0), Vec3(-s3 / 6.0, 0.5, -s6 / 12.0),
                     Vec3(-s3 / 6.0, -0.5, -s6 / 12.0), Vec3(0.0, 0.0, s6 / 4.0)},
                    0.5, 0.6);
  }

  double value(const Vec3& x) const override {
    double sum = 0.0;
    for (const auto& c : centers_) sum += std::exp(-(x - c).squaredNorm() / (r_ * r_));
    return level_ - sum;
  }
  Vec3 gradient(const Vec3& x) const override {
    Vec3 g = Vec3::Zero();
    const double inv_r2 = 1.0 / (r_ * r_);
    for (const auto& c : centers_) {
      const Vec3 d = x - c;
      g += (2.0 * inv_r2 * std::exp(-d.squaredNorm() * inv_r2)) * d;
    }
    return g;
  }
  Mat3 hessian(const Vec3& x) const override {
    Mat3 hs = Mat3::Zero();
    const double inv_r2 = 1.0 / (r_ * r_);
    for (const auto& c : centers_) {
      const Vec3 d = x - c;
      const double e = std::exp(-d.squaredNorm() * inv_r2);
      hs += e * (2.0 * inv_r2 * Mat3::Identity() - 4.0 * inv_r2 * inv_r2 * d * d.transpose());
    }
    return hs;
  }
  Box bounding_box() const override {
    Vec3 lo = Vec3::Constant(1e300);
    Vec3 hi = Vec3::Constant(-1e300);
    for (const auto& c : centers_) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
    return {lo.array() - 1.5 * r_, hi.array() + 1.5 * r_};
  }

 private:
  std::vector<Vec3> centers_;
  double r_;
  double level_;
};

/// Surface of revolution of a Cassini oval:
/// (|x|^2 + a^2)^2 - 4 a^2 (x^2 + y^2) - b^4.
class CassiniSurface final : public LevelSurface {
 public:
  CassiniSurface(double a = 0.65, double b = 0.7) : a_(a), b_(b) {}

  double value(const Vec3& x) const override {
    const double s = x.squaredNorm() + a_ * a_;
    return s * s - 4.0 * a_ * a_ * (x[0] * x[0] + x[1] * x[1]) - b_ * b_ * b_ * b_;
  }
  Vec3 gradient(const Vec3& x) const override {
    const double s = x.squaredNorm() + a_ * a_;
    Vec3 g = 4.0 * s * x;
    g[0] -= 8.0 * a_ * a_ * x[0];
    g[1] -= 8.0 * a_ * a_ * x[1];
    return g;
  }
  Mat3 hessian(const Vec3& x) const override {
    const double s = x.squaredNorm() + a_ * a_;
    Mat3 hs = 4.0 * s * Mat3::Identity() + 8.0 * x * x.transpose();
    hs(0, 0) -= 8.0 * a_ * a_;
    hs(1, 1) -= 8.0 * a_ * a_;
    return hs;
  }
  Box bounding_box() const override {
    const double rxy = std::sqrt(a_ * a_ + b_ * b_);
    return {Vec3(-rxy, -rxy, -b_), Vec3(rxy, rxy, b_)};
  }

 private:
  double a_;
  double b_;
};

inline Mat3 rotation_zyx(double z_deg, double y_deg, double x_deg) {
  const double d = pi / 180.0;
  const Mat3 rz = Eigen::AngleAxisd(z_deg * d, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 ry = Eigen::AngleAxisd(y_deg * d, Vec3::UnitY()).toRotationMatrix();
  const Mat3 rx = Eigen::AngleAxisd(x_deg * d, Vec3::UnitX()).toRotationMatrix();
  return rz * ry * rx;
}

/// Rotation applied to the (1, .8, .6) ellipsoid: Rz(10 deg) Ry(20 deg) Rx(30 deg).
inline Mat3 test_rotation() { return rotation_zyx(10.0, 20.0, 30.0); }

inline constexpr std::array<std::string_view, 5> surface_ids = {
    "rot-ellipsoid", "thin-ellipsoid", "torus", "molecule", "cassini"};

/// Built-in surfaces by identifier. Also accepts "sphere" (unit sphere).
inline SurfacePtr make_surface(std::string_view id) {
  if (id == "rot-ellipsoid") return std::make_shared<Ellipsoid>(1.0, 0.8, 0.6, test_rotation());
  if (id == "ellipsoid") return std::make_shared<Ellipsoid>(1.0, 0.8, 0.6);
  if (id == "thin-ellipsoid") return std::make_shared<Ellipsoid>(1.0, 0.4, 0.4);
  if (id == "torus") return std::make_shared<Torus>(0.3, 0.7);
  if (id == "molecule") return std::make_shared<Molecule>(Molecule::four_atom());
  if (id == "cassini") return std::make_shared<CassiniSurface>(0.65, 0.7);
  if (id == "sphere") return std::make_shared<Sphere>(1.0);
  throw Error("unknown surface id '" + std::string(id) + "'");
}

}  // namespace layerpot
