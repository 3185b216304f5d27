#pragma once

#include "layerpot/common.hpp"

namespace layerpot {

/// C-infinity bump exp(r^2 / (r^2 - 1)) on (-1, 1), zero elsewhere.
inline double bump(double r) {
  const double r2 = r * r;
  if (!(r2 < 1.0)) return 0.0;
  return std::exp(r2 / (r2 - 1.0));
}

/// Angle of the partition of unity on the unit sphere.
struct PouParams {
  double theta = 70.0 * pi / 180.0;

  static PouParams from_degrees(double deg) {
    PouParams p{deg * pi / 180.0};
    p.validate();
    return p;
  }

  double degrees() const { return theta * 180.0 / pi; }
  double cos_theta() const { return std::cos(theta); }

  void validate() const {
    // acos(1/sqrt(3)) ~ 54.7 deg is the covering limit.
    if (!(theta > std::acos(1.0 / std::sqrt(3.0)) && theta < pi / 2.0)) {
      throw Error("partition-of-unity angle must lie in (54.74, 90) degrees, got " +
                  std::to_string(degrees()));
    }
  }
};

/// sigma_i(u) = b(w_i/theta) / sum_j b(w_j/theta) with w_i = acos|u . e_i|.
inline std::array<double, 3> pou_weights(const Vec3& u, const PouParams& params = {}) {
  std::array<double, 3> s{};
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double c = std::clamp(std::abs(u[i]), 0.0, 1.0);
    s[i] = bump(std::acos(c) / params.theta);
    total += s[i];
  }
  if (!(total > 0.0)) {
    throw Error("partition of unity has an empty support at u = " + format_point(u));
  }
  for (double& v : s) v /= total;
  return s;
}

}  // namespace layerpot
