#pragma once

#include "layerpot/common.hpp"

namespace layerpot {

/// Which regularization of the Laplace kernel is in use.
///  near:       G_d = G erf(r/d), grad with s(r) = erf(r) - (2/sqrt(pi)) r e^{-r^2}
///  on_surface: fifth-order kernels for targets on the surface,
///              s(r) = erf(r) + (2/(3 sqrt(pi)))(5r - 2r^3) e^{-r^2} for G and
///              s(r) = erf(r) - (2/sqrt(pi))(r - 2r^3/3) e^{-r^2} for grad G.
enum class KernelVariant { near, on_surface };

struct Smoothing {
  double delta = 0.0;
  KernelVariant variant = KernelVariant::near;

  Smoothing() = default;
  Smoothing(double d, KernelVariant v = KernelVariant::near) : delta(d), variant(v) {
    if (!(d > 0.0)) throw Error("regularization length must be positive");
  }
};

/// Beyond r/delta = far_ratio both regularizations equal the plain kernel to
/// double precision.
inline constexpr double far_ratio = 7.0;

namespace detail {

// s(rho)/rho for the single-layer kernels, finite at rho = 0.
inline double single_profile(double rho, KernelVariant v) {
  const double c = 2.0 * inv_sqrt_pi;
  double erf_over = 0.0;
  if (rho < 1e-6) {
    erf_over = c * (1.0 - rho * rho / 3.0);
  } else {
    erf_over = std::erf(rho) / rho;
  }
  if (v == KernelVariant::near) return erf_over;
  return erf_over + (c / 3.0) * (5.0 - 2.0 * rho * rho) * std::exp(-rho * rho);
}

// s(rho)/rho^3 for the gradient kernels. The direct form cancels badly for
// small rho, so a Taylor series is used there.
inline double grad_profile(double rho, KernelVariant v) {
  const double c = 2.0 * inv_sqrt_pi;
  if (rho < 0.5) {
    // s(rho) = c sum_{n>=1} (-1)^n / n! * a_n * rho^{2n+1}
    //   near:       a_n = 1/(2n+1) - 1
    //   on_surface: a_n = 1/(2n+1) - 1 - 2n/3
    const double r2 = rho * rho;
    double sum = 0.0;
    double pw = 1.0;  // rho^{2n-2}
    double fact = 1.0;
    for (int n = 1; n < 30; ++n) {
      fact *= n;
      double a = 1.0 / (2.0 * n + 1.0) - 1.0;
      if (v == KernelVariant::on_surface) a -= 2.0 * n / 3.0;
      const double term = ((n % 2 == 0) ? 1.0 : -1.0) * a * pw / fact;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      pw *= r2;
    }
    return c * sum;
  }
  const double e = std::exp(-rho * rho);
  double s = 0.0;
  if (v == KernelVariant::near) {
    s = std::erf(rho) - c * rho * e;
  } else {
    s = std::erf(rho) - c * (rho - 2.0 * rho * rho * rho / 3.0) * e;
  }
  return s / (rho * rho * rho);
}

}  // namespace detail

/// Regularizing factor s(r/delta) of the single-layer kernel: G_d = G s.
inline double single_factor(double r, const Smoothing& sm) {
  const double rho = r / sm.delta;
  if (rho > far_ratio) return 1.0;
  return detail::single_profile(rho, sm.variant) * rho;
}

/// Regularizing factor s(r/delta) of the gradient kernel: grad G_d = grad G s.
inline double grad_factor(double r, const Smoothing& sm) {
  const double rho = r / sm.delta;
  if (rho > far_ratio) return 1.0;
  return detail::grad_profile(rho, sm.variant) * rho * rho * rho;
}

/// Regularized G_d(y) for G(y) = -1/(4 pi |y|). Smooth at y = 0.
inline double single_kernel(const Vec3& y, const Smoothing& sm) {
  const double r = y.norm();
  const double rho = r / sm.delta;
  if (rho > far_ratio) return -1.0 / (4.0 * pi * r);
  return -detail::single_profile(rho, sm.variant) / (4.0 * pi * sm.delta);
}

/// Regularized grad G_d(y) = y/(4 pi |y|^3) s(|y|/delta); zero at y = 0.
inline Vec3 grad_kernel(const Vec3& y, const Smoothing& sm) {
  const double r = y.norm();
  const double rho = r / sm.delta;
  if (rho > far_ratio) return y / (4.0 * pi * r * r * r);
  const double d3 = sm.delta * sm.delta * sm.delta;
  return y * (detail::grad_profile(rho, sm.variant) / (4.0 * pi * d3));
}

}  // namespace layerpot
