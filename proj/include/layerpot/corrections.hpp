#pragma once

#include "layerpot/common.hpp"
#include "layerpot/special_functions.hpp"

#include <optional>
#include <span>

namespace layerpot {

/// E(p, q) = e^{2pq} erfc(p + q) + e^{-2pq} erfc(q - p), q > 0. Finite for all
/// p; each term is formed through erfcx when its erfc argument is positive.
inline double e_factor(double p, double q) {
  return exp_times_erfc(2.0 * p * q, p + q) + exp_times_erfc(-2.0 * p * q, q - p);
}

/// |lambda| erfc|lambda| - e^{-lambda^2}/sqrt(pi)
inline double regularization_profile(double lambda) {
  const double a = std::abs(lambda);
  return a * std::erfc(a) - std::exp(-a * a) * inv_sqrt_pi;
}

/// Regularization correction T1 of the single layer at x = z + lambda delta n.
inline double t1(double psi_z, double lambda, double delta, double mean_curvature) {
  return 0.5 * delta * (1.0 + mean_curvature * lambda * delta) * psi_z *
         regularization_profile(lambda);
}

/// Regularization correction N1 of the double layer; lap_s_phi is the surface
/// Laplacian of the density at z.
inline double n1(double lap_s_phi, double lambda, double delta) {
  return delta * delta * lap_s_phi * 0.25 * lambda * regularization_profile(lambda);
}

/// Per-chart data entering the lattice (discretization) corrections at z.
struct ChartTerm {
  double zeta = 0.0;
  Vec2 nu = Vec2::Zero();
  Mat2 g_inv = Mat2::Identity();
};

struct LatticeSumParams {
  int cutoff = 20;
  double relative_tolerance = 1e-17;  // early exit once the remaining bound is below this
};

namespace detail {

// Visits n in Q = {n2 > 0 or (n2 = 0 and n1 > 0)}, |n_j| <= cutoff, ring by
// ring in max(|n1|,|n2|). After each ring, `bound(m)` returns an upper bound for
// the magnitude of any single term of ring m; the sweep stops once 16 m times
// that is negligible against the accumulated magnitude.
template <class Visit, class Bound>
void for_each_q(int cutoff, double rel_tol, Visit&& visit, Bound&& bound) {
  double magnitude = 0.0;
  for (int m = 1; m <= cutoff; ++m) {
    if (m > 1) {
      const double b = bound(m);
      if (16.0 * m * b <= rel_tol * magnitude || b == 0.0) break;
    }
    for (int n2 = 0; n2 <= m; ++n2) {
      for (int n1 = -m; n1 <= m; ++n1) {
        if (std::max(std::abs(n1), n2) != m) continue;
        if (n2 == 0 && n1 <= 0) continue;
        magnitude += visit(n1, n2);
      }
    }
  }
}

inline double min_metric_scale(const Mat2& g_inv) {
  // smallest eigenvalue of the symmetric 2x2 inverse metric, square-rooted
  const double a = g_inv(0, 0);
  const double b = 0.5 * (g_inv(0, 1) + g_inv(1, 0));
  const double c = g_inv(1, 1);
  const double mean = 0.5 * (a + c);
  const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return std::sqrt(std::max(mean - rad, 1e-300));
}

inline double metric_norm(const Mat2& g_inv, int n1, int n2) {
  return std::sqrt(g_inv(0, 0) * n1 * n1 + (g_inv(0, 1) + g_inv(1, 0)) * n1 * n2 +
                   g_inv(1, 1) * n2 * n2);
}

// Upper bound of E(lambda, q) for q >= q_min.
inline double e_bound(double lambda, double q_min) {
  const double a = std::abs(lambda);
  // Each term of E is at most erfc(q - |lambda|) <= 2.
  if (q_min <= a) return 4.0;
  return 2.0 * std::erfc(q_min - a);
}

}  // namespace detail

/// Discretization correction T2 of the single layer:
///   (h/4pi) psi(z) sum_k zeta_k sum_{n in Q} cos(2 pi n.nu_k) E(lambda, pi delta |n|/h) / |n|,
/// with |n|^2 = g^ij n_i n_j in chart k.
inline double t2(double psi_z, double lambda, double delta, double h,
                 std::span<const ChartTerm> charts, const LatticeSumParams& lp = {}) {
  if (psi_z == 0.0) return 0.0;
  double total = 0.0;
  for (const auto& ch : charts) {
    if (ch.zeta == 0.0) continue;
    const double gmin = detail::min_metric_scale(ch.g_inv);
    double sum = 0.0;
    detail::for_each_q(
        lp.cutoff, lp.relative_tolerance,
        [&](int n1, int n2) {
          const double nn = detail::metric_norm(ch.g_inv, n1, n2);
          const double term = std::cos(2.0 * pi * (n1 * ch.nu[0] + n2 * ch.nu[1])) *
                              e_factor(lambda, pi * delta * nn / h) / nn;
          sum += term;
          return std::abs(term);
        },
        [&](int m) { return detail::e_bound(lambda, pi * delta * gmin * m / h) / (gmin * m); });
    total += ch.zeta * sum;
  }
  return h / (4.0 * pi) * psi_z * total;
}

/// c_r^(k) = sum_{n in Q} sum_s sin(2 pi n.nu) g^{rs} n_s / |n| E(lambda, pi delta |n|/h).
inline Vec2 n2_coefficients(const ChartTerm& ch, double lambda, double delta, double h,
                            const LatticeSumParams& lp = {}) {
  Vec2 c = Vec2::Zero();
  const double gmin = detail::min_metric_scale(ch.g_inv);
  const double gmax = std::sqrt(std::max(ch.g_inv.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300));
  detail::for_each_q(
      lp.cutoff, lp.relative_tolerance,
      [&](int n1, int n2) {
        const double nn = detail::metric_norm(ch.g_inv, n1, n2);
        const double w = std::sin(2.0 * pi * (n1 * ch.nu[0] + n2 * ch.nu[1])) *
                         e_factor(lambda, pi * delta * nn / h) / nn;
        const Vec2 gn = ch.g_inv * Vec2(n1, n2);
        c += w * gn;
        return std::abs(w) * gn.norm();
      },
      [&](int m) {
        return detail::e_bound(lambda, pi * delta * gmin * m / h) * gmax * gmax / gmin;
      });
  return c;
}

/// Discretization correction N2 of the double layer:
///   -(delta lambda / 2) sum_k sum_r c_r^(k) zeta_k d_r^(k) phi(z).
/// A chart whose density derivatives are unavailable contributes zero.
inline double n2(std::span<const std::optional<Vec2>> dphi, double lambda, double delta, double h,
                 std::span<const ChartTerm> charts, const LatticeSumParams& lp = {}) {
  if (lambda == 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < charts.size(); ++k) {
    const auto& ch = charts[k];
    if (ch.zeta == 0.0 || k >= dphi.size() || !dphi[k]) continue;
    const Vec2 c = n2_coefficients(ch, lambda, delta, h, lp);
    total += ch.zeta * c.dot(*dphi[k]);
  }
  return -0.5 * delta * lambda * total;
}

/// F(xi) = (pi/xi) erfc(xi/2) + sqrt(pi) (delta/h) e^{-xi^2/4} (1 + xi^2/6).
inline double on_surface_profile(double xi, double delta_over_h) {
  return pi / xi * std::erfc(0.5 * xi) +
         std::sqrt(pi) * delta_over_h * std::exp(-0.25 * xi * xi) * (1.0 + xi * xi / 6.0);
}

/// Discretization correction of the fifth-order single layer on the surface:
///   (delta/pi) psi(z) sum_k zeta_k sum_{n in Q} cos(2 pi n.nu_k) F(2 pi |n| delta/h).
inline double t2_on_surface(double psi_z, double delta, double h, std::span<const ChartTerm> charts,
                            const LatticeSumParams& lp = {}) {
  if (psi_z == 0.0) return 0.0;
  const double ratio = delta / h;
  double total = 0.0;
  for (const auto& ch : charts) {
    if (ch.zeta == 0.0) continue;
    const double gmin = detail::min_metric_scale(ch.g_inv);
    double sum = 0.0;
    detail::for_each_q(
        lp.cutoff, lp.relative_tolerance,
        [&](int n1, int n2) {
          const double nn = detail::metric_norm(ch.g_inv, n1, n2);
          const double term = std::cos(2.0 * pi * (n1 * ch.nu[0] + n2 * ch.nu[1])) *
                              on_surface_profile(2.0 * pi * nn * ratio, ratio);
          sum += term;
          return std::abs(term);
        },
        [&](int m) { return on_surface_profile(2.0 * pi * gmin * m * ratio, ratio); });
    total += ch.zeta * sum;
  }
  return delta / pi * psi_z * total;
}

}  // namespace layerpot
