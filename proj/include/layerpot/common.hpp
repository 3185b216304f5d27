#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace layerpot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double inv_sqrt_pi = std::numbers::inv_sqrtpi;

/// Axis-aligned box.
struct Box {
  Vec3 lo;
  Vec3 hi;

  bool contains(const Vec3& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
};

// Base of every error the library raises; callers that only want to report
// and exit catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateGradient : public Error {
 public:
  using Error::Error;
};

class ProjectionFailure : public Error {
 public:
  using Error::Error;
};

class ChartConditionViolated : public Error {
 public:
  using Error::Error;
};

class RootRefinementFailure : public Error {
 public:
  using Error::Error;
};

class InsufficientStencil : public Error {
 public:
  using Error::Error;
};

class MissingValues : public Error {
 public:
  using Error::Error;
};

class UnsupportedKernel : public Error {
 public:
  using Error::Error;
};

inline std::string format_point(const Vec3& x) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(%.17g, %.17g, %.17g)", x[0], x[1], x[2]);
  return buf;
}

/// The two coordinates other than `axis`, in increasing order. These are the
/// chart coordinates of the Monge patch x_axis = f(alpha_1, alpha_2).
constexpr std::array<int, 2> chart_axes(int axis) {
  switch (axis) {
    case 0:
      return {1, 2};
    case 1:
      return {0, 2};
    default:
      return {0, 1};
  }
}

/// Runs body(i) for i in [begin, end) across the available hardware threads.
/// Each index is handled by exactly one worker, so per-index output slots need
/// no synchronization.
template <class Body>
void parallel_for(std::size_t begin, std::size_t end, Body&& body) {
  const std::size_t count = end > begin ? end - begin : 0;
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count / 64 + 1);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace layerpot
