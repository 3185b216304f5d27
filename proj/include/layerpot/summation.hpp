#pragma once

#include "layerpot/regularized_kernels.hpp"

#include <memory>
#include <span>

namespace layerpot {

/// Point sources carrying any number of scalar (single-layer) and vector
/// (dipole) strength channels. Channel c of the result at target x is
///   sum_j G_d(y_j - x) q_c(j)          for charge channels,
///   sum_j grad G_d(y_j - x) . d_c(j)   for dipole channels,
/// charges first, then dipoles.
struct SourceSet {
  std::vector<Vec3> positions;
  std::vector<std::vector<double>> charges;
  std::vector<std::vector<Vec3>> dipoles;

  std::size_t size() const { return positions.size(); }
  std::size_t channels() const { return charges.size() + dipoles.size(); }

  void validate() const {
    for (const auto& p : positions) {
      if (!p.allFinite()) throw Error("non-finite source position " + format_point(p));
    }
    for (const auto& q : charges) {
      if (q.size() != positions.size()) throw Error("charge channel length mismatch");
      for (double v : q) {
        if (!std::isfinite(v)) throw Error("non-finite source charge");
      }
    }
    for (const auto& d : dipoles) {
      if (d.size() != positions.size()) throw Error("dipole channel length mismatch");
      for (const auto& v : d) {
        if (!v.allFinite()) throw Error("non-finite dipole strength");
      }
    }
  }
};

/// Channel values per target, laid out [target][smoothing][channel].
struct SumResult {
  std::size_t targets = 0;
  std::size_t smoothings = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  double operator()(std::size_t t, std::size_t s, std::size_t c) const {
    return data[(t * smoothings + s) * channels + c];
  }
  double& operator()(std::size_t t, std::size_t s, std::size_t c) {
    return data[(t * smoothings + s) * channels + c];
  }
};

namespace detail {

// Interleaved copy of the source data: x, y, z, charges..., dipoles (3 each)...
struct PackedSources {
  std::size_t stride = 0;
  std::size_t nq = 0;
  std::size_t nd = 0;
  std::vector<double> data;

  explicit PackedSources(const SourceSet& s) : nq(s.charges.size()), nd(s.dipoles.size()) {
    stride = 3 + nq + 3 * nd;
    data.resize(stride * s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      double* p = &data[j * stride];
      p[0] = s.positions[j][0];
      p[1] = s.positions[j][1];
      p[2] = s.positions[j][2];
      for (std::size_t c = 0; c < nq; ++c) p[3 + c] = s.charges[c][j];
      for (std::size_t c = 0; c < nd; ++c) {
        for (int i = 0; i < 3; ++i) p[3 + nq + 3 * c + i] = s.dipoles[c][j][i];
      }
    }
  }

  // acc += g * q + gf * (d . dy) for source j
  void accumulate(std::size_t j, double g, double gf, double dx, double dy, double dz,
                  double* acc) const {
    const double* p = &data[j * stride];
    for (std::size_t c = 0; c < nq; ++c) acc[c] += g * p[3 + c];
    const double* d = p + 3 + nq;
    for (std::size_t c = 0; c < nd; ++c) {
      acc[nq + c] += gf * (d[3 * c] * dx + d[3 * c + 1] * dy + d[3 * c + 2] * dz);
    }
  }
};

inline void check_variants(std::span<const Smoothing> sm) {
  if (sm.empty()) throw Error("at least one smoothing is required");
}

}  // namespace detail

/// Direct summation for several regularizations at once. Sources farther than
/// far_ratio * delta for every smoothing see the plain kernel, which is summed
/// once and shared; the remaining sources are summed per smoothing. The order of
/// accumulation is fixed by the source order.
inline SumResult direct_sum(std::span<const Vec3> targets, const SourceSet& sources,
                            std::span<const Smoothing> smoothings) {
  detail::check_variants(smoothings);
  sources.validate();
  const detail::PackedSources ps(sources);
  const std::size_t nch = sources.channels();
  const std::size_t ns = smoothings.size();

  SumResult out;
  out.targets = targets.size();
  out.smoothings = ns;
  out.channels = nch;
  out.data.assign(targets.size() * ns * nch, 0.0);

  double dmax = 0.0;
  for (const auto& s : smoothings) dmax = std::max(dmax, s.delta);
  const double r2_near = far_ratio * far_ratio * dmax * dmax;
  const double c4 = 1.0 / (4.0 * pi);

  parallel_for(0, targets.size(), [&](std::size_t t) {
    const Vec3& x = targets[t];
    std::vector<double> far(nch, 0.0);
    std::vector<std::size_t> near;
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const double* p = &ps.data[j * ps.stride];
      const double dx = p[0] - x[0];
      const double dy = p[1] - x[1];
      const double dz = p[2] - x[2];
      const double r2 = dx * dx + dy * dy + dz * dz;
      if (r2 <= r2_near) {
        near.push_back(j);
        continue;
      }
      const double inv = 1.0 / std::sqrt(r2);
      ps.accumulate(j, -c4 * inv, c4 * inv * inv * inv, dx, dy, dz, far.data());
    }
    for (std::size_t s = 0; s < ns; ++s) {
      const Smoothing& sm = smoothings[s];
      double* acc = &out(t, s, 0);
      for (std::size_t c = 0; c < nch; ++c) acc[c] = far[c];
      const double d3 = sm.delta * sm.delta * sm.delta;
      for (const std::size_t j : near) {
        const double* p = &ps.data[j * ps.stride];
        const double dx = p[0] - x[0];
        const double dy = p[1] - x[1];
        const double dz = p[2] - x[2];
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        const double rho = r / sm.delta;
        double g = 0.0;
        double gf = 0.0;
        if (rho > far_ratio) {
          g = -c4 / r;
          gf = c4 / (r * r * r);
        } else {
          g = -c4 * detail::single_profile(rho, sm.variant) / sm.delta;
          gf = c4 * detail::grad_profile(rho, sm.variant) / d3;
        }
        ps.accumulate(j, g, gf, dx, dy, dz, acc);
      }
    }
  });
  return out;
}

inline SumResult direct_sum(std::span<const Vec3> targets, const SourceSet& sources,
                            const Smoothing& smoothing) {
  return direct_sum(targets, sources, std::span<const Smoothing>(&smoothing, 1));
}

struct TreecodeParams {
  int taylor_degree = 12;
  double separation = 0.5;
  std::size_t leaf_capacity = 20;

  void validate() const {
    if (taylor_degree < 1) throw Error("treecode Taylor degree must be at least 1");
    if (!(separation > 0.0 && separation < 1.0)) throw Error("treecode separation must lie in (0, 1)");
    if (leaf_capacity < 1) throw Error("treecode leaf capacity must be at least 1");
  }
};

namespace detail {

// Multi-indices k with |k| <= p, graded, and lookup tables for k - e_i.
class MultiIndexTable {
 public:
  explicit MultiIndexTable(int p) : p_(p) {
    for (int n = 0; n <= p; ++n) {
      for (int a = n; a >= 0; --a) {
        for (int b = n - a; b >= 0; --b) idx_.push_back({a, b, n - a - b});
      }
    }
    const int m = p + 1;
    lookup_.assign(static_cast<std::size_t>(m * m * m), -1);
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      const auto& k = idx_[i];
      lookup_[static_cast<std::size_t>((k[0] * m + k[1]) * m + k[2])] = static_cast<int>(i);
    }
  }

  int degree() const { return p_; }
  std::size_t size() const { return idx_.size(); }
  const std::array<int, 3>& operator[](std::size_t i) const { return idx_[i]; }
  // Index of k, or -1 when any component is negative.
  int find(int a, int b, int c) const {
    if (a < 0 || b < 0 || c < 0) return -1;
    const int m = p_ + 1;
    return lookup_[static_cast<std::size_t>((a * m + b) * m + c)];
  }
  // Number of indices of total degree <= n.
  static std::size_t count(int n) {
    return static_cast<std::size_t>((n + 1) * (n + 2) * (n + 3) / 6);
  }

 private:
  int p_;
  std::vector<std::array<int, 3>> idx_;
  std::vector<int> lookup_;
};

// J_m(c) = int_0^1 s^{2m} exp(-c s^2) ds for m = 0..p.
inline void moment_integrals(double c, int p, double* J) {
  const double ec = std::exp(-c);
  if (c > p) {
    const double sc = std::sqrt(c);
    J[0] = 0.5 * std::sqrt(pi) * std::erf(sc) / sc;
    for (int m = 1; m <= p; ++m) J[m] = ((2.0 * m - 1.0) * J[m - 1] - ec) / (2.0 * c);
    return;
  }
  // e^{-c} sum_n (2c)^n / prod_{j=0}^{n} (2p + 2j + 1), then downward.
  double term = 1.0 / (2.0 * p + 1.0);
  double sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= 2.0 * c / (2.0 * p + 2.0 * n + 1.0);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  J[p] = ec * sum;
  for (int m = p; m >= 1; --m) J[m - 1] = (2.0 * c * J[m] + ec) / (2.0 * m - 1.0);
}

struct TreeNode {
  Vec3 center;
  double radius = 0.0;
  std::size_t begin = 0;  // range in the permuted source order
  std::size_t end = 0;
  std::array<int, 8> child{-1, -1, -1, -1, -1, -1, -1, -1};
  bool leaf = true;
  std::vector<double> moments;  // [channel][multi-index]
};

}  // namespace detail

/// Cluster-particle treecode for the near-surface regularized kernels. The
/// kernel is -F(|y - x|^2)/(4 pi) with F(u) = erf(sqrt(u)/delta)/sqrt(u); Taylor
/// coefficients of F(|c - x + t|^2) in t follow the recurrence
///   k_i a^(m)_k = 2 (X_i a^(m+1)_{k-e_i} + a^(m+1)_{k-2e_i}),
/// with a^(m)_0 = F^(m)(|X|^2), the derivatives coming from
///   F^(m)(u) = 2/(delta sqrt(pi)) (-1/delta^2)^m int_0^1 s^{2m} e^{-u s^2/delta^2} ds.
class Treecode {
 public:
  Treecode(const SourceSet& sources, const Smoothing& smoothing, const TreecodeParams& params)
      : params_(params), sm_(smoothing), table_(params.taylor_degree), src_(sources) {
    params_.validate();
    if (sm_.variant != KernelVariant::near) {
      throw UnsupportedKernel("the treecode supports only the near-surface regularized kernels");
    }
    src_.validate();
    order_.resize(src_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (!order_.empty()) {
      Vec3 lo = src_.positions[0];
      Vec3 hi = lo;
      for (const auto& p : src_.positions) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
      build(0, order_.size(), 0.5 * (lo + hi), 0.5 * (hi - lo).maxCoeff(), 0);
    }
    packed_ = std::make_unique<detail::PackedSources>(permuted());
  }

  /// Channel values at each target, laid out [target][channel].
  std::vector<double> evaluate(std::span<const Vec3> targets) const {
    const std::size_t nch = src_.channels();
    std::vector<double> out(targets.size() * nch, 0.0);
    if (nodes_.empty()) return out;
    parallel_for(0, targets.size(), [&](std::size_t t) {
      Scratch sc(table_);
      visit(0, targets[t], &out[t * nch], sc);
    });
    return out;
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Scratch {
    std::vector<double> coef;  // a^(m)_k for all m, stacked
    std::vector<double> J;
    explicit Scratch(const detail::MultiIndexTable& t)
        : coef(t.size() * static_cast<std::size_t>(t.degree() + 1)),
          J(static_cast<std::size_t>(t.degree() + 1)) {}
  };

  SourceSet permuted() const {
    SourceSet s;
    s.positions.reserve(order_.size());
    for (const std::size_t i : order_) s.positions.push_back(src_.positions[i]);
    for (const auto& q : src_.charges) {
      std::vector<double> v;
      v.reserve(order_.size());
      for (const std::size_t i : order_) v.push_back(q[i]);
      s.charges.push_back(std::move(v));
    }
    for (const auto& d : src_.dipoles) {
      std::vector<Vec3> v;
      v.reserve(order_.size());
      for (const std::size_t i : order_) v.push_back(d[i]);
      s.dipoles.push_back(std::move(v));
    }
    return s;
  }

  int build(std::size_t begin, std::size_t end, const Vec3& center, double half, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    {
      auto& nd = nodes_.back();
      nd.center = center;
      nd.begin = begin;
      nd.end = end;
      double r = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        r = std::max(r, (src_.positions[order_[i]] - center).norm());
      }
      nd.radius = r;
    }
    compute_moments(id);
    if (end - begin <= params_.leaf_capacity || depth > 40 || half <= 0.0) return id;

    // Partition into octants in place.
    std::array<std::vector<std::size_t>, 8> bins;
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3& p = src_.positions[order_[i]];
      const int o = (p[0] > center[0] ? 1 : 0) | (p[1] > center[1] ? 2 : 0) | (p[2] > center[2] ? 4 : 0);
      bins[static_cast<std::size_t>(o)].push_back(order_[i]);
    }
    std::size_t pos = begin;
    std::array<std::size_t, 9> start{};
    for (int o = 0; o < 8; ++o) {
      start[static_cast<std::size_t>(o)] = pos;
      for (const std::size_t j : bins[static_cast<std::size_t>(o)]) order_[pos++] = j;
    }
    start[8] = end;
    nodes_[static_cast<std::size_t>(id)].leaf = false;
    for (int o = 0; o < 8; ++o) {
      const std::size_t b = start[static_cast<std::size_t>(o)];
      const std::size_t e = start[static_cast<std::size_t>(o) + 1];
      if (b == e) continue;
      const double q = 0.5 * half;
      const Vec3 cc = center + Vec3((o & 1) ? q : -q, (o & 2) ? q : -q, (o & 4) ? q : -q);
      const int child = build(b, e, cc, q, depth + 1);
      nodes_[static_cast<std::size_t>(id)].child[static_cast<std::size_t>(o)] = child;
    }
    return id;
  }

  // Charge moments sum_j q_j t^k and dipole moments sum_j sum_i d_ji k_i t^{k-e_i},
  // t = y_j - center, for |k| <= p.
  void compute_moments(int id) {
    auto& nd = nodes_[static_cast<std::size_t>(id)];
    const std::size_t nk = table_.size();
    const int p = table_.degree();
    const std::size_t nq = src_.charges.size();
    nd.moments.assign(src_.channels() * nk, 0.0);
    std::vector<double> pw(static_cast<std::size_t>(3 * (p + 1)));
    for (std::size_t i = nd.begin; i < nd.end; ++i) {
      const std::size_t j = order_[i];
      const Vec3 t = src_.positions[j] - nd.center;
      for (int a = 0; a < 3; ++a) {
        pw[static_cast<std::size_t>(a * (p + 1))] = 1.0;
        for (int e = 1; e <= p; ++e) {
          pw[static_cast<std::size_t>(a * (p + 1) + e)] = pw[static_cast<std::size_t>(a * (p + 1) + e - 1)] * t[a];
        }
      }
      auto tp = [&](int a, int e) { return e < 0 ? 0.0 : pw[static_cast<std::size_t>(a * (p + 1) + e)]; };
      for (std::size_t m = 0; m < nk; ++m) {
        const auto& k = table_[m];
        const double mono = tp(0, k[0]) * tp(1, k[1]) * tp(2, k[2]);
        for (std::size_t c = 0; c < nq; ++c) nd.moments[c * nk + m] += src_.charges[c][j] * mono;
        if (src_.dipoles.empty()) continue;
        const double d0 = k[0] * tp(0, k[0] - 1) * tp(1, k[1]) * tp(2, k[2]);
        const double d1 = k[1] * tp(0, k[0]) * tp(1, k[1] - 1) * tp(2, k[2]);
        const double d2 = k[2] * tp(0, k[0]) * tp(1, k[1]) * tp(2, k[2] - 1);
        for (std::size_t c = 0; c < src_.dipoles.size(); ++c) {
          const Vec3& d = src_.dipoles[c][j];
          nd.moments[(nq + c) * nk + m] += d[0] * d0 + d[1] * d1 + d[2] * d2;
        }
      }
    }
  }

  // Taylor coefficients of F(|X + t|^2) in t, |k| <= p, into sc.coef[0..nk).
  void taylor_coefficients(const Vec3& X, Scratch& sc) const {
    const int p = table_.degree();
    const std::size_t nk = table_.size();
    const double d = sm_.delta;
    detail::moment_integrals(X.squaredNorm() / (d * d), p, sc.J.data());
    const double pref = 2.0 / (d * std::sqrt(pi));
    double scale = pref;
    // Level m holds |k| <= p - m; store level m at offset m * nk.
    for (int m = 0; m <= p; ++m) {
      sc.coef[static_cast<std::size_t>(m) * nk] = scale * sc.J[static_cast<std::size_t>(m)];
      scale *= -1.0 / (d * d);
    }
    for (int m = p - 1; m >= 0; --m) {
      double* cur = &sc.coef[static_cast<std::size_t>(m) * nk];
      const double* up = &sc.coef[static_cast<std::size_t>(m + 1) * nk];
      const std::size_t count = detail::MultiIndexTable::count(p - m);
      for (std::size_t i = 1; i < count; ++i) {
        const auto& k = table_[i];
        const int ax = k[0] > 0 ? 0 : (k[1] > 0 ? 1 : 2);
        int a = k[0], b = k[1], c = k[2];
        (ax == 0 ? a : ax == 1 ? b : c) -= 1;
        const int i1 = table_.find(a, b, c);
        (ax == 0 ? a : ax == 1 ? b : c) -= 1;
        const int i2 = table_.find(a, b, c);
        double v = X[ax] * up[i1];
        if (i2 >= 0) v += up[i2];
        cur[i] = 2.0 * v / k[ax];
      }
    }
  }

  void visit(int id, const Vec3& x, double* acc, Scratch& sc) const {
    const auto& nd = nodes_[static_cast<std::size_t>(id)];
    const Vec3 X = nd.center - x;
    const double dist = X.norm();
    const std::size_t nk = table_.size();
    if (nd.radius < params_.separation * dist && (nd.end - nd.begin) > nk / 4) {
      taylor_coefficients(X, sc);
      const double c4 = 1.0 / (4.0 * pi);
      // G = -F/(4 pi); dipole moments already carry the t-gradient of the series.
      for (std::size_t c = 0; c < src_.channels(); ++c) {
        const double* mo = &nd.moments[c * nk];
        double s = 0.0;
        for (std::size_t m = 0; m < nk; ++m) s += sc.coef[m] * mo[m];
        acc[c] -= c4 * s;
      }
      return;
    }
    if (nd.leaf) {
      const double c4 = 1.0 / (4.0 * pi);
      const double d3 = sm_.delta * sm_.delta * sm_.delta;
      for (std::size_t j = nd.begin; j < nd.end; ++j) {
        const double* p = &packed_->data[j * packed_->stride];
        const double dx = p[0] - x[0];
        const double dy = p[1] - x[1];
        const double dz = p[2] - x[2];
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        const double rho = r / sm_.delta;
        double g = 0.0;
        double gf = 0.0;
        if (rho > far_ratio) {
          g = -c4 / r;
          gf = c4 / (r * r * r);
        } else {
          g = -c4 * detail::single_profile(rho, sm_.variant) / sm_.delta;
          gf = c4 * detail::grad_profile(rho, sm_.variant) / d3;
        }
        packed_->accumulate(j, g, gf, dx, dy, dz, acc);
      }
      return;
    }
    for (const int ch : nd.child) {
      if (ch >= 0) visit(ch, x, acc, sc);
    }
  }

  TreecodeParams params_;
  Smoothing sm_;
  detail::MultiIndexTable table_;
  SourceSet src_;
  std::vector<std::size_t> order_;
  std::vector<detail::TreeNode> nodes_;
  std::unique_ptr<detail::PackedSources> packed_;
};

/// Treecode evaluation, laid out like direct_sum with a single smoothing.
inline SumResult treecode_sum(std::span<const Vec3> targets, const SourceSet& sources,
                              const Smoothing& smoothing, const TreecodeParams& params) {
  const Treecode tc(sources, smoothing, params);
  SumResult out;
  out.targets = targets.size();
  out.smoothings = 1;
  out.channels = sources.channels();
  out.data = tc.evaluate(targets);
  return out;
}

}  // namespace layerpot
