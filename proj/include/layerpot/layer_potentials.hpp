#pragma once

#include "layerpot/corrections.hpp"
#include "layerpot/density_fit.hpp"
#include "layerpot/summation.hpp"

#include <functional>
#include <optional>

namespace layerpot {

/// Density sampled at the quadrature nodes, optionally with the analytic
/// function it was sampled from.
struct Density {
  std::vector<double> values;
  std::function<double(const Vec3&)> exact;

  static Density sample(const NodeSet& set, std::function<double(const Vec3&)> f) {
    Density d;
    d.values.reserve(set.size());
    for (const auto& nd : set.nodes) d.values.push_back(f(nd.pos));
    d.exact = std::move(f);
    return d;
  }

  static Density constant(const NodeSet& set, double c) {
    return sample(set, [c](const Vec3&) { return c; });
  }

  void validate(const NodeSet& set) const {
    if (values.size() != set.size()) {
      throw Error("density has " + std::to_string(values.size()) + " values for " +
                  std::to_string(set.size()) + " nodes");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw Error("non-finite density at node " + std::to_string(i) + " " +
                    format_point(set.nodes[i].pos));
      }
    }
  }
};

/// One layer potential at one point, split into its parts.
/// Single layer: t1_or_n1 = T1, t2_or_n2 = T2 (or the on-surface T2).
/// Double layer: t1_or_n1 = N1, t2_or_n2 = N2, jump_term = chi phi(z).
struct PotentialReport {
  double raw_sum = 0.0;
  double t1_or_n1 = 0.0;
  double t2_or_n2 = 0.0;
  double jump_term = 0.0;
  double total = 0.0;

  void finish() { total = raw_sum + t1_or_n1 + t2_or_n2 + jump_term; }
};

enum class SumBackend { direct, treecode };

struct EvalOptions {
  SumBackend backend = SumBackend::direct;
  TreecodeParams treecode;
  LatticeSumParams lattice;
  FitOptions fit;
  ProjectionOptions projection;
};

/// Both layer potentials at one target for one delta.
struct LayerPair {
  PotentialReport single;
  PotentialReport dbl;
};

/// Results of a batched evaluation, laid out [target][delta].
struct BatchResult {
  std::size_t deltas = 0;
  std::vector<LayerPair> values;
  std::vector<NearPointFrame> frames;  // near targets only

  const LayerPair& at(std::size_t target, std::size_t d) const { return values[target * deltas + d]; }
};

/// chi = 1 inside, 0 outside, 1/2 on the surface.
inline double jump_indicator(const LevelSurface& surface, const Vec3& x) {
  const double v = surface.value(x);
  return v < 0.0 ? 1.0 : (v > 0.0 ? 0.0 : 0.5);
}

/// Evaluation of the single layer S[psi] = int G psi dS and the double layer
/// D[phi] = int dG/dn_y phi dS with G(y) = -1/(4 pi |y|), by regularized
/// quadrature plus corrections.
class LayerPotentials {
 public:
  LayerPotentials(SurfacePtr surface, const NodeSet& nodes, EvalOptions opts = {})
      : surface_(std::move(surface)), nodes_(nodes),
        grid_(nodes, std::max(opts.fit.radius, 1.0) * nodes.h), opts_(opts),
        weights_(nodes.weights()) {}

  const NodeSet& nodes() const { return nodes_; }
  const LevelSurface& surface() const { return *surface_; }
  const EvalOptions& options() const { return opts_; }

  /// Fitted density value at a surface point z.
  double density_at(const Vec3& z, const Density& d) const {
    return fit_density(z, normal(*surface_, z), d.values, nodes_, grid_, opts_.fit).value;
  }

  /// Local fit of the density at z: value, surface gradient, surface Laplacian.
  SurfaceFit density_fit(const Vec3& z, const Density& d) const {
    return fit_density(z, normal(*surface_, z), d.values, nodes_, grid_, opts_.fit);
  }

  /// Derivatives of the density at z in the coordinates of chart `axis`.
  Vec2 chart_derivatives(const Vec3& z, const Density& d, int axis) const {
    const SurfaceFit f = density_fit(z, d);
    return chart_gradient(f, chart_geometry(*surface_, z, axis, nodes_.h, 0.0));
  }

  PotentialReport single_layer_near(const Vec3& x, const Density& psi, double delta) const {
    const Density zero = zeros();
    return evaluate_near(std::span<const Vec3>(&x, 1), zero, psi, std::span<const double>(&delta, 1))
        .at(0, 0)
        .single;
  }

  PotentialReport double_layer_near(const Vec3& x, const Density& phi, double delta) const {
    const Density zero = zeros();
    return evaluate_near(std::span<const Vec3>(&x, 1), phi, zero, std::span<const double>(&delta, 1))
        .at(0, 0)
        .dbl;
  }

  PotentialReport single_layer_on(std::size_t node, const Density& psi, double delta) const {
    const Density zero = zeros();
    return evaluate_on(std::span<const std::size_t>(&node, 1), zero, psi,
                       std::span<const double>(&delta, 1))
        .at(0, 0)
        .single;
  }

  PotentialReport double_layer_on(std::size_t node, const Density& phi, double delta) const {
    const Density zero = zeros();
    return evaluate_on(std::span<const std::size_t>(&node, 1), phi, zero,
                       std::span<const double>(&delta, 1))
        .at(0, 0)
        .dbl;
  }

  /// Both layers at points near (not on) the surface for each delta.
  BatchResult evaluate_near(std::span<const Vec3> targets, const Density& phi, const Density& psi,
                            std::span<const double> deltas) const {
    phi.validate(nodes_);
    psi.validate(nodes_);
    const std::size_t nt = targets.size();
    const std::size_t nd = deltas.size();

    // delta-independent local data at the closest points
    std::vector<LocalData> local(nt);
    std::vector<NearPointFrame> frames(nt);
    std::vector<std::string> failures(nt);
    parallel_for(0, nt, [&](std::size_t t) {
      try {
        frames[t] = closest_point(*surface_, targets[t], 1.0, opts_.projection);
        local[t] = local_data(frames[t].z, frames[t].n, phi, psi);
      } catch (const Error& e) {
        failures[t] = e.what();
      }
    });
    rethrow_first(failures, targets);

    std::vector<Smoothing> sms;
    for (const double d : deltas) sms.emplace_back(d, KernelVariant::near);
    const SumResult sums = run_sums(targets, phi, psi, sms);

    BatchResult out;
    out.deltas = nd;
    out.values.resize(nt * nd);
    parallel_for(0, nt, [&](std::size_t t) {
      const NearPointFrame& fr = frames[t];
      const LocalData& ld = local[t];
      const double chi = jump_indicator(*surface_, targets[t]);
      for (std::size_t s = 0; s < nd; ++s) {
        const double delta = deltas[s];
        const double lambda = fr.b / delta;
        LayerPair& lp = out.values[t * nd + s];
        lp.single.raw_sum = sums(t, s, 0);
        lp.single.t1_or_n1 = t1(ld.psi_z, lambda, delta, fr.mean_curvature);
        lp.single.t2_or_n2 = t2(ld.psi_z, lambda, delta, nodes_.h, ld.charts, opts_.lattice);
        lp.single.finish();
        lp.dbl.raw_sum = sums(t, s, 1) - ld.phi_z * sums(t, s, 2);
        lp.dbl.t1_or_n1 = n1(ld.lap_phi, lambda, delta);
        lp.dbl.t2_or_n2 = n2(ld.dphi, lambda, delta, nodes_.h, ld.charts, opts_.lattice);
        lp.dbl.jump_term = chi * ld.phi_z;
        lp.dbl.finish();
      }
    });
    frames.swap(out.frames);
    return out;
  }

  /// Both layers at quadrature nodes with the fifth-order on-surface kernels.
  BatchResult evaluate_on(std::span<const std::size_t> node_ids, const Density& phi,
                          const Density& psi, std::span<const double> deltas) const {
    phi.validate(nodes_);
    psi.validate(nodes_);
    if (opts_.backend == SumBackend::treecode) {
      throw UnsupportedKernel("the treecode does not support the on-surface kernels");
    }
    const std::size_t nt = node_ids.size();
    const std::size_t nd = deltas.size();
    std::vector<Vec3> targets(nt);
    std::vector<std::vector<ChartTerm>> charts(nt);
    std::vector<std::string> failures(nt);
    parallel_for(0, nt, [&](std::size_t t) {
      const QuadNode& node = nodes_.nodes.at(node_ids[t]);
      targets[t] = node.pos;
      try {
        charts[t] = chart_terms(node.pos, node.zeta);
      } catch (const Error& e) {
        failures[t] = e.what();
      }
    });
    rethrow_first(failures, targets);

    std::vector<Smoothing> sms;
    for (const double d : deltas) sms.emplace_back(d, KernelVariant::on_surface);
    const SumResult sums = direct_sum(targets, sources(phi, psi), sms);

    BatchResult out;
    out.deltas = nd;
    out.values.resize(nt * nd);
    for (std::size_t t = 0; t < nt; ++t) {
      const std::size_t i = node_ids[t];
      const double psi_z = psi.values[i];
      const double phi_z = phi.values[i];
      for (std::size_t s = 0; s < nd; ++s) {
        LayerPair& lp = out.values[t * nd + s];
        lp.single.raw_sum = sums(t, s, 0);
        lp.single.t2_or_n2 = t2_on_surface(psi_z, deltas[s], nodes_.h, charts[t], opts_.lattice);
        lp.single.finish();
        lp.dbl.raw_sum = sums(t, s, 1) - phi_z * sums(t, s, 2);
        lp.dbl.jump_term = 0.5 * phi_z;
        lp.dbl.finish();
      }
    }
    return out;
  }

 private:
  struct LocalData {
    double psi_z = 0.0;
    double phi_z = 0.0;
    double lap_phi = 0.0;
    std::vector<ChartTerm> charts;
    std::vector<std::optional<Vec2>> dphi;
  };

  Density zeros() const { return Density{std::vector<double>(nodes_.size(), 0.0), {}}; }

  static void rethrow_first(const std::vector<std::string>& failures, std::span<const Vec3> targets) {
    for (std::size_t t = 0; t < failures.size(); ++t) {
      if (!failures[t].empty()) {
        throw Error("target " + std::to_string(t) + " " + format_point(targets[t]) + ": " +
                    failures[t]);
      }
    }
  }

  std::vector<ChartTerm> chart_terms(const Vec3& z, const std::array<double, 3>& zeta,
                                     std::array<ChartGeometry, 3>* geo = nullptr) const {
    std::vector<ChartTerm> out(3);
    for (int k = 0; k < 3; ++k) {
      out[k].zeta = zeta[k];
      if (zeta[k] == 0.0) continue;
      const ChartGeometry cg = chart_geometry(*surface_, z, k, nodes_.h, 0.0);
      out[k].nu = cg.nu;
      out[k].g_inv = cg.g_inv;
      if (geo) (*geo)[k] = cg;
    }
    return out;
  }

  LocalData local_data(const Vec3& z, const Vec3& n, const Density& phi, const Density& psi) const {
    LocalData ld;
    const auto zeta = pou_weights(n, nodes_.pou);
    std::array<ChartGeometry, 3> geo;
    ld.charts = chart_terms(z, zeta, &geo);
    ld.psi_z = fit_density(z, n, psi.values, nodes_, grid_, opts_.fit).value;
    const SurfaceFit pf = fit_density(z, n, phi.values, nodes_, grid_, opts_.fit);
    ld.phi_z = pf.value;
    ld.lap_phi = pf.laplacian;
    ld.dphi.resize(3);
    for (int k = 0; k < 3; ++k) {
      if (zeta[k] != 0.0) ld.dphi[k] = chart_gradient(pf, geo[k]);
    }
    return ld;
  }

  // Channels: psi w (charge), phi w n (dipole), w n (dipole).
  SourceSet sources(const Density& phi, const Density& psi) const {
    SourceSet s;
    const std::size_t m = nodes_.size();
    s.positions.resize(m);
    s.charges.assign(1, std::vector<double>(m));
    s.dipoles.assign(2, std::vector<Vec3>(m));
    for (std::size_t j = 0; j < m; ++j) {
      const QuadNode& nd = nodes_.nodes[j];
      s.positions[j] = nd.pos;
      s.charges[0][j] = psi.values[j] * weights_[j];
      s.dipoles[1][j] = weights_[j] * nd.n;
      s.dipoles[0][j] = phi.values[j] * s.dipoles[1][j];
    }
    return s;
  }

  SumResult run_sums(std::span<const Vec3> targets, const Density& phi, const Density& psi,
                     const std::vector<Smoothing>& sms) const {
    const SourceSet src = sources(phi, psi);
    if (opts_.backend == SumBackend::direct) return direct_sum(targets, src, sms);
    SumResult out;
    out.targets = targets.size();
    out.smoothings = sms.size();
    out.channels = src.channels();
    out.data.assign(out.targets * out.smoothings * out.channels, 0.0);
    for (std::size_t s = 0; s < sms.size(); ++s) {
      const SumResult one = treecode_sum(targets, src, sms[s], opts_.treecode);
      for (std::size_t t = 0; t < out.targets; ++t) {
        for (std::size_t c = 0; c < out.channels; ++c) out(t, s, c) = one(t, 0, c);
      }
    }
    return out;
  }

  SurfacePtr surface_;
  const NodeSet& nodes_;  // must outlive this object
  NodeGrid grid_;
  EvalOptions opts_;
  std::vector<double> weights_;
};

}  // namespace layerpot
