#pragma once

#include "layerpot/grid_embedding.hpp"
#include "layerpot/layer_potentials.hpp"
#include "layerpot/surfaces.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace layerpot {

/// The harmonic test function (sin x + sin y) e^z, used inside the surface.
inline double exact_inside(const Vec3& x) { return (std::sin(x[0]) + std::sin(x[1])) * std::exp(x[2]); }

inline Vec3 exact_inside_gradient(const Vec3& x) {
  const double e = std::exp(x[2]);
  return {std::cos(x[0]) * e, std::cos(x[1]) * e, (std::sin(x[0]) + std::sin(x[1])) * e};
}

/// u = exact_inside in the enclosed region and 0 outside.
inline double exact_solution(const LevelSurface& surface, const Vec3& x) {
  return surface.value(x) < 0.0 ? exact_inside(x) : 0.0;
}

/// Jump densities of u across the surface: phi = u_in, psi = n . grad u_in.
/// Then u = D[phi] - S[psi] off the surface.
struct HarnessDensities {
  Density phi;
  Density psi;
};

inline HarnessDensities harness_densities(const NodeSet& set) {
  HarnessDensities d{Density::sample(set, exact_inside), {}};
  d.psi.values.reserve(set.size());
  for (const auto& nd : set.nodes) d.psi.values.push_back(nd.n.dot(exact_inside_gradient(nd.pos)));
  return d;
}

enum class Mode { near, on, both };

inline std::string to_string(Mode m) {
  return m == Mode::near ? "near" : (m == Mode::on ? "on" : "both");
}
inline std::string to_string(SumBackend b) { return b == SumBackend::direct ? "direct" : "treecode"; }

struct CaseConfig {
  std::string surface = "rot-ellipsoid";
  int n = 64;
  std::vector<double> delta_ratios{2.0};
  double theta_degrees = 70.0;
  Mode mode = Mode::both;
  SumBackend backend = SumBackend::direct;
  TreecodeParams treecode;
  double half_width = 1.1;

  void validate() const {
    if (n < 4 || n % 2 != 0) throw Error("N must be an even number of at least 4");
    if (delta_ratios.empty()) throw Error("at least one delta/h ratio is required");
    for (const double r : delta_ratios) {
      if (!(r > 0.0)) throw Error("delta/h must be positive");
    }
    PouParams::from_degrees(theta_degrees);
  }
};

struct NormPair {
  double l2 = std::numeric_limits<double>::quiet_NaN();
  double linf = std::numeric_limits<double>::quiet_NaN();
};

/// RMS and maximum of |e| with equal point weights.
inline NormPair norms(const std::vector<double>& e) {
  NormPair p;
  if (e.empty()) return p;
  double s = 0.0;
  double m = 0.0;
  for (const double v : e) {
    s += v * v;
    m = std::max(m, std::abs(v));
  }
  p.l2 = std::sqrt(s / static_cast<double>(e.size()));
  p.linf = m;
  return p;
}

struct ErrorRow {
  std::string surface;
  int n = 0;
  double delta_ratio = 0.0;
  double theta = 0.0;
  std::string mode;
  std::string backend;
  NormPair irregular;
  NormPair regular;
  NormPair quadrature;
  std::size_t nodes = 0;
  std::size_t targets = 0;
  double seconds = 0.0;
};

/// Per-delta detail of a run, for analyses beyond the norms.
struct CaseDetail {
  std::vector<double> irregular_errors;  // signed, per irregular node
  std::vector<double> regular_errors;
  std::vector<double> quadrature_errors;
};

struct CaseResult {
  std::vector<ErrorRow> rows;       // one per delta ratio
  std::vector<CaseDetail> details;  // one per delta ratio
  std::vector<double> irregular_b;  // signed distance per irregular node
  std::vector<std::string> warnings;
  NodeSet nodes;
};

inline CaseResult run_case(const CaseConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const SurfacePtr surface = make_surface(cfg.surface);
  const BoxGrid grid(cfg.half_width, cfg.n);
  const double h = grid.h();

  CaseResult res;
  res.nodes = generate_nodes(*surface, h, PouParams::from_degrees(cfg.theta_degrees), grid.box());
  res.warnings = res.nodes.warnings;
  const NodeSet& set = res.nodes;
  const HarnessDensities dens = harness_densities(set);

  EvalOptions opts;
  opts.backend = cfg.backend;
  opts.treecode = cfg.treecode;
  const LayerPotentials lp(surface, set, opts);

  std::vector<double> deltas;
  for (const double r : cfg.delta_ratios) deltas.push_back(r * h);
  const std::size_t nd = deltas.size();
  res.details.resize(nd);
  std::size_t target_count = 0;

  if (cfg.mode != Mode::on) {
    const Classification cls = classify_nodes(grid, *surface);
    std::vector<Vec3> pts;
    pts.reserve(cls.targets.size());
    for (const std::size_t idx : cls.targets) pts.push_back(grid.node(idx));
    target_count += pts.size();
    const BatchResult br = lp.evaluate_near(pts, dens.phi, dens.psi, deltas);

    std::vector<std::size_t> slot(grid.interior_count(), 0);
    for (std::size_t t = 0; t < cls.targets.size(); ++t) slot[cls.targets[t]] = t;
    for (const std::size_t idx : cls.irregular) res.irregular_b.push_back(br.frames[slot[idx]].b);

    for (std::size_t s = 0; s < nd; ++s) {
      std::vector<double> near_values(grid.interior_count(), missing_value);
      for (std::size_t t = 0; t < cls.targets.size(); ++t) {
        const LayerPair& v = br.at(t, s);
        near_values[cls.targets[t]] = v.dbl.total - v.single.total;
      }
      CaseDetail& det = res.details[s];
      for (const std::size_t idx : cls.irregular) {
        det.irregular_errors.push_back(near_values[idx] - exact_solution(*surface, grid.node(idx)));
      }
      const std::vector<double> uh = extend_potential(grid, cls, near_values);
      for (std::size_t idx = 0; idx < uh.size(); ++idx) {
        if (cls.kind[idx] != NodeKind::regular) continue;
        det.regular_errors.push_back(uh[idx] - exact_solution(*surface, grid.node(idx)));
      }
    }
  }

  if (cfg.mode != Mode::near) {
    std::vector<std::size_t> ids(set.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    target_count += ids.size();
    const BatchResult br = lp.evaluate_on(ids, dens.phi, dens.psi, deltas);
    for (std::size_t s = 0; s < nd; ++s) {
      CaseDetail& det = res.details[s];
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const LayerPair& v = br.at(i, s);
        // On the surface u takes the mean of its one-sided limits, u_in / 2.
        det.quadrature_errors.push_back(v.dbl.total - v.single.total - 0.5 * dens.phi.values[i]);
      }
    }
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (std::size_t s = 0; s < nd; ++s) {
    ErrorRow row;
    row.surface = cfg.surface;
    row.n = cfg.n;
    row.delta_ratio = cfg.delta_ratios[s];
    row.theta = cfg.theta_degrees;
    row.mode = to_string(cfg.mode);
    row.backend = to_string(cfg.backend);
    row.irregular = norms(res.details[s].irregular_errors);
    row.regular = norms(res.details[s].regular_errors);
    row.quadrature = norms(res.details[s].quadrature_errors);
    row.nodes = set.size();
    row.targets = target_count;
    row.seconds = secs;
    res.rows.push_back(row);
  }
  return res;
}

inline constexpr const char* csv_header =
    "surface,N,delta_ratio,theta,mode,backend,e2_irreg,einf_irreg,e2_reg,einf_reg,e2_quad,"
    "einf_quad,nodes,targets,seconds";

namespace detail {
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}
}  // namespace detail

inline std::string csv_row(const ErrorRow& r) {
  using detail::csv_number;
  return r.surface + "," + std::to_string(r.n) + "," + csv_number(r.delta_ratio) + "," +
         csv_number(r.theta) + "," + r.mode + "," + r.backend + "," + csv_number(r.irregular.l2) +
         "," + csv_number(r.irregular.linf) + "," + csv_number(r.regular.l2) + "," +
         csv_number(r.regular.linf) + "," + csv_number(r.quadrature.l2) + "," +
         csv_number(r.quadrature.linf) + "," + std::to_string(r.nodes) + "," +
         std::to_string(r.targets) + "," + csv_number(r.seconds);
}

inline void write_csv(std::ostream& out, const std::vector<ErrorRow>& rows) {
  out << csv_header << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
}

}  // namespace layerpot
