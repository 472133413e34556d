#pragma once

// End-to-end orchestration: conditions -> null curve -> integration ->
// verification, with the residuals collected into a ResidualReport.

#include <functional>
#include <iomanip>
#include <sstream>

#include "tsforge/catalog.hpp"
#include "tsforge/report.hpp"

namespace tsforge {

struct PipelineOptions {
  GaussTolerances tol;
  IntegrationOptions integration;
  // Band trimmed from reported residuals: a fixed physical width, so that
  // convergence studies compare errors over the same region, but never
  // fewer than `min_margin_nodes` nodes.
  double margin_width = 0.2;
  int min_margin_nodes = 4;
  double anchor_u = 0.0;
  double anchor_v = 0.0;

  int margin_nodes(const Grid& g) const {
    const int by_width = static_cast<int>(std::ceil(margin_width / g.h() - 1e-9));
    return std::max(min_margin_nodes, by_width);
  }
};

struct ConditionStage {
  GaussMapPair pair;
  HolomorphyCheck holo;
  CompatibilityResult cp;
  ConditionResiduals cond;
  NullCurveField ncf;
};

inline ConditionStage run_conditions(const ExampleSpec& spec, const Grid& grid,
                                     const PipelineOptions& opt = {}) {
  ConditionStage s;
  s.pair = spec.make_pair(grid, opt.tol);
  s.holo = check_nowhere_holomorphic(s.pair, opt.tol.eps_hol);
  s.cp = compatibility_F(s.pair, opt.tol);
  s.cond = integrability_residuals(s.pair, s.cp);
  s.ncf = build_null_curve(s.pair, s.cp);
  return s;
}

/// Residuals that need only the prescribed pair (the `verify` stage).
inline void add_condition_residuals(ResidualReport& r, const ExampleSpec& spec,
                                    const ConditionStage& s, const PipelineOptions& opt) {
  const int m = opt.margin_nodes(s.pair.g1.grid());
  r.add("cp", norms(s.cond.cp_residual, m));
  r.add("L", norms(s.cond.L_residual, m));
  r.add("R", norms(s.cond.R_residual, m));
  r.add("equivalence", norms(equivalence_field(s.cond, s.pair, opt.tol.eps_hol), m));
  r.add("nullity", norms(nullity_residual(s.ncf), m));
  r.add("norm_identity", norms(norm_identity_residual(s.ncf), m));
  const IntegrabilityResidual ir = integrability_residual(s.ncf);
  r.add("phi_zbar", norms(ir.residual, m));
  r.add("im_phi_zbar", norms(ir.imag_part, m));
  r.add("loop_closure", norms(loop_closure_field(s.ncf, m)));
  const MetricReport met = induced_metric(s.ncf);
  r.add("metric_forms", norms(zip_with([](double l, double a, double b) {
                                         return std::max(std::abs(a - l), std::abs(b - l)) / l;
                                       },
                                       met.lambda2, met.via_g1, met.via_g2),
                              m));
  if (spec.G) {
    const ComplexField G = ComplexField::sample(s.pair.g1.grid(), *spec.G);
    r.add("gauss_equation", norms(translator_equation_residual_r3(G, opt.tol.eps_branch), m));
  }
}

struct GeometryStage {
  ImmersionPatch patch;
  CurvatureReport fd;
  CurvatureReport closed;
  ProjectiveGaussMap gauss;
};

inline Vec4 anchor_position(const ExampleSpec& spec, const Grid& g, Node a) {
  return spec.closed_form_X ? (*spec.closed_form_X)(g.u(a.i), g.v(a.j)) : Vec4{};
}

inline GeometryStage run_geometry(const ExampleSpec& spec, const ConditionStage& s,
                                  const PipelineOptions& opt = {}) {
  const Grid& g = s.ncf.phi[0].grid();
  const Node a = g.nearest(opt.anchor_u, opt.anchor_v);
  GeometryStage out;
  IntegrationOptions io = opt.integration;
  io.check_margin = opt.margin_nodes(g);
  out.patch = integrate_immersion(s.ncf, a, anchor_position(spec, g, a), io);
  out.fd = mean_curvature_fd(out.patch);
  out.closed = mean_curvature(out.patch, s.ncf, CurvatureMethod::closed_form);
  out.gauss = recover_gauss_map(out.patch);
  return out;
}

inline bool is_lagrangian(const ComplexField& g1, double tol = 1e-12) {
  for (std::size_t k = 0; k < g1.size(); ++k)
    if (g1.active(k) && std::abs(std::abs(g1[k]) - 1.0) > tol) return false;
  return true;
}

/// Residuals of the integrated surface (the `integrate` stage).
inline void add_geometry_residuals(ResidualReport& r, const ExampleSpec& spec,
                                   const ConditionStage& s, const GeometryStage& geo,
                                   const PipelineOptions& opt) {
  const ImmersionPatch& p = geo.patch;
  const Grid& g = p.grid();
  const int m = opt.margin_nodes(g);
  if (spec.closed_form_X) {
    RealField err(g);
    for (int j = 0; j < g.n_v(); ++j)
      for (int i = 0; i < g.n_u(); ++i) {
        if (!g.active(i, j)) continue;
        const Vec4 x = p.at(i, j), y = (*spec.closed_form_X)(g.u(i), g.v(j));
        double e = 0.0;
        for (int k = 0; k < 4; ++k) e = std::max(e, std::abs(x[k] - y[k]));
        err(i, j) = e;
      }
    r.add("position", norms(err));
  }
  if (spec.closed_form_metric) {
    const RealField ref = RealField::sample(g, *spec.closed_form_metric);
    r.add("metric", norms(zip_with([](double a, double b) { return std::abs(a - b) / b; },
                                   p.lambda2, ref),
                          m));
  }
  const ConformalityResidual conf = conformality(p);
  r.add("conformality_stretch", norms(conf.stretch, m));
  r.add("conformality_shear", norms(conf.shear, m));
  r.add("translator_fd", translator_residual(geo.fd, m));
  r.add("translator_closed", translator_residual(geo.closed, m));
  r.add("curvature_paths", norms(vector_distance(geo.fd.H, geo.closed.H), m));
  r.add("e4_projection_paths", norms(vector_distance(geo.fd.e4_perp, geo.closed.e4_perp), m));
  r.add("gauss_roundtrip",
        norms(zip_with([](cplx a, cplx b, cplx c, cplx d) {
                return std::max(std::abs(a - c), std::abs(b - d));
              },
                       geo.gauss.recovered_g1, geo.gauss.recovered_g2, s.pair.g1, s.pair.g2),
              m));
  r.add("q2_membership", norms(geo.gauss.q2_residual, m));
  if (spec.G) {
    const ComplexField G = ComplexField::sample(g, *spec.G);
    r.add("normal_stereographic",
          norms(zip_with([](cplx a, cplx b) { return std::abs(a - b); },
                         stereographic(unit_normal_r3(p)), G),
                m));
  }
  if (is_lagrangian(s.pair.g1)) {
    const RealField theta = lagrangian_angle(geo.gauss.recovered_g1, p.anchor);
    r.add("lagrangian_angle_harmonic",
          norms(laplace_beltrami(theta, frame_metric(tangent_frame(p))), m));
    const ComplexField x3z = wirtinger_dz(to_complex(p.x[2]));
    const ComplexField thz = wirtinger_dz(to_complex(theta));
    r.add("lagrangian_x3",
          norms(zip_with([](cplx a, cplx b) { return std::abs(a + b); }, x3z, thz), m));
  }
}

inline ResidualReport verify_report(const ExampleSpec& spec, const Grid& grid,
                                    const PipelineOptions& opt, ConditionStage* stage = nullptr) {
  ResidualReport r;
  r.example = spec.name;
  r.set_grid(grid);
  ConditionStage s = run_conditions(spec, grid, opt);
  add_condition_residuals(r, spec, s, opt);
  if (stage) *stage = std::move(s);
  return r;
}

inline ResidualReport full_report(const ExampleSpec& spec, const Grid& grid,
                                  const PipelineOptions& opt) {
  ResidualReport r;
  r.example = spec.name;
  r.set_grid(grid);
  const ConditionStage s = run_conditions(spec, grid, opt);
  add_condition_residuals(r, spec, s, opt);
  const GeometryStage geo = run_geometry(spec, s, opt);
  add_geometry_residuals(r, spec, s, geo, opt);
  return r;
}

struct ConvergenceTable {
  std::vector<double> h;
  std::vector<ResidualReport> levels;
  // name -> observed orders between consecutive levels
  std::vector<std::pair<std::string, std::vector<std::optional<double>>>> orders;
};

/// Runs the full pipeline at each spacing (coarse to fine) and computes the
/// observed order of every residual between consecutive levels.
inline ConvergenceTable converge(const ExampleSpec& spec, const Domain& dom,
                                 std::vector<double> spacings, const PipelineOptions& opt,
                                 bool with_geometry = true) {
  if (spacings.size() < 3) throw DomainError("convergence study needs at least three levels");
  std::sort(spacings.begin(), spacings.end(), std::greater<>());
  ConvergenceTable t;
  for (double h : spacings) {
    const Grid g = Grid::with_spacing(dom.u_min, dom.u_max, dom.v_min, dom.v_max, h);
    t.h.push_back(g.h());
    t.levels.push_back(with_geometry ? full_report(spec, g, opt) : verify_report(spec, g, opt));
  }
  for (const auto& [name, first] : t.levels.front().residuals) {
    std::vector<std::optional<double>> ord;
    bool complete = true;
    for (std::size_t k = 0; k + 1 < t.levels.size(); ++k) {
      const Norms* a = t.levels[k].find(name);
      const Norms* b = t.levels[k + 1].find(name);
      if (!a || !b) {
        complete = false;
        break;
      }
      ord.push_back(observed_order(a->max, b->max, t.h[k], t.h[k + 1]));
    }
    if (complete) t.orders.emplace_back(name, std::move(ord));
  }
  auto& finest = t.levels.back();
  const auto& prev = t.levels[t.levels.size() - 2];
  for (const auto& [name, ord] : t.orders)
    finest.convergence.emplace_back(name, error_ratio(prev.find(name)->max, finest.find(name)->max));
  return t;
}

inline ojson to_json(const ConvergenceTable& t) {
  ojson j;
  j["h"] = t.h;
  ojson lv = ojson::array();
  for (const auto& r : t.levels) lv.push_back(to_json(r));
  j["levels"] = lv;
  ojson ord = ojson::object();
  for (const auto& [name, o] : t.orders) {
    ojson a = ojson::array();
    for (const auto& x : o) {
      if (x)
        a.push_back(*x);
      else
        a.push_back("exact");
    }
    ord[name] = a;
  }
  j["orders"] = ord;
  return j;
}

inline std::string to_csv(const ConvergenceTable& t) {
  std::ostringstream out;
  out << std::setprecision(17) << "residual";
  for (double h : t.h) out << ",max@h=" << h;
  for (std::size_t k = 0; k + 1 < t.h.size(); ++k) out << ",order" << k + 1;
  out << '\n';
  for (const auto& [name, o] : t.orders) {
    out << name;
    for (const auto& lvl : t.levels) out << ',' << lvl.find(name)->max;
    for (const auto& x : o) {
      out << ',';
      if (x)
        out << *x;
      else
        out << "exact";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace tsforge
