#pragma once

// Path integration of X_z = φ over a simply connected masked grid, with a
// cell-circulation test of path independence, the induced metric, and mesh
// export.

#include <array>
#include <deque>
#include <sstream>
#include <string>

#include "tsforge/io.hpp"
#include "tsforge/nullcurve.hpp"

namespace tsforge {

using Vec4 = std::array<double, 4>;

/// Active region is disconnected or has holes.
class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration refused because the 1-form is not closed enough.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImmersionPatch {
  std::array<RealField, 4> x;  // R^4 slots; slot 2 is identically zero when dim == 3
  Node anchor;
  Vec4 anchor_pos{};
  RealField lambda2;
  int dim = 4;

  const Grid& grid() const { return x[0].grid(); }
  Vec4 at(int i, int j) const { return {x[0](i, j), x[1](i, j), x[2](i, j), x[3](i, j)}; }
};

/// Ambient slots shown for an R^3 surface: (ζ1, ζ2, ζ4) as (x1, x2, x3).
inline constexpr std::array<int, 3> r3_slots{0, 1, 3};

namespace detail {

inline std::size_t count_components(const Grid& g, bool want_active, bool eight,
                                    bool* touches_border_all = nullptr,
                                    std::size_t* interior_components = nullptr) {
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::size_t comps = 0, interior = 0;
  std::deque<Node> q;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (seen[s] || g.active(s) != want_active) continue;
    ++comps;
    bool border = false;
    seen[s] = 1;
    q.push_back(g.node(s));
    while (!q.empty()) {
      const Node n = q.front();
      q.pop_front();
      if (n.i == 0 || n.j == 0 || n.i == g.n_u() - 1 || n.j == g.n_v() - 1) border = true;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if ((di == 0 && dj == 0) || (!eight && di != 0 && dj != 0)) continue;
          const int a = n.i + di, b = n.j + dj;
          if (!g.inside(a, b)) continue;
          const std::size_t k = g.index(a, b);
          if (seen[k] || g.active(k) != want_active) continue;
          seen[k] = 1;
          q.push_back({a, b});
        }
    }
    if (!border) ++interior;
  }
  if (interior_components) *interior_components = interior;
  if (touches_border_all) *touches_border_all = interior == 0;
  return comps;
}

}  // namespace detail

/// Throws TopologyError unless the active nodes form one 4-connected
/// component whose complement has no component detached from the border.
inline void require_simply_connected(const Grid& g) {
  if (g.active_count() == 0) throw TopologyError("active region is empty");
  if (detail::count_components(g, true, false) != 1)
    throw TopologyError("active region is not edge-connected");
  std::size_t holes = 0;
  detail::count_components(g, false, true, nullptr, &holes);
  if (holes > 0)
    throw TopologyError("domain is not simply connected: mask has " + std::to_string(holes) +
                        " hole(s)");
}

/// Per-cell circulation of (X_u, X_v) = (2 Re φ, -2 Im φ), divided by the
/// cell area and maximised over the four slots. Stored at the cell's
/// lower-left node; only cells whose corners survive `margin` erosion count.
inline RealField loop_closure_field(const NullCurveField& c, int margin = 0) {
  const Grid g = c.phi[0].grid();
  const Grid core = g.eroded(margin);
  Grid cells = core;
  for (int j = 0; j < g.n_v(); ++j)
    for (int i = 0; i < g.n_u(); ++i)
      cells.set_active(i, j, core.active(i, j) && core.active(i + 1, j) &&
                                 core.active(i, j + 1) && core.active(i + 1, j + 1));
  RealField out(cells);
  const double hu = g.h_u(), hv = g.h_v();
  for (int j = 0; j < g.n_v(); ++j)
    for (int i = 0; i < g.n_u(); ++i) {
      if (!cells.active(i, j)) continue;
      double worst = 0.0;
      for (const auto& p : c.phi) {
        const auto xu = [&](int a, int b) { return 2.0 * p(a, b).real(); };
        const auto xv = [&](int a, int b) { return -2.0 * p(a, b).imag(); };
        const double circ = 0.5 * hu * (xu(i, j) + xu(i + 1, j)) +
                            0.5 * hv * (xv(i + 1, j) + xv(i + 1, j + 1)) -
                            0.5 * hu * (xu(i, j + 1) + xu(i + 1, j + 1)) -
                            0.5 * hv * (xv(i, j) + xv(i, j + 1));
        worst = std::max(worst, std::abs(circ) / (hu * hv));
      }
      out(i, j) = worst;
    }
  return out;
}

inline double loop_closure_residual(const NullCurveField& c, int margin = 0) {
  return max_abs(loop_closure_field(c, margin));
}

enum class PathOrder { row_major, column_major };

struct IntegrationOptions {
  PathOrder order = PathOrder::row_major;
  double refusal_c = 1e3;  // refuse when loop residual > refusal_c * h²
  int check_margin = 4;    // erosion applied before the refusal check
  bool force = false;
};

struct MetricReport {
  RealField lambda2;        // 4|f|²(1 + |g1|²)(1 + |g2|²)
  RealField via_g1;         // 16|(g1)_z̄|²/|1 - g1 conj g2|² · (1+|g2|²)/(1+|g1|²)
  RealField via_g2;         // 16|(g2)_z̄|²/|1 - conj g1 g2|² · (1+|g1|²)/(1+|g2|²)
  double max_disagreement = 0.0;  // relative, over both alternative forms
};

inline MetricReport induced_metric(const NullCurveField& c) {
  MetricReport r;
  r.lambda2 = zip_with(
      [](cplx f, cplx a, cplx b) {
        return 4.0 * std::norm(f) * (1.0 + std::norm(a)) * (1.0 + std::norm(b));
      },
      c.f, c.g1, c.g2);
  r.via_g1 = zip_with(
      [](cplx a, cplx b, cplx d) {
        return 16.0 * std::norm(d) / std::norm(1.0 - a * std::conj(b)) * (1.0 + std::norm(b)) /
               (1.0 + std::norm(a));
      },
      c.g1, c.g2, wirtinger_dzbar(c.g1));
  r.via_g2 = zip_with(
      [](cplx a, cplx b, cplx d) {
        return 16.0 * std::norm(d) / std::norm(1.0 - std::conj(a) * b) * (1.0 + std::norm(a)) /
               (1.0 + std::norm(b));
      },
      c.g1, c.g2, wirtinger_dzbar(c.g2));
  r.max_disagreement = max_abs(zip_with(
      [](double l, double a, double b) { return std::max(std::abs(a - l), std::abs(b - l)) / l; },
      r.lambda2, r.via_g1, r.via_g2));
  return r;
}

/// Conformal factor of an R^3 surface written in terms of G:
/// 16|G_z̄|² / (|G|² - 1)².
inline RealField r3_metric(const ComplexField& G) {
  return zip_with(
      [](cplx g, cplx d) {
        const double t = std::norm(g) - 1.0;
        return 16.0 * std::norm(d) / (t * t);
      },
      G, wirtinger_dzbar(G));
}

/// Integrates X from X_u = 2 Re φ and X_v = -2 Im φ by the trapezoidal rule
/// along axis-aligned paths from the anchor.
///
/// row_major walks the anchor column first and then every row outward;
/// column_major walks the anchor row first and then every column. Nodes
/// that an L-path cannot reach are filled by repeated index-order sweeps
/// from already integrated neighbours.
inline ImmersionPatch integrate_immersion(const NullCurveField& c, Node anchor, const Vec4& anchor_pos,
                                          const IntegrationOptions& opt = {}) {
  Grid g = c.phi[0].grid();
  for (const auto& p : c.phi) g = g.intersect(p.grid());
  require_simply_connected(g);
  if (!g.active(anchor.i, anchor.j)) throw DomainError("anchor node is not active");

  const double h = g.h();
  const double loop = loop_closure_residual(c, opt.check_margin);
  if (!opt.force && loop > opt.refusal_c * h * h) {
    std::ostringstream msg;
    msg << "refusing to integrate: loop-closure residual " << loop << " exceeds "
        << opt.refusal_c << "*h^2 = " << opt.refusal_c * h * h << " (use --force to override)";
    throw RefusalError(msg.str());
  }

  ImmersionPatch patch;
  patch.anchor = anchor;
  patch.anchor_pos = anchor_pos;
  patch.dim = c.dim;
  for (auto& comp : patch.x) comp = RealField(g);
  std::vector<std::uint8_t> done(g.size(), 0);

  const double hu = g.h_u(), hv = g.h_v();
  // Trapezoidal step from `from` to the neighbour `to`.
  const auto step = [&](Node from, Node to) {
    const std::size_t a = g.index(from.i, from.j), b = g.index(to.i, to.j);
    for (int s = 0; s < 4; ++s) {
      const cplx pa = c.phi[s][a], pb = c.phi[s][b];
      double dx;
      if (to.j == from.j)
        dx = (to.i - from.i) * hu * (pa.real() + pb.real());
      else
        dx = -(to.j - from.j) * hv * (pa.imag() + pb.imag());
      patch.x[s][b] = patch.x[s][a] + dx;
    }
    done[b] = 1;
  };
  // Walks outward from `start` along one axis while nodes stay active.
  const auto sweep = [&](Node start, int di, int dj) {
    Node cur = start;
    while (true) {
      const Node nxt{cur.i + di, cur.j + dj};
      if (!g.active(nxt.i, nxt.j) || done[g.index(nxt.i, nxt.j)]) break;
      step(cur, nxt);
      cur = nxt;
    }
  };

  const std::size_t ka = g.index(anchor.i, anchor.j);
  for (int s = 0; s < 4; ++s) patch.x[s][ka] = anchor_pos[s];
  done[ka] = 1;

  if (opt.order == PathOrder::row_major) {
    sweep(anchor, 0, 1);
    sweep(anchor, 0, -1);
    for (int j = 0; j < g.n_v(); ++j)
      if (done[g.index(anchor.i, j)]) {
        sweep({anchor.i, j}, 1, 0);
        sweep({anchor.i, j}, -1, 0);
      }
  } else {
    sweep(anchor, 1, 0);
    sweep(anchor, -1, 0);
    for (int i = 0; i < g.n_u(); ++i)
      if (done[g.index(i, anchor.j)]) {
        sweep({i, anchor.j}, 0, 1);
        sweep({i, anchor.j}, 0, -1);
      }
  }

  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!g.active(k) || done[k]) continue;
      const Node n = g.node(k);
      for (const Node nb : {Node{n.i - 1, n.j}, Node{n.i + 1, n.j}, Node{n.i, n.j - 1},
                            Node{n.i, n.j + 1}}) {
        if (g.active(nb.i, nb.j) && done[g.index(nb.i, nb.j)]) {
          step(nb, n);
          progress = true;
          break;
        }
      }
    }
  }

  patch.lambda2 = induced_metric(c).lambda2.restricted(g);
  if (c.dim == 3)
    for (std::size_t k = 0; k < g.size(); ++k)
      if (g.active(k)) patch.x[2][k] = anchor_pos[2];
  return patch;
}

/// Samples a patch from a parametrisation; Λ² is taken from the frame.
template <class Fn>
ImmersionPatch patch_from_function(const Grid& grid, Fn&& fn, int dim = 4) {
  ImmersionPatch p;
  p.dim = dim;
  for (int s = 0; s < 4; ++s)
    p.x[s] = RealField::sample(grid, [&](double u, double v) { return fn(u, v)[s]; });
  const Node c = grid.nearest(0.5 * (grid.u_min() + grid.u_max()),
                              0.5 * (grid.v_min() + grid.v_max()));
  p.anchor = c;
  p.anchor_pos = p.at(c.i, c.j);
  return p;
}

struct TangentFrame {
  std::array<RealField, 4> xu;
  std::array<RealField, 4> xv;
};

inline TangentFrame tangent_frame(const ImmersionPatch& p) {
  TangentFrame t;
  for (int s = 0; s < 4; ++s) {
    t.xu[s] = partial_u(p.x[s]);
    t.xv[s] = partial_v(p.x[s]);
  }
  return t;
}

/// Λ² estimated from the discrete frame as ½(|X_u|² + |X_v|²).
inline RealField frame_metric(const TangentFrame& t) {
  return zip_with(
      [](double a0, double a1, double a2, double a3, double b0, double b1, double b2, double b3) {
        return 0.5 * (a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3 + b0 * b0 + b1 * b1 + b2 * b2 +
                      b3 * b3);
      },
      t.xu[0], t.xu[1], t.xu[2], t.xu[3], t.xv[0], t.xv[1], t.xv[2], t.xv[3]);
}

struct ConformalityResidual {
  RealField stretch;  // | |X_u|² - |X_v|² | / Λ²
  RealField shear;    // |X_u · X_v| / Λ²
};

inline ConformalityResidual conformality(const ImmersionPatch& p) {
  const TangentFrame t = tangent_frame(p);
  const RealField lam = p.lambda2.size() ? p.lambda2 : frame_metric(t);
  ConformalityResidual r;
  r.stretch = RealField(lam.grid().intersect(t.xu[0].grid()).intersect(t.xv[0].grid()));
  r.shear = r.stretch;
  const Grid& m = r.stretch.grid();
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.active(k)) continue;
    double e = 0, g = 0, f = 0;
    for (int s = 0; s < 4; ++s) {
      e += t.xu[s][k] * t.xu[s][k];
      g += t.xv[s][k] * t.xv[s][k];
      f += t.xu[s][k] * t.xv[s][k];
    }
    r.stretch[k] = std::abs(e - g) / lam[k];
    r.shear[k] = std::abs(f) / lam[k];
  }
  return r;
}

/// Triangulated OBJ of the active cells using three chosen slots. When
/// `sidecar_path` is non-empty, the remaining slot `scalar_slot` is written
/// per vertex as CSV (vertex,u,v,value).
inline void export_obj(const ImmersionPatch& p, const std::string& path, std::array<int, 3> slots,
                       const std::string& sidecar_path = "", int scalar_slot = 3) {
  const Grid& g = p.grid();
  std::vector<long> vid(g.size(), -1);
  std::ostringstream obj, side;
  obj << std::setprecision(17) << "# translator patch " << g.n_u() << "x" << g.n_v() << "\n";
  side << std::setprecision(17) << "vertex,u,v,value\n";
  long next = 1;
  for (int j = 0; j < g.n_v(); ++j)
    for (int i = 0; i < g.n_u(); ++i) {
      if (!g.active(i, j)) continue;
      const Vec4 x = p.at(i, j);
      vid[g.index(i, j)] = next;
      obj << "v " << x[slots[0]] << ' ' << x[slots[1]] << ' ' << x[slots[2]] << '\n';
      side << next << ',' << g.u(i) << ',' << g.v(j) << ',' << x[scalar_slot] << '\n';
      ++next;
    }
  for (int j = 0; j + 1 < g.n_v(); ++j)
    for (int i = 0; i + 1 < g.n_u(); ++i) {
      const long a = vid[g.index(i, j)], b = vid[g.index(i + 1, j)];
      const long c = vid[g.index(i + 1, j + 1)], d = vid[g.index(i, j + 1)];
      if (a < 0 || b < 0 || c < 0 || d < 0) continue;
      obj << "f " << a << ' ' << b << ' ' << c << '\n' << "f " << a << ' ' << c << ' ' << d << '\n';
    }
  write_file_atomic(path, obj.str());
  if (!sidecar_path.empty()) write_file_atomic(sidecar_path, side.str());
}

/// Full-precision CSV: u,v,x1..x3 for R^3 patches, u,v,x1..x4 otherwise.
inline void export_csv(const ImmersionPatch& p, const std::string& path) {
  const Grid& g = p.grid();
  std::ostringstream out;
  out << std::setprecision(17);
  out << (p.dim == 3 ? "u,v,x1,x2,x3\n" : "u,v,x1,x2,x3,x4\n");
  for (int j = 0; j < g.n_v(); ++j)
    for (int i = 0; i < g.n_u(); ++i) {
      if (!g.active(i, j)) continue;
      const Vec4 x = p.at(i, j);
      out << g.u(i) << ',' << g.v(j);
      if (p.dim == 3)
        for (int s : r3_slots) out << ',' << x[s];
      else
        for (double xs : x) out << ',' << xs;
      out << '\n';
    }
  write_file_atomic(path, out.str());
}

}  // namespace tsforge
