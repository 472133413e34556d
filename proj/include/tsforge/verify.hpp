#pragma once

// Independent geometric checks on an integrated patch: mean curvature
// vector, normal projection of -e4, translator residual, Gauss-map
// recovery, the graphical translator PDE and the conformal Laplacian.

#include <Eigen/Dense>

#include <numbers>

#include "tsforge/immersion.hpp"

namespace tsforge {

enum class CurvatureMethod { closed_form, finite_difference };

using VectorField4 = std::array<RealField, 4>;

struct CurvatureReport {
  VectorField4 H;
  VectorField4 e4_perp;
  RealField translator_residual;  // |H - (-e4)^⊥|
  CurvatureMethod method = CurvatureMethod::finite_difference;
};

/// (-e4)^⊥ written in terms of the Gauss map pair.
inline VectorField4 e4_perp_closed_form(const ComplexField& g1, const ComplexField& g2) {
  const auto slot = [&](auto&& expr) {
    return zip_with(
        [&](cplx a, cplx b) { return expr(a, b) / ((1.0 + std::norm(a)) * (1.0 + std::norm(b))); },
        g1, g2);
  };
  return {
      slot([](cplx a, cplx b) {
        return (1.0 - std::norm(b)) * a.imag() + (1.0 - std::norm(a)) * b.imag();
      }),
      slot([](cplx a, cplx b) {
        return -((1.0 - std::norm(b)) * a.real() + (1.0 - std::norm(a)) * b.real());
      }),
      slot([](cplx a, cplx b) { return 2.0 * (std::conj(a) * b).imag(); }),
      slot([](cplx a, cplx b) {
        return -(1.0 - 2.0 * (std::conj(a) * b).real() + std::norm(a) * std::norm(b));
      }),
  };
}

/// -e4 minus its orthogonal projection onto span(X_u, X_v), using only the
/// finite-difference frame of the patch.
inline VectorField4 e4_perp_frame(const TangentFrame& t) {
  Grid m = t.xu[0].grid().intersect(t.xv[0].grid());
  VectorField4 out{RealField(m), RealField(m), RealField(m), RealField(m)};
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.active(k)) continue;
    double E = 0, F = 0, G = 0;
    for (int s = 0; s < 4; ++s) {
      E += t.xu[s][k] * t.xu[s][k];
      F += t.xu[s][k] * t.xv[s][k];
      G += t.xv[s][k] * t.xv[s][k];
    }
    const double a = -t.xu[3][k], b = -t.xv[3][k];
    const double det = E * G - F * F;
    const double alpha = (G * a - F * b) / det, beta = (E * b - F * a) / det;
    for (int s = 0; s < 4; ++s) {
      const double w = s == 3 ? -1.0 : 0.0;
      out[s][k] = w - alpha * t.xu[s][k] - beta * t.xv[s][k];
    }
  }
  return out;
}

inline VectorField4 e4_perp_frame(const ImmersionPatch& p) { return e4_perp_frame(tangent_frame(p)); }

struct ProjectionComparison {
  VectorField4 closed_form;
  VectorField4 frame;
  RealField disagreement;  // Euclidean norm of the difference
};

inline RealField vector_distance(const VectorField4& a, const VectorField4& b) {
  return zip_with(
      [](double a0, double a1, double a2, double a3, double b0, double b1, double b2, double b3) {
        return std::sqrt((a0 - b0) * (a0 - b0) + (a1 - b1) * (a1 - b1) + (a2 - b2) * (a2 - b2) +
                         (a3 - b3) * (a3 - b3));
      },
      a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]);
}

inline RealField vector_norm(const VectorField4& a) {
  return zip_with(
      [](double a0, double a1, double a2, double a3) {
        return std::sqrt(a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3);
      },
      a[0], a[1], a[2], a[3]);
}

inline ProjectionComparison e4_normal_projection(const ImmersionPatch& p, const ComplexField& g1,
                                                 const ComplexField& g2) {
  ProjectionComparison r;
  r.closed_form = e4_perp_closed_form(g1, g2);
  r.frame = e4_perp_frame(p);
  r.disagreement = vector_distance(r.closed_form, r.frame);
  return r;
}

/// Mean curvature vector from the patch alone: H = (4/Λ²) ∂_z̄∂_z X with Λ²
/// and the normal projection both taken from the discrete frame.
inline CurvatureReport mean_curvature_fd(const ImmersionPatch& p) {
  const TangentFrame t = tangent_frame(p);
  const RealField lam = frame_metric(t);
  CurvatureReport r;
  r.method = CurvatureMethod::finite_difference;
  for (int s = 0; s < 4; ++s)
    r.H[s] = zip_with([](double l, double q) { return 4.0 / l * q; }, lam, quarter_laplacian(p.x[s]));
  r.e4_perp = e4_perp_frame(t);
  r.translator_residual = vector_distance(r.H, r.e4_perp);
  return r;
}

/// Mean curvature from the closed-form ∂φ/∂z̄ and the metric of the pair.
inline CurvatureReport mean_curvature_closed(const NullCurveField& c) {
  const RealField lam = induced_metric(c).lambda2;
  CurvatureReport r;
  r.method = CurvatureMethod::closed_form;
  for (int s = 0; s < 4; ++s)
    r.H[s] = zip_with([](double l, double q) { return 4.0 / l * q; }, lam, c.phi_zbar_closed[s]);
  r.e4_perp = e4_perp_closed_form(c.g1, c.g2);
  r.translator_residual = vector_distance(r.H, r.e4_perp);
  return r;
}

inline CurvatureReport mean_curvature(const ImmersionPatch& p, const NullCurveField& c,
                                      CurvatureMethod method) {
  if (method == CurvatureMethod::closed_form) {
    CurvatureReport r = mean_curvature_closed(c);
    const Grid& m = p.grid();
    for (auto& comp : r.H) comp = comp.restricted(m);
    for (auto& comp : r.e4_perp) comp = comp.restricted(m);
    r.translator_residual = r.translator_residual.restricted(m);
    return r;
  }
  return mean_curvature_fd(p);
}

struct Norms {
  double max = 0.0;
  double l2 = 0.0;  // sqrt(sum r² h_u h_v)
  std::size_t nodes = 0;
};

/// Max and discrete L² norms over active nodes, after eroding by `margin`.
inline Norms norms(const RealField& r, int margin = 0) {
  const Grid m = r.grid().eroded(margin);
  Norms n;
  double sum = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.active(k)) continue;
    const double a = std::abs(r[k]);
    n.max = std::max(n.max, a);
    sum += a * a;
    ++n.nodes;
  }
  n.l2 = std::sqrt(sum * m.h_u() * m.h_v());
  return n;
}

inline Norms translator_residual(const CurvatureReport& r, int margin = 0) {
  return norms(r.translator_residual, margin);
}

struct ProjectiveGaussMap {
  std::array<ComplexField, 4> zeta;  // X_z by finite differences
  ComplexField recovered_g1;
  ComplexField recovered_g2;
  RealField q2_residual;  // |ζ·ζ| / |ζ|²
  std::size_t flagged = 0;  // nodes where the chart ζ1 - iζ2 ≈ 0
};

/// Reads (g1, g2) back from [X_z] through
///   g1 = (ζ3 + iζ4)/(ζ1 - iζ2),  g2 = -(ζ3 - iζ4)/(ζ1 - iζ2).
inline ProjectiveGaussMap recover_gauss_map(const ImmersionPatch& p, double chart_floor = 1e-10) {
  ProjectiveGaussMap r;
  for (int s = 0; s < 4; ++s) r.zeta[s] = wirtinger_dz(to_complex(p.x[s]));
  Grid m = r.zeta[0].grid();
  for (const auto& z : r.zeta) m = m.intersect(z.grid());
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.active(k)) continue;
    double n = 0;
    for (const auto& z : r.zeta) n += std::norm(z[k]);
    if (std::abs(r.zeta[0][k] - I * r.zeta[1][k]) <= chart_floor * std::sqrt(n)) {
      const Node nd = m.node(k);
      m.set_active(nd.i, nd.j, false);
      ++r.flagged;
    }
  }
  for (auto& z : r.zeta) z = z.restricted(m);
  const auto& z = r.zeta;
  r.recovered_g1 = zip_with([](cplx a, cplx b, cplx c, cplx d) { return (c + I * d) / (a - I * b); },
                            z[0], z[1], z[2], z[3]);
  r.recovered_g2 = zip_with(
      [](cplx a, cplx b, cplx c, cplx d) { return -(c - I * d) / (a - I * b); }, z[0], z[1], z[2],
      z[3]);
  r.q2_residual = zip_with(
      [](cplx a, cplx b, cplx c, cplx d) {
        return std::abs(a * a + b * b + c * c + d * d) /
               (std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
      },
      z[0], z[1], z[2], z[3]);
  return r;
}

/// Unit normal N = X_u × X_v / |X_u × X_v| of an R^3 patch (slots 0, 1, 3).
inline std::array<RealField, 3> unit_normal_r3(const ImmersionPatch& p) {
  const TangentFrame t = tangent_frame(p);
  Grid m = t.xu[0].grid().intersect(t.xv[0].grid());
  std::array<RealField, 3> n{RealField(m), RealField(m), RealField(m)};
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.active(k)) continue;
    const Eigen::Vector3d a(t.xu[0][k], t.xu[1][k], t.xu[3][k]);
    const Eigen::Vector3d b(t.xv[0][k], t.xv[1][k], t.xv[3][k]);
    const Eigen::Vector3d c = a.cross(b).normalized();
    for (int s = 0; s < 3; ++s) n[s][k] = c[s];
  }
  return n;
}

/// Stereographic projection from the north pole, (n1 + i n2)/(1 - n3).
inline ComplexField stereographic(const std::array<RealField, 3>& n) {
  return zip_with([](double a, double b, double c) { return cplx{a, b} / (1.0 - c); }, n[0], n[1],
                  n[2]);
}

inline Eigen::Vector3d inverse_stereographic(const cplx& w) {
  const double d = 1.0 + std::norm(w);
  return {2.0 * w.real() / d, 2.0 * w.imag() / d, (std::norm(w) - 1.0) / d};
}

struct PlaneFit {
  Eigen::Vector3d normal;
  double offset = 0.0;        // plane: normal · x = offset
  double max_deviation = 0.0;
};

/// Least-squares plane through a point cloud (smallest principal axis).
inline PlaneFit fit_plane(const std::vector<Eigen::Vector3d>& pts) {
  if (pts.size() < 3) throw DomainError("plane fit needs at least three points");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& q : pts) mean += q;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& q : pts) cov += (q - mean) * (q - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  PlaneFit f;
  f.normal = es.eigenvectors().col(0);
  f.offset = f.normal.dot(mean);
  for (const auto& q : pts) f.max_deviation = std::max(f.max_deviation, std::abs(f.normal.dot(q) - f.offset));
  return f;
}

struct HeightField {
  RealField F;  // x3 = F(x1, x2) sampled on a grid whose (u, v) are (x1, x2)

  template <class Fn>
  static HeightField sample(const Grid& g, Fn&& fn) {
    return {RealField::sample(g, std::forward<Fn>(fn))};
  }
};

/// ∇·(∇F/W) + 1/W with W = sqrt(1 + |∇F|²), in non-divergence form
///   [(1 + F_y²)F_xx - 2F_xF_yF_xy + (1 + F_x²)F_yy]/W³ + 1/W.
inline RealField graphical_pde_residual(const HeightField& hf) {
  const RealField& F = hf.F;
  const RealField fx = partial_u(F), fy = partial_v(F);
  const RealField fxx = partial_uu(F), fyy = partial_vv(F), fxy = partial_v(fx);
  return zip_with(
      [](double a, double b, double aa, double bb, double ab) {
        const double w2 = 1.0 + a * a + b * b;
        const double w = std::sqrt(w2);
        return ((1.0 + b * b) * aa - 2.0 * a * b * ab + (1.0 + a * a) * bb) / (w2 * w) + 1.0 / w;
      },
      fx, fy, fxx, fyy, fxy);
}

/// Conformal Laplace-Beltrami operator (4/Λ²) ∂_z∂_z̄.
inline RealField laplace_beltrami(const RealField& scalar, const RealField& lambda2) {
  return zip_with([](double q, double l) { return 4.0 / l * q; }, quarter_laplacian(scalar), lambda2);
}

/// Removes 2π jumps from a wrapped phase by walking the same row-major
/// paths used for integration, starting from `anchor`.
inline RealField unwrap_phase(const RealField& wrapped, Node anchor) {
  const Grid& g = wrapped.grid();
  if (!g.active(anchor.i, anchor.j)) throw DomainError("unwrap anchor is not active");
  RealField out = wrapped;
  std::vector<std::uint8_t> done(g.size(), 0);
  const auto step = [&](Node from, Node to) {
    double d = wrapped(to.i, to.j) - wrapped(from.i, from.j);
    d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    out(to.i, to.j) = out(from.i, from.j) + d;
    done[g.index(to.i, to.j)] = 1;
  };
  const auto sweep = [&](Node s, int di, int dj) {
    for (Node c = s;;) {
      const Node n{c.i + di, c.j + dj};
      if (!g.active(n.i, n.j) || done[g.index(n.i, n.j)]) break;
      step(c, n);
      c = n;
    }
  };
  done[g.index(anchor.i, anchor.j)] = 1;
  sweep(anchor, 0, 1);
  sweep(anchor, 0, -1);
  for (int j = 0; j < g.n_v(); ++j)
    if (done[g.index(anchor.i, j)]) {
      sweep({anchor.i, j}, 1, 0);
      sweep({anchor.i, j}, -1, 0);
    }
  Grid m = g;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.active(k) && !done[k]) {
      const Node n = g.node(k);
      m.set_active(n.i, n.j, false);
    }
  return out.restricted(m);
}

/// Lagrangian angle θ with i g1 = e^{iθ}, unwrapped from `anchor`.
inline RealField lagrangian_angle(const ComplexField& g1, Node anchor) {
  return unwrap_phase(transform(g1, [](const cplx& g) { return std::arg(I * g); }), anchor);
}

}  // namespace tsforge
