#pragma once

// Prescribed complexified Gauss-map pairs (g1, g2) and the residuals of the
// compatibility condition and the two integrability conditions, plus the
// single-function R^3 specialisation.

#include <optional>
#include <string>

#include "tsforge/grid.hpp"

namespace tsforge {

enum class GaussMode { strict_disc, extended_plane };

inline const char* to_string(GaussMode m) {
  return m == GaussMode::strict_disc ? "strict_disc" : "extended_plane";
}

struct GaussTolerances {
  double eps_hol = 1e-8;     // relative to the field scale
  double eps_branch = 1e-6;  // floor on |1 - g1 conj(g2)|
};

struct GaussMapPair {
  ComplexField g1;
  ComplexField g2;
  GaussMode mode = GaussMode::strict_disc;
  std::optional<std::string> family_tag;
  bool r3 = false;               // built as (iG, iG)
  std::size_t branch_nodes = 0;  // nodes masked as branch-point candidates
  std::size_t pole_nodes = 0;    // extended_plane only: nodes where a sample is infinite
};

/// Validates a pair and applies branch-point masking.
///
/// strict_disc rejects any active node with |g| >= 1. extended_plane masks
/// nodes where |1 - g1 conj(g2)| < eps_branch, and poles (infinite
/// samples), instead of rejecting them.
inline GaussMapPair make_gauss_pair(const ComplexField& g1, const ComplexField& g2, GaussMode mode,
                                    const GaussTolerances& tol = {},
                                    std::optional<std::string> tag = std::nullopt) {
  GaussMapPair p;
  const Grid common = g1.grid().intersect(g2.grid());
  p.g1 = g1.restricted(common);
  p.g2 = g2.restricted(common);
  p.mode = mode;
  p.family_tag = std::move(tag);
  // |z| = inf marks a pole even when a component is NaN, e.g. inf·e^{iv}.
  const auto undefined = [](const cplx& z) { return std::isnan(std::abs(z)); };
  for (std::size_t k = 0; k < common.size(); ++k)
    if (common.active(k) && (undefined(p.g1[k]) || undefined(p.g2[k])))
      throw DomainError("Gauss map samples must not be NaN on active nodes");

  if (mode == GaussMode::strict_disc) {
    if (!p.g1.all_finite() || !p.g2.all_finite())
      throw DomainError("strict_disc mode requires finite Gauss map samples");
    std::size_t outside = 0;
    for (std::size_t k = 0; k < p.g1.size(); ++k)
      if (common.active(k) && (std::abs(p.g1[k]) >= 1.0 || std::abs(p.g2[k]) >= 1.0)) ++outside;
    if (outside > 0)
      throw DomainError("strict_disc mode requires |g1|,|g2| < 1; " + std::to_string(outside) +
                        " node(s) violate it");
  } else {
    Grid m = common;
    for (std::size_t k = 0; k < p.g1.size(); ++k) {
      if (!common.active(k)) continue;
      const bool pole = std::isinf(std::abs(p.g1[k])) || std::isinf(std::abs(p.g2[k]));
      if (pole || std::abs(1.0 - p.g1[k] * std::conj(p.g2[k])) < tol.eps_branch) {
        const Node n = common.node(k);
        m.set_active(n.i, n.j, false);
        ++(pole ? p.pole_nodes : p.branch_nodes);
      }
    }
    p.g1 = p.g1.restricted(m);
    p.g2 = p.g2.restricted(m);
  }
  return p;
}

struct HolomorphyCheck {
  double min_dzbar = 0.0;  // min over nodes of |(g1)_z̄| and |(g2)_z̄|
  double floor = 0.0;
  bool nowhere_holomorphic = false;
};

inline HolomorphyCheck check_nowhere_holomorphic(const GaussMapPair& p, double eps_hol) {
  const double scale = std::max({1.0, max_abs(p.g1), max_abs(p.g2)});
  HolomorphyCheck c;
  c.min_dzbar = std::min(min_abs(wirtinger_dzbar(p.g1)), min_abs(wirtinger_dzbar(p.g2)));
  c.floor = eps_hol * scale;
  c.nowhere_holomorphic = c.min_dzbar > c.floor;
  return c;
}

struct CompatibilityResult {
  ComplexField F;           // mean of the two compatibility expressions
  RealField cp_residual;    // modulus of their difference
  std::size_t masked_nodes = 0;
};

/// Evaluates both sides of the compatibility condition
///   (g1)_z̄ / ((1 - g1 conj g2)(1 + |g1|²)) = (g2)_z̄ / ((1 - conj g1 g2)(1 + |g2|²)).
inline CompatibilityResult compatibility_F(const GaussMapPair& p, const GaussTolerances& tol = {}) {
  const ComplexField d1 = wirtinger_dzbar(p.g1);
  const ComplexField d2 = wirtinger_dzbar(p.g2);
  Grid m = d1.grid().intersect(d2.grid());
  CompatibilityResult r;
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m.active(k) && std::abs(1.0 - p.g1[k] * std::conj(p.g2[k])) < tol.eps_branch) {
      const Node n = m.node(k);
      m.set_active(n.i, n.j, false);
      ++r.masked_nodes;
    }
  r.F = ComplexField(m);
  r.cp_residual = RealField(m);
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.active(k)) continue;
    const cplx a = p.g1[k], b = p.g2[k];
    const cplx lhs = d1[k] / ((1.0 - a * std::conj(b)) * (1.0 + std::norm(a)));
    const cplx rhs = d2[k] / ((1.0 - std::conj(a) * b) * (1.0 + std::norm(b)));
    r.F[k] = 0.5 * (lhs + rhs);
    r.cp_residual[k] = std::abs(lhs - rhs);
  }
  return r;
}

struct ConditionResiduals {
  ComplexField L;
  ComplexField R;
  RealField cp_residual;
  RealField L_residual;
  RealField R_residual;
  double holo_floor = 0.0;  // smallest |(g)_z̄| seen
  std::size_t dropped_nodes = 0;
};

/// The two integrability expressions L (built on g1) and R (built on g2).
inline ConditionResiduals integrability_residuals(const GaussMapPair& p,
                                                  const CompatibilityResult& cp) {
  const ComplexField g1z = wirtinger_dz(p.g1), g1zb = wirtinger_dzbar(p.g1);
  const ComplexField g2z = wirtinger_dz(p.g2), g2zb = wirtinger_dzbar(p.g2);
  const ComplexField g1zzb = mixed_dz_dzbar(p.g1), g2zzb = mixed_dz_dzbar(p.g2);

  ConditionResiduals r;
  r.L = zip_with(
      [](cplx g1, cplx g2, cplx gz, cplx gzb, cplx gzzb) {
        const cplx coef = std::conj(g2) / (1.0 - g1 * std::conj(g2)) -
                          std::conj(g1) / (1.0 + std::norm(g1));
        return gzzb + coef * gz * gzb +
               (g1 + g2) / ((1.0 - std::conj(g1) * g2) * (1.0 + std::norm(g1))) * std::norm(gzb);
      },
      p.g1, p.g2, g1z, g1zb, g1zzb);
  r.R = zip_with(
      [](cplx g1, cplx g2, cplx gz, cplx gzb, cplx gzzb) {
        const cplx coef = std::conj(g1) / (1.0 - std::conj(g1) * g2) -
                          std::conj(g2) / (1.0 + std::norm(g2));
        return gzzb + coef * gz * gzb +
               (g1 + g2) / ((1.0 - g1 * std::conj(g2)) * (1.0 + std::norm(g2))) * std::norm(gzb);
      },
      p.g1, p.g2, g2z, g2zb, g2zzb);
  const Grid m = r.L.grid().intersect(r.R.grid()).intersect(cp.F.grid());
  r.L = r.L.restricted(m);
  r.R = r.R.restricted(m);
  r.cp_residual = cp.cp_residual.restricted(m);
  r.L_residual = modulus(r.L);
  r.R_residual = modulus(r.R);
  r.holo_floor = std::min(min_abs(g1zb.restricted(m)), min_abs(g2zb.restricted(m)));
  r.dropped_nodes = p.g1.grid().active_count() - m.active_count();
  return r;
}

/// Pointwise |L/(g1)_z̄ - R/(g2)_z̄|; nodes with |(g)_z̄| below the floor
/// are excluded.
inline RealField equivalence_field(const ConditionResiduals& res, const GaussMapPair& p,
                                   double eps_hol = GaussTolerances{}.eps_hol) {
  const double scale = std::max({1.0, max_abs(p.g1), max_abs(p.g2)});
  const double floor = eps_hol * scale;
  const ComplexField d1 = wirtinger_dzbar(p.g1), d2 = wirtinger_dzbar(p.g2);
  RealField out = zip_with(
      [](cplx L, cplx R, cplx a, cplx b) { return std::abs(L / a - R / b); }, res.L, res.R, d1,
      d2);
  Grid m = out.grid();
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m.active(k) && (std::abs(d1[k]) <= floor || std::abs(d2[k]) <= floor)) {
      const Node n = m.node(k);
      m.set_active(n.i, n.j, false);
    }
  return out.restricted(m);
}

inline double equivalence_check_L_R(const ConditionResiduals& res, const GaussMapPair& p,
                                    double eps_hol = GaussTolerances{}.eps_hol) {
  return max_abs(equivalence_field(res, p, eps_hol));
}

/// |conj(F) - (conj g2)_z / ((1 - g1 conj g2)(1 + |g2|²))|.
inline RealField conjugate_cp_residual(const GaussMapPair& p, const CompatibilityResult& cp) {
  return zip_with(
      [](cplx F, cplx g1, cplx g2, cplx cg2z) {
        return std::abs(std::conj(F) -
                        cg2z / ((1.0 - g1 * std::conj(g2)) * (1.0 + std::norm(g2))));
      },
      cp.F, p.g1, p.g2, wirtinger_dz(conj(p.g2)));
}

/// |F_z + |F|²[g1(1 - |g2|²) + g2(1 - |g1|²)]|; vanishes on integrable pairs.
inline RealField F_z_identity_residual(const GaussMapPair& p, const CompatibilityResult& cp) {
  return zip_with(
      [](cplx Fz, cplx F, cplx g1, cplx g2) {
        return std::abs(Fz + std::norm(F) * (g1 * (1.0 - std::norm(g2)) +
                                             g2 * (1.0 - std::norm(g1))));
      },
      wirtinger_dz(cp.F), cp.F, p.g1, p.g2);
}

/// Lifts a single R^3 Gauss map G to the pair (iG, iG).
inline GaussMapPair r3_lift(const ComplexField& G, GaussMode mode = GaussMode::strict_disc,
                            const GaussTolerances& tol = {},
                            std::optional<std::string> tag = std::nullopt) {
  const ComplexField iG = transform(G, [](const cplx& z) { return I * z; });
  GaussMapPair p = make_gauss_pair(iG, iG, mode, tol, std::move(tag));
  p.r3 = true;
  return p;
}

/// Pointwise modulus of
///   G_zz̄ + 2 conj(G)|G|²/(1-|G|⁴) G_z G_z̄ + 2 G/(1-|G|⁴) |G_z̄|².
/// Nodes with 1 - |G|⁴ < eps_branch are dropped.
inline RealField translator_equation_residual_r3(const ComplexField& G,
                                                 double eps_branch = GaussTolerances{}.eps_branch) {
  RealField out = zip_with(
      [](cplx g, cplx gz, cplx gzb, cplx gzzb) {
        const double n2 = std::norm(g);
        const double den = 1.0 - n2 * n2;
        return std::abs(gzzb + 2.0 * std::conj(g) * n2 / den * gz * gzb +
                        2.0 * g / den * std::norm(gzb));
      },
      G, wirtinger_dz(G), wirtinger_dzbar(G), mixed_dz_dzbar(G));
  Grid m = out.grid();
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m.active(k)) {
      const double n2 = std::norm(G[k]);
      if (1.0 - n2 * n2 < eps_branch) {
        const Node n = m.node(k);
        m.set_active(n.i, n.j, false);
      }
    }
  return out.restricted(m);
}

}  // namespace tsforge
