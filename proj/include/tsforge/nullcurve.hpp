#pragma once

// The complex null curve φ = f(1 + g1 g2, i(1 - g1 g2), g1 - g2, -i(g1 + g2))
// with f = -2i conj(F), and its algebraic and differential identities.

#include <array>

#include "tsforge/gaussmap.hpp"

namespace tsforge {

struct NullCurveField {
  ComplexField g1;
  ComplexField g2;
  ComplexField f;
  std::array<ComplexField, 4> phi;
  std::array<RealField, 4> phi_zbar_closed;
  int dim = 4;  // 3 when built from an (iG, iG) lift; slot 3 then vanishes
};

/// Closed-form ∂φ/∂z̄ valid on integrable pairs (all four slots real).
inline std::array<RealField, 4> phi_zbar_closed_form(const ComplexField& g1,
                                                     const ComplexField& g2,
                                                     const ComplexField& f) {
  const auto slot = [&](auto&& expr) { return zip_with(expr, g1, g2, f); };
  return {
      slot([](cplx a, cplx b, cplx ff) {
        return std::norm(ff) * ((1.0 - std::norm(b)) * a.imag() + (1.0 - std::norm(a)) * b.imag());
      }),
      slot([](cplx a, cplx b, cplx ff) {
        return -std::norm(ff) *
               ((1.0 - std::norm(b)) * a.real() + (1.0 - std::norm(a)) * b.real());
      }),
      slot([](cplx a, cplx b, cplx ff) { return 2.0 * std::norm(ff) * (std::conj(a) * b).imag(); }),
      slot([](cplx a, cplx b, cplx ff) {
        return -std::norm(ff) *
               (1.0 - 2.0 * (std::conj(a) * b).real() + std::norm(a) * std::norm(b));
      }),
  };
}

inline std::array<RealField, 4> phi_zbar_closed_form(const GaussMapPair& p, const ComplexField& f) {
  return phi_zbar_closed_form(p.g1, p.g2, f);
}

/// Assembles φ from a pair and the compatibility field F. Nodes where F
/// vanishes are masked.
inline NullCurveField build_null_curve(const GaussMapPair& p, const ComplexField& F,
                                       double zero_floor = 1e-300) {
  Grid m = F.grid().intersect(p.g1.grid());
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m.active(k) && !(std::abs(F[k]) > zero_floor)) {
      const Node n = m.node(k);
      m.set_active(n.i, n.j, false);
    }
  NullCurveField c;
  c.g1 = p.g1.restricted(m);
  c.g2 = p.g2.restricted(m);
  c.f = transform(F.restricted(m), [](const cplx& F0) { return -2.0 * I * std::conj(F0); });
  c.phi = {
      zip_with([](cplx f, cplx a, cplx b) { return f * (1.0 + a * b); }, c.f, c.g1, c.g2),
      zip_with([](cplx f, cplx a, cplx b) { return f * I * (1.0 - a * b); }, c.f, c.g1, c.g2),
      zip_with([](cplx f, cplx a, cplx b) { return f * (a - b); }, c.f, c.g1, c.g2),
      zip_with([](cplx f, cplx a, cplx b) { return -f * I * (a + b); }, c.f, c.g1, c.g2),
  };
  c.phi_zbar_closed = phi_zbar_closed_form(c.g1, c.g2, c.f);
  c.dim = p.r3 ? 3 : 4;
  return c;
}

inline NullCurveField build_null_curve(const GaussMapPair& p, const CompatibilityResult& cp) {
  return build_null_curve(p, cp.F);
}

/// |φ·φ| / max(1, |φ|²) with the complex bilinear product.
inline RealField nullity_residual(const NullCurveField& c) {
  return zip_with(
      [](cplx a, cplx b, cplx d, cplx e) {
        const double n = std::norm(a) + std::norm(b) + std::norm(d) + std::norm(e);
        return std::abs(a * a + b * b + d * d + e * e) / std::max(1.0, n);
      },
      c.phi[0], c.phi[1], c.phi[2], c.phi[3]);
}

/// | |φ|² - 2|f|²(1 + |g1|²)(1 + |g2|²) | / max(1, |φ|²).
inline RealField norm_identity_residual(const NullCurveField& c) {
  const RealField n = zip_with(
      [](cplx a, cplx b, cplx d, cplx e) {
        return std::norm(a) + std::norm(b) + std::norm(d) + std::norm(e);
      },
      c.phi[0], c.phi[1], c.phi[2], c.phi[3]);
  return zip_with(
      [](double nn, cplx f, cplx a, cplx b) {
        return std::abs(nn - 2.0 * std::norm(f) * (1.0 + std::norm(a)) * (1.0 + std::norm(b))) /
               std::max(1.0, nn);
      },
      n, c.f, c.g1, c.g2);
}

struct IntegrabilityResidual {
  RealField residual;   // max over slots of |fd ∂φ/∂z̄ - closed form|
  RealField imag_part;  // max over slots of |Im(fd ∂φ/∂z̄)|
};

inline IntegrabilityResidual integrability_residual(const NullCurveField& c) {
  std::array<ComplexField, 4> d;
  for (int s = 0; s < 4; ++s) d[s] = wirtinger_dzbar(c.phi[s]);
  IntegrabilityResidual r;
  r.residual = zip_with(
      [](cplx a, cplx b, cplx e, cplx h, double ca, double cb, double ce, double ch) {
        return std::max({std::abs(a - ca), std::abs(b - cb), std::abs(e - ce), std::abs(h - ch)});
      },
      d[0], d[1], d[2], d[3], c.phi_zbar_closed[0], c.phi_zbar_closed[1], c.phi_zbar_closed[2],
      c.phi_zbar_closed[3]);
  r.imag_part = zip_with(
      [](cplx a, cplx b, cplx e, cplx h) {
        return std::max({std::abs(a.imag()), std::abs(b.imag()), std::abs(e.imag()),
                         std::abs(h.imag())});
      },
      d[0], d[1], d[2], d[3]);
  return r;
}

/// The R^3 null curve written directly in terms of G:
///   φ = 2 conj(G)_z / (|G|⁴ - 1) · (1 - G², i(1 + G²), 2G).
inline std::array<ComplexField, 3> r3_null_curve(const ComplexField& G) {
  const ComplexField cGz = wirtinger_dz(conj(G));
  const ComplexField pre = zip_with(
      [](cplx g, cplx d) {
        const double n2 = std::norm(g);
        return 2.0 * d / (n2 * n2 - 1.0);
      },
      G, cGz);
  return {
      zip_with([](cplx s, cplx g) { return s * (1.0 - g * g); }, pre, G),
      zip_with([](cplx s, cplx g) { return s * I * (1.0 + g * g); }, pre, G),
      zip_with([](cplx s, cplx g) { return s * 2.0 * g; }, pre, G),
  };
}

}  // namespace tsforge
