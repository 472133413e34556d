#pragma once

// Closed-form catalog: the grim reaper cylinder, its tilted family, the
// Hamiltonian stationary Lagrangian translator, and user expressions.

#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsforge/expr.hpp"
#include "tsforge/gaussmap.hpp"
#include "tsforge/immersion.hpp"

namespace tsforge {

using ComplexFn = std::function<cplx(double, double)>;
using PositionFn = std::function<Vec4(double, double)>;
using ScalarFn = std::function<double(double, double)>;

struct Domain {
  double u_min = -2.0, u_max = 2.0, v_min = -2.0, v_max = 2.0;
};

struct ExampleSpec {
  std::string name;
  ComplexFn g1;
  ComplexFn g2;
  std::optional<ComplexFn> G;                  // set for R^3 members, g1 = g2 = iG
  std::optional<PositionFn> closed_form_X;     // R^4 slots (slot 2 zero for R^3)
  std::optional<ScalarFn> closed_form_metric;  // Λ²(u, v)
  Domain default_domain;
  GaussMode mode = GaussMode::strict_disc;
  std::map<std::string, double> params;

  bool r3() const { return G.has_value(); }

  Grid default_grid(double h) const {
    return Grid::with_spacing(default_domain.u_min, default_domain.u_max, default_domain.v_min,
                              default_domain.v_max, h);
  }

  GaussMapPair make_pair(const Grid& grid, const GaussTolerances& tol = {}) const {
    if (G) return r3_lift(ComplexField::sample(grid, *G), mode, tol, name);
    return make_gauss_pair(ComplexField::sample(grid, g1), ComplexField::sample(grid, g2), mode, tol,
                           name);
  }
};

struct CatalogParams {
  double theta = 0.0;
  std::string expr_g1;
  std::string expr_g2;
  std::optional<GaussMode> mode;
};

class CatalogError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::vector<std::string> catalog_names() {
  return {"grim_reaper", "tilted_reaper", "lagrangian_castro_lerma", "custom_expression"};
}

/// Gauss map of the tilted grim reaper cylinder,
/// (cosh θ sinh 2u + i sinh θ) / (1 + cosh θ cosh 2u).
inline cplx tilted_G(double theta, double u) {
  return cplx{std::cosh(theta) * std::sinh(2.0 * u), std::sinh(theta)} /
         (1.0 + std::cosh(theta) * std::cosh(2.0 * u));
}

/// Canonical solution (u + 1)/(u - 1) of the Lagrangian profile ODE.
inline double lagrangian_profile(double u) { return (u + 1.0) / (u - 1.0); }

namespace detail {

inline ExampleSpec make_tilted(const std::string& name, double theta) {
  const double ch = std::cosh(theta), sh = std::sinh(theta);
  ExampleSpec e;
  e.name = name;
  e.G = [theta](double u, double) { return tilted_G(theta, u); };
  e.g1 = [theta](double u, double) { return I * tilted_G(theta, u); };
  e.g2 = e.g1;
  e.closed_form_X = [ch, sh](double u, double v) -> Vec4 {
    const double lc = std::log(std::cosh(2.0 * u));
    return {-2.0 * ch * std::atan(std::tanh(u)), sh * lc + 2.0 * v, 0.0, -lc + 2.0 * v * sh};
  };
  e.closed_form_metric = [ch](double, double) { return 4.0 * ch * ch; };
  e.params["theta"] = theta;
  return e;
}

}  // namespace detail

/// Looks up a catalog entry. `custom_expression` requires both expressions.
inline ExampleSpec catalog(const std::string& name, const CatalogParams& params = {}) {
  if (name == "grim_reaper") {
    ExampleSpec e;
    e.name = name;
    e.G = [](double u, double) { return cplx{std::tanh(u), 0.0}; };
    e.g1 = [](double u, double) { return I * std::tanh(u); };
    e.g2 = e.g1;
    e.closed_form_X = [](double u, double v) -> Vec4 {
      return {-2.0 * std::atan(std::tanh(u)), 2.0 * v, 0.0, -std::log(std::cosh(2.0 * u))};
    };
    e.closed_form_metric = [](double, double) { return 4.0; };
    if (params.mode) e.mode = *params.mode;
    return e;
  }
  if (name == "tilted_reaper") {
    if (!std::isfinite(params.theta)) throw CatalogError("tilted_reaper requires a finite theta");
    ExampleSpec e = detail::make_tilted(name, params.theta);
    if (params.mode) e.mode = *params.mode;
    return e;
  }
  if (name == "lagrangian_castro_lerma") {
    ExampleSpec e;
    e.name = name;
    e.g1 = [](double, double v) { return std::exp(I * v); };
    e.g2 = [](double u, double v) { return lagrangian_profile(u) * std::exp(I * v); };
    e.closed_form_X = [](double u, double v) -> Vec4 {
      return {u * std::sin(v), -u * std::cos(v), -v, -0.5 * u * u};
    };
    e.closed_form_metric = [](double u, double) { return 1.0 + u * u; };
    e.default_domain = {-3.0, 0.5, -2.0, 2.0};
    e.mode = GaussMode::extended_plane;
    return e;
  }
  if (name == "custom_expression") {
    if (params.expr_g1.empty() || params.expr_g2.empty())
      throw CatalogError("custom_expression requires expressions for both g1 and g2");
    const Expression a = Expression::parse(params.expr_g1);
    const Expression b = Expression::parse(params.expr_g2);
    ExampleSpec e;
    e.name = name;
    e.g1 = [a](double u, double v) { return a(u, v); };
    e.g2 = [b](double u, double v) { return b(u, v); };
    if (params.mode) e.mode = *params.mode;
    return e;
  }
  throw CatalogError("unknown example '" + name + "'");
}

/// Pointwise |½ - (G - G')/(1 + G²)| for the Lagrangian profile ODE, with
/// G' by second-order finite differences on n nodes of [u_min, u_max].
struct OdeResidual {
  std::vector<double> u;
  std::vector<double> residual;
  double h = 0.0;
  double max = 0.0;
};

inline OdeResidual lagrangian_ode_residual(const std::function<double(double)>& profile,
                                           double u_min, double u_max, int n) {
  if (!(u_min < u_max) || n < 5) throw DomainError("ODE residual needs an interval and n >= 5");
  if (u_min <= 1.0 && 1.0 <= u_max)
    throw DomainError("ODE interval must exclude the pole at u = 1");
  OdeResidual r;
  r.h = (u_max - u_min) / (n - 1);
  std::vector<double> G(n);
  for (int k = 0; k < n; ++k) {
    r.u.push_back(u_min + k * r.h);
    G[k] = profile(r.u.back());
  }
  for (int k = 0; k < n; ++k) {
    auto d = detail::first_derivative<double>(k, n, r.h, [&](int m) { return G[m]; },
                                              [](int) { return true; });
    const double res = std::abs(0.5 - (G[k] - *d) / (1.0 + G[k] * G[k]));
    r.residual.push_back(res);
    r.max = std::max(r.max, res);
  }
  return r;
}

struct TiltedFrame {
  double theta = 0.0;
  Eigen::Vector3d U1, U2, U3;
  std::array<double, 2> x0_coefficients{};  // x0 = c[0] x2 + c[1] x3
};

inline TiltedFrame tilted_frame(double theta) {
  if (!std::isfinite(theta)) throw DomainError("tilted frame requires a finite theta");
  const double ch = std::cosh(theta), th = std::tanh(theta);
  TiltedFrame f;
  f.theta = theta;
  f.U1 = {1.0, 0.0, 0.0};
  f.U2 = {0.0, -th, 1.0 / ch};
  f.U3 = {0.0, 1.0 / ch, th};
  f.x0_coefficients = {1.0 / ch, th};
  return f;
}

/// Width π cosh θ of the strip carrying the graph of the tilted cylinder.
inline double strip_width(double theta) { return std::numbers::pi * std::cosh(theta); }

/// Parabolically rescaled grim reaper profile cosh θ · ln cos(t / cosh θ).
inline double rescaled_reaper(double theta, double t) {
  const double ch = std::cosh(theta);
  return ch * std::log(std::cos(t / ch));
}

/// Height function of the tilted cylinder over the strip.
inline double tilted_height(double theta, double x1, double x2) {
  return std::cosh(theta) * rescaled_reaper(theta, x1) + std::sinh(theta) * x2;
}

/// Cylinder patch x1 U1 + T(x1) U2 + x0 U3.
inline Eigen::Vector3d tilted_repatch(const TiltedFrame& f, double x1, double x0) {
  return x1 * f.U1 + rescaled_reaper(f.theta, x1) * f.U2 + x0 * f.U3;
}

}  // namespace tsforge
