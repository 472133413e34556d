// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#include "tsforge/pipeline.hpp"

using namespace tsforge;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

std::string fix(double x, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

ExampleSpec tilted(double theta) {
  CatalogParams p;
  p.theta = theta;
  return catalog("tilted_reaper", p);
}

std::string label(const ExampleSpec& s) {
  return s.params.count("theta") ? "tilted(" + fix(s.params.at("theta"), 1) + ")" : s.name;
}

Grid grid_on(const Domain& d, double h) { return Grid::with_spacing(d.u_min, d.u_max, d.v_min, d.v_max, h); }

double baseline_tol(const Baseline& b, const std::string& ex, const std::string& res, double h) {
  return b.tolerance(*b.entry(ex, res), h);
}

Verdict criterion1() {
  Verdict v;
  const auto spec = catalog("grim_reaper");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = full_report(spec, grid_on({-2, 2, -2, 2}, 0.01), {});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double pos = r.find("position")->max;
  v.require(pos < 1e-3, "position " + sci(pos) + " < 1e-3");
  v.require(secs < 10.0, "runtime " + fix(secs) + " s < 10 s");
  return v;
}

Verdict criterion2() {
  Verdict v;
  for (double theta : {0.3, 0.7, 1.2}) {
    const auto spec = tilted(theta);
    const double pos = full_report(spec, spec.default_grid(0.01), {}).find("position")->max;
    const auto f = tilted_frame(theta);
    Eigen::Matrix3d M;
    M << f.U1, f.U2, f.U3;
    const double orth = (M.transpose() * M - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    const double strip = std::abs(strip_width(theta) - std::numbers::pi * std::cosh(theta));
    v.require(pos < 1e-3 && orth <= 1e-14 && strip <= 1e-12,
              "theta " + fix(theta, 1) + ": position " + sci(pos) + ", frame " + sci(orth));
  }
  const double w = std::abs(strip_width(std::acosh(1.5)) - 1.5 * std::numbers::pi);
  v.require(w <= 1e-12, "width(acosh 1.5) - 1.5pi = " + sci(w));
  return v;
}

// The pole of g2 at u = 1 sits 0.5 outside the domain, so Λ² needs a finer
// grid than the other examples to reach 1e-4.
Verdict criterion3() {
  Verdict v;
  const auto spec = catalog("lagrangian_castro_lerma");
  const double h = 0.004;
  const auto r = full_report(spec, spec.default_grid(h), {});
  const double pos = r.find("position")->max, met = r.find("metric")->max;
  const double harm = r.find("lagrangian_angle_harmonic")->max;
  const double ode = lagrangian_ode_residual(lagrangian_profile, -3.0, 0.5, 3501).max;
  v.require(pos < 1e-3, "h " + fix(h, 3) + ": position " + sci(pos));
  v.require(met < 1e-4, "metric rel " + sci(met));
  v.require(harm < 1e-3, "harmonic " + sci(harm));
  v.require(ode < 1e-4, "ODE " + sci(ode));
  return v;
}

Verdict criterion4() {
  Verdict v;
  const double h = 0.01;
  double worst = 0.0;
  for (const auto& spec : {catalog("grim_reaper"), tilted(0.3), tilted(0.7), tilted(1.2),
                           catalog("lagrangian_castro_lerma")}) {
    const auto s = run_conditions(spec, spec.default_grid(0.02));
    worst = std::max({worst, max_abs(nullity_residual(s.ncf)), max_abs(norm_identity_residual(s.ncf))});
  }
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Grid g = Grid::with_spacing(-1, 1, -1, 1, 0.05);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
    const auto g1 = ComplexField::sample(g, [=](double u, double w) {
      return 0.45 * std::tanh(a * u + b * w) * std::exp(I * (c * u + w));
    });
    const auto g2 = ComplexField::sample(g, [=](double u, double w) {
      return cplx{std::sin(d * u) + 1.5, std::cos(a * w)};
    });
    const auto pair = make_gauss_pair(g1, g2, GaussMode::extended_plane);
    const auto nc = build_null_curve(pair, compatibility_F(pair));
    worst = std::max({worst, max_abs(nullity_residual(nc)), max_abs(norm_identity_residual(nc))});
  }
  v.require(worst <= 1e-12, "identities " + sci(worst) + " over catalog + 100 random pairs");

  // Compatible pairs, integrable or not.
  CatalogParams shifted;
  shifted.expr_g1 = "(1 + 2/(u - 3))*exp(i*v)";
  shifted.expr_g2 = "(1 + 2/(u - 1))*exp(i*v)";
  shifted.mode = GaussMode::extended_plane;
  double eq = 0.0;
  for (const auto& spec : {catalog("custom_expression", shifted), catalog("lagrangian_castro_lerma"), tilted(0.7)}) {
    const auto s = run_conditions(spec, grid_on({-0.5, 0.5, -0.5, 0.5}, h));
    eq = std::max(eq, equivalence_check_L_R(s.cond, s.pair));
  }
  v.require(eq < 100 * h * h, "equivalence " + sci(eq) + " < 100h^2");
  return v;
}

struct Study {
  ExampleSpec spec;
  ConvergenceTable table;
};

std::vector<Study> studies() {
  std::vector<Study> out;
  for (const auto& spec : {catalog("grim_reaper"), tilted(0.3), tilted(0.7), tilted(1.2),
                           catalog("lagrangian_castro_lerma")})
    out.push_back({spec, converge(spec, spec.default_domain, {0.04, 0.02, 0.01}, {})});
  return out;
}

const std::vector<std::optional<double>>& orders_of(const ConvergenceTable& t, const std::string& name) {
  for (const auto& [n, o] : t.orders)
    if (n == name) return o;
  throw std::runtime_error("no residual " + name);
}

bool in_band(const std::vector<std::optional<double>>& o, double lo = 1.8, double hi = 2.2) {
  for (const auto& x : o)
    if (!x || *x < lo || *x > hi) return false;
  return true;
}

std::string orders_text(const std::vector<std::optional<double>>& o) {
  std::string s;
  for (const auto& x : o) s += (s.empty() ? "" : "/") + (x ? fix(*x) : std::string("exact"));
  return s;
}

Verdict criterion5(const std::vector<Study>& st, const Baseline& b) {
  Verdict v;
  for (const auto& [spec, t] : st) {
    const double e = t.levels.back().find("translator_fd")->max;
    const double tol = baseline_tol(b, spec.name, "translator_fd", t.h.back());
    const auto& o = orders_of(t, "translator_fd");
    v.require(e <= tol && in_band(o), label(spec) + " " + sci(e) + " order " + orders_text(o));
  }
  return v;
}

Verdict criterion6() {
  Verdict v;
  const auto lncos = [](double h) {
    return max_abs(graphical_pde_residual(HeightField::sample(
        grid_on({-1.4, 1.4, -1, 1}, h), [](double x, double) { return std::log(std::cos(x)); })));
  };
  const auto tilted_graph = [](double theta, double h) {
    const double half = 0.45 * strip_width(theta);
    return max_abs(graphical_pde_residual(HeightField::sample(
        grid_on({-half, half, -1, 1}, h), [theta](double x, double y) { return tilted_height(theta, x, y); })));
  };
  // The steep edge of the strip keeps h >= 0.01 pre-asymptotic, so the
  // order is read from the two finest levels.
  const auto check = [&](const std::string& name, const std::function<double(double)>& err) {
    const double e1 = err(0.01), e2 = err(0.005), e3 = err(0.0025);
    const double ord = std::log2(e2 / e3);
    v.require(e1 < 25 * 1e-4 && ord >= 1.8 && ord <= 2.2, name + " " + sci(e1) + " order " + fix(ord));
  };
  check("ln cos", lncos);
  for (double theta : {0.3, 0.7, 1.2})
    check("F(" + fix(theta, 1) + ")", [&](double h) { return tilted_graph(theta, h); });
  const auto flat = graphical_pde_residual(HeightField::sample(grid_on({-1, 1, -1, 1}, 0.05), [](double, double) { return 0.0; }));
  double dev = 0.0;
  for (std::size_t k = 0; k < flat.size(); ++k)
    if (flat.active(k)) dev = std::max(dev, std::abs(flat[k] - 1.0));
  v.require(dev <= 1e-10, "flat |r - 1| " + sci(dev));
  return v;
}

Verdict criterion7(const std::vector<Study>& st, const Baseline& b) {
  Verdict v;
  for (const auto& [spec, t] : st) {
    const double e = t.levels.back().find("gauss_roundtrip")->max;
    const double tol = baseline_tol(b, spec.name, "gauss_roundtrip", t.h.back());
    const auto& q = orders_of(t, "q2_membership");
    v.require(e <= tol && in_band(q), label(spec) + " " + sci(e) + " q2 order " + orders_text(q));
  }
  return v;
}

Verdict criterion8() {
  Verdict v;
  CatalogParams tanh_pair;
  tanh_pair.expr_g1 = tanh_pair.expr_g2 = "0.5*tanh(u)*exp(i*u)";
  CatalogParams shifted;
  shifted.expr_g1 = "(1 + 2/(u - 3))*exp(i*v)";
  shifted.expr_g2 = "(1 + 2/(u - 1))*exp(i*v)";
  shifted.mode = GaussMode::extended_plane;
  const std::vector<std::pair<std::string, std::pair<ExampleSpec, Domain>>> controls = {
      {"tanh pair", {catalog("custom_expression", tanh_pair), {-2, 2, -2, 2}}},
      {"shifted pair", {catalog("custom_expression", shifted), {-0.5, 0.5, -0.5, 0.5}}}};
  for (const auto& [name, c] : controls) {
    double L = INFINITY, loop = INFINITY;
    for (double h : {0.04, 0.02, 0.01, 0.005}) {
      const auto r = verify_report(c.first, grid_on(c.second, h), {});
      L = std::min(L, r.find("L")->max);
      loop = std::min(loop, r.find("loop_closure")->max);
    }
    v.require(L > 1e-2 && loop > 1e-2, name + ": min L " + sci(L) + ", min loop " + sci(loop));
  }
  return v;
}

}  // namespace

int main() {
  const Baseline base = Baseline::load(TSFORGE_BASELINE);
  bool all = true;
  const auto report = [&](int n, const char* title, const Verdict& v) {
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", n, title, v.detail.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  };
  report(1, "grim reaper reproduction", criterion1());
  report(2, "tilted family", criterion2());
  report(3, "Lagrangian translator", criterion3());
  report(4, "identity suite", criterion4());
  const auto st = studies();
  report(5, "translator residual convergence", criterion5(st, base));
  report(6, "graphical PDE", criterion6());
  report(7, "Gauss-map round trip", criterion7(st, base));
  report(8, "negative controls", criterion8());
  return all ? 0 : 1;
}
