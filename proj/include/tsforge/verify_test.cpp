#include "tsforge/verify.hpp"

#include <gtest/gtest.h>

#include "tsforge/catalog.hpp"

using namespace tsforge;

namespace {

ImmersionPatch closed_patch(const std::string& name, const Grid& g) {
  const auto spec = catalog(name);
  return patch_from_function(g, *spec.closed_form_X, spec.r3() ? 3 : 4);
}

double at(const RealField& f, double u, double v) {
  const Node n = f.grid().nearest(u, v);
  return f(n.i, n.j);
}

// x1 stays within 90% of the strip, where the profile steepens like the
// ln cos graph near x1 = 1.4.
double pde_error(double theta, double h) {
  const double half = 0.45 * strip_width(theta);
  const auto hf = HeightField::sample(Grid::with_spacing(-half, half, -1, 1, h),
                                      [theta](double x, double y) { return tilted_height(theta, x, y); });
  return max_abs(graphical_pde_residual(hf));
}

}  // namespace

TEST(MeanCurvature, GrimReaperAxis) {
  const double h = 0.01;
  const auto p = closed_patch("grim_reaper", Grid::with_spacing(-1, 1, -1, 1, h));
  const auto r = mean_curvature_fd(p);
  EXPECT_NEAR(at(r.H[0], 0, 0), 0.0, 1e-8);
  EXPECT_NEAR(at(r.H[1], 0, 0), 0.0, 1e-8);
  EXPECT_NEAR(at(r.H[3], 0, 0), -1.0, 10 * h * h);
  EXPECT_LT(max_abs(r.translator_residual), 20 * h * h);
}

TEST(MeanCurvature, LagrangianOrigin) {
  const double h = 0.01;
  const auto p = closed_patch("lagrangian_castro_lerma", Grid::with_spacing(-0.5, 0.5, -0.5, 0.5, h));
  const auto r = mean_curvature_fd(p);
  EXPECT_NEAR(at(r.H[3], 0, 0), -1.0, 10 * h * h);
  EXPECT_LT(max_abs(r.translator_residual), 20 * h * h);
}

TEST(MeanCurvature, PlaneIsNotATranslator) {
  const Grid g = Grid::with_spacing(-1, 1, -1, 1, 0.1);
  const auto p = patch_from_function(g, [](double u, double v) { return Vec4{u, v, 0.0, 0.0}; });
  const auto r = mean_curvature_fd(p);
  EXPECT_LT(max_abs(vector_norm(r.H)), 1e-12);
  EXPECT_NEAR(max_abs(r.translator_residual), 1.0, 1e-12);
  EXPECT_NEAR(norms(r.translator_residual).l2, 21 * 0.1, 1e-12);  // sqrt(N h²)
}

TEST(NormalProjection, ClosedFormLimits) {
  const Grid g = Grid::with_spacing(0, 1, 0, 1, 0.25);
  const auto zero = ComplexField::sample(g, [](double, double) { return cplx{0.0}; });
  const auto e = e4_perp_closed_form(zero, zero);
  for (int s = 0; s < 3; ++s) EXPECT_EQ(max_abs(e[s]), 0.0);
  EXPECT_EQ(at(e[3], 0.5, 0.5), -1.0);
  // g1 = g2 = 1: -e4 is tangent
  const auto one = ComplexField::sample(g, [](double, double) { return cplx{1.0}; });
  EXPECT_LT(max_abs(vector_norm(e4_perp_closed_form(one, one))), 1e-15);
}

TEST(NormalProjection, FrameAgreesWithClosedForm) {
  const double h = 0.01;
  const Grid g = Grid::with_spacing(-0.5, 0.5, -0.5, 0.5, h);
  const auto spec = catalog("lagrangian_castro_lerma");
  const auto p = patch_from_function(g, *spec.closed_form_X);
  const auto cmp = e4_normal_projection(p, ComplexField::sample(g, spec.g1), ComplexField::sample(g, spec.g2));
  EXPECT_LT(max_abs(cmp.disagreement), 20 * h * h);
}

// The steep edge keeps h >= 0.01 pre-asymptotic; orders are read finer.
TEST(GraphicalPde, GrimReaperProfile) {
  const auto err = [](double h) {
    const auto hf = HeightField::sample(Grid::with_spacing(-1.4, 1.4, -1, 1, h),
                                        [](double x, double) { return std::log(std::cos(x)); });
    return max_abs(graphical_pde_residual(hf));
  };
  for (double h : {0.01, 0.005}) EXPECT_LT(err(h), 25 * h * h) << "h=" << h;
  EXPECT_NEAR(std::log2(err(0.005) / err(0.0025)), 2.0, 0.2);
}

TEST(GraphicalPde, TiltedHeightConvergesAtSecondOrder) {
  for (double theta : {0.3, 0.7, 1.2}) {
    EXPECT_LT(pde_error(theta, 0.01), 25 * 1e-4) << "theta=" << theta;
    const double ratio = pde_error(theta, 0.005) / pde_error(theta, 0.0025);
    EXPECT_NEAR(std::log2(ratio), 2.0, 0.2) << "theta=" << theta;
  }
}

TEST(GraphicalPde, FlatGraphHasUnitResidual) {
  const auto hf = HeightField::sample(Grid::with_spacing(-1, 1, -1, 1, 0.1), [](double, double) { return 0.0; });
  const auto r = graphical_pde_residual(hf);
  EXPECT_NEAR(max_abs(r), 1.0, 1e-10);
  EXPECT_NEAR(at(r, 0.3, -0.2), 1.0, 1e-10);
}

TEST(LaplaceBeltrami, LinearAndQuadratic) {
  const Grid g = Grid::with_spacing(-1, 1, -1, 1, 0.05);
  const auto flat = RealField::sample(g, [](double, double) { return 1.0; });
  const auto lin = RealField::sample(g, [](double, double v) { return std::numbers::pi / 2 + v; });
  EXPECT_LT(max_abs(laplace_beltrami(lin, flat)), 1e-10);
  const auto quad = RealField::sample(g, [](double u, double) { return u * u; });
  const auto r = laplace_beltrami(quad, flat);
  EXPECT_NEAR(norms(r).max, 2.0, 1e-9);
  EXPECT_NEAR(at(r, 0, 0), 2.0, 1e-9);
}

TEST(LagrangianAngle, UnwrapsAcrossTheBranchCut) {
  const Grid g = Grid::with_spacing(-1, 1, -4, 4, 0.05);
  const auto g1 = ComplexField::sample(g, [](double, double v) { return std::exp(I * v); });
  const auto theta = lagrangian_angle(g1, g.nearest(0, 0));
  // i e^{iv} = e^{i(π/2 + v)}
  double e = 0.0;
  for (int j = 0; j < g.n_v(); ++j)
    for (int i = 0; i < g.n_u(); ++i) e = std::max(e, std::abs(theta(i, j) - (std::numbers::pi / 2 + g.v(j))));
  EXPECT_LT(e, 1e-12);
}

TEST(GaussRecovery, RoundTripOnClosedForms) {
  const double h = 0.01;
  const Grid g = Grid::with_spacing(-0.5, 0.5, -0.5, 0.5, h);
  for (const std::string name : {"grim_reaper", "lagrangian_castro_lerma"}) {
    const auto spec = catalog(name);
    const auto r = recover_gauss_map(patch_from_function(g, *spec.closed_form_X, spec.r3() ? 3 : 4));
    EXPECT_EQ(r.flagged, 0u) << name;
    const auto g1 = ComplexField::sample(g, spec.g1), g2 = ComplexField::sample(g, spec.g2);
    const auto d1 = zip_with([](cplx a, cplx b) { return std::abs(a - b); }, r.recovered_g1, g1);
    const auto d2 = zip_with([](cplx a, cplx b) { return std::abs(a - b); }, r.recovered_g2, g2);
    EXPECT_LT(max_abs(d1), 20 * h * h) << name;
    EXPECT_LT(max_abs(d2), 20 * h * h) << name;
    EXPECT_LT(max_abs(r.q2_residual), 20 * h * h) << name;
  }
}

TEST(GaussRecovery, StereographicNormalIsG) {
  const double h = 0.01;
  const Grid g = Grid::with_spacing(-1, 1, -1, 1, h);
  for (double theta : {0.0, 0.7}) {
    const auto spec = catalog("tilted_reaper", {theta, "", "", std::nullopt});
    const auto n = unit_normal_r3(patch_from_function(g, *spec.closed_form_X, 3));
    const auto G = ComplexField::sample(g, *spec.G);
    EXPECT_LT(max_abs(zip_with([](cplx a, cplx b) { return std::abs(a - b); }, stereographic(n), G)),
              20 * h * h)
        << "theta=" << theta;
  }
}

TEST(GaussRecovery, TiltedGaussImageIsPlanar) {
  const double h = 0.01;
  const Grid g = Grid::with_spacing(-1.5, 1.5, -1, 1, h);
  for (double theta : {0.3, 0.7, 1.2}) {
    const auto spec = catalog("tilted_reaper", {theta, "", "", std::nullopt});
    const auto r = recover_gauss_map(patch_from_function(g, *spec.closed_form_X, 3));
    std::vector<Eigen::Vector3d> pts;
    const Grid& m = r.recovered_g1.grid();
    for (std::size_t k = 0; k < m.size(); ++k)
      if (m.active(k)) pts.push_back(inverse_stereographic(r.recovered_g1[k]));
    const PlaneFit fit = fit_plane(pts);
    EXPECT_LT(fit.max_deviation, 20 * h * h) << "theta=" << theta;
    EXPECT_GT(fit.max_deviation, 0.0);
  }
  EXPECT_THROW(fit_plane({Eigen::Vector3d::Zero()}), DomainError);
}

TEST(Norms, MaxL2AndMargin) {
  const Grid g(0, 1, 0, 1, 11, 11);
  const auto r = RealField::sample(g, [](double u, double) { return u > 0.95 ? 5.0 : 1.0; });
  const Norms all = norms(r);
  EXPECT_EQ(all.max, 5.0);
  EXPECT_EQ(all.nodes, 121u);
  const Norms inner = norms(r, 1);
  EXPECT_EQ(inner.max, 1.0);
  EXPECT_EQ(inner.nodes, 81u);
  EXPECT_NEAR(inner.l2, std::sqrt(81 * 0.01), 1e-12);
}
