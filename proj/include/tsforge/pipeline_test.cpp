#include "tsforge/pipeline.hpp"

#include <gtest/gtest.h>

using namespace tsforge;

TEST(Pipeline, MarginIsAPhysicalWidth) {
  PipelineOptions o;
  EXPECT_EQ(o.margin_nodes(Grid::with_spacing(0, 4, 0, 4, 0.04)), 5);
  EXPECT_EQ(o.margin_nodes(Grid::with_spacing(0, 4, 0, 4, 0.02)), 10);
  EXPECT_EQ(o.margin_nodes(Grid::with_spacing(0, 4, 0, 4, 0.01)), 20);
  EXPECT_EQ(o.margin_nodes(Grid::with_spacing(0, 4, 0, 4, 0.1)), 4);
}

TEST(Pipeline, VerifyReportKeys) {
  const auto spec = catalog("grim_reaper");
  const auto r = verify_report(spec, spec.default_grid(0.04), {});
  for (const char* k : {"cp", "L", "R", "equivalence", "nullity", "norm_identity", "phi_zbar",
                        "im_phi_zbar", "loop_closure", "metric_forms", "gauss_equation"})
    EXPECT_NE(r.find(k), nullptr) << k;
  EXPECT_EQ(r.find("translator_fd"), nullptr);
  EXPECT_EQ(r.example, "grim_reaper");
  EXPECT_EQ(r.n_u, 101);
}

TEST(Pipeline, FullReportMatchesBaseline) {
  const Baseline b = Baseline::load(TSFORGE_BASELINE);
  CatalogParams tp;
  tp.theta = 0.7;
  for (const auto& spec : {catalog("grim_reaper"), catalog("tilted_reaper", tp),
                           catalog("lagrangian_castro_lerma")}) {
    const auto r = full_report(spec, spec.default_grid(0.02), {});
    for (const char* k : {"position", "metric", "translator_fd", "translator_closed", "gauss_roundtrip"})
      EXPECT_NE(r.find(k), nullptr) << spec.name << " " << k;
    std::size_t judged = 0;
    const auto fails = check_against(r, b, &judged);
    EXPECT_GT(judged, 15u);
    for (const auto& f : fails) ADD_FAILURE() << spec.name << " " << f.residual << " " << f.value << " > " << f.tolerance;
  }
  const auto lag = full_report(catalog("lagrangian_castro_lerma"), catalog("lagrangian_castro_lerma").default_grid(0.04), {});
  EXPECT_NE(lag.find("lagrangian_angle_harmonic"), nullptr);
  EXPECT_EQ(lag.find("normal_stereographic"), nullptr);
}

TEST(Pipeline, ConvergenceNeedsThreeLevels) {
  const auto spec = catalog("grim_reaper");
  EXPECT_THROW(converge(spec, spec.default_domain, {0.04, 0.02}, {}), DomainError);
}

TEST(Pipeline, ConvergenceTable) {
  const auto spec = catalog("grim_reaper");
  const Domain d{-1, 1, -1, 1};
  const auto t = converge(spec, d, {0.02, 0.08, 0.04}, {}, false);
  EXPECT_EQ(t.h, (std::vector<double>{0.08, 0.04, 0.02}));
  for (const auto& [name, ord] : t.orders) {
    ASSERT_EQ(ord.size(), 2u) << name;
    if (name == "nullity" || name == "norm_identity" || name == "cp") {  // cp vanishes for g1 = g2
      EXPECT_FALSE(ord[1].has_value()) << name;
    }
    if (name == "L" || name == "phi_zbar") {
      ASSERT_TRUE(ord[1].has_value()) << name;
      EXPECT_NEAR(*ord[1], 2.0, 0.2) << name;
    }
  }
  // the finest level carries error ratios against the previous one
  const auto& finest = t.levels.back();
  EXPECT_EQ(finest.convergence.size(), t.orders.size());
  const ojson j = to_json(t);
  EXPECT_EQ(j["orders"]["nullity"][1], "exact");
  const std::string csv = to_csv(t);
  EXPECT_EQ(csv.rfind("residual,max@h=0.08", 0), 0u);
}

TEST(Pipeline, Deterministic) {
  const auto spec = catalog("lagrangian_castro_lerma");
  const auto g = spec.default_grid(0.05);
  EXPECT_EQ(to_json(full_report(spec, g, {})).dump(), to_json(full_report(spec, g, {})).dump());
}
