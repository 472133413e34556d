#include <gtest/gtest.h>

#include "tsforge/pipeline.hpp"

using namespace tsforge;

namespace {

std::vector<ExampleSpec> catalog_examples() {
  std::vector<ExampleSpec> out{catalog("grim_reaper")};
  for (double theta : {0.3, 0.7, 1.2}) {
    CatalogParams p;
    p.theta = theta;
    out.push_back(catalog("tilted_reaper", p));
  }
  out.push_back(catalog("lagrangian_castro_lerma"));
  return out;
}

std::string label(const ExampleSpec& s) {
  return s.params.count("theta") ? s.name + "(" + std::to_string(s.params.at("theta")) + ")" : s.name;
}

}  // namespace

TEST(EndToEnd, CatalogPassesBaselineAtFineSpacing) {
  const Baseline b = Baseline::load(TSFORGE_BASELINE);
  for (const auto& spec : catalog_examples()) {
    const auto r = full_report(spec, spec.default_grid(0.01), {});
    EXPECT_LT(r.find("position")->max, 1e-3) << label(spec);
    for (const auto& f : check_against(r, b))
      ADD_FAILURE() << label(spec) << ": " << f.residual << " = " << f.value << " > " << f.tolerance;
  }
}

TEST(EndToEnd, TranslatorResidualConvergesAtSecondOrder) {
  for (const auto& spec : catalog_examples()) {
    const auto t = converge(spec, spec.default_domain, {0.04, 0.02, 0.01}, {});
    for (const auto& [name, ord] : t.orders) {
      if (name != "translator_fd" && name != "position" && name != "gauss_roundtrip") continue;
      for (const auto& o : ord) {
        ASSERT_TRUE(o.has_value()) << label(spec) << " " << name;
        EXPECT_GE(*o, 1.8) << label(spec) << " " << name;
        EXPECT_LE(*o, 2.2) << label(spec) << " " << name;
      }
    }
  }
}

TEST(EndToEnd, ExpressionInputReproducesCatalogEntry) {
  CatalogParams p;
  p.expr_g1 = p.expr_g2 = "i*tanh(u)";
  const auto custom = catalog("custom_expression", p);
  const auto grim = catalog("grim_reaper");
  const Grid g = grim.default_grid(0.02);
  const auto a = full_report(grim, g, {});
  const auto c = full_report(custom, g, {});
  std::size_t shared = 0;
  for (const auto& [name, n] : c.residuals) {
    const Norms* m = a.find(name);
    if (!m) continue;
    ++shared;
    EXPECT_NEAR(n.max, m->max, 1e-10 + 1e-8 * m->max) << name;
  }
  EXPECT_GT(shared, 15u);
}

TEST(EndToEnd, AnchorChoiceDoesNotMatter) {
  const auto spec = catalog("lagrangian_castro_lerma");
  PipelineOptions o;
  o.anchor_u = -2.0;
  o.anchor_v = 1.5;
  const double h = 0.02;
  EXPECT_LT(full_report(spec, spec.default_grid(h), o).find("position")->max, 25 * h * h);
  o.integration.order = PathOrder::column_major;
  EXPECT_LT(full_report(spec, spec.default_grid(h), o).find("position")->max, 25 * h * h);
}

TEST(EndToEnd, ReportSurvivesJson) {
  const auto spec = catalog("grim_reaper");
  const auto r = full_report(spec, spec.default_grid(0.04), {});
  EXPECT_EQ(to_json(report_from_json(ojson::parse(to_json(r).dump()))), to_json(r));
}
