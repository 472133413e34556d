// tsforge: build and check translating solitons from prescribed Gauss maps.
//
//   tsforge verify         --example grim_reaper --h 0.01
//   tsforge integrate      --example lagrangian_castro_lerma --out-dir out
//   tsforge converge       --example tilted_reaper --theta 0.7
//   tsforge export-catalog --out-dir catalog
//
// Exit codes: 0 pass, 1 residual failure, 2 config error, 3 numerical refusal.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "tsforge/config.hpp"

#ifndef TSFORGE_DEFAULT_BASELINE
#define TSFORGE_DEFAULT_BASELINE "baseline/residuals.json"
#endif

namespace fs = std::filesystem;
using namespace tsforge;

namespace {

enum Exit { ok = 0, residual_failure = 1, config_error = 2, refusal = 3 };

struct RefusedStage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Baseline load_baseline() {
  const char* env = std::getenv("TRANSLATOR_FORGE_BASELINE");
  const std::string path = env && *env ? env : TSFORGE_DEFAULT_BASELINE;
  try {
    return Baseline::load(path);
  } catch (const std::exception& e) {
    throw ConfigError("baseline", std::string(e.what()));
  }
}

/// Prints one line per judged residual; returns true when all pass.
bool judge(const ResidualReport& r, const Baseline& b) {
  std::size_t judged = 0;
  const auto failures = check_against(r, b, &judged);
  std::cout << std::setprecision(3) << std::scientific;
  for (const auto& [name, n] : r.residuals) {
    const auto e = b.entry(r.example, name);
    std::cout << "  " << std::left << std::setw(28) << name << " max " << n.max;
    if (e) {
      const double tol = b.tolerance(*e, r.h());
      std::cout << "  tol " << tol << (n.max <= tol ? "  ok" : "  FAIL");
    }
    std::cout << '\n';
  }
  std::cout << std::defaultfloat;
  std::cout << r.example << ": " << judged - failures.size() << "/" << judged
            << " residuals within baseline\n";
  return failures.empty();
}

void write_json(const fs::path& path, const ojson& j) { write_file_atomic(path.string(), j.dump(2) + "\n"); }

ojson norms_json(const Norms& n) { return {{"max", n.max}, {"l2", n.l2}, {"nodes", n.nodes}}; }

void write_curvature(const fs::path& dir, const GeometryStage& geo, int margin) {
  ojson j;
  j["method"] = "finite_difference";
  j["margin"] = margin;
  j["translator_residual"] = norms_json(translator_residual(geo.fd, margin));
  j["closed_form_translator_residual"] = norms_json(translator_residual(geo.closed, margin));
  j["max_H"] = norms(vector_norm(geo.fd.H), margin).max;
  j["per_node"] = "curvature.csv";
  write_json(dir / "curvature.json", j);

  const Grid& g = geo.fd.translator_residual.grid();
  std::ostringstream csv;
  csv << std::setprecision(17) << "u,v,H1,H2,H3,H4,e4perp1,e4perp2,e4perp3,e4perp4,residual\n";
  for (int jv = 0; jv < g.n_v(); ++jv)
    for (int iu = 0; iu < g.n_u(); ++iu) {
      if (!g.active(iu, jv)) continue;
      csv << g.u(iu) << ',' << g.v(jv);
      for (const auto& c : geo.fd.H) csv << ',' << c(iu, jv);
      for (const auto& c : geo.fd.e4_perp) csv << ',' << c(iu, jv);
      csv << ',' << geo.fd.translator_residual(iu, jv) << '\n';
    }
  write_file_atomic((dir / "curvature.csv").string(), csv.str());
}

void export_surface(const fs::path& dir, const std::string& stem, const ImmersionPatch& p) {
  if (p.dim == 3) {
    export_obj(p, (dir / (stem + ".obj")).string(), r3_slots);
  } else {
    export_obj(p, (dir / (stem + ".obj")).string(), {0, 1, 2}, (dir / (stem + "_x4.csv")).string(), 3);
  }
  export_csv(p, (dir / (stem + ".csv")).string());
}

int cmd_verify(const RunConfig& cfg, const Baseline& base) {
  const ExampleSpec spec = resolve_example(cfg);
  const Grid grid = resolve_grid(cfg, spec);
  const PipelineOptions opt = resolve_options(cfg);
  ConditionStage s;
  const ResidualReport r = verify_report(spec, grid, opt, &s);
  fs::create_directories(cfg.out_dir);
  write_json(fs::path(cfg.out_dir) / "report.json", to_json(r));
  if (!s.holo.nowhere_holomorphic)
    std::cerr << "warning: Gauss map is holomorphic somewhere (min |g_zbar| " << s.holo.min_dzbar
              << " below " << s.holo.floor << ")\n";
  const bool pass = judge(r, base);
  const double h = grid.h();
  const double loop = loop_closure_residual(s.ncf, opt.margin_nodes(grid));
  if (!cfg.force && loop > opt.integration.refusal_c * h * h) {
    std::cerr << "refused: loop-closure residual " << loop << " exceeds " << opt.integration.refusal_c
              << "*h^2 = " << opt.integration.refusal_c * h * h << "\n";
    return refusal;
  }
  return pass ? ok : residual_failure;
}

/// Runs conditions and geometry for one spec and writes report, mesh and
/// curvature files into `dir`. Returns whether the baseline is met.
bool integrate_into(const fs::path& dir, const ExampleSpec& spec, const Grid& grid,
                    const PipelineOptions& opt, bool force, const Baseline& base) {
  ResidualReport r;
  r.example = spec.name;
  r.set_grid(grid);
  const ConditionStage s = run_conditions(spec, grid, opt);
  add_condition_residuals(r, spec, s, opt);
  if (!force && !check_against(r, base).empty()) {
    judge(r, base);
    throw RefusedStage("verify stage failed; rerun with --force to integrate anyway");
  }
  const GeometryStage geo = run_geometry(spec, s, opt);
  add_geometry_residuals(r, spec, s, geo, opt);
  fs::create_directories(dir);
  write_json(dir / "report.json", to_json(r));
  export_surface(dir, "surface", geo.patch);
  write_curvature(dir, geo, opt.margin_nodes(grid));
  return judge(r, base);
}

int cmd_integrate(const RunConfig& cfg, const Baseline& base) {
  const ExampleSpec spec = resolve_example(cfg);
  const Grid grid = resolve_grid(cfg, spec);
  const bool pass = integrate_into(cfg.out_dir, spec, grid, resolve_options(cfg), cfg.force, base);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "surface.obj").string() << '\n';
  return pass ? ok : residual_failure;
}

int cmd_converge(const RunConfig& cfg, const Baseline& base) {
  const ExampleSpec spec = resolve_example(cfg);
  const Domain dom = resolve_domain(cfg, spec);
  const ConvergenceTable t = converge(spec, dom, cfg.levels, resolve_options(cfg));
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_json(dir / "convergence.json", to_json(t));
  const std::string csv = to_csv(t);
  write_file_atomic((dir / "convergence.csv").string(), csv);
  write_json(dir / "report.json", to_json(t.levels.back()));
  std::cout << csv;
  bool pass = judge(t.levels.back(), base);
  for (const auto& [name, ord] : t.orders)
    if (ord.back() && *ord.back() < 1.8) {
      std::cerr << name << ": observed order " << *ord.back() << " below 1.8\n";
      pass = false;
    }
  return pass ? ok : residual_failure;
}

int cmd_export_catalog(const RunConfig& cfg, const Baseline& base) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  ojson listing = ojson::array();
  bool pass = true;
  for (const auto& name : catalog_names()) {
    ojson e{{"name", name}};
    if (name == "custom_expression") {
      e["params"] = {"expr_g1", "expr_g2", "mode"};
      listing.push_back(e);
      continue;
    }
    CatalogParams p;
    p.theta = cfg.theta;
    const ExampleSpec spec = catalog(name, p);
    const Domain& d = spec.default_domain;
    e["domain"] = {d.u_min, d.u_max, d.v_min, d.v_max};
    e["mode"] = to_string(spec.mode);
    e["dimension"] = spec.r3() ? 3 : 4;
    for (const auto& [k, v] : spec.params) e["params"][k] = v;
    e["files"] = name + "/";
    listing.push_back(e);
    std::cout << "== " << name << '\n';
    pass = integrate_into(dir / name, spec, spec.default_grid(cfg.h), resolve_options(cfg), cfg.force,
                          base) &&
           pass;
  }
  write_json(dir / "catalog.json", listing);
  return pass ? ok : residual_failure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translating soliton surfaces from prescribed Gauss maps"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");  // frees -h/--h for the spacing

  struct Setting {
    std::string key;
    std::string value;
    CLI::Option* opt = nullptr;
  };
  std::vector<Setting> settings;
  std::string config_path;
  bool force = false;

  const std::vector<std::pair<std::string, std::string>> flags = {
      {"example", "catalog example name"},
      {"theta", "tilt parameter for tilted_reaper"},
      {"expr-g1", "expression for g1 in u, v, i"},
      {"expr-g2", "expression for g2 in u, v, i"},
      {"h", "grid spacing"},
      {"domain", "u_min,u_max,v_min,v_max"},
      {"mode", "strict_disc or extended_plane"},
      {"anchor", "u,v of the integration anchor"},
      {"out-dir", "output directory"},
      {"levels", "comma-separated spacings for converge"},
      {"eps-hol", "holomorphy tolerance"},
      {"eps-branch", "branch-point tolerance"},
      {"refusal-c", "refuse integration when loop residual > C*h^2"},
      {"order", "integration path order: row or column"},
  };

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"verify", "check the Gauss-map conditions and null-curve identities"},
      {"integrate", "integrate the immersion and export mesh, CSV and reports"},
      {"converge", "run a convergence study over several spacings"},
      {"export-catalog", "integrate and export every catalog example"},
  };
  settings.reserve(subs.size() * flags.size());
  std::vector<CLI::App*> cmds;
  for (const auto& [name, help] : subs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_flag("--force", force, "continue past refusals and failed checks");
    for (const auto& [flag, fhelp] : flags) {
      settings.push_back({flag, {}, nullptr});
      settings.back().opt = sub->add_option("--" + flag, settings.back().value, fhelp);
    }
    cmds.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : config_error;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    std::vector<std::string> issues;
    for (const auto& s : settings) {
      if (!s.opt->count()) continue;
      try {
        apply_setting(cfg, s.key, s.value);
      } catch (const ConfigError& e) {
        issues.insert(issues.end(), e.issues().begin(), e.issues().end());
      }
    }
    if (!issues.empty()) throw ConfigError(issues);
    if (force) cfg.force = true;
    validate(cfg);
    const Baseline base = load_baseline();

    if (cmds[0]->parsed()) return cmd_verify(cfg, base);
    if (cmds[1]->parsed()) return cmd_integrate(cfg, base);
    if (cmds[2]->parsed()) return cmd_converge(cfg, base);
    return cmd_export_catalog(cfg, base);
  } catch (const ConfigError& e) {
    for (const auto& s : e.issues()) std::cerr << "config error: " << s << '\n';
    return config_error;
  } catch (const CatalogError& e) {
    std::cerr << "config error: example: " << e.what() << '\n';
    return config_error;
  } catch (const ParseError& e) {
    std::cerr << "config error: expression: " << e.what() << '\n';
    return config_error;
  } catch (const RefusalError& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return refusal;
  } catch (const RefusedStage& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return refusal;
  } catch (const TopologyError& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return refusal;
  } catch (const StencilError& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return refusal;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  }
}
