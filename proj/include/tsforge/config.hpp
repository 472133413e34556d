#pragma once

// Run configuration for the command-line tool: a flat `key = value` file
// plus overrides, validated field by field before anything is computed.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tsforge/pipeline.hpp"

namespace tsforge {

/// Invalid configuration. `issues()` holds one "field: message" entry per
/// problem found.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::invalid_argument(join(issues)), issues_(std::move(issues)) {}
  ConfigError(const std::string& field, const std::string& msg)
      : ConfigError(std::vector<std::string>{field + ": " + msg}) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
    return s;
  }
  std::vector<std::string> issues_;
};

struct RunConfig {
  std::optional<std::string> example;  // defaults to custom_expression when expressions are given
  double theta = 0.0;
  std::string expr_g1;
  std::string expr_g2;
  double h = 0.02;
  std::optional<Domain> domain;  // catalog default when unset
  std::optional<GaussMode> mode;
  double anchor_u = 0.0;
  double anchor_v = 0.0;
  std::string out_dir = ".";
  bool force = false;
  double eps_hol = 1e-8;
  double eps_branch = 1e-6;
  double refusal_c = 1e3;
  PathOrder order = PathOrder::row_major;
  std::vector<double> levels{0.04, 0.02, 0.01};

  std::string example_name() const {
    if (example) return *example;
    return expr_g1.empty() && expr_g2.empty() ? "grim_reaper" : "custom_expression";
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double x = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size())
    throw ConfigError(field, "expected a number, got '" + text + "'");
  return x;
}

inline std::vector<double> parse_list(const std::string& field, const std::string& text,
                                      std::size_t want = 0) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(field, item));
  if (want && out.size() != want)
    throw ConfigError(field, "expected " + std::to_string(want) + " comma-separated numbers");
  return out;
}

inline bool parse_bool(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

}  // namespace detail

inline GaussMode parse_mode(const std::string& text) {
  const std::string t = detail::trim(text);
  if (t == "strict_disc") return GaussMode::strict_disc;
  if (t == "extended_plane") return GaussMode::extended_plane;
  throw ConfigError("mode", "expected strict_disc or extended_plane, got '" + text + "'");
}

/// Applies one setting. Keys accept either dashes or underscores.
inline void apply_setting(RunConfig& c, std::string key, const std::string& value) {
  for (char& ch : key)
    if (ch == '-') ch = '_';
  const std::string v = detail::trim(value);
  if (key == "example") {
    c.example = v;
  } else if (key == "theta") {
    c.theta = detail::parse_real(key, v);
  } else if (key == "expr_g1") {
    c.expr_g1 = v;
  } else if (key == "expr_g2") {
    c.expr_g2 = v;
  } else if (key == "h") {
    c.h = detail::parse_real(key, v);
  } else if (key == "domain") {
    const auto d = detail::parse_list(key, v, 4);
    c.domain = Domain{d[0], d[1], d[2], d[3]};
  } else if (key == "mode") {
    c.mode = parse_mode(v);
  } else if (key == "anchor") {
    const auto a = detail::parse_list(key, v, 2);
    c.anchor_u = a[0];
    c.anchor_v = a[1];
  } else if (key == "out_dir") {
    c.out_dir = v;
  } else if (key == "force") {
    c.force = detail::parse_bool(key, v);
  } else if (key == "eps_hol") {
    c.eps_hol = detail::parse_real(key, v);
  } else if (key == "eps_branch") {
    c.eps_branch = detail::parse_real(key, v);
  } else if (key == "refusal_c") {
    c.refusal_c = detail::parse_real(key, v);
  } else if (key == "order") {
    if (v == "row" || v == "row_major")
      c.order = PathOrder::row_major;
    else if (v == "column" || v == "column_major")
      c.order = PathOrder::column_major;
    else
      throw ConfigError(key, "expected row or column, got '" + value + "'");
  } else if (key == "levels") {
    c.levels = detail::parse_list(key, v);
  } else {
    throw ConfigError(key, "unknown setting");
  }
}

/// Parses `key = value` lines; blank lines and lines starting with '#' are
/// skipped. Every malformed line is reported, not just the first.
inline RunConfig parse_config_text(const std::string& text, RunConfig c = {}) {
  std::vector<std::string> issues;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      issues.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    try {
      apply_setting(c, detail::trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const ConfigError& e) {
      for (const auto& s : e.issues()) issues.push_back("line " + std::to_string(lineno) + ": " + s);
    }
  }
  if (!issues.empty()) throw ConfigError(issues);
  return c;
}

inline RunConfig load_config(const std::string& path, RunConfig c = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(c));
}

/// Checks every field and throws one ConfigError listing all problems.
inline void validate(const RunConfig& c) {
  std::vector<std::string> issues;
  const auto bad = [&](const std::string& f, const std::string& m) { issues.push_back(f + ": " + m); };
  const auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };

  const std::string name = c.example_name();
  const auto names = catalog_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    bad("example", "unknown example '" + name + "'");
  if (name == "custom_expression") {
    if (c.expr_g1.empty()) bad("expr_g1", "required for custom_expression");
    if (c.expr_g2.empty()) bad("expr_g2", "required for custom_expression");
  } else if (!c.expr_g1.empty() || !c.expr_g2.empty()) {
    bad("expr_g1", "expressions only apply to custom_expression");
  }
  for (const auto& [field, text] : {std::pair{"expr_g1", &c.expr_g1}, std::pair{"expr_g2", &c.expr_g2}}) {
    if (text->empty()) continue;
    try {
      (void)Expression::parse(*text);
    } catch (const ParseError& e) {
      bad(field, e.what());
    }
  }
  if (!std::isfinite(c.theta)) bad("theta", "must be finite");
  if (!positive(c.h)) bad("h", "must be a positive number");
  if (c.domain) {
    const Domain& d = *c.domain;
    if (!(std::isfinite(d.u_min) && std::isfinite(d.u_max) && d.u_min < d.u_max))
      bad("domain", "requires finite u_min < u_max");
    if (!(std::isfinite(d.v_min) && std::isfinite(d.v_max) && d.v_min < d.v_max))
      bad("domain", "requires finite v_min < v_max");
  }
  if (!positive(c.eps_hol)) bad("eps_hol", "must be positive");
  if (!positive(c.eps_branch)) bad("eps_branch", "must be positive");
  if (!positive(c.refusal_c)) bad("refusal_c", "must be positive");
  if (c.levels.size() < 3) bad("levels", "a convergence study needs at least three levels");
  for (double h : c.levels)
    if (!positive(h)) bad("levels", "spacings must be positive");
  if (!std::isfinite(c.anchor_u) || !std::isfinite(c.anchor_v)) bad("anchor", "must be finite");
  if (c.out_dir.empty()) bad("out_dir", "must not be empty");
  if (!issues.empty()) throw ConfigError(issues);
}

inline ExampleSpec resolve_example(const RunConfig& c) {
  CatalogParams p;
  p.theta = c.theta;
  p.expr_g1 = c.expr_g1;
  p.expr_g2 = c.expr_g2;
  p.mode = c.mode;
  ExampleSpec spec = catalog(c.example_name(), p);
  if (c.mode) spec.mode = *c.mode;
  return spec;
}

inline Domain resolve_domain(const RunConfig& c, const ExampleSpec& spec) {
  return c.domain ? *c.domain : spec.default_domain;
}

/// Grid for a single run; the anchor must fall inside it.
inline Grid resolve_grid(const RunConfig& c, const ExampleSpec& spec) {
  const Domain d = resolve_domain(c, spec);
  if (c.anchor_u < d.u_min || c.anchor_u > d.u_max || c.anchor_v < d.v_min || c.anchor_v > d.v_max)
    throw ConfigError("anchor", "lies outside the domain");
  const double span = std::min(d.u_max - d.u_min, d.v_max - d.v_min);
  if (c.h > span / 4.0) throw ConfigError("h", "too coarse for the domain");
  return Grid::with_spacing(d.u_min, d.u_max, d.v_min, d.v_max, c.h);
}

inline PipelineOptions resolve_options(const RunConfig& c) {
  PipelineOptions o;
  o.tol.eps_hol = c.eps_hol;
  o.tol.eps_branch = c.eps_branch;
  o.integration.refusal_c = c.refusal_c;
  o.integration.force = c.force;
  o.integration.order = c.order;
  o.anchor_u = c.anchor_u;
  o.anchor_v = c.anchor_v;
  return o;
}

}  // namespace tsforge
