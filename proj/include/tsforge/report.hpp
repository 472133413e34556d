#pragma once

// Residual reports with a fixed JSON schema, the tolerance baseline, and
// observed convergence orders.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsforge/verify.hpp"

namespace tsforge {

using ojson = nlohmann::ordered_json;

struct ResidualReport {
  std::string example;
  double h_u = 0.0, h_v = 0.0;
  int n_u = 0, n_v = 0;
  std::vector<std::pair<std::string, Norms>> residuals;  // insertion order is the key order
  // error ratio e(h)/e(h/2) against the next coarser level; nullopt = exact
  std::vector<std::pair<std::string, std::optional<double>>> convergence;

  void set_grid(const Grid& g) {
    h_u = g.h_u();
    h_v = g.h_v();
    n_u = g.n_u();
    n_v = g.n_v();
  }
  double h() const { return std::max(h_u, h_v); }

  void add(const std::string& name, const Norms& n) { residuals.emplace_back(name, n); }

  const Norms* find(const std::string& name) const {
    for (const auto& [k, v] : residuals)
      if (k == name) return &v;
    return nullptr;
  }
};

/// Serialises with keys {example, grid, residuals, convergence}.
inline ojson to_json(const ResidualReport& r) {
  ojson j;
  j["example"] = r.example;
  j["grid"] = {{"h_u", r.h_u}, {"h_v", r.h_v}, {"n_u", r.n_u}, {"n_v", r.n_v}};
  ojson res = ojson::object();
  for (const auto& [name, n] : r.residuals)
    res[name] = {{"max", n.max}, {"l2", n.l2}, {"nodes", n.nodes}};
  j["residuals"] = res;
  ojson conv = ojson::object();
  for (const auto& [name, ratio] : r.convergence) {
    if (ratio)
      conv[name] = *ratio;
    else
      conv[name] = "exact";
  }
  j["convergence"] = conv;
  return j;
}

inline ResidualReport report_from_json(const ojson& j) {
  ResidualReport r;
  r.example = j.at("example").get<std::string>();
  const auto& g = j.at("grid");
  r.h_u = g.at("h_u").get<double>();
  r.h_v = g.at("h_v").get<double>();
  r.n_u = g.at("n_u").get<int>();
  r.n_v = g.at("n_v").get<int>();
  for (const auto& [name, n] : j.at("residuals").items())
    r.add(name, {n.at("max").get<double>(), n.at("l2").get<double>(), n.at("nodes").get<std::size_t>()});
  for (const auto& [name, c] : j.at("convergence").items()) {
    if (c.is_string())
      r.convergence.emplace_back(name, std::nullopt);
    else
      r.convergence.emplace_back(name, c.get<double>());
  }
  return r;
}

inline constexpr double exact_floor = 1e-8;

/// Error ratio e_coarse/e_fine; nullopt ("exact") when both errors sit at
/// or below the round-off floor.
inline std::optional<double> error_ratio(double e_coarse, double e_fine, double floor = exact_floor) {
  if (e_coarse <= floor && e_fine <= floor) return std::nullopt;
  return e_coarse / e_fine;
}

/// Observed order log(e1/e2)/log(h1/h2); nullopt as for error_ratio.
inline std::optional<double> observed_order(double e_coarse, double e_fine, double h_coarse,
                                            double h_fine, double floor = exact_floor) {
  const auto r = error_ratio(e_coarse, e_fine, floor);
  if (!r) return std::nullopt;
  return std::log(*r) / std::log(h_coarse / h_fine);
}

enum class ToleranceScale { h2, absolute };

struct ToleranceEntry {
  ToleranceScale scale = ToleranceScale::h2;
  double C = 100.0;
};

/// Per-example residual constants: a residual passes when
/// max <= slack * C * (h² or 1).
class Baseline {
 public:
  Baseline() = default;

  static Baseline from_json(const ojson& j) {
    Baseline b;
    b.slack_ = j.value("slack", 2.0);
    const auto read = [](const ojson& obj) {
      std::map<std::string, ToleranceEntry> m;
      for (const auto& [name, e] : obj.items()) {
        ToleranceEntry t;
        t.scale = e.value("scale", std::string("h2")) == "abs" ? ToleranceScale::absolute
                                                               : ToleranceScale::h2;
        t.C = e.at("C").get<double>();
        m[name] = t;
      }
      return m;
    };
    if (j.contains("default")) b.defaults_ = read(j.at("default"));
    if (j.contains("examples"))
      for (const auto& [ex, obj] : j.at("examples").items()) b.examples_[ex] = read(obj);
    return b;
  }

  static Baseline load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read baseline " + path);
    return from_json(ojson::parse(in));
  }

  double slack() const { return slack_; }

  std::optional<ToleranceEntry> entry(const std::string& example, const std::string& residual) const {
    if (auto it = examples_.find(example); it != examples_.end())
      if (auto jt = it->second.find(residual); jt != it->second.end()) return jt->second;
    if (auto jt = defaults_.find(residual); jt != defaults_.end()) return jt->second;
    return std::nullopt;
  }

  double tolerance(const ToleranceEntry& e, double h) const {
    return slack_ * e.C * (e.scale == ToleranceScale::h2 ? h * h : 1.0);
  }

 private:
  double slack_ = 2.0;
  std::map<std::string, ToleranceEntry> defaults_;
  std::map<std::string, std::map<std::string, ToleranceEntry>> examples_;
};

struct BaselineFailure {
  std::string residual;
  double value = 0.0;
  double tolerance = 0.0;
};

/// Residuals exceeding their tolerance. Names without an entry are not
/// judged; `judged` receives how many were.
inline std::vector<BaselineFailure> check_against(const ResidualReport& r, const Baseline& b,
                                                  std::size_t* judged = nullptr) {
  std::vector<BaselineFailure> out;
  std::size_t n = 0;
  for (const auto& [name, norms] : r.residuals) {
    const auto e = b.entry(r.example, name);
    if (!e) continue;
    ++n;
    const double tol = b.tolerance(*e, r.h());
    if (!(norms.max <= tol)) out.push_back({name, norms.max, tol});
  }
  if (judged) *judged = n;
  return out;
}

}  // namespace tsforge
