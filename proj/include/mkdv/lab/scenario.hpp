#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mkdv/error.hpp"
#include "mkdv/evolution.hpp"
#include "mkdv/grid.hpp"
#include "mkdv/lyapunov.hpp"
#include "mkdv/profiles.hpp"

namespace mkdv::lab {

using json = nlohmann::json;

/// Field-level schema violation in a scenario document.
class ScenarioError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// amplitude * exp(-((x - center)/width)^2) added to the initial profile.
struct Perturbation {
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;

  double operator()(double x) const {
    const double z = (x - center) / width;
    return amplitude * std::exp(-z * z);
  }
};

struct RateFitSettings {
  /// Fit window; a negative end means "end of the run".
  double window_start = 0.0;
  double window_end = -1.0;
  /// "localized": H^2 norm of w weighted by 1 - Phi_1 (the part ahead of the
  /// first cut-off); "global": plain H^2 norm.
  std::string distance = "localized";
  /// Fixed |Ptilde_j w| constant is fitted on the first half of the window
  /// and checked on the second.
  double ps_fit_fraction = 0.5;
};

struct Scenario {
  std::string name;
  OrderedConfiguration cfg;
  Grid grid;
  EvolutionControls evolution;
  double sigma = 0.01;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool override_hypothesis = false;
  double forced_m1 = 0.1;
  std::optional<Perturbation> perturbation;
  RateFitSettings rate_fit;
  /// Document after overrides, as parsed.
  json document;
};

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ScenarioError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_number()) throw ScenarioError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw ScenarioError(where + ": unknown field '" + k + "'");
  }
}

inline WaveObject parse_object(const json& o, const std::string& where) {
  if (!o.is_object()) throw ScenarioError(where + ": expected an object");
  const auto& type = require(o, "type", where);
  if (!type.is_string()) throw ScenarioError(where + ".type: expected a string");
  const std::string t = type.get<std::string>();
  if (t == "soliton") {
    reject_unknown(o, {"type", "c", "kappa", "x0"}, where);
    const double kappa = number_or(o, "kappa", 1.0, where);
    if (kappa != 1.0 && kappa != -1.0) throw ScenarioError(where + ".kappa: must be +1 or -1");
    return Soliton(number(o, "c", where), static_cast<int>(kappa), number_or(o, "x0", 0.0, where));
  }
  if (t == "breather") {
    reject_unknown(o, {"type", "alpha", "beta", "x1", "x2", "center"}, where);
    if (o.contains("center") && o.contains("x2")) throw ScenarioError(where + ": give either x2 or center");
    // the envelope of B sits at x = -x2 at t = 0
    const double x2 = o.contains("center") ? -number(o, "center", where) : number_or(o, "x2", 0.0, where);
    return Breather(number(o, "alpha", where), number(o, "beta", where), number_or(o, "x1", 0.0, where), x2);
  }
  throw ScenarioError(where + ".type: unknown object type '" + t + "'");
}

// Parses "a.b.0.c=value"; the value is read as JSON when possible, else as a string.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ScenarioError("override '" + assignment + "': expected key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(p);
      } catch (const std::exception&) {
        throw ScenarioError("override '" + path + "': '" + p + "' is not an array index");
      }
      if (idx >= node->size()) throw ScenarioError("override '" + path + "': index " + p + " out of range");
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ScenarioError("override '" + path + "': '" + p + "' is not inside an object");
      node = &(*node)[p];
    }
    if (last) *node = value;
  }
}

}  // namespace detail

/// Validated scenario from a JSON document, after applying `overrides`.
inline Scenario parse_scenario(json doc, const std::vector<std::string>& overrides = {}) {
  for (const auto& o : overrides) detail::apply_override(doc, o);
  if (!doc.is_object()) throw ScenarioError("scenario: expected a JSON object");
  detail::reject_unknown(doc,
                         {"name", "objects", "grid", "evolution", "sigma", "seed", "output_dir", "override_hypothesis",
                          "forced_m1", "perturbation", "rate_fit", "description"},
                         "scenario");

  const auto& objs = detail::require(doc, "objects", "scenario");
  if (!objs.is_array() || objs.empty()) throw ScenarioError("scenario.objects: expected a non-empty list");
  std::vector<WaveObject> objects;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    objects.push_back(detail::parse_object(objs[i], "scenario.objects[" + std::to_string(i) + "]"));
  }

  const auto& gj = detail::require(doc, "grid", "scenario");
  detail::reject_unknown(gj, {"L", "n"}, "scenario.grid");
  const double n = detail::number(gj, "n", "scenario.grid");
  if (n < 0 || n != std::floor(n)) throw ScenarioError("scenario.grid.n: expected a positive integer");

  EvolutionControls ev;
  if (doc.contains("evolution")) {
    const auto& e = doc["evolution"];
    detail::reject_unknown(e, {"dt", "t_end", "save_every", "dealias", "t_start", "scheme"},
                           "scenario.evolution");
    ev.dt = detail::number_or(e, "dt", ev.dt, "scenario.evolution");
    ev.t_end = detail::number_or(e, "t_end", ev.t_end, "scenario.evolution");
    ev.t_start = detail::number_or(e, "t_start", ev.t_start, "scenario.evolution");
    ev.save_every = static_cast<int>(detail::number_or(e, "save_every", ev.save_every, "scenario.evolution"));
    if (e.contains("dealias")) {
      if (!e["dealias"].is_boolean()) throw ScenarioError("scenario.evolution.dealias: expected a boolean");
      ev.dealias = e["dealias"].get<bool>();
    }
    if (e.contains("scheme")) {
      const auto& sc = e["scheme"];
      if (sc == "etdrk4") ev.scheme = Scheme::ETDRK4;
      else if (sc == "ifrk4") ev.scheme = Scheme::IFRK4;
      else throw ScenarioError("scenario.evolution.scheme: expected 'etdrk4' or 'ifrk4'");
    }
  }

  std::optional<Perturbation> pert;
  if (doc.contains("perturbation") && !doc["perturbation"].is_null()) {
    const auto& p = doc["perturbation"];
    detail::reject_unknown(p, {"amplitude", "center", "width"}, "scenario.perturbation");
    Perturbation b;
    b.amplitude = detail::number(p, "amplitude", "scenario.perturbation");
    b.center = detail::number_or(p, "center", 0.0, "scenario.perturbation");
    b.width = detail::number_or(p, "width", 1.0, "scenario.perturbation");
    if (!(b.width > 0.0)) throw ScenarioError("scenario.perturbation.width: must be positive");
    pert = b;
  }

  RateFitSettings rf;
  if (doc.contains("rate_fit")) {
    const auto& r = doc["rate_fit"];
    detail::reject_unknown(r, {"window", "distance", "ps_fit_fraction"}, "scenario.rate_fit");
    if (r.contains("window")) {
      const auto& w = r["window"];
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
        throw ScenarioError("scenario.rate_fit.window: expected [t_a, t_b]");
      }
      rf.window_start = w[0].get<double>();
      rf.window_end = w[1].get<double>();
    }
    if (r.contains("distance")) {
      rf.distance = r["distance"].get<std::string>();
      if (rf.distance != "localized" && rf.distance != "global") {
        throw ScenarioError("scenario.rate_fit.distance: expected 'localized' or 'global'");
      }
    }
    rf.ps_fit_fraction = detail::number_or(r, "ps_fit_fraction", rf.ps_fit_fraction, "scenario.rate_fit");
  }

  Scenario s{doc.value("name", std::string("scenario")),
             order_and_validate(std::move(objects)),
             Grid(detail::number(gj, "L", "scenario.grid"), static_cast<std::size_t>(n)),
             ev,
             detail::number_or(doc, "sigma", 0.01, "scenario"),
             static_cast<std::uint64_t>(detail::number_or(doc, "seed", 0.0, "scenario")),
             doc.value("output_dir", std::string("out")),
             doc.value("override_hypothesis", false),
             detail::number_or(doc, "forced_m1", 0.1, "scenario"),
             pert,
             rf,
             doc};
  check_tails(s.cfg, s.evolution.t_start, s.grid, 1e-10);
  return s;
}

inline Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides = {}) {
  json doc = json::parse(text, nullptr, false, true);
  if (doc.is_discarded()) throw ScenarioError("scenario: not a well-formed JSON document");
  return parse_scenario(std::move(doc), overrides);
}

inline Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), overrides);
}

/// Cut-off centres placed halfway between consecutive objects at t_start.
inline std::vector<double> midpoint_anchors(const OrderedConfiguration& cfg, const std::vector<double>& speeds,
                                            double t_start) {
  std::vector<double> a;
  for (std::size_t j = 0; j + 1 < cfg.size(); ++j) {
    const double mid = 0.5 * (center(cfg[j], t_start) + center(cfg[j + 1], t_start));
    a.push_back(mid - speeds[j] * t_start);
  }
  return a;
}

/// Lyapunov parameters for the scenario, cut-offs anchored between objects.
inline LyapunovParams scenario_parameters(const Scenario& s) {
  SelectionOptions opt;
  opt.allow_outside_hypothesis = s.override_hypothesis;
  opt.forced_m1 = s.forced_m1;
  // first pass fixes the speeds, second places the anchors
  const auto probe = select_parameters(s.cfg, s.sigma, opt);
  opt.anchors = midpoint_anchors(s.cfg, probe.fam.speeds(), s.evolution.t_start);
  return select_parameters(s.cfg, s.sigma, opt);
}

/// Initial datum P(t_start) plus the optional bump.
inline Field initial_state(const Scenario& s) {
  Field u = profile_sum(s.cfg, s.evolution.t_start, s.grid);
  if (s.perturbation) u += Field::sample(s.grid, *s.perturbation);
  return u;
}

inline json object_json(const WaveObject& o) {
  return std::visit(mkdv::detail::overloaded{[](const Soliton& s) {
                                               return json{{"type", "soliton"}, {"c", s.c()}, {"kappa", s.kappa()},
                                                           {"x0", s.x0()}};
                                             },
                                             [](const Breather& b) {
                                               return json{{"type", "breather"}, {"alpha", b.alpha()},
                                                           {"beta", b.beta()},   {"x1", b.x1()},
                                                           {"x2", b.x2()}};
                                             }},
                    o);
}

/// Everything the diagnostics consume, derived quantities included.
/// Parameter selection failures are recorded instead of thrown.
inline json resolved_config(const Scenario& s) {
  json objs = json::array(), shapes = json::array();
  for (std::size_t j = 0; j < s.cfg.size(); ++j) {
    json o = object_json(s.cfg[j]);
    o["velocity"] = s.cfg.velocities()[j];
    o["center_at_t_start"] = center(s.cfg[j], s.evolution.t_start);
    objs.push_back(o);
    const auto sp = shape_pair(s.cfg[j]);
    shapes.push_back({sp.a, sp.b});
  }
  json r;
  r["name"] = s.name;
  r["objects"] = objs;
  r["shape_pairs"] = shapes;
  r["grid"] = {{"L", s.grid.half_length()}, {"n", s.grid.size()}, {"h", s.grid.spacing()}};
  r["evolution"] = {{"dt", s.evolution.dt},           {"t_start", s.evolution.t_start},
                    {"t_end", s.evolution.t_end},     {"save_every", s.evolution.save_every},
                    {"dealias", s.evolution.dealias},
                    {"scheme", s.evolution.scheme == Scheme::ETDRK4 ? "etdrk4" : "ifrk4"},
                    {"stability_bound", stability_bound(initial_state(s))}};
  r["seed"] = s.seed;
  r["solver_budget"] = 1e-5;
  r["rate_fit"] = {{"window", {s.rate_fit.window_start, s.rate_fit.window_end}},
                   {"distance", s.rate_fit.distance},
                   {"ps_fit_fraction", s.rate_fit.ps_fit_fraction}};
  if (s.perturbation) {
    r["perturbation"] = {{"amplitude", s.perturbation->amplitude},
                         {"center", s.perturbation->center},
                         {"width", s.perturbation->width}};
  } else {
    r["perturbation"] = nullptr;
  }
  r["forced_m1"] = s.override_hypothesis ? json(s.forced_m1) : json(nullptr);
  std::optional<LyapunovParams> sel;
  try {
    sel = scenario_parameters(s);
  } catch (const Error& e) {
    r["parameters_error"] = e.what();
    return r;
  }
  const auto& p = *sel;
  r["sigma_requested"] = p.sigma_requested;
  r["sigma"] = p.sigma();
  r["m"] = p.fam.speeds();
  r["anchors"] = p.fam.anchors();
  r["m1_interval"] = {p.m1_low, p.m1_high};
  r["tau0"] = std::isfinite(p.fam.tau0()) ? json(p.fam.tau0()) : json(nullptr);
  r["nu1_min"] = p.nu1_min;
  r["nu1"] = p.nu1;
  r["nu"] = p.nu;
  r["nu_prime"] = p.nu_prime;
  r["nu2"] = p.nu2;
  r["nu3"] = p.nu3;
  r["omega"] = p.omega;
  r["outside_hypothesis"] = p.outside_hypothesis;
  return r;
}

}  // namespace mkdv::lab
