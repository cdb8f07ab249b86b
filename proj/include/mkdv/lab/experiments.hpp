#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mkdv/coercivity.hpp"
#include "mkdv/evolution.hpp"
#include "mkdv/functionals.hpp"
#include "mkdv/lab/rate_fit.hpp"
#include "mkdv/lab/scenario.hpp"
#include "mkdv/lyapunov.hpp"
#include "mkdv/modulation.hpp"

namespace mkdv::lab {

namespace fs = std::filesystem;

enum class Kind { VerifyExact, Conservation, Monotonicity, Modulate, Coercivity, RateFit };

inline constexpr Kind all_kinds[] = {Kind::VerifyExact, Kind::Conservation, Kind::Monotonicity,
                                     Kind::Modulate,    Kind::Coercivity,   Kind::RateFit};

inline std::string to_string(Kind k) {
  switch (k) {
    case Kind::VerifyExact: return "verify-exact";
    case Kind::Conservation: return "conservation";
    case Kind::Monotonicity: return "monotonicity";
    case Kind::Modulate: return "modulate";
    case Kind::Coercivity: return "coercivity";
    case Kind::RateFit: return "rate-fit";
  }
  return "?";
}

inline Kind parse_kind(const std::string& s) {
  for (Kind k : all_kinds)
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown experiment kind '" + s + "'");
}

/// Acceptance thresholds; the summaries echo them verbatim.
struct Thresholds {
  static constexpr double residual = 1e-7;
  static constexpr double drift = 1e-6;
  static constexpr double tracking = 1e-5;
  static constexpr double solver_budget = 1e-5;
  static constexpr double orthogonality = 1e-10;
  static constexpr double offset_drift = 1e-6;
  static constexpr double offset_ratio = 10.0;
  static constexpr double r_squared = 0.9;
  static constexpr double window_stability = 0.2;
  /// Largest admissible measured constant in the scalar-product bound.
  static constexpr double ps_constant = 1.0;
  static constexpr std::size_t coercivity_max_points = 4096;
};

struct ExperimentResult {
  explicit ExperimentResult(Kind k) : kind(k) {}
  Kind kind;
  bool passed = false;
  json summary;
  std::vector<fs::path> files;
};

/// Plain-text columns with a "# name name ..." header; no rows is fine.
inline void emit_plot_data(const fs::path& path, const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& columns) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << '#';
  for (const auto& n : names) out << ' ' << n;
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  out << std::setprecision(16);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? " " : "") << columns[c][r];
    out << '\n';
  }
}

inline void write_json(const fs::path& path, const json& j) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

namespace detail {

// JSON cannot hold inf/nan.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double relative_drift(const std::vector<double>& q) {
  const double ref = std::abs(q.front());
  double worst = 0.0;
  for (double v : q) worst = std::max(worst, std::abs(v - q.front()));
  return ref > 0.0 ? worst / ref : worst;
}

inline Trajectory run(const Scenario& s) {
  return evolve(initial_state(s), s.evolution, s.name);
}

inline ExperimentResult verify_exact(const Scenario& s, const fs::path& dir) {
  ExperimentResult r(Kind::VerifyExact);
  json objs = json::array();
  bool ok = true;
  std::vector<double> idx, res;
  for (std::size_t j = 0; j < s.cfg.size(); ++j) {
    const double e = pde_residual(s.cfg[j], s.evolution.t_start, s.grid);
    ok = ok && e < Thresholds::residual;
    objs.push_back({{"object", describe(s.cfg[j])}, {"residual", e}});
    idx.push_back(static_cast<double>(j + 1));
    res.push_back(e);
  }
  r.summary["objects"] = objs;
  // the sum is exact only up to interaction tails
  r.summary["sum_residual_info"] = pde_residual(s.cfg, s.evolution.t_start, s.grid);
  r.summary["threshold"] = Thresholds::residual;
  r.passed = ok;
  r.files.push_back(dir / "residuals.dat");
  emit_plot_data(r.files.back(), {"object", "residual"}, {idx, res});
  return r;
}

inline ExperimentResult conservation(const Scenario& s, const fs::path& dir) {
  ExperimentResult r(Kind::Conservation);
  const auto traj = run(s);
  std::vector<double> M, E, F, track;
  const bool exact = !s.perturbation;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& u = traj.states[k];
    M.push_back(mass(u));
    E.push_back(energy(u));
    F.push_back(second_energy(u));
    if (exact) track.push_back(h2_norm(u - profile_sum(s.cfg, traj.times[k], s.grid)));
  }
  const double dM = relative_drift(M), dE = relative_drift(E), dF = relative_drift(F);
  r.summary["drift"] = {{"M", dM}, {"E", dE}, {"F", dF}};
  r.summary["drift_threshold"] = Thresholds::drift;
  r.summary["steps"] = traj.metadata.steps;
  r.summary["stability_bound"] = traj.metadata.stability_bound;
  bool ok = dM < Thresholds::drift && dE < Thresholds::drift && dF < Thresholds::drift;
  if (exact) {
    const double worst = *std::max_element(track.begin(), track.end());
    // only a single object is an exact solution; sums are reported
    const bool asserted = s.cfg.size() == 1;
    r.summary["tracking"] = {{"max_h2_error", worst}, {"threshold", Thresholds::tracking}, {"asserted", asserted}};
    if (asserted) ok = ok && worst < Thresholds::tracking;
    r.files.push_back(dir / "tracking.dat");
    emit_plot_data(r.files.back(), {"t", "h2_error"}, {traj.times, track});
  }
  r.passed = ok;
  r.files.push_back(dir / "conservation.dat");
  emit_plot_data(r.files.back(), {"t", "M", "E", "F"}, {traj.times, M, E, F});
  return r;
}

inline ExperimentResult monotonicity(const Scenario& s, const fs::path& dir) {
  ExperimentResult r(Kind::Monotonicity);
  const auto p = scenario_parameters(s);
  const auto traj = run(s);
  const bool asserted = !p.outside_hypothesis;
  bool ok = true;
  json reports = json::array();
  for (std::size_t j = 1; j <= s.cfg.size(); ++j) {
    const auto coeff = coefficient_positivity(p, j, p.sigma());
    const auto interp = interpolation_inequality_check(traj.states.front(), p.fam, j, traj.times.front());
    json jr;
    jr["j"] = j;
    jr["coefficients"] = {{"margins", coeff.margin}, {"hold", coeff.all()}};
    jr["interpolation"] = {{"ratio", interp.ratio}, {"holds", interp.quadratic_holds}};
    for (auto q : {MonotoneQuantity::Mass, MonotoneQuantity::EnergyPlusMass, MonotoneQuantity::SecondEnergyPlusMass,
                   MonotoneQuantity::WeakenedF}) {
      const auto rho = monotone_density(q, j, p, p.omega);
      const auto cal = calibrate_slack(s.cfg, p, j, rho, s.grid, traj.times);
      const auto rep = monotonicity_report(traj, j, p, q, p.omega, cal.varpi, cal.C, Thresholds::solver_budget);
      const bool checked = q == MonotoneQuantity::Mass || q == MonotoneQuantity::WeakenedF;
      if (checked && asserted) ok = ok && rep.passed();
      jr[to_string(q)] = {{"worst_drop", rep.worst_drop},
                          {"slack_at_worst", rep.slack_bound},
                          {"worst_excess", num(rep.worst_excess)},
                          {"violations", rep.violations},
                          {"C", rep.C},
                          {"varpi", rep.varpi},
                          {"passed", rep.passed()},
                          {"asserted", checked && asserted}};
      r.files.push_back(dir / ("monotonicity_j" + std::to_string(j) + "_" + to_string(q) + ".dat"));
      emit_plot_data(r.files.back(), {"t", "value"}, {rep.times, rep.values});
    }
    reports.push_back(jr);
  }
  r.summary["reports"] = reports;
  r.summary["asserted"] = asserted;
  r.summary["solver_budget"] = Thresholds::solver_budget;
  r.summary["omega"] = p.omega;
  r.passed = ok;
  return r;
}

inline ExperimentResult modulate(const Scenario& s, const fs::path& dir) {
  ExperimentResult r(Kind::Modulate);
  const auto traj = run(s);
  const auto track = track_modulation(traj, s.cfg);
  double resid = 0.0, ymax = 0.0, wmax = 0.0;
  std::vector<double> wcol;
  std::vector<std::vector<double>> ycols(s.cfg.translation_count());
  for (const auto& st : track.states) {
    for (double g : st.ortho_residuals) resid = std::max(resid, std::abs(g));
    for (std::size_t i = 0; i < st.offsets.size(); ++i) {
      ymax = std::max(ymax, std::abs(st.offsets[i]));
      ycols[i].push_back(st.offsets[i]);
    }
    wmax = std::max(wmax, st.w_h2);
    wcol.push_back(st.w_h2);
  }
  bool ok = resid < Thresholds::orthogonality;
  r.summary["max_orthogonality_residual"] = resid;
  r.summary["orthogonality_threshold"] = Thresholds::orthogonality;
  r.summary["max_offset"] = ymax;
  r.summary["max_w_h2"] = wmax;
  r.summary["offset_over_raw_distance"] = track.offset_ratio;
  r.summary["max_offset_rate"] = track.rates.empty() ? 0.0 : *std::max_element(track.rates.begin(), track.rates.end());
  if (!s.perturbation && s.cfg.size() == 1) {
    r.summary["offset_drift_threshold"] = Thresholds::offset_drift;
    ok = ok && ymax < Thresholds::offset_drift;
  }
  if (s.perturbation && s.perturbation->amplitude != 0.0) {
    const double ratio = ymax / std::abs(s.perturbation->amplitude);
    r.summary["offset_over_amplitude"] = ratio;
    r.summary["offset_over_amplitude_threshold"] = Thresholds::offset_ratio;
    ok = ok && ratio < Thresholds::offset_ratio;
  }
  r.passed = ok;
  std::vector<std::string> names{"t"};
  std::vector<std::vector<double>> cols{track.times};
  for (std::size_t i = 0; i < ycols.size(); ++i) {
    names.push_back("y" + std::to_string(i + 1));
    cols.push_back(ycols[i]);
  }
  r.files.push_back(dir / "modulation_offsets.dat");
  emit_plot_data(r.files.back(), names, cols);
  r.files.push_back(dir / "modulation_w.dat");
  emit_plot_data(r.files.back(), {"t", "w_h2", "raw_h2"}, {track.times, wcol, track.raw_distance});
  return r;
}

inline ExperimentResult coercivity(const Scenario& s, const fs::path& dir) {
  ExperimentResult r(Kind::Coercivity);
  if (s.grid.size() > Thresholds::coercivity_max_points) {
    throw InvalidArgument("coercivity needs n <= " + std::to_string(Thresholds::coercivity_max_points));
  }
  const auto p = scenario_parameters(s);
  bool ok = true;
  json out = json::array();
  std::vector<double> idx, mus;
  for (std::size_t j = 1; j <= s.cfg.size(); ++j) {
    const auto rep = coercivity_check(s.cfg[j - 1], p, j, s.grid, s.evolution.t_start);
    ok = ok && rep.succeeded();
    out.push_back({{"j", j},
                   {"mu", rep.mu},
                   {"unconstrained_min", rep.unconstrained_min},
                   {"constrained_min", rep.constrained_min},
                   {"grid_points", rep.grid_points}});
    idx.push_back(static_cast<double>(j));
    mus.push_back(rep.mu);
  }
  r.summary["objects"] = out;
  r.passed = ok;
  r.files.push_back(dir / "coercivity.dat");
  emit_plot_data(r.files.back(), {"j", "mu"}, {idx, mus});
  return r;
}

inline json fit_json(const RateFit& f) {
  return {{"varpi", f.varpi},
          {"C", f.C},
          {"r_squared", f.r_squared},
          {"window", {f.window.first, f.window.second}},
          {"samples", f.times.size()},
          {"floor_limited", f.floor_limited}};
}

inline ExperimentResult rate_fit(const Scenario& s, const fs::path& dir) {
  ExperimentResult r(Kind::RateFit);
  const auto p = scenario_parameters(s);
  const auto traj = run(s);
  const auto track = track_modulation(traj, s.cfg);
  const std::size_t J = s.cfg.size();
  const auto& g = s.grid;

  std::vector<double> global, localized;
  std::vector<std::vector<double>> ps_lhs(J), ps_rhs(J);
  for (std::size_t k = 0; k < track.states.size(); ++k) {
    const double t = track.times[k];
    const auto& st = track.states[k];
    global.push_back(st.w_h2);
    if (J > 1) {
      auto weight = p.fam.weight_values(1, t, g);
      for (double& v : weight) v = 1.0 - v;
      localized.push_back(std::sqrt(weighted_h2_norm_sq(st.w, weight)));
    } else {
      localized.push_back(st.w_h2);
    }
    const auto shifted_cfg = s.cfg.shifted(st.offsets);
    const auto d = derivative_stack(st.w, 1);
    for (std::size_t j = 1; j <= J; ++j) {
      const Field Pj = sample(shifted_cfg[j - 1], t, g);
      ps_lhs[j - 1].push_back(std::abs(inner(Pj, st.w)));
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        acc += (d[0][i] * d[0][i] + d[1][i] * d[1][i]) * p.fam.weight(j, t, g.node(i));
      ps_rhs[j - 1].push_back(g.spacing() * acc);
    }
  }

  const double tb = s.rate_fit.window_end < 0.0 ? traj.times.back() : s.rate_fit.window_end;
  const std::pair<double, double> window{s.rate_fit.window_start, tb};
  const auto& chosen = s.rate_fit.distance == "global" ? global : localized;
  const auto fit = fit_exponential_rate(track.times, chosen, window);
  const double mid = 0.5 * (window.first + window.second);
  const auto first = fit_exponential_rate(track.times, chosen, {window.first, mid});
  const auto second = fit_exponential_rate(track.times, chosen, {mid, window.second});
  const double spread =
      fit.varpi != 0.0 ? std::max(std::abs(first.varpi - fit.varpi), std::abs(second.varpi - fit.varpi)) /
                             std::abs(fit.varpi)
                       : std::numeric_limits<double>::infinity();
  const auto other = fit_exponential_rate(track.times, s.rate_fit.distance == "global" ? localized : global, window);

  // |int Ptilde_j w| <= C (e^{-2 varpi t} + int (w^2 + w_x^2) Phi_j): C is the
  // measured sup of the ratio on the window and must be an O(1) constant.
  // Fitting C on the early part and predicting the rest is reported only.
  const double split = window.first + s.rate_fit.ps_fit_fraction * (window.second - window.first);
  bool ps_ok = true;
  json ps = json::array();
  for (std::size_t j = 0; j < J; ++j) {
    double C = 0.0, C_early = 0.0, worst_late = 0.0;
    std::vector<double> ratio;
    for (std::size_t k = 0; k < track.times.size(); ++k) {
      const double t = track.times[k];
      const double q = ps_lhs[j][k] / (std::exp(-2.0 * fit.varpi * t) + ps_rhs[j][k]);
      ratio.push_back(q);
      if (t < window.first || t > window.second) continue;
      C = std::max(C, q);
      if (t <= split) C_early = std::max(C_early, q);
      else worst_late = std::max(worst_late, q);
    }
    const bool holds = std::isfinite(C) && C <= Thresholds::ps_constant;
    ps_ok = ps_ok && holds;
    ps.push_back({{"j", j + 1},
                  {"C_measured", C},
                  {"holds", holds},
                  {"C_early", C_early},
                  {"worst_ratio_late", worst_late},
                  {"early_constant_predicts_late_info", worst_late <= C_early}});
    r.files.push_back(dir / ("ps_j" + std::to_string(j + 1) + ".dat"));
    emit_plot_data(r.files.back(), {"t", "abs_Pw", "quadratic", "ratio"},
                   {track.times, ps_lhs[j], ps_rhs[j], ratio});
  }
  r.summary["ps_constant_threshold"] = Thresholds::ps_constant;

  r.summary["distance"] = s.rate_fit.distance;
  r.summary["fit"] = fit_json(fit);
  r.summary["half_window_fits"] = {fit_json(first), fit_json(second)};
  r.summary["half_window_spread"] = num(spread);
  r.summary["half_window_stable"] = spread <= Thresholds::window_stability;
  r.summary["other_distance_fit_info"] = fit_json(other);
  r.summary["ps"] = ps;
  r.summary["r_squared_threshold"] = Thresholds::r_squared;
  r.passed = fit.varpi > 0.0 && fit.r_squared > Thresholds::r_squared && ps_ok;

  std::vector<double> logd, line;
  for (std::size_t k = 0; k < track.times.size(); ++k) {
    logd.push_back(std::log(std::max(chosen[k], std::numeric_limits<double>::min())));
    line.push_back(std::log(fit.C) - fit.varpi * track.times[k]);
  }
  r.files.push_back(dir / "rate_fit.dat");
  emit_plot_data(r.files.back(), {"t", "log_distance", "fit_line"}, {track.times, logd, line});
  r.files.push_back(dir / "distances.dat");
  emit_plot_data(r.files.back(), {"t", "global_h2", "localized_h2"}, {track.times, global, localized});
  return r;
}

}  // namespace detail

/// Runs one experiment and writes summary.json, resolved-config.json and the
/// column files under `out/<kind>/`.
inline ExperimentResult run_experiment(const Scenario& s, Kind kind, const fs::path& out) {
  const fs::path dir = out / to_string(kind);
  fs::create_directories(dir);
  ExperimentResult r(kind);
  switch (kind) {
    case Kind::VerifyExact: r = detail::verify_exact(s, dir); break;
    case Kind::Conservation: r = detail::conservation(s, dir); break;
    case Kind::Monotonicity: r = detail::monotonicity(s, dir); break;
    case Kind::Modulate: r = detail::modulate(s, dir); break;
    case Kind::Coercivity: r = detail::coercivity(s, dir); break;
    case Kind::RateFit: r = detail::rate_fit(s, dir); break;
  }
  r.summary["kind"] = to_string(kind);
  r.summary["scenario"] = s.name;
  r.summary["passed"] = r.passed;
  write_json(dir / "summary.json", r.summary);
  write_json(dir / "resolved-config.json", resolved_config(s));
  r.files.push_back(dir / "summary.json");
  r.files.push_back(dir / "resolved-config.json");
  return r;
}

}  // namespace mkdv::lab
