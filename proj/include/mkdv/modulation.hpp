#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "mkdv/error.hpp"
#include "mkdv/evolution.hpp"
#include "mkdv/grid.hpp"
#include "mkdv/profiles.hpp"

namespace mkdv {

/// Translation offsets, the residual w = u - P~(y) and the orthogonality
/// residuals <d_i(y), w>. Offsets are concatenated per object in velocity
/// order (one per soliton, two per breather).
struct ModulationState {
  double t = 0.0;
  std::vector<double> offsets;
  std::vector<bool> is_breather;  // per object
  Field w;
  std::vector<double> ortho_residuals;
  bool converged = false;
  int iterations = 0;
  double w_h2 = 0.0;

  /// Soliton offsets y_{0,l}.
  std::vector<double> y0() const { return collect(false, 0); }
  /// Breather offsets y_{1,k} and y_{2,k}.
  std::vector<double> y1() const { return collect(true, 0); }
  std::vector<double> y2() const { return collect(true, 1); }

 private:
  std::vector<double> collect(bool breather, std::size_t slot) const {
    std::vector<double> out;
    std::size_t k = 0;
    for (bool b : is_breather) {
      if (b == breather) out.push_back(offsets[k + slot]);
      k += b ? 2 : 1;
    }
    return out;
  }
};

struct ModulationOptions {
  int max_iters = 50;
  double tolerance = 1e-10;
  /// Largest admissible ||w||_{H^2} at the root; default 0.5 min_j b_j.
  std::optional<double> basin_radius;
};

inline double default_basin_radius(const OrderedConfiguration& cfg) {
  double b = std::numeric_limits<double>::infinity();
  for (const auto& o : cfg.objects()) b = std::min(b, shape_pair(o).b);
  return 0.5 * b;
}

/// d/dy of the shifted profile: Q'(. - x0 + y0 - ct) for a soliton, the
/// x1 and x2 partials of the breather.
inline std::vector<Field> modulation_directions(const WaveObject& o, std::span<const double> y, double t,
                                                const Grid& g) {
  const WaveObject s = shifted(o, y);
  const std::size_t r = translation_count(o);
  std::vector<std::vector<double>> v(r, std::vector<double>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto grad = translation_gradient(s, t, g.node(i));
    for (std::size_t k = 0; k < r; ++k) v[k][i] = grad[k];
  }
  std::vector<Field> out;
  for (auto& d : v) out.emplace_back(g, std::move(d));
  return out;
}

namespace detail {

struct ModulationSystem {
  std::vector<std::vector<double>> dirs;    // d_i
  std::vector<std::vector<double>> hess;    // packed per object (11, 12, 22) or (11)
  std::vector<std::size_t> owner;           // object of each offset
  std::vector<std::size_t> slot;            // 0 or 1 within the object
  std::vector<double> w;
};

inline ModulationSystem modulation_system(const Field& u, const OrderedConfiguration& cfg, double t,
                                          std::span<const double> y) {
  const auto& g = u.grid();
  const std::size_t n = g.size();
  const std::size_t r = cfg.translation_count();
  ModulationSystem s;
  s.dirs.assign(r, std::vector<double>(n));
  s.hess.assign(r * r, {});
  s.w = u.data();
  std::size_t k = 0;
  for (std::size_t obj = 0; obj < cfg.size(); ++obj) {
    const std::size_t m = translation_count(cfg[obj]);
    const WaveObject o = shifted(cfg[obj], y.subspan(k, m));
    for (std::size_t a = 0; a < m; ++a) {
      s.owner.push_back(obj);
      s.slot.push_back(a);
    }
    std::vector<std::vector<double>> h(m == 1 ? 1 : 3, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double x = g.node(i);
      s.w[i] -= evaluate(o, t, x);
      const auto grad = translation_gradient(o, t, x);
      const auto hs = translation_hessian(o, t, x);
      for (std::size_t a = 0; a < m; ++a) s.dirs[k + a][i] = grad[a];
      for (std::size_t c = 0; c < h.size(); ++c) h[c][i] = hs[c];
    }
    // second derivatives of the profile, stored as d(d_a)/dy_b
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) s.hess[(k + a) * r + (k + b)] = h[m == 1 ? 0 : a + b];
    k += m;
  }
  return s;
}

}  // namespace detail

/// Newton iteration for <d_i(y), u - P~(y)> = 0, started at `guess`
/// (zero offsets when empty).
inline ModulationState fit_translations(const Field& u, const OrderedConfiguration& cfg, double t,
                                        std::vector<double> guess = {}, const ModulationOptions& opt = {}) {
  const std::size_t r = cfg.translation_count();
  if (guess.empty()) guess.assign(r, 0.0);
  if (guess.size() != r) throw InvalidArgument("offset guess has the wrong length");
  const auto& g = u.grid();
  const double basin = opt.basin_radius.value_or(default_basin_radius(cfg));

  ModulationState st{t, std::move(guess), {}, Field(g), {}, false, 0, 0.0};
  for (const auto& o : cfg.objects()) st.is_breather.push_back(std::holds_alternative<Breather>(o));

  auto outside_basin = [&](const std::vector<double>& w, const char* why) {
    std::ostringstream os;
    os << "modulation failed at t=" << t << ": " << why << " (||w||_H2 = " << h2_norm(Field(g, w))
       << ", basin radius " << basin << ")";
    return NoConvergence(os.str(), t);
  };

  for (int it = 0;; ++it) {
    auto sys = detail::modulation_system(u, cfg, t, st.offsets);
    Eigen::VectorXd G(r);
    for (std::size_t i = 0; i < r; ++i) G(i) = inner(sys.dirs[i], sys.w, g);
    if (G.cwiseAbs().maxCoeff() < opt.tolerance) {
      st.w = Field(g, std::move(sys.w));
      st.w_h2 = h2_norm(st.w);
      st.ortho_residuals.assign(G.data(), G.data() + r);
      st.iterations = it;
      if (!(st.w_h2 <= basin)) throw outside_basin(st.w.data(), "root lies outside the basin");
      st.converged = true;
      return st;
    }
    if (it == opt.max_iters) throw outside_basin(sys.w, "Newton iteration did not converge");

    // J_ik = <d(d_i)/dy_k, w> - <d_i, d_k>; cross-object blocks keep only the Gram term
    Eigen::MatrixXd J(r, r);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t k = 0; k < r; ++k) {
        const auto& h = sys.hess[i * r + k];
        J(i, k) = (h.empty() ? 0.0 : inner(h, sys.w, g)) - inner(sys.dirs[i], sys.dirs[k], g);
      }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto sv = svd.singularValues();
    if (!(sv(r - 1) > 1e-12 * sv(0))) {
      if (!(h2_norm(Field(g, sys.w)) <= basin)) throw outside_basin(sys.w, "Jacobian degenerated far from the family");
      throw SingularJacobian("modulation Jacobian is singular at t=" + std::to_string(t));
    }
    Eigen::VectorXd step = J.fullPivLu().solve(G);
    // keep each step inside a fraction of the narrowest core
    const double cap = basin;
    if (step.cwiseAbs().maxCoeff() > cap) step *= cap / step.cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < r; ++i) st.offsets[i] -= step(i);
  }
}

struct ModulationTrack {
  std::vector<ModulationState> states;
  std::vector<double> times;
  /// ||u - P(t)||_{H^2} without modulation.
  std::vector<double> raw_distance;
  /// Finite-difference |y'| (sup over components), one per interval.
  std::vector<double> rates;
  /// sup_t max_i |y_i| / ||u - P(t)||_{H^2} over snapshots with nonzero distance.
  double offset_ratio = 0.0;
};

/// Fits every snapshot, warm-started from the previous one.
inline ModulationTrack track_modulation(const Trajectory& traj, const OrderedConfiguration& cfg,
                                        const ModulationOptions& opt = {}) {
  ModulationTrack out;
  std::vector<double> guess;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double t = traj.times[k];
    const Field& u = traj.states[k];
    auto st = fit_translations(u, cfg, t, guess, opt);
    guess = st.offsets;
    const double raw = h2_norm(u - profile_sum(cfg, t, u.grid()));
    double ymax = 0.0;
    for (double y : st.offsets) ymax = std::max(ymax, std::abs(y));
    if (raw > 0.0) out.offset_ratio = std::max(out.offset_ratio, ymax / raw);
    if (!out.states.empty()) {
      const double dt = t - out.times.back();
      double rate = 0.0;
      for (std::size_t i = 0; i < st.offsets.size(); ++i)
        rate = std::max(rate, std::abs(st.offsets[i] - out.states.back().offsets[i]) / dt);
      out.rates.push_back(rate);
    }
    out.raw_distance.push_back(raw);
    out.times.push_back(t);
    out.states.push_back(std::move(st));
  }
  return out;
}

}  // namespace mkdv
