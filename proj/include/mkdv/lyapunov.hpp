#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mkdv/error.hpp"
#include "mkdv/evolution.hpp"
#include "mkdv/functionals.hpp"
#include "mkdv/grid.hpp"
#include "mkdv/profiles.hpp"

namespace mkdv {

/// How the localized mass enters the Lyapunov combinations. `AsLocalized`
/// uses M_j = int u^2 Phi_j as defined; `Halved` uses (1/2) int u^2 Phi_j,
/// the normalisation under which H_J is critical at the profile.
enum class MassConvention { AsLocalized, Halved };

inline double mass_factor(MassConvention c) { return c == MassConvention::Halved ? 0.5 : 1.0; }

struct LyapunovParams {
  double nu1_min;
  double nu1;
  double nu;
  double nu_prime;
  double nu2;
  double nu3;
  std::vector<ShapePair> shapes;
  CutoffFamily fam;
  /// Admissible open interval for m1 (after the quadratic constraint).
  double m1_low = 0.0;
  double m1_high = 0.0;
  double sigma_requested;
  /// Slack weight of the omega-corrected functionals.
  double omega;
  bool outside_hypothesis = false;

  const ShapePair& shape(std::size_t j) const { return shapes.at(j - 1); }
  double sigma() const noexcept { return fam.sigma(); }
  /// m_j for j < J; 0 for j = J (no cut-off).
  double speed(std::size_t j) const { return j < fam.J() ? fam.speeds()[j - 1] : 0.0; }
};

struct SelectionOptions {
  /// Accept v2 <= 0 (outside the admissible range); m1 is then forced to `forced_m1`.
  bool allow_outside_hypothesis = false;
  double forced_m1 = 0.1;
  /// Cut-off centres at t = 0; empty means all at the origin.
  std::vector<double> anchors;
  /// Lower sigma when the Step-3 coefficients would be negative at the
  /// requested value.
  bool shrink_sigma = true;
};

/// Largest sigma for which every coefficient of the F_j growth estimate stays
/// non-negative; +inf when no shape has b^2 < a^2.
inline double sigma_ceiling(const std::vector<ShapePair>& shapes, std::size_t J, double nu1, double nu2,
                            double nu3) {
  double ceiling = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const auto [a, b] = shapes[j];
    const double diff = a * a - b * b;  // > 0 is the delicate case
    if (diff <= 0.0) continue;
    const double sum = a * a + b * b;
    const double k2 = 2.0 * std::pow(3.0, 0.25) * std::pow(1.0 - nu1, 0.25) * std::pow(nu2, 0.75) * std::pow(sum, 1.5);
    const double root = k2 / (3.0 * diff);
    ceiling = std::min(ceiling, root * root);
    ceiling = std::min(ceiling, 2.0 * nu3 * sum * sum / diff);
  }
  return ceiling;
}

/// Chooses nu1, nu, nu', nu2, nu3, the cut-off speeds and sigma.
inline LyapunovParams select_parameters(const OrderedConfiguration& cfg, double sigma,
                                        const SelectionOptions& opt = {}) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  const std::size_t J = cfg.size();
  const auto& v = cfg.velocities();
  const auto v2 = cfg.positive_v2();
  const bool outside = v2.has_value() && !*v2;
  if (outside && !opt.allow_outside_hypothesis) {
    std::ostringstream os;
    os << "v2 = " << v[1] << " <= 0: configuration outside the v2 > 0 regime";
    throw HypothesisViolated(os.str());
  }

  std::vector<ShapePair> shapes;
  for (const auto& o : cfg.objects()) shapes.push_back(shape_pair(o));
  const auto [a1, b1] = shapes[0];
  const double diff1 = b1 * b1 - a1 * a1;
  const double sum1 = a1 * a1 + b1 * b1;

  const double nu1_min = std::max(0.0, -diff1 / sum1);
  const double nu1 = 0.5 * (1.0 + nu1_min);
  const double nu = nu1 + 2.0 / 3.0 * (1.0 - nu1);
  const double nu_prime = nu1 + (1.0 - nu1) / 3.0;
  const double nu2 = 0.5 * (nu_prime - nu1);
  const double nu3 = nu2;

  std::vector<double> m;
  double lo = 0.0, hi = 0.0;
  if (J >= 2) {
    lo = std::max(0.0, v[0]);
    hi = v[1];
    if (diff1 < 0.0) hi = std::min(hi, 0.5 * (nu1 - 1.0) * sum1 * sum1 / diff1);
    double m1;
    if (outside) {
      m1 = opt.forced_m1;
    } else {
      if (!(hi > lo)) {
        std::ostringstream os;
        os << "no m1 in (" << lo << ", " << hi << ") satisfies the quadratic constraint";
        throw EmptyAdmissibleInterval(os.str());
      }
      m1 = 0.5 * (lo + hi);
    }
    m.push_back(m1);
    for (std::size_t j = 1; j + 1 < J; ++j) m.push_back(0.5 * (v[j] + v[j + 1]));
  }

  double sigma_eff = sigma;
  if (opt.shrink_sigma) {
    const double ceiling = sigma_ceiling(shapes, J, nu1, nu2, nu3);
    if (sigma >= ceiling) sigma_eff = 0.5 * ceiling;
  }

  double omega = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double s = shapes[j].a * shapes[j].a + shapes[j].b * shapes[j].b;
    omega = std::min(omega, 1e-3 * s * s * m[j]);
  }
  if (J == 1) omega = 1e-3 * sum1 * sum1;
  if (!(omega > 0.0)) omega = 1e-3 * sum1 * sum1;

  return LyapunovParams{nu1_min,
                        nu1,
                        nu,
                        nu_prime,
                        nu2,
                        nu3,
                        std::move(shapes),
                        CutoffFamily(sigma_eff, v, m, opt.anchors, !outside),
                        lo,
                        hi,
                        sigma,
                        omega,
                        outside};
}

/// Re-derives every invariant of a parameter set; returns the violated ones.
inline std::vector<std::string> verify_parameters(const LyapunovParams& p) {
  std::vector<std::string> bad;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  const double tol = 1e-14;
  need(p.nu1 > 0.0 && p.nu1 < 1.0, "0 < nu1 < 1");
  need(p.nu > 0.0 && p.nu < 1.0, "0 < nu < 1");
  need(p.nu_prime > 0.0 && p.nu_prime < 1.0, "0 < nu' < 1");
  need(p.nu2 > 0.0 && p.nu3 > 0.0, "nu2, nu3 > 0");
  need(std::abs(p.nu - (p.nu1 + 2.0 / 3.0 * (1.0 - p.nu1))) < tol, "nu = nu1 + 2/3 (1 - nu1)");
  need(std::abs(p.nu_prime - (p.nu1 + (1.0 - p.nu1) / 3.0)) < tol, "nu' = nu1 + (1 - nu1)/3");
  need(std::abs(p.nu1 + p.nu2 + p.nu3 - p.nu_prime) < tol, "nu1 + nu2 + nu3 = nu'");
  const auto [a1, b1] = p.shapes.front();
  const double d1 = b1 * b1 - a1 * a1, s1 = a1 * a1 + b1 * b1;
  need(d1 + p.nu1 * s1 > 0.0, "(b1^2 - a1^2) + nu1 (a1^2 + b1^2) > 0");
  const auto& v = p.fam.velocities();
  const auto& m = p.fam.speeds();
  if (!m.empty()) {
    need(std::max(0.0, v[0]) < m[0] && m[0] < v[1], "max(0, v1) < m1 < v2");
    need(m[0] * d1 > 0.5 * (p.nu1 - 1.0) * s1 * s1, "m1 (b1^2 - a1^2) > (nu1 - 1)(a1^2 + b1^2)^2 / 2");
    for (std::size_t j = 1; j < m.size(); ++j) {
      need(std::abs(m[j] - 0.5 * (v[j] + v[j + 1])) < 1e-14 * (1.0 + std::abs(m[j])),
           "m_" + std::to_string(j + 1) + " = (v_j + v_{j+1})/2");
    }
  }
  need(p.fam.tau0() > 0.0, "tau0 > 0");
  return bad;
}

namespace detail {

inline double lyapunov_combination(const LocalizedTriple& tr, const ShapePair& s, double mass_coef,
                                   MassConvention conv) {
  const double diff = s.b * s.b - s.a * s.a;
  const double sum = s.a * s.a + s.b * s.b;
  return tr.Fj + 2.0 * diff * tr.Ej + mass_coef * sum * sum * mass_factor(conv) * tr.Mj;
}

}  // namespace detail

/// H_j = F_j + 2 (b_j^2 - a_j^2) E_j + (a_j^2 + b_j^2)^2 M_j.
inline double lyapunov_H(const Field& u, std::size_t j, const LyapunovParams& p, double t,
                         MassConvention conv = MassConvention::AsLocalized) {
  return detail::lyapunov_combination(localized_triple(u, p.fam, j, t), p.shape(j), 1.0, conv);
}

/// The weakened functional: mass coefficient scaled by nu < 1.
inline double weakened_F(const Field& u, std::size_t j, const LyapunovParams& p, double t,
                         MassConvention conv = MassConvention::AsLocalized) {
  return detail::lyapunov_combination(localized_triple(u, p.fam, j, t), p.shape(j), p.nu, conv);
}

/// Same combination with an arbitrary mass coefficient nu.
inline double weakened_F(const Field& u, std::size_t j, const LyapunovParams& p, double t, double nu,
                         MassConvention conv = MassConvention::AsLocalized) {
  return detail::lyapunov_combination(localized_triple(u, p.fam, j, t), p.shape(j), nu, conv);
}

/// Quadratic part of H_j around a profile P:
///   int [w_xx^2/2 - 5/2 w_x^2 P^2 + 5/2 w^2 P_x^2 + 5 w^2 P P_xx + 15/4 w^2 P^4] Phi
///   + (b^2 - a^2) int [w_x^2 - 3 w^2 P^2] Phi + (a^2 + b^2)^2 / 2 int w^2 Phi.
inline double quadratic_form_H(const Field& w, std::span<const double> P, std::span<const double> Px,
                               std::span<const double> Pxx, std::span<const double> weight, const ShapePair& s) {
  const auto d = derivative_stack(w, 2);
  const double diff = s.b * s.b - s.a * s.a;
  const double sum = s.a * s.a + s.b * s.b;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double w0 = d[0][i], w1 = d[1][i], w2 = d[2][i];
    const double p2 = P[i] * P[i];
    const double local = 0.5 * w2 * w2 - 2.5 * w1 * w1 * p2 + 2.5 * w0 * w0 * Px[i] * Px[i] +
                         5.0 * w0 * w0 * P[i] * Pxx[i] + 3.75 * w0 * w0 * p2 * p2 +
                         diff * (w1 * w1 - 3.0 * w0 * w0 * p2) + 0.5 * sum * sum * w0 * w0;
    acc += local * weight[i];
  }
  return w.grid().spacing() * acc;
}

/// Convenience form: derivatives of the profile taken spectrally and the
/// weight Phi_j(t, .) from the parameter set.
inline double quadratic_form_H(const Field& w, const Field& profile, std::size_t j, const LyapunovParams& p,
                               double t) {
  const auto d = derivative_stack(profile, 2);
  const auto weight = p.fam.weight_values(j, t, w.grid());
  return quadratic_form_H(w, d[0], d[1], d[2], weight, p.shape(j));
}

struct CoefficientReport {
  std::size_t j = 0;
  double sigma = 0.0;
  /// Left-hand sides minus right-hand sides of the four inequalities.
  std::array<double, 4> margin{};
  std::array<bool, 4> holds{};
  bool all() const { return holds[0] && holds[1] && holds[2] && holds[3]; }
};

/// The four scalar conditions making every coefficient of the F_j growth
/// estimate non-negative:
///   3(b^2-a^2) + 3 nu1 (a^2+b^2) >= 0
///   3(b^2-a^2) sqrt(sigma) + 2 3^{1/4} (1-nu1)^{1/4} nu2^{3/4} (a^2+b^2)^{3/2} >= 0
///   3(b^2-a^2) sigma/4 + 3/2 nu3 (a^2+b^2)^2 >= 0
///   3/2 nu (a^2+b^2)^2 + m_j (b^2-a^2) > 3/2 nu' (a^2+b^2)^2
inline CoefficientReport coefficient_positivity(const LyapunovParams& p, std::size_t j, double sigma) {
  p.fam.check_index(j);
  const auto [a, b] = p.shape(j);
  const double diff = b * b - a * a;
  const double sum = a * a + b * b;
  const double m = p.speed(j);
  CoefficientReport r;
  r.j = j;
  r.sigma = sigma;
  r.margin[0] = 3.0 * diff + 3.0 * p.nu1 * sum;
  r.margin[1] = 3.0 * diff * std::sqrt(sigma) +
                2.0 * std::pow(3.0, 0.25) * std::pow(1.0 - p.nu1, 0.25) * std::pow(p.nu2, 0.75) * std::pow(sum, 1.5);
  r.margin[2] = 3.0 * diff * sigma / 4.0 + 1.5 * p.nu3 * sum * sum;
  r.margin[3] = 1.5 * p.nu * sum * sum + m * diff - 1.5 * p.nu_prime * sum * sum;
  r.holds = {r.margin[0] >= 0.0, r.margin[1] >= 0.0, r.margin[2] >= 0.0, r.margin[3] > 0.0};
  return r;
}

struct InterpolationReport {
  double X = 0.0;        ///< (int u_xx^2 |Phi_x|)^{1/2}
  double A = 0.0;        ///< (int u_x^2 |Phi_x| int u_xxx^2 |Phi_x|)^{1/2}
  double epsilon = 0.0;  ///< sqrt(sigma)/2 (int u_x^2 |Phi_x|)^{1/2}
  double ratio = 0.0;    ///< X^2 / (A + eps X), 0 when both vanish
  bool quadratic_holds = false;  ///< X^2 <= A + eps X
  bool root_holds = false;       ///< X <= eps + sqrt(A)
};

inline InterpolationReport interpolation_inequality_check(const Field& u, const CutoffFamily& fam, std::size_t j,
                                                          double t = 0.0) {
  fam.check_index(j);
  const auto d = derivative_stack(u, 3);
  const auto& g = u.grid();
  double i1 = 0.0, i2 = 0.0, i3 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double wx = std::abs(fam.weight_dx(j, t, g.node(i)));
    i1 += d[1][i] * d[1][i] * wx;
    i2 += d[2][i] * d[2][i] * wx;
    i3 += d[3][i] * d[3][i] * wx;
  }
  const double h = g.spacing();
  i1 *= h;
  i2 *= h;
  i3 *= h;
  InterpolationReport r;
  r.X = std::sqrt(i2);
  r.A = std::sqrt(i1 * i3);
  r.epsilon = 0.5 * std::sqrt(fam.sigma()) * std::sqrt(i1);
  const double rhs = r.A + r.epsilon * r.X;
  r.ratio = rhs > 0.0 ? i2 / rhs : 0.0;
  // relative round-off allowance of the discrete integrals
  const double tol = 1e-12 * (rhs + i2) + std::numeric_limits<double>::min();
  r.quadratic_holds = i2 <= rhs + tol;
  r.root_holds = r.X <= r.epsilon + std::sqrt(r.A) + tol;
  return r;
}

// ---------------------------------------------------------------------------
// Almost-monotonicity along trajectories.

enum class MonotoneQuantity { Mass, EnergyPlusMass, SecondEnergyPlusMass, WeakenedF };

inline std::string to_string(MonotoneQuantity q) {
  switch (q) {
    case MonotoneQuantity::Mass: return "Mj";
    case MonotoneQuantity::EnergyPlusMass: return "Ej+omegaMj";
    case MonotoneQuantity::SecondEnergyPlusMass: return "Fj+omegaMj";
    case MonotoneQuantity::WeakenedF: return "weakened_F";
  }
  return "?";
}

inline DensityWeights monotone_density(MonotoneQuantity q, std::size_t j, const LyapunovParams& p, double omega,
                                       MassConvention conv = MassConvention::AsLocalized) {
  const double mf = mass_factor(conv);
  switch (q) {
    case MonotoneQuantity::Mass: return {mf, 0.0, 0.0};
    case MonotoneQuantity::EnergyPlusMass: return {omega * mf, 1.0, 0.0};
    case MonotoneQuantity::SecondEnergyPlusMass: return {omega * mf, 0.0, 1.0};
    case MonotoneQuantity::WeakenedF: {
      const auto [a, b] = p.shape(j);
      const double sum = a * a + b * b;
      return {p.nu * sum * sum * mf, 2.0 * (b * b - a * a), 1.0};
    }
  }
  return {};
}

struct MonotonicityReport {
  std::size_t j = 0;
  MonotoneQuantity which = MonotoneQuantity::Mass;
  std::vector<double> times;
  std::vector<double> values;
  /// Largest decrease value(t1) - value(t2) over t1 < t2 (0 if none).
  double worst_drop = 0.0;
  /// Slack C exp(-2 varpi t1) + budget at the t1 of the worst drop.
  double slack_bound = 0.0;
  /// Largest (drop - slack(t1)); <= 0 means every decrease is covered.
  double worst_excess = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  double C = 0.0;
  double varpi = 0.0;
  double solver_budget = 0.0;

  bool passed() const { return violations == 0; }
};

/// Evaluates the selected functional along the trajectory and compares every
/// decrease with C exp(-2 varpi t1) + solver_budget.
inline MonotonicityReport monotonicity_report(const Trajectory& traj, std::size_t j, const LyapunovParams& p,
                                              MonotoneQuantity which, double omega, double varpi, double C,
                                              double solver_budget = 1e-5,
                                              MassConvention conv = MassConvention::AsLocalized) {
  p.fam.check_index(j);
  MonotonicityReport r;
  r.j = j;
  r.which = which;
  r.C = C;
  r.varpi = varpi;
  r.solver_budget = solver_budget;
  r.times = traj.times;
  const auto rho = monotone_density(which, j, p, omega, conv);
  r.values.reserve(traj.states.size());
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    r.values.push_back(localized_density(traj.states[k], rho, p.fam, j, traj.times[k]));
  }
  const std::size_t n = r.values.size();
  std::vector<double> suffix_min(n + 1, std::numeric_limits<double>::infinity());
  for (std::size_t k = n; k-- > 0;) suffix_min[k] = std::min(suffix_min[k + 1], r.values[k]);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double drop = r.values[k] - suffix_min[k + 1];
    if (drop <= 0.0) continue;
    const double slack = C * std::exp(-2.0 * varpi * r.times[k]) + solver_budget;
    if (drop > r.worst_drop) {
      r.worst_drop = drop;
      r.slack_bound = slack;
    }
    r.worst_excess = std::max(r.worst_excess, drop - slack);
    if (drop > slack) ++r.violations;
  }
  if (r.worst_drop == 0.0) r.slack_bound = C * std::exp(-2.0 * varpi * (n ? r.times.front() : 0.0)) + solver_budget;
  return r;
}

struct SlackCalibration {
  double C = 0.0;
  double varpi = 0.0;
};

namespace detail {

// int_{t1}^inf exp(-k |a + b s|) ds for b != 0.
inline double exp_distance_integral(double a, double b, double k, double t1) {
  const double start = a + b * t1;
  const double ab = std::abs(b);
  if (start * b >= 0.0) return std::exp(-k * std::abs(start)) / (k * ab);
  return (1.0 - std::exp(-k * std::abs(start))) / (k * ab) + 1.0 / (k * ab);
}

// Flux g of a density with d/dt rho + d/dx g = 0 along the exact flow of the
// profile sampled in `u`; returns (rho, g).
inline std::pair<std::vector<double>, std::vector<double>> density_and_flux(const Field& u, const DensityWeights& rho) {
  const auto& g = u.grid();
  const std::size_t n = u.size();
  const auto d = derivative_stack(u, 2);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = d[2][i] + d[0][i] * d[0][i] * d[0][i];
  // u_t = -(u_xx + u^3)_x and its first two x-derivatives
  const auto qspec = forward_transform(q);
  const auto ut = backward_transform(differentiate_spectrum(qspec, g, 1), n);
  const auto utx = backward_transform(differentiate_spectrum(qspec, g, 2), n);
  const auto utxx = backward_transform(differentiate_spectrum(qspec, g, 3), n);
  std::vector<double> dens(n), drho(n);
  for (std::size_t i = 0; i < n; ++i) {
    dens[i] = rho(d[0][i], d[1][i], d[2][i]);
    drho[i] = -(rho.d_u(d[0][i], d[1][i]) * ut[i] + rho.d_ux(d[0][i], d[1][i]) * utx[i] + rho.d_uxx(d[2][i]) * utxx[i]);
  }
  // g = -antiderivative(drho); drop the mean mode
  auto spec = forward_transform(drho);
  spec[0] = 0.0;
  spec.back() = 0.0;
  for (std::size_t m = 1; m + 1 < spec.size(); ++m) spec[m] = -spec[m] / Complex(0.0, g.wavenumber(m));
  return {std::move(dens), backward_transform(std::move(spec), n)};
}

// The spectral antiderivative has zero mean; the physical flux vanishes away
// from the object, so shift it to zero at the node opposite `xc`.
inline void anchor_flux(std::vector<double>& flux, const Grid& g, double xc) {
  const double L = g.half_length();
  double far = xc + L;
  if (far >= L) far -= 2.0 * L;
  const auto i = static_cast<std::size_t>(std::lround((far + L) / g.spacing())) % g.size();
  const double c = flux[i];
  for (double& v : flux) v -= c;
}

// |x - xc| on the periodic box.
inline double periodic_distance(double x, double xc, double L) {
  double d = std::fmod(std::abs(x - xc), 2.0 * L);
  return std::min(d, 2.0 * L - d);
}

}  // namespace detail

/// Slack constants from the profiles and their initial distance to the
/// cut-off: each object's contribution to d/dt int rho Phi_j is bounded by
/// int (|g| + m_j |rho|) |Phi_jx| with |Psi'(z)| <= (sqrt(sigma)/pi) e^{-sqrt(sigma)|z|/2},
/// integrated from t1 to infinity along the straight-line motion.
/// varpi = min(sqrt(sigma), min b) tau0 / 4.
inline SlackCalibration calibrate_slack(const OrderedConfiguration& cfg, const LyapunovParams& p, std::size_t j,
                                        const DensityWeights& rho, const Grid& g,
                                        const std::vector<double>& times) {
  p.fam.check_index(j);
  SlackCalibration out;
  double bmin = std::numeric_limits<double>::infinity();
  for (const auto& s : p.shapes) bmin = std::min(bmin, s.b);
  const double tau0 = p.fam.tau0();
  const double rs = std::sqrt(p.sigma());
  out.varpi = std::isfinite(tau0) ? std::min(rs, bmin) * tau0 / 4.0 : 0.0;
  if (p.fam.is_trivial(j) || times.empty()) return out;

  const double k = 0.5 * rs;
  const double m = p.speed(j);
  const double anchor = p.fam.anchors()[j - 1];
  // sup over a few sample times of int (|g| + m|rho|) e^{k |x - x_i(s)|}
  const std::size_t samples = std::min<std::size_t>(times.size(), 17);
  std::vector<double> B(cfg.size(), 0.0);
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const auto& o = cfg[i];
    for (std::size_t q = 0; q < samples; ++q) {
      const std::size_t idx = samples == 1 ? 0 : q * (times.size() - 1) / (samples - 1);
      const double s = times[idx];
      const Field Pi = sample(o, s, g);
      auto [dens, flux] = detail::density_and_flux(Pi, rho);
      const double xc = center(o, s);
      detail::anchor_flux(flux, g, xc);
      double acc = 0.0;
      for (std::size_t n = 0; n < g.size(); ++n) {
        acc += (std::abs(flux[n]) + m * std::abs(dens[n])) *
               std::exp(k * detail::periodic_distance(g.node(n), xc, g.half_length()));
      }
      B[i] = std::max(B[i], rs / std::numbers::pi * g.spacing() * acc);
    }
  }
  for (double t1 : times) {
    double total = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      const double a = center(cfg[i], 0.0) - anchor;
      const double b = velocity(cfg[i]) - m;
      total += B[i] * detail::exp_distance_integral(a, b, k, t1);
    }
    out.C = std::max(out.C, total * std::exp(2.0 * out.varpi * t1));
  }
  return out;
}

}  // namespace mkdv
