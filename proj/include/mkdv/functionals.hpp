#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "mkdv/error.hpp"
#include "mkdv/grid.hpp"
#include "mkdv/profiles.hpp"

namespace mkdv {

// M[u] = 1/2 int u^2. Note the localized M_j below carries no 1/2.
inline double mass(const Field& u) {
  double s = 0.0;
  for (double v : u.values()) s += v * v;
  return 0.5 * u.grid().spacing() * s;
}

// E[u] = int (u_x^2 / 2 - u^4 / 4)
inline double energy(const Field& u) {
  const auto d = derivative_stack(u, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = d[0][i], vx = d[1][i];
    s += 0.5 * vx * vx - 0.25 * v * v * v * v;
  }
  return u.grid().spacing() * s;
}

// F[u] = int (u_xx^2 / 2 - 5/2 u^2 u_x^2 + u^6 / 4)
inline double second_energy(const Field& u) {
  const auto d = derivative_stack(u, 2);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = d[0][i], vx = d[1][i], vxx = d[2][i];
    const double v2 = v * v;
    s += 0.5 * vxx * vxx - 2.5 * v2 * vx * vx + 0.25 * v2 * v2 * v2;
  }
  return u.grid().spacing() * s;
}

/// Coefficients of a density mass_coef * u^2 + energy_coef * (u_x^2/2 - u^4/4)
/// + second_coef * (u_xx^2/2 - 5/2 u^2 u_x^2 + u^6/4).
struct DensityWeights {
  double mass = 0.0;
  double energy = 0.0;
  double second = 0.0;

  double operator()(double u, double ux, double uxx) const {
    const double u2 = u * u;
    return mass * u2 + energy * (0.5 * ux * ux - 0.25 * u2 * u2) +
           second * (0.5 * uxx * uxx - 2.5 * u2 * ux * ux + 0.25 * u2 * u2 * u2);
  }
  double d_u(double u, double ux) const {
    const double u2 = u * u;
    return 2.0 * mass * u - energy * u2 * u + second * (-5.0 * u * ux * ux + 1.5 * u2 * u2 * u);
  }
  double d_ux(double u, double ux) const { return energy * ux - 5.0 * second * u * u * ux; }
  double d_uxx(double uxx) const { return second * uxx; }
};

// ---------------------------------------------------------------------------
// Cut-off Psi(x) = (2/pi) arctan(exp(-sqrt(sigma) x / 2)) and its derivatives.

inline double cutoff_shape(double sigma, double z) {
  return 2.0 / std::numbers::pi * std::atan(std::exp(-0.5 * std::sqrt(sigma) * z));
}

// Psi'(z) = -(sqrt(sigma) / (2 pi)) sech(sqrt(sigma) z / 2)
inline double cutoff_shape_d1(double sigma, double z) {
  const double rs = std::sqrt(sigma);
  return -rs / (2.0 * std::numbers::pi) * detail::sech(0.5 * rs * z);
}

// Psi''(z) = (sigma / (4 pi)) sech tanh
inline double cutoff_shape_d2(double sigma, double z) {
  const double rs = std::sqrt(sigma);
  const double k = 0.5 * rs * z;
  return sigma / (4.0 * std::numbers::pi) * detail::sech(k) * std::tanh(k);
}

// Psi'''(z) = (sigma^{3/2} / (8 pi)) sech (2 sech^2 - 1)
inline double cutoff_shape_d3(double sigma, double z) {
  const double rs = std::sqrt(sigma);
  const double s = detail::sech(0.5 * rs * z);
  return sigma * rs / (8.0 * std::numbers::pi) * s * (2.0 * s * s - 1.0);
}

/// Psi(x - m t).
inline double cutoff_eval(double sigma, double m, double t, double x) { return cutoff_shape(sigma, x - m * t); }

/// Checks |Phi''| <= (sqrt(sigma)/2) |Phi'| at every node for user-supplied
/// first and second derivatives of a weight.
inline bool cutoff_derivative_inequality(double sigma, const Grid& g, const std::function<double(double)>& d1,
                                         const std::function<double(double)>& d2) {
  const double k = 0.5 * std::sqrt(sigma);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i);
    const double lhs = std::abs(d2(x));
    const double rhs = k * std::abs(d1(x));
    // rounding slack for nodes where tanh has saturated to 1
    if (lhs > rhs * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) return false;
  }
  return true;
}

inline bool cutoff_derivative_inequality(double sigma, const Grid& g) {
  return cutoff_derivative_inequality(
      sigma, g, [sigma](double x) { return cutoff_shape_d1(sigma, x); },
      [sigma](double x) { return cutoff_shape_d2(sigma, x); });
}

/// sigma, speeds m_1..m_{J-1} and the positions of the cut-off centres at
/// t = 0: Phi_j(t, x) = Psi(x - anchor_j - m_j t) for j < J, Phi_J = 1.
class CutoffFamily {
 public:
  /// `velocities` are v_1 < ... < v_J. With `enforce_ordering` the family
  /// requires v_j < m_j < v_{j+1} and m_j > 0.
  CutoffFamily(double sigma, std::vector<double> velocities, std::vector<double> speeds,
               std::vector<double> anchors = {}, bool enforce_ordering = true)
      : sigma_(sigma), velocities_(std::move(velocities)), speeds_(std::move(speeds)), anchors_(std::move(anchors)) {
    if (!(sigma > 0.0)) throw InvalidArgument("cut-off sigma must be positive");
    if (velocities_.empty()) throw InvalidArgument("cut-off family needs at least one velocity");
    if (speeds_.size() + 1 != velocities_.size()) throw InvalidArgument("need J-1 cut-off speeds for J objects");
    if (anchors_.empty()) anchors_.assign(speeds_.size(), 0.0);
    if (anchors_.size() != speeds_.size()) throw InvalidArgument("need one anchor per cut-off speed");
    if (enforce_ordering) {
      for (std::size_t j = 0; j < speeds_.size(); ++j) {
        if (!(velocities_[j] < speeds_[j] && speeds_[j] < velocities_[j + 1] && speeds_[j] > 0.0)) {
          std::ostringstream os;
          os << "cut-off speed m_" << j + 1 << "=" << speeds_[j] << " must lie in (max(0, v_" << j + 1
             << "), v_" << j + 2 << ")";
          throw InvalidArgument(os.str());
        }
      }
    }
    tau0_ = std::numeric_limits<double>::infinity();
    for (double v : velocities_)
      for (double m : speeds_) tau0_ = std::min(tau0_, std::abs(v - m));
  }

  double sigma() const noexcept { return sigma_; }
  std::size_t J() const noexcept { return velocities_.size(); }
  const std::vector<double>& speeds() const noexcept { return speeds_; }
  const std::vector<double>& anchors() const noexcept { return anchors_; }
  const std::vector<double>& velocities() const noexcept { return velocities_; }
  /// Minimal distance between {v_j} and {m_j}; infinite for J = 1.
  double tau0() const noexcept { return tau0_; }

  /// 1-based j; true for j = J.
  bool is_trivial(std::size_t j) const {
    check_index(j);
    return j == J();
  }

  /// Argument z = x - anchor_j - m_j t of Psi.
  double argument(std::size_t j, double t, double x) const {
    return x - anchors_[j - 1] - speeds_[j - 1] * t;
  }

  double weight(std::size_t j, double t, double x) const {
    return is_trivial(j) ? 1.0 : cutoff_shape(sigma_, argument(j, t, x));
  }
  double weight_dx(std::size_t j, double t, double x) const {
    return is_trivial(j) ? 0.0 : cutoff_shape_d1(sigma_, argument(j, t, x));
  }
  double weight_dxx(std::size_t j, double t, double x) const {
    return is_trivial(j) ? 0.0 : cutoff_shape_d2(sigma_, argument(j, t, x));
  }

  std::vector<double> weight_values(std::size_t j, double t, const Grid& g) const {
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight(j, t, g.node(i));
    return w;
  }
  std::vector<double> weight_dx_values(std::size_t j, double t, const Grid& g) const {
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight_dx(j, t, g.node(i));
    return w;
  }

  void check_index(std::size_t j) const {
    if (j < 1 || j > J()) {
      throw InvalidArgument("cut-off index " + std::to_string(j) + " outside 1.." + std::to_string(J()));
    }
  }

 private:
  double sigma_;
  std::vector<double> velocities_;
  std::vector<double> speeds_;
  std::vector<double> anchors_;
  double tau0_;
};

struct LocalizedTriple {
  double Mj = 0.0;
  double Ej = 0.0;
  double Fj = 0.0;
  std::size_t j = 0;
  double t = 0.0;
};

/// M_j = int u^2 Phi_j, E_j and F_j the Phi_j-weighted energy densities.
inline LocalizedTriple localized_triple(const Field& u, const CutoffFamily& fam, std::size_t j, double t) {
  fam.check_index(j);
  const auto d = derivative_stack(u, 2);
  const auto& g = u.grid();
  LocalizedTriple out;
  out.j = j;
  out.t = t;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = fam.weight(j, t, g.node(i));
    const double v = d[0][i], vx = d[1][i], vxx = d[2][i];
    const double v2 = v * v;
    out.Mj += v2 * w;
    out.Ej += (0.5 * vx * vx - 0.25 * v2 * v2) * w;
    out.Fj += (0.5 * vxx * vxx - 2.5 * v2 * vx * vx + 0.25 * v2 * v2 * v2) * w;
  }
  const double h = g.spacing();
  out.Mj *= h;
  out.Ej *= h;
  out.Fj *= h;
  return out;
}

/// int density(u) Phi_j for an arbitrary DensityWeights combination.
inline double localized_density(const Field& u, const DensityWeights& rho, const CutoffFamily& fam, std::size_t j,
                                double t) {
  fam.check_index(j);
  const auto d = derivative_stack(u, 2);
  const auto& g = u.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += rho(d[0][i], d[1][i], d[2][i]) * fam.weight(j, t, g.node(i));
  return g.spacing() * s;
}

}  // namespace mkdv
