#pragma once

#include <cmath>
#include <complex>
#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mkdv/error.hpp"
#include "mkdv/fft.hpp"
#include "mkdv/grid.hpp"
#include "mkdv/profiles.hpp"

namespace mkdv {

/// Time-stepping scheme. Both propagate the dispersive term exactly in
/// Fourier space and use four nonlinear evaluations per step.
enum class Scheme {
  /// Exponential time differencing RK4 (Cox-Matthews stages).
  ETDRK4,
  /// Integrating-factor RK4: classical RK4 on e^{-Lt} u.
  IFRK4,
};

struct EvolutionControls {
  double dt = 1e-3;
  double t_end = 1.0;
  bool dealias = true;
  int save_every = 1;
  /// Physical time of the initial state.
  double t_start = 0.0;
  Scheme scheme = Scheme::ETDRK4;
};

struct TrajectoryMetadata {
  EvolutionControls controls;
  std::string description;
  /// dt bound 2 / (max|u0|^2 k_max) checked at the start of the run.
  double stability_bound = 0.0;
  long steps = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;
  TrajectoryMetadata metadata;
};

/// Largest dt accepted for initial data u: 2 / (max|u|^2 k_max).
inline double stability_bound(const Field& u) {
  const double amp = u.max_abs();
  if (amp == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 / (amp * amp * u.grid().max_wavenumber());
}

/// Fourth-order exponential integrator for u_t + (u_xx + u^3)_x = 0 in
/// Fourier space. The dispersive term is propagated exactly; the cubic term is
/// dealiased by zero-padding to 2n. Owns its transform workspaces; one instance per run.
class Integrator {
 public:
  using Spectrum = detail::ComplexVector;

  Integrator(const Grid& grid, double dt, bool dealias = true, Scheme scheme = Scheme::ETDRK4)
      : grid_(grid),
        dt_(dt),
        dealias_(dealias),
        scheme_(scheme),
        modes_(grid.size() / 2 + 1),
        fine_size_(dealias ? 2 * grid.size() : grid.size()),
        fft_(detail::RealFft::of_size(grid.size())),
        fine_fft_(detail::RealFft::of_size(fine_size_)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
    for (auto* v : {&half_, &full_, &ik_, &q_, &f1_, &f2_, &f3_}) v->resize(modes_);
    for (std::size_t m = 0; m < modes_; ++m) {
      const double k = grid.wavenumber(m);
      const detail::Complex lin(0.0, k * k * k);
      half_[m] = std::exp(lin * (0.5 * dt));
      full_[m] = std::exp(lin * dt);
      ik_[m] = detail::Complex(0.0, k);
      const auto z = lin * dt;
      const auto p1 = phi(1, z), p2 = phi(2, z), p3 = phi(3, z);
      q_[m] = 0.5 * dt * phi(1, 0.5 * z);
      f1_[m] = dt * (p1 - 3.0 * p2 + 4.0 * p3);
      f2_[m] = dt * (p2 - 2.0 * p3);
      f3_[m] = dt * (-p2 + 4.0 * p3);
    }
    ik_[modes_ - 1] = 0.0;  // Nyquist carries no odd derivative
    fine_spec_.resize(fine_size_ / 2 + 1);
    fine_phys_.resize(fine_size_);
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &tmp_, &a_}) v->resize(modes_);
  }

  double dt() const noexcept { return dt_; }
  const Grid& grid() const noexcept { return grid_; }
  bool dealias() const noexcept { return dealias_; }
  Scheme scheme() const noexcept { return scheme_; }

  Spectrum to_spectrum(const Field& u) const {
    Spectrum s(modes_);
    fft_.forward(u.values(), s);
    s[modes_ - 1] = 0.0;
    return s;
  }

  Field to_field(const Spectrum& s) const { return Field(grid_, detail::backward_transform(s, grid_.size())); }

  /// Advances the spectrum by one step; `time` only labels a BlowUp.
  void advance(Spectrum& u, double time = 0.0) {
    if (scheme_ == Scheme::ETDRK4) {
      advance_etd(u, time);
      return;
    }
    nonlinear(u, k1_, time);
    for (std::size_t m = 0; m < modes_; ++m) tmp_[m] = half_[m] * (u[m] + 0.5 * dt_ * k1_[m]);
    nonlinear(tmp_, k2_);
    for (std::size_t m = 0; m < modes_; ++m) tmp_[m] = half_[m] * u[m] + 0.5 * dt_ * k2_[m];
    nonlinear(tmp_, k3_);
    for (std::size_t m = 0; m < modes_; ++m) tmp_[m] = full_[m] * u[m] + dt_ * half_[m] * k3_[m];
    nonlinear(tmp_, k4_);
    for (std::size_t m = 0; m < modes_; ++m) {
      u[m] = full_[m] * u[m] +
             dt_ / 6.0 * (full_[m] * k1_[m] + 2.0 * half_[m] * (k2_[m] + k3_[m]) + k4_[m]);
    }
  }

 private:
  // phi_l(z) = sum_n z^n / (n + l)!, the ETD weight functions.
  static detail::Complex phi(int l, detail::Complex z) {
    if (std::abs(z) < 1.0) {
      detail::Complex term = 1.0, sum = 0.0;
      double fact = 1.0;
      for (int i = 2; i <= l; ++i) fact *= i;
      term /= fact;
      for (int n = 0; n < 30; ++n) {
        sum += term;
        term *= z / static_cast<double>(n + l + 1);
      }
      return sum;
    }
    // phi_l = (phi_{l-1} - 1/(l-1)!) / z
    detail::Complex p = std::exp(z);
    double fact = 1.0;
    for (int i = 1; i <= l; ++i) {
      p = (p - 1.0 / fact) / z;
      fact *= i;
    }
    return p;
  }

  void advance_etd(Spectrum& u, double time) {
    // k1 = N(u), k2 = N(a), k3 = N(b), k4 = N(c)
    nonlinear(u, k1_, time);
    for (std::size_t m = 0; m < modes_; ++m) a_[m] = half_[m] * u[m] + q_[m] * k1_[m];
    nonlinear(a_, k2_);
    for (std::size_t m = 0; m < modes_; ++m) tmp_[m] = half_[m] * u[m] + q_[m] * k2_[m];
    nonlinear(tmp_, k3_);
    for (std::size_t m = 0; m < modes_; ++m) tmp_[m] = half_[m] * a_[m] + q_[m] * (2.0 * k3_[m] - k1_[m]);
    nonlinear(tmp_, k4_);
    for (std::size_t m = 0; m < modes_; ++m) {
      u[m] = full_[m] * u[m] + f1_[m] * k1_[m] + 2.0 * f2_[m] * (k2_[m] + k3_[m]) + f3_[m] * k4_[m];
    }
  }

  // out = -ik * FFT(u^3); also screens the physical state for blow-up when
  // `check_time` is given.
  void nonlinear(const Spectrum& u, Spectrum& out, double check_time = std::nan("")) {
    const std::size_t n = grid_.size();
    std::fill(fine_spec_.begin(), fine_spec_.end(), detail::Complex(0.0));
    for (std::size_t m = 0; m + 1 < modes_; ++m) fine_spec_[m] = u[m];
    fine_fft_.backward(fine_spec_, fine_phys_);
    const double to_phys = 1.0 / static_cast<double>(n);
    const bool check = !std::isnan(check_time);
    for (double& v : fine_phys_) {
      v *= to_phys;
      if (check && !(std::abs(v) <= 1e6)) {
        std::ostringstream os;
        os << "solution left the admissible range (|u| > 1e6 or non-finite) at t=" << check_time;
        throw BlowUp(os.str(), check_time);
      }
      v = v * v * v;
    }
    fine_fft_.forward(fine_phys_, fine_spec_);
    const double back = static_cast<double>(n) / static_cast<double>(fine_size_);
    for (std::size_t m = 0; m < modes_; ++m) out[m] = -ik_[m] * fine_spec_[m] * back;
  }

  Grid grid_;
  double dt_;
  bool dealias_;
  Scheme scheme_;
  std::size_t modes_;
  std::size_t fine_size_;
  const detail::RealFft& fft_;
  const detail::RealFft& fine_fft_;
  Spectrum half_, full_, ik_;
  Spectrum q_, f1_, f2_, f3_;
  Spectrum fine_spec_;
  std::vector<double> fine_phys_;
  Spectrum k1_, k2_, k3_, k4_, tmp_, a_;
};

namespace detail {

inline void check_step_size(const Field& u, double dt) {
  const double bound = stability_bound(u);
  if (!(dt > 0.0) || dt > bound) {
    std::ostringstream os;
    os << "dt=" << dt << " outside the stability envelope (bound " << bound << ")";
    throw InvalidArgument(os.str());
  }
}

inline void check_finite_state(const Field& u, double t) {
  for (double v : u.values()) {
    if (!(std::abs(v) <= 1e6)) throw BlowUp("solution blew up", t);
  }
}

inline Field checked_field(const Grid& g, std::vector<double> v, double t) {
  for (double x : v) {
    if (!(std::abs(x) <= 1e6)) throw BlowUp("solution blew up at t=" + std::to_string(t), t);
  }
  return Field(g, std::move(v));
}

}  // namespace detail

/// One time step.
inline Field step(const Field& u, double dt, bool dealias = true, Scheme scheme = Scheme::ETDRK4) {
  detail::check_step_size(u, dt);
  Integrator integ(u.grid(), dt, dealias, scheme);
  auto s = integ.to_spectrum(u);
  integ.advance(s, 0.0);
  return detail::checked_field(u.grid(), detail::backward_transform(s, u.grid().size()), dt);
}

/// Repeated steps from controls.t_start to controls.t_end, saving every
/// `save_every` steps plus the final state.
inline Trajectory evolve(const Field& u0, const EvolutionControls& c, std::string description = {}) {
  if (c.save_every < 1) throw InvalidArgument("save_every must be >= 1");
  if (!(c.t_end >= c.t_start)) throw InvalidArgument("evolution runs forward in time only");
  detail::check_step_size(u0, c.dt);
  detail::check_finite_state(u0, c.t_start);

  Trajectory traj;
  traj.metadata.controls = c;
  traj.metadata.description = std::move(description);
  traj.metadata.stability_bound = stability_bound(u0);
  const long steps = std::lround((c.t_end - c.t_start) / c.dt);
  traj.metadata.steps = steps;

  Integrator integ(u0.grid(), c.dt, c.dealias, c.scheme);
  auto s = integ.to_spectrum(u0);
  traj.times.push_back(c.t_start);
  traj.states.push_back(u0);
  for (long k = 1; k <= steps; ++k) {
    const double t_prev = c.t_start + static_cast<double>(k - 1) * c.dt;
    integ.advance(s, t_prev);
    if (k % c.save_every == 0 || k == steps) {
      const double t = c.t_start + static_cast<double>(k) * c.dt;
      traj.times.push_back(t);
      traj.states.push_back(detail::checked_field(u0.grid(), detail::backward_transform(s, u0.grid().size()), t));
    }
  }
  return traj;
}

/// sup |u_t + (u_xx + u^3)_x| for an explicit space-time function, with u_t
/// by a fourth-order centred difference of step `dt_fd`.
inline double pde_residual(const std::function<double(double, double)>& u, double t, const Grid& g,
                           double dt_fd = 1e-4) {
  const std::size_t n = g.size();
  std::vector<double> ut(n), now(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.node(i);
    ut[i] = (-u(t + 2 * dt_fd, x) + 8.0 * u(t + dt_fd, x) - 8.0 * u(t - dt_fd, x) + u(t - 2 * dt_fd, x)) /
            (12.0 * dt_fd);
    now[i] = u(t, x);
  }
  const auto uxx = detail::derivative_values(now, g, 2);
  std::vector<double> flux(n);
  for (std::size_t i = 0; i < n; ++i) flux[i] = uxx[i] + now[i] * now[i] * now[i];
  const auto dflux = detail::derivative_values(flux, g, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(ut[i] + dflux[i]));
  return worst;
}

inline double pde_residual(const WaveObject& o, double t, const Grid& g) {
  return pde_residual([&](double tt, double x) { return evaluate(o, tt, x); }, t, g);
}

inline double pde_residual(const OrderedConfiguration& cfg, double t, const Grid& g) {
  check_tails(cfg, t, g, 1e-10);
  return pde_residual(
      [&](double tt, double x) {
        double s = 0.0;
        for (const auto& o : cfg.objects()) s += evaluate(o, tt, x);
        return s;
      },
      t, g);
}

}  // namespace mkdv
