#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mkdv/error.hpp"
#include "mkdv/fft.hpp"

namespace mkdv {

/// Uniform periodic grid on [-L, L) with n nodes x_i = -L + i h.
class Grid {
 public:
  Grid(double half_length, std::size_t points) : half_length_(half_length), points_(points) {
    if (!(half_length > 0.0) || !std::isfinite(half_length)) {
      throw InvalidArgument("grid half-length must be positive, got " + std::to_string(half_length));
    }
    if (points < 16 || (points & (points - 1)) != 0) {
      throw InvalidArgument("grid size must be a power of two >= 16, got " + std::to_string(points));
    }
    spacing_ = 2.0 * half_length / static_cast<double>(points);
  }

  double half_length() const noexcept { return half_length_; }
  std::size_t size() const noexcept { return points_; }
  double spacing() const noexcept { return spacing_; }
  double node(std::size_t i) const noexcept { return -half_length_ + static_cast<double>(i) * spacing_; }

  /// Wavenumber of the m-th real-FFT coefficient, m = 0..n/2.
  double wavenumber(std::size_t m) const noexcept {
    return std::numbers::pi * static_cast<double>(m) / half_length_;
  }
  double max_wavenumber() const noexcept { return wavenumber(points_ / 2); }

  std::vector<double> nodes() const {
    std::vector<double> x(points_);
    for (std::size_t i = 0; i < points_; ++i) x[i] = node(i);
    return x;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double half_length_;
  std::size_t points_;
  double spacing_;
};

inline Grid make_grid(double half_length, std::size_t points) { return Grid(half_length, points); }

/// Samples of a real function on a Grid. Values are always finite.
class Field {
 public:
  explicit Field(const Grid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

  Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw InvalidArgument("field has " + std::to_string(values_.size()) + " values for a grid of " +
                            std::to_string(grid_.size()));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw InvalidArgument("field contains a non-finite value");
    }
  }

  template <class F>
  static Field sample(const Grid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
    return Field(grid, std::move(v));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  Field& operator+=(const Field& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  Field& operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }

 private:
  void check_same_grid(const Field& o) const {
    if (!(o.grid_ == grid_)) throw InvalidArgument("fields live on different grids");
  }

  Grid grid_;
  std::vector<double> values_;
};

namespace detail {

inline ComplexVector forward_transform(std::span<const double> values) {
  const auto& fft = RealFft::of_size(values.size());
  ComplexVector spec(fft.spectrum_size());
  fft.forward(values, spec);
  return spec;
}

// Normalised inverse of forward_transform; consumes `spec`.
inline std::vector<double> backward_transform(ComplexVector spec, std::size_t n) {
  const auto& fft = RealFft::of_size(n);
  std::vector<double> out(n);
  fft.backward(spec, out);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

// (ik)^order applied to a spectrum. The Nyquist coefficient is dropped for odd
// orders, where it has no real-valued derivative.
inline ComplexVector differentiate_spectrum(const ComplexVector& spec, const Grid& g, int order) {
  ComplexVector out(spec.size());
  const std::size_t nyquist = g.size() / 2;
  for (std::size_t m = 0; m < spec.size(); ++m) {
    if (m == nyquist && order % 2 == 1) {
      out[m] = 0.0;
      continue;
    }
    const double k = g.wavenumber(m);
    Complex factor(1.0, 0.0);
    for (int p = 0; p < order; ++p) factor *= Complex(0.0, k);
    out[m] = factor * spec[m];
  }
  return out;
}

inline std::vector<double> derivative_values(std::span<const double> values, const Grid& g, int order) {
  return backward_transform(differentiate_spectrum(forward_transform(values), g, order), g.size());
}

inline double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace detail

/// Fourier derivative of the given order (1..4).
inline Field spectral_derivative(const Field& f, int order) {
  if (order < 1 || order > 4) {
    throw InvalidArgument("derivative order must be in 1..4, got " + std::to_string(order));
  }
  return Field(f.grid(), detail::derivative_values(f.values(), f.grid(), order));
}

/// f and its first `max_order` derivatives from a single forward transform.
inline std::vector<std::vector<double>> derivative_stack(const Field& f, int max_order) {
  if (max_order < 0 || max_order > 4) throw InvalidArgument("derivative stack order must be in 0..4");
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(max_order) + 1);
  out.push_back(f.data());
  if (max_order == 0) return out;
  const auto spec = detail::forward_transform(f.values());
  for (int p = 1; p <= max_order; ++p) {
    out.push_back(detail::backward_transform(detail::differentiate_spectrum(spec, f.grid(), p), f.size()));
  }
  return out;
}

/// Trapezoid rule h * sum(f) on the periodic grid.
inline double quadrature(const Field& f) { return f.grid().spacing() * detail::sum(f.values()); }

inline double quadrature(std::span<const double> values, const Grid& g) {
  return g.spacing() * detail::sum(values);
}

/// Discrete L2 pairing h * sum(f g).
inline double inner(std::span<const double> a, std::span<const double> b, const Grid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return g.spacing() * s;
}

inline double inner(const Field& a, const Field& b) { return inner(a.values(), b.values(), a.grid()); }

/// Discrete integral of f^2 + f_x^2 + f_xx^2.
inline double h2_norm_sq(const Field& f) {
  const auto d = derivative_stack(f, 2);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += d[0][i] * d[0][i] + d[1][i] * d[1][i] + d[2][i] * d[2][i];
  return f.grid().spacing() * s;
}

inline double h2_norm(const Field& f) { return std::sqrt(h2_norm_sq(f)); }

/// Weighted version: integral of (f^2 + f_x^2 + f_xx^2) * weight.
inline double weighted_h2_norm_sq(const Field& f, std::span<const double> weight) {
  const auto d = derivative_stack(f, 2);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    s += (d[0][i] * d[0][i] + d[1][i] * d[1][i] + d[2][i] * d[2][i]) * weight[i];
  }
  return f.grid().spacing() * s;
}

}  // namespace mkdv
