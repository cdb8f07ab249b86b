#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "mkdv/error.hpp"
#include "mkdv/grid.hpp"

namespace mkdv {

/// kappa * Q_c(x - x0 - c t) with Q_c(x) = sqrt(2c) sech(sqrt(c) x).
class Soliton {
 public:
  Soliton(double c, int kappa = 1, double x0 = 0.0) : c_(c), kappa_(kappa), x0_(x0) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("soliton speed c must be positive");
    if (kappa != 1 && kappa != -1) throw InvalidArgument("soliton sign kappa must be +1 or -1");
    if (!std::isfinite(x0)) throw InvalidArgument("soliton position must be finite");
  }

  double c() const noexcept { return c_; }
  int kappa() const noexcept { return kappa_; }
  double x0() const noexcept { return x0_; }

 private:
  double c_;
  int kappa_;
  double x0_;
};

/// Breather 2 sqrt(2) d/dx arctan((beta/alpha) sin(alpha y1) / cosh(beta y2)),
/// y1 = x + delta t + x1, y2 = x + gamma t + x2.
class Breather {
 public:
  Breather(double alpha, double beta, double x1 = 0.0, double x2 = 0.0)
      : alpha_(alpha), beta_(beta), x1_(x1), x2_(x2) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("breather alpha must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("breather beta must be positive");
    if (!std::isfinite(x1) || !std::isfinite(x2)) throw InvalidArgument("breather shifts must be finite");
  }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double x1() const noexcept { return x1_; }
  double x2() const noexcept { return x2_; }
  double delta() const noexcept { return alpha_ * alpha_ - 3.0 * beta_ * beta_; }
  double gamma() const noexcept { return 3.0 * alpha_ * alpha_ - beta_ * beta_; }

 private:
  double alpha_;
  double beta_;
  double x1_;
  double x2_;
};

using WaveObject = std::variant<Soliton, Breather>;

struct ShapePair {
  double a;
  double b;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double sech(double z) {
  const double e = std::exp(-std::abs(z));
  return 2.0 * e / (1.0 + e * e);
}

inline constexpr double two_sqrt2 = 2.0 * std::numbers::sqrt2;

// Q_c and its derivatives at xi.
struct SolitonJet {
  double q, q1, q2, q3;
};

inline SolitonJet soliton_jet(double c, double xi) {
  const double rc = std::sqrt(c);
  const double amp = std::sqrt(2.0 * c);
  const double s = sech(rc * xi);
  const double th = std::tanh(rc * xi);
  return {amp * s, -amp * rc * s * th, amp * c * s * (1.0 - 2.0 * s * s),
          -amp * c * rc * s * th * (1.0 - 6.0 * s * s)};
}

// Partial derivatives of theta(y1, y2) = arctan(G), G = r sin(alpha y1) sech(beta y2),
// up to third order. Indices refer to y1 (1) and y2 (2).
struct ArctanJet {
  double t1, t2, t11, t12, t22, t111, t112, t122, t222;
};

inline ArctanJet breather_jet(double alpha, double beta, double y1, double y2) {
  const double r = beta / alpha;
  const double S = std::sin(alpha * y1);
  const double C = std::cos(alpha * y1);
  const double s = sech(beta * y2);
  const double T = std::tanh(beta * y2);
  const double b2 = beta * beta, b3 = b2 * beta;

  const double g = r * S * s;
  const double g1 = beta * C * s;
  const double g2 = -r * beta * S * s * T;
  const double g11 = -beta * alpha * S * s;
  const double g12 = -b2 * C * s * T;
  const double g22 = -r * b2 * S * s * (s * s - T * T);
  const double g111 = -beta * alpha * alpha * C * s;
  const double g112 = b2 * alpha * S * s * T;
  const double g122 = -b3 * C * s * (s * s - T * T);
  const double g222 = -r * b3 * S * s * T * (T * T - 5.0 * s * s);

  const double d = 1.0 + g * g;
  const double f = 1.0 / d;
  const double f2 = f * f;
  const double f3 = f2 * f;

  auto second = [&](double gi, double gj, double gij) { return gij * f - 2.0 * g * gi * gj * f2; };
  auto third = [&](double gi, double gj, double gk, double gij, double gik, double gjk, double gijk) {
    return gijk * f - 2.0 * g * (gij * gk + gik * gj) * f2 - 2.0 * gi * (gj * gk + g * gjk) * f2 +
           8.0 * g * g * gi * gj * gk * f3;
  };

  ArctanJet j{};
  j.t1 = g1 * f;
  j.t2 = g2 * f;
  j.t11 = second(g1, g1, g11);
  j.t12 = second(g1, g2, g12);
  j.t22 = second(g2, g2, g22);
  j.t111 = third(g1, g1, g1, g11, g11, g11, g111);
  j.t112 = third(g1, g1, g2, g11, g12, g12, g112);
  j.t122 = third(g1, g2, g2, g12, g12, g22, g122);
  j.t222 = third(g2, g2, g2, g22, g22, g22, g222);
  return j;
}

inline double soliton_xi(const Soliton& s, double t, double x) { return x - s.x0() - s.c() * t; }
inline double breather_y1(const Breather& b, double t, double x) { return x + b.delta() * t + b.x1(); }
inline double breather_y2(const Breather& b, double t, double x) { return x + b.gamma() * t + b.x2(); }

}  // namespace detail

inline double soliton_eval(const Soliton& s, double t, double x) {
  return s.kappa() * detail::soliton_jet(s.c(), detail::soliton_xi(s, t, x)).q;
}

/// Closed-form x-derivative of the arctan expression.
inline double breather_eval(const Breather& b, double t, double x) {
  const double y1 = detail::breather_y1(b, t, x);
  const double y2 = detail::breather_y2(b, t, x);
  const double r = b.beta() / b.alpha();
  const double S = std::sin(b.alpha() * y1);
  const double C = std::cos(b.alpha() * y1);
  const double s = detail::sech(b.beta() * y2);
  const double T = std::tanh(b.beta() * y2);
  const double g = r * S * s;
  return detail::two_sqrt2 * b.beta() * s * (C - r * S * T) / (1.0 + g * g);
}

inline double evaluate(const WaveObject& o, double t, double x) {
  return std::visit(detail::overloaded{[&](const Soliton& s) { return soliton_eval(s, t, x); },
                                       [&](const Breather& b) { return breather_eval(b, t, x); }},
                    o);
}

inline double velocity(const WaveObject& o) {
  return std::visit(detail::overloaded{[](const Soliton& s) { return s.c(); },
                                       [](const Breather& b) { return -b.gamma(); }},
                    o);
}

inline ShapePair shape_pair(const WaveObject& o) {
  return std::visit(detail::overloaded{[](const Soliton& s) { return ShapePair{0.0, std::sqrt(s.c())}; },
                                       [](const Breather& b) { return ShapePair{b.alpha(), b.beta()}; }},
                    o);
}

/// Location of the envelope maximum at time t.
inline double center(const WaveObject& o, double t) {
  return std::visit(detail::overloaded{[&](const Soliton& s) { return s.x0() + s.c() * t; },
                                       [&](const Breather& b) { return -b.x2() - b.gamma() * t; }},
                    o);
}

/// Constant of the exponential envelope. For breathers the constant is
/// raised to 4 sqrt(2) b sqrt(1 + (b/a)^2) where that exceeds 4 b max(1, b):
/// far from the core |B| approaches that value times exp(-b |y2|).
inline double envelope_constant(const WaveObject& o) {
  const auto [a, b] = shape_pair(o);
  const double base = 4.0 * b * std::max(1.0, b);
  if (std::holds_alternative<Soliton>(o)) return base;
  const double r = b / a;
  return std::max(base, 2.0 * detail::two_sqrt2 * b * std::sqrt(1.0 + r * r));
}

inline double decay_envelope(const WaveObject& o, double t, double x) {
  const double b = shape_pair(o).b;
  return envelope_constant(o) * std::exp(-b * std::abs(x - center(o, t)));
}

/// Number of translation parameters: 1 for a soliton, 2 for a breather.
inline std::size_t translation_count(const WaveObject& o) { return std::holds_alternative<Soliton>(o) ? 1 : 2; }

/// The object with translation offsets applied: a soliton moves to
/// x0 - y0 (so that the profile reads Q(x - x0 + y0 - ct)), a breather to
/// (x1 + y1, x2 + y2).
inline WaveObject shifted(const WaveObject& o, std::span<const double> y) {
  return std::visit(
      detail::overloaded{
          [&](const Soliton& s) -> WaveObject { return Soliton(s.c(), s.kappa(), s.x0() - y[0]); },
          [&](const Breather& b) -> WaveObject {
            return Breather(b.alpha(), b.beta(), b.x1() + y[0], b.x2() + y[1]);
          }},
      o);
}

/// Partial derivatives of the profile with respect to its translation offsets.
inline std::array<double, 2> translation_gradient(const WaveObject& o, double t, double x) {
  return std::visit(
      detail::overloaded{
          [&](const Soliton& s) -> std::array<double, 2> {
            return {s.kappa() * detail::soliton_jet(s.c(), detail::soliton_xi(s, t, x)).q1, 0.0};
          },
          [&](const Breather& b) -> std::array<double, 2> {
            const auto j = detail::breather_jet(b.alpha(), b.beta(), detail::breather_y1(b, t, x),
                                                detail::breather_y2(b, t, x));
            return {detail::two_sqrt2 * (j.t11 + j.t12), detail::two_sqrt2 * (j.t12 + j.t22)};
          }},
      o);
}

/// Second partials with respect to the offsets, packed as (11, 12, 22).
inline std::array<double, 3> translation_hessian(const WaveObject& o, double t, double x) {
  return std::visit(
      detail::overloaded{
          [&](const Soliton& s) -> std::array<double, 3> {
            return {s.kappa() * detail::soliton_jet(s.c(), detail::soliton_xi(s, t, x)).q2, 0.0, 0.0};
          },
          [&](const Breather& b) -> std::array<double, 3> {
            const auto j = detail::breather_jet(b.alpha(), b.beta(), detail::breather_y1(b, t, x),
                                                detail::breather_y2(b, t, x));
            return {detail::two_sqrt2 * (j.t111 + j.t112), detail::two_sqrt2 * (j.t112 + j.t122),
                    detail::two_sqrt2 * (j.t122 + j.t222)};
          }},
      o);
}

inline Field sample(const WaveObject& o, double t, const Grid& g) {
  return Field::sample(g, [&](double x) { return evaluate(o, t, x); });
}

inline std::string describe(const WaveObject& o) {
  std::ostringstream os;
  std::visit(detail::overloaded{[&](const Soliton& s) {
                                  os << "soliton(c=" << s.c() << ", kappa=" << s.kappa() << ", x0=" << s.x0()
                                     << ")";
                                },
                                [&](const Breather& b) {
                                  os << "breather(alpha=" << b.alpha() << ", beta=" << b.beta()
                                     << ", x1=" << b.x1() << ", x2=" << b.x2() << ")";
                                }},
             o);
  return os.str();
}

/// Objects sorted by strictly increasing velocity.
class OrderedConfiguration {
 public:
  const std::vector<WaveObject>& objects() const noexcept { return objects_; }
  const std::vector<double>& velocities() const noexcept { return velocities_; }
  std::size_t size() const noexcept { return objects_.size(); }
  const WaveObject& operator[](std::size_t j) const { return objects_.at(j); }

  bool positive_v1() const noexcept { return velocities_.front() > 0.0; }
  /// Whether v2 > 0; empty for a single object, where v2 does not exist.
  std::optional<bool> positive_v2() const noexcept {
    if (velocities_.size() < 2) return std::nullopt;
    return velocities_[1] > 0.0;
  }

  std::size_t translation_count() const {
    std::size_t n = 0;
    for (const auto& o : objects_) n += mkdv::translation_count(o);
    return n;
  }

  /// Same ordering with translation offsets applied (concatenated per object).
  OrderedConfiguration shifted(std::span<const double> offsets) const {
    OrderedConfiguration out = *this;
    std::size_t k = 0;
    for (auto& o : out.objects_) {
      const std::size_t m = mkdv::translation_count(o);
      o = mkdv::shifted(o, offsets.subspan(k, m));
      k += m;
    }
    return out;
  }

 private:
  friend OrderedConfiguration order_and_validate(std::vector<WaveObject> objects);
  std::vector<WaveObject> objects_;
  std::vector<double> velocities_;
};

inline OrderedConfiguration order_and_validate(std::vector<WaveObject> objects) {
  if (objects.empty()) throw InvalidArgument("a configuration needs at least one object");
  std::stable_sort(objects.begin(), objects.end(),
                   [](const WaveObject& a, const WaveObject& b) { return velocity(a) < velocity(b); });
  OrderedConfiguration cfg;
  for (const auto& o : objects) cfg.velocities_.push_back(velocity(o));
  for (std::size_t j = 1; j < cfg.velocities_.size(); ++j) {
    if (!(cfg.velocities_[j] > cfg.velocities_[j - 1])) {
      throw DuplicateVelocity("objects " + describe(objects[j - 1]) + " and " + describe(objects[j]) +
                              " share velocity " + std::to_string(cfg.velocities_[j]));
    }
  }
  cfg.objects_ = std::move(objects);
  return cfg;
}

/// Throws TailsTooLarge when some envelope exceeds `tolerance` at x = +-L.
inline void check_tails(const OrderedConfiguration& cfg, double t, const Grid& g, double tolerance = 1e-10) {
  const double L = g.half_length();
  for (const auto& o : cfg.objects()) {
    const double edge = std::max(decay_envelope(o, t, -L), decay_envelope(o, t, L));
    if (edge > tolerance) {
      std::ostringstream os;
      os << describe(o) << " has envelope " << edge << " at the box edge (t=" << t << ", L=" << L << ")";
      throw TailsTooLarge(os.str());
    }
  }
}

/// Pointwise sum of all objects at time t.
inline Field profile_sum(const OrderedConfiguration& cfg, double t, const Grid& g) {
  check_tails(cfg, t, g);
  std::vector<double> v(g.size(), 0.0);
  for (const auto& o : cfg.objects()) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += evaluate(o, t, g.node(i));
  }
  return Field(g, std::move(v));
}

/// Smallest half-length keeping every envelope below `tail` over
/// [t_begin, t_end]: the max over objects of |center| + ln(C / tail) / b.
inline double recommended_half_length(const OrderedConfiguration& cfg, double t_begin, double t_end,
                                      double tail = 1e-14) {
  double L = 0.0;
  for (const auto& o : cfg.objects()) {
    const double reach = std::max(std::abs(center(o, t_begin)), std::abs(center(o, t_end)));
    L = std::max(L, reach + std::log(envelope_constant(o) / tail) / shape_pair(o).b);
  }
  return L;
}

}  // namespace mkdv
