#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mkdv/evolution.hpp"
#include "mkdv/lyapunov.hpp"
#include "oracles.hpp"

using namespace mkdv;

namespace {

OrderedConfiguration flagship() {
  return order_and_validate({Breather(1.0, 1.0, 0.0, 60.0), Soliton(1.0), Soliton(4.0, 1, 60.0)});
}

// Random smooth periodic field: a few low Fourier modes.
Field band_limited(const Grid& g, std::mt19937& rng, int modes = 6) {
  std::normal_distribution<double> amp(0.0, 1.0);
  std::vector<double> a(modes), b(modes);
  for (int m = 0; m < modes; ++m) {
    a[m] = amp(rng) / (1 + m);
    b[m] = amp(rng) / (1 + m);
  }
  const double L = g.half_length();
  return Field::sample(g, [&](double x) {
    double s = 0.0;
    for (int m = 0; m < modes; ++m) {
      const double k = std::numbers::pi * (m + 1) / L;
      s += a[m] * std::cos(k * x) + b[m] * std::sin(k * x);
    }
    return s;
  });
}

}  // namespace

TEST(SelectParameters, FlagshipArithmetic) {
  const auto p = select_parameters(flagship(), 0.01);
  EXPECT_DOUBLE_EQ(p.nu1_min, 0.0);
  EXPECT_DOUBLE_EQ(p.nu1, 0.5);
  EXPECT_NEAR(p.nu, 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(p.nu_prime, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.nu2, 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(p.nu3, 1.0 / 12.0, 1e-15);
  ASSERT_EQ(p.fam.speeds().size(), 2u);
  EXPECT_DOUBLE_EQ(p.fam.speeds()[0], 0.5);
  EXPECT_DOUBLE_EQ(p.fam.speeds()[1], 2.5);
  EXPECT_DOUBLE_EQ(p.m1_low, 0.0);
  EXPECT_DOUBLE_EQ(p.m1_high, 1.0);
  EXPECT_DOUBLE_EQ(p.sigma(), 0.01);
  EXPECT_TRUE(verify_parameters(p).empty());
}

TEST(SelectParameters, TwoSolitonsTakeTheMidpoint) {
  const auto p = select_parameters(order_and_validate({Soliton(1.0), Soliton(4.0, 1, 40.0)}), 0.01);
  EXPECT_DOUBLE_EQ(p.fam.speeds()[0], 2.5);
  EXPECT_DOUBLE_EQ(p.m1_low, 1.0);
  EXPECT_DOUBLE_EQ(p.m1_high, 4.0);
}

TEST(SelectParameters, NegativeSecondVelocity) {
  // velocities -2, -0.5, 1
  const auto cfg = order_and_validate({Breather(1.0, 1.0), Breather(0.5, 0.5, 0.0, -40.0), Soliton(1.0, 1, 40.0)});
  EXPECT_THROW(select_parameters(cfg, 0.01), HypothesisViolated);
  SelectionOptions opt;
  opt.allow_outside_hypothesis = true;
  const auto p = select_parameters(cfg, 0.01, opt);
  EXPECT_TRUE(p.outside_hypothesis);
  EXPECT_DOUBLE_EQ(p.fam.speeds()[0], 0.1);
  EXPECT_FALSE(verify_parameters(p).empty());
}

TEST(SelectParameters, QuadraticConstraintNarrowsTheInterval) {
  // a > b: nu1_min > 0 and m1 is capped by the quadratic constraint
  const auto cfg = order_and_validate({Breather(1.5, 1.0), Soliton(2.0, 1, 40.0)});
  const auto p = select_parameters(cfg, 0.01);
  const double diff = 1.0 - 2.25, sum = 3.25;
  EXPECT_NEAR(p.nu1_min, -diff / sum, 1e-15);
  EXPECT_NEAR(p.m1_high, std::min(2.0, 0.5 * (p.nu1 - 1.0) * sum * sum / diff), 1e-14);
  EXPECT_TRUE(verify_parameters(p).empty());
}

TEST(SelectParameters, ShrinksSigmaForSlimBreathers) {
  const auto cfg = order_and_validate({Breather(2.0, 0.1), Soliton(1.0, 1, 40.0)});
  const auto p = select_parameters(cfg, 100.0);
  EXPECT_LT(p.sigma(), 100.0);
  EXPECT_DOUBLE_EQ(p.sigma_requested, 100.0);
  for (std::size_t j = 1; j <= 2; ++j) EXPECT_TRUE(coefficient_positivity(p, j, p.sigma()).all());
}

TEST(SelectParameters, RandomConfigurationsAreSound) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ab(0.3, 2.0), c(0.2, 5.0);
  std::uniform_int_distribution<int> count(2, 4), kind(0, 1);
  int checked = 0;
  while (checked < 200) {
    std::vector<WaveObject> objs;
    const int J = count(rng);
    for (int i = 0; i < J; ++i) {
      if (kind(rng)) objs.emplace_back(Breather(ab(rng), ab(rng), 0.0, -40.0 * i));
      else objs.emplace_back(Soliton(c(rng), 1, 40.0 * i));
    }
    OrderedConfiguration cfg;
    try {
      cfg = order_and_validate(objs);
    } catch (const DuplicateVelocity&) {
      continue;
    }
    if (!*cfg.positive_v2()) continue;
    const auto p = select_parameters(cfg, 0.01);
    EXPECT_TRUE(verify_parameters(p).empty());
    const auto& v = cfg.velocities();
    const auto& m = p.fam.speeds();
    EXPECT_DOUBLE_EQ(m[0], 0.5 * (p.m1_low + p.m1_high));
    for (std::size_t j = 1; j < m.size(); ++j) EXPECT_DOUBLE_EQ(m[j], 0.5 * (v[j] + v[j + 1]));
    for (std::size_t j = 1; j <= cfg.size(); ++j) EXPECT_TRUE(coefficient_positivity(p, j, p.sigma()).all());
    ++checked;
  }
}

TEST(CoefficientPositivity, FlagshipBreather) {
  const auto p = select_parameters(flagship(), 0.01);
  const auto r = coefficient_positivity(p, 1, 0.01);
  EXPECT_TRUE(r.all());
  EXPECT_NEAR(r.margin[0], 3.0, 1e-14);
  EXPECT_NEAR(r.margin[3], 1.0, 1e-14);
  for (std::size_t j = 2; j <= 3; ++j) EXPECT_TRUE(coefficient_positivity(p, j, 0.01).all());
}

TEST(CoefficientPositivity, HugeSigmaBreaksTheMiddleConditions) {
  SelectionOptions opt;
  opt.shrink_sigma = false;
  const auto p = select_parameters(order_and_validate({Breather(2.0, 0.1), Soliton(1.0, 1, 40.0)}), 100.0, opt);
  const auto r = coefficient_positivity(p, 1, 100.0);
  EXPECT_TRUE(r.holds[0]);
  EXPECT_FALSE(r.holds[1]);
  EXPECT_FALSE(r.holds[2]);
}

TEST(LyapunovH, ZeroAndSingleSoliton) {
  const Grid g(50.0, 2048);
  const auto cfg = order_and_validate({Soliton(1.0)});
  const auto p = select_parameters(cfg, 0.01);
  EXPECT_EQ(lyapunov_H(Field(g), 1, p, 0.0), 0.0);
  const Field q = sample(Soliton(1.0), 0.0, g);
  const double expect = oracle::second_energy_Q(1.0) + 2.0 * oracle::energy_Q(1.0) + 2.0 * oracle::mass_Q(1.0);
  EXPECT_NEAR(lyapunov_H(q, 1, p, 0.0), expect, 1e-9);
  EXPECT_NEAR(lyapunov_H(q, 1, p, 0.0), 46.0 / 15.0, 1e-9);
  EXPECT_NEAR(lyapunov_H(q, 1, p, 0.0, MassConvention::Halved), 16.0 / 15.0, 1e-9);
}

TEST(LyapunovH, DoublingTheField) {
  const Grid g(50.0, 1024);
  const auto p = select_parameters(flagship(), 0.01);
  const Field u = sample(Soliton(1.0, 1, -5.0), 0.0, g);
  const Field u2 = 2.0 * u;
  const auto t1 = localized_triple(u, p.fam, 1, 0.0), t2 = localized_triple(u2, p.fam, 1, 0.0);
  EXPECT_NEAR(t2.Mj, 4.0 * t1.Mj, 1e-12);
  const auto [a, b] = p.shape(1);
  const double s = a * a + b * b;
  EXPECT_NEAR(lyapunov_H(u2, 1, p, 0.0), t2.Fj + 2.0 * (b * b - a * a) * t2.Ej + s * s * t2.Mj, 1e-10);
}

TEST(WeakenedF, ReducesToHAndStaysBelow) {
  const Grid g(60.0, 512);
  const auto p = select_parameters(flagship(), 0.01);
  EXPECT_EQ(weakened_F(Field(g), 1, p, 0.0), 0.0);
  std::mt19937 rng(5);
  for (int k = 0; k < 10; ++k) {
    const Field u = band_limited(g, rng);
    for (std::size_t j = 1; j <= 3; ++j) {
      EXPECT_NEAR(weakened_F(u, j, p, 0.3, 1.0), lyapunov_H(u, j, p, 0.3), 1e-12 * (1 + std::abs(lyapunov_H(u, j, p, 0.3))));
      const auto [a, b] = p.shape(j);
      const double s = a * a + b * b;
      const double gap = lyapunov_H(u, j, p, 0.3) - weakened_F(u, j, p, 0.3);
      EXPECT_NEAR(gap, (1.0 - p.nu) * s * s * localized_triple(u, p.fam, j, 0.3).Mj, 1e-10 * (1 + std::abs(gap)));
      EXPECT_GE(gap, 0.0);
    }
  }
}

TEST(QuadraticForm, ZeroFreeFieldAndHomogeneity) {
  const Grid g(50.0, 2048);
  const std::vector<double> zero(g.size(), 0.0), one(g.size(), 1.0);
  const ShapePair s{0.5, 1.5};
  const Field w = sample(Soliton(1.0), 0.0, g);
  EXPECT_EQ(quadratic_form_H(Field(g), zero, zero, zero, one, s), 0.0);

  const double diff = s.b * s.b - s.a * s.a, sum = s.a * s.a + s.b * s.b;
  const double direct = oracle::simpson(
      [&](double x) {
        const double q = oracle::Q(1.0, x), qx = oracle::Qx(1.0, x), qxx = oracle::Qxx(1.0, x);
        return 0.5 * qxx * qxx + diff * qx * qx + 0.5 * sum * sum * q * q;
      },
      -60.0, 60.0);
  EXPECT_NEAR(quadratic_form_H(w, zero, zero, zero, one, s), direct, 1e-9);

  std::mt19937 rng(3);
  const Field r = band_limited(g, rng);
  const auto P = sample(Breather(1.0, 1.0), 0.0, g);
  const auto d = derivative_stack(P, 2);
  EXPECT_NEAR(quadratic_form_H(2.0 * r, d[0], d[1], d[2], one, s), 4.0 * quadratic_form_H(r, d[0], d[1], d[2], one, s),
              1e-9 * std::abs(quadratic_form_H(r, d[0], d[1], d[2], one, s)));
}

TEST(QuadraticForm, SecondVariationOfH) {
  // H(P + eps w) - H(P) - eps <H'(P), w> ~ eps^2 Q(w) at a critical point of the
  // halved functional: the soliton with (a, b) = (0, 1) and Phi = 1.
  const Grid g(40.0, 1024);
  const auto p = select_parameters(order_and_validate({Soliton(1.0)}), 0.01);
  const Field P = sample(Soliton(1.0), 0.0, g);
  const Field w = Field::sample(g, [](double x) { return std::exp(-0.3 * (x - 1.0) * (x - 1.0)); });
  const double eps = 1e-3;
  const double Hp = lyapunov_H(P + eps * w, 1, p, 0.0, MassConvention::Halved);
  const double Hm = lyapunov_H(P - eps * w, 1, p, 0.0, MassConvention::Halved);
  const double H0 = lyapunov_H(P, 1, p, 0.0, MassConvention::Halved);
  const double second = (Hp + Hm - 2.0 * H0) / (2.0 * eps * eps);
  EXPECT_NEAR(second, quadratic_form_H(w, P, 1, p, 0.0), 1e-5);
  // critical point: the first variation is O(eps^2)
  EXPECT_NEAR((Hp - Hm) / (2.0 * eps), 0.0, 1e-4);
}

TEST(Interpolation, ZeroSolitonAndRandomFields) {
  const Grid g(100.0, 2048);
  const CutoffFamily fam(0.01, {-2.0, 1.0}, {0.5});
  const auto zero = interpolation_inequality_check(Field(g), fam, 1);
  EXPECT_TRUE(zero.quadratic_holds);
  EXPECT_EQ(zero.X, 0.0);
  const auto q = interpolation_inequality_check(sample(Soliton(1.0), 0.0, g), fam, 1);
  EXPECT_TRUE(q.quadratic_holds);
  EXPECT_TRUE(q.root_holds);
  EXPECT_LT(q.ratio, 1.0);
  std::mt19937 rng(99);
  for (int k = 0; k < 100; ++k) {
    const auto r = interpolation_inequality_check(band_limited(g, rng, 12), fam, 1);
    EXPECT_TRUE(r.quadratic_holds && r.root_holds) << "field " << k;
  }
}

TEST(Monotonicity, ZeroTrajectoryHasNoDrop) {
  const Grid g(60.0, 512);
  const auto p = select_parameters(flagship(), 0.01);
  Trajectory tr;
  for (int k = 0; k < 5; ++k) {
    tr.times.push_back(k);
    tr.states.emplace_back(g);
  }
  for (auto q : {MonotoneQuantity::Mass, MonotoneQuantity::EnergyPlusMass, MonotoneQuantity::SecondEnergyPlusMass,
                 MonotoneQuantity::WeakenedF}) {
    const auto r = monotonicity_report(tr, 1, p, q, p.omega, 0.0, 0.0);
    EXPECT_EQ(r.worst_drop, 0.0);
    EXPECT_TRUE(r.passed());
  }
}

TEST(Monotonicity, ConservedForTheLastIndex) {
  const Grid g(50.0, 1024);
  const auto cfg = order_and_validate({Soliton(1.0, 1, -5.0)});
  const auto p = select_parameters(cfg, 0.01);
  EvolutionControls c;
  c.dt = 1e-3;
  c.t_end = 4.0;
  c.save_every = 500;
  const auto tr = evolve(sample(cfg[0], 0.0, g), c);
  for (auto q : {MonotoneQuantity::Mass, MonotoneQuantity::EnergyPlusMass, MonotoneQuantity::SecondEnergyPlusMass}) {
    const auto r = monotonicity_report(tr, 1, p, q, p.omega, 0.0, 0.0, 0.0);
    for (double v : r.values) EXPECT_NEAR(v, r.values.front(), 1e-6 * std::abs(r.values.front()));
  }
}

TEST(Monotonicity, DropBeyondSlackIsAViolation) {
  const Grid g(60.0, 512);
  const auto p = select_parameters(flagship(), 0.01);
  Trajectory tr;
  const Field u = sample(Soliton(1.0, 1, -10.0), 0.0, g);
  tr.times = {0.0, 1.0, 2.0};
  tr.states = {u, 0.5 * u, u};
  const auto r = monotonicity_report(tr, 1, p, MonotoneQuantity::Mass, p.omega, 0.0, 0.0, 1e-5);
  EXPECT_EQ(r.violations, 1u);
  EXPECT_NEAR(r.worst_drop, r.values[0] - r.values[1], 1e-12);
  const auto covered = monotonicity_report(tr, 1, p, MonotoneQuantity::Mass, p.omega, 0.0, 10.0, 1e-5);
  EXPECT_TRUE(covered.passed());
}

TEST(Slack, ExponentialDistanceIntegral) {
  // receding object: int_0^inf e^{-k(a + b s)} ds = e^{-k a} / (k b)
  EXPECT_NEAR(detail::exp_distance_integral(10.0, 2.0, 0.05, 0.0), std::exp(-0.5) / 0.1, 1e-14);
  // approaching then receding: compare with quadrature
  const double a = -10.0, b = 2.0, k = 0.05;
  const double num = oracle::simpson([&](double s) { return std::exp(-k * std::abs(a + b * s)); }, 0.0, 2000.0, 400000);
  EXPECT_NEAR(detail::exp_distance_integral(a, b, k, 0.0), num, 1e-8);
}

TEST(Slack, FlagshipCalibrationIsFinite) {
  const Grid g(128.0, 2048);
  const auto cfg = flagship();
  SelectionOptions opt;
  opt.anchors = {-30.0, 30.0};
  const auto p = select_parameters(cfg, 0.01, opt);
  const std::vector<double> times{0.0, 4.0, 8.0};
  const auto cal = calibrate_slack(cfg, p, 1, monotone_density(MonotoneQuantity::Mass, 1, p, p.omega), g, times);
  EXPECT_GT(cal.varpi, 0.0);
  EXPECT_NEAR(cal.varpi, 0.1 * 0.5 / 4.0, 1e-14);
  EXPECT_GT(cal.C, 0.0);
  EXPECT_TRUE(std::isfinite(cal.C));
  EXPECT_EQ(calibrate_slack(cfg, p, 3, {1.0, 0.0, 0.0}, g, times).C, 0.0);
}
