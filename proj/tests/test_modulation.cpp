#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mkdv/evolution.hpp"
#include "mkdv/modulation.hpp"
#include "oracles.hpp"

using namespace mkdv;

TEST(Directions, SolitonDirectionIsTheDerivative) {
  const Grid g(30.0, 512);
  const double y[] = {0.0};
  const auto d = modulation_directions(Soliton(1.0), y, 0.0, g);
  ASSERT_EQ(d.size(), 1u);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(d[0][i], oracle::Qx(1.0, g.node(i)), 1e-14);
}

TEST(Directions, BreatherPartialsSumToTheDerivative) {
  // x enters y1 and y2 with the same sign, so d/dx1 + d/dx2 = d/dx
  const Grid g(30.0, 1024);
  const Breather b(1.0, 1.0, 0.3, 0.3);
  const double y[] = {0.0, 0.0};
  const auto d = modulation_directions(b, y, 0.0, g);
  ASSERT_EQ(d.size(), 2u);
  const Field dx = spectral_derivative(sample(b, 0.0, g), 1);
  EXPECT_LT((d[0] + d[1] - dx).max_abs(), 1e-10);
}

TEST(Directions, BreatherGramIsWellConditioned) {
  const Grid g(30.0, 1024);
  for (const Breather& b : {Breather(1.0, 1.0), Breather(0.5, 1.5), Breather(1.5, 0.5)}) {
    const double y[] = {0.0, 0.0};
    const auto d = modulation_directions(b, y, 0.0, g);
    Eigen::Matrix2d G;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) G(i, k) = inner(d[i], d[k]);
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(G);
    EXPECT_LT(svd.singularValues()(0) / svd.singularValues()(1), 1e6);
  }
}

TEST(FitTranslations, ExactProfileNeedsNoCorrection) {
  const Grid g(80.0, 2048);
  const auto cfg = order_and_validate({Breather(1.0, 1.0, 0.0, 30.0), Soliton(1.0, 1, 20.0)});
  const auto st = fit_translations(profile_sum(cfg, 0.5, g), cfg, 0.5);
  EXPECT_TRUE(st.converged);
  EXPECT_LE(st.iterations, 1);
  for (double y : st.offsets) EXPECT_LT(std::abs(y), 1e-12);
  EXPECT_LT(st.w.max_abs(), 1e-12);
}

TEST(FitTranslations, RecoversInjectedOffsets) {
  const Grid g(80.0, 2048);
  const auto cfg = order_and_validate({Breather(1.0, 1.0, 0.0, 30.0), Soliton(1.0, 1, 20.0)});
  // offsets in velocity order: breather (y1, y2), then the soliton y0
  const std::vector<double> inj{-0.03, 0.05, 0.07};
  const Field u = profile_sum(cfg.shifted(inj), 0.0, g);
  const auto st = fit_translations(u, cfg, 0.0);
  ASSERT_EQ(st.y1().size(), 1u);
  EXPECT_NEAR(st.y0()[0], 0.07, 1e-8);
  EXPECT_NEAR(st.y1()[0], -0.03, 1e-8);
  EXPECT_NEAR(st.y2()[0], 0.05, 1e-8);
  for (double r : st.ortho_residuals) EXPECT_LT(std::abs(r), 1e-10);
}

TEST(FitTranslations, RoundTripOverRandomConfigurations) {
  std::mt19937 rng(8128);
  std::uniform_real_distribution<double> ab(0.5, 1.5), c(0.3, 4.0), off(-0.1, 0.1);
  std::uniform_int_distribution<int> count(1, 3), kind(0, 1);
  const Grid g(128.0, 2048);
  int done = 0;
  while (done < 50) {
    std::vector<WaveObject> objs;
    const int J = count(rng);
    for (int i = 0; i < J; ++i) {
      const double pos = 45.0 * (i - 1);
      if (kind(rng)) objs.emplace_back(Breather(ab(rng), ab(rng), 0.0, -pos));
      else objs.emplace_back(Soliton(c(rng), 1, pos));
    }
    OrderedConfiguration cfg;
    try {
      cfg = order_and_validate(objs);
    } catch (const DuplicateVelocity&) {
      continue;
    }
    std::vector<double> inj(cfg.translation_count());
    for (double& y : inj) y = off(rng);
    const auto st = fit_translations(profile_sum(cfg.shifted(inj), 0.0, g), cfg, 0.0);
    for (std::size_t i = 0; i < inj.size(); ++i) EXPECT_NEAR(st.offsets[i], inj[i], 1e-8) << "configuration " << done;
    for (double r : st.ortho_residuals) EXPECT_LT(std::abs(r), 1e-10);
    ++done;
  }
}

TEST(FitTranslations, FarFromTheFamily) {
  const Grid g(50.0, 1024);
  const auto cfg = order_and_validate({Soliton(1.0)});
  EXPECT_THROW(fit_translations(Field(g), cfg, 0.0), NoConvergence);
  const Field bump = Field::sample(g, [](double x) { return std::exp(-x * x / 4.0); });
  EXPECT_THROW(fit_translations(profile_sum(cfg, 0.0, g) + 10.0 * bump, cfg, 0.0), NoConvergence);
  EXPECT_THROW(fit_translations(profile_sum(cfg, 0.0, g), cfg, 0.0, {0.0, 0.0}), InvalidArgument);
}

TEST(TrackModulation, ZeroTrajectoryFailsAtFirstSnapshot) {
  const Grid g(50.0, 1024);
  const auto cfg = order_and_validate({Soliton(1.0)});
  Trajectory tr;
  tr.times = {0.25, 0.5};
  tr.states = {Field(g), Field(g)};
  try {
    track_modulation(tr, cfg);
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergence& e) {
    EXPECT_DOUBLE_EQ(e.time(), 0.25);
  }
}

TEST(TrackModulation, ExactBreatherOffsetsStayPut) {
  const Grid g(50.0, 2048);
  const auto cfg = order_and_validate({Breather(1.0, 1.0)});
  EvolutionControls c;
  c.dt = 2.5e-4;
  c.t_end = 2.0;
  c.save_every = 1000;
  const auto track = track_modulation(evolve(profile_sum(cfg, 0.0, g), c), cfg);
  for (const auto& st : track.states)
    for (double y : st.offsets) EXPECT_LT(std::abs(y), 1e-6);
}

TEST(TrackModulation, PerturbedSolitonOffsetsScaleWithTheBump) {
  const Grid g(60.0, 1024);
  const auto cfg = order_and_validate({Soliton(1.0, 1, -10.0)});
  const double eps = 1e-3;
  const Field u0 =
      profile_sum(cfg, 0.0, g) + eps * Field::sample(g, [](double x) { return std::exp(-(x + 8.0) * (x + 8.0) / 4.0); });
  EvolutionControls c;
  c.dt = 1e-3;
  c.t_end = 3.0;
  c.save_every = 500;
  const auto track = track_modulation(evolve(u0, c), cfg);
  EXPECT_GT(track.offset_ratio, 0.0);
  for (const auto& st : track.states)
    for (double y : st.offsets) EXPECT_LT(std::abs(y), 10.0 * eps);
  EXPECT_EQ(track.rates.size(), track.states.size() - 1);
}
