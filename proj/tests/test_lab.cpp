#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mkdv/lab/experiments.hpp"
#include "mkdv/lab/rate_fit.hpp"
#include "mkdv/lab/scenario.hpp"

using namespace mkdv;
using namespace mkdv::lab;

namespace {

const char* kSoliton = R"({
  "name": "one",
  "objects": [{"type": "soliton", "c": 1.0}],
  "grid": {"L": 50.0, "n": 1024}
})";

const char* kFlagship = R"({
  "name": "flagship",
  "objects": [
    {"type": "breather", "alpha": 1.0, "beta": 1.0, "center": -60.0},
    {"type": "soliton", "c": 1.0, "x0": 0.0},
    {"type": "soliton", "c": 4.0, "x0": 60.0}
  ],
  "grid": {"L": 128.0, "n": 2048},
  "evolution": {"dt": 2.5e-4, "t_end": 0.5, "save_every": 1000}
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mkdv_lab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Scenario, MinimalDocument) {
  const auto s = parse_scenario(std::string(kSoliton));
  EXPECT_EQ(s.cfg.size(), 1u);
  EXPECT_EQ(s.name, "one");
  EXPECT_DOUBLE_EQ(s.sigma, 0.01);
  EXPECT_FALSE(s.perturbation.has_value());
}

TEST(Scenario, FlagshipResolvesSpeedsAndAnchors) {
  const auto s = parse_scenario(std::string(kFlagship));
  const auto p = scenario_parameters(s);
  EXPECT_DOUBLE_EQ(p.fam.speeds()[0], 0.5);
  EXPECT_DOUBLE_EQ(p.fam.speeds()[1], 2.5);
  EXPECT_DOUBLE_EQ(p.nu1, 0.5);
  EXPECT_DOUBLE_EQ(p.fam.anchors()[0], -30.0);
  EXPECT_DOUBLE_EQ(p.fam.anchors()[1], 30.0);
  // breather centre sits at -x2
  EXPECT_DOUBLE_EQ(center(s.cfg[0], 0.0), -60.0);
}

TEST(Scenario, DuplicateVelocityAndSchemaErrors) {
  const char* dup = R"({"objects": [{"type": "soliton", "c": 1}, {"type": "soliton", "c": 1, "x0": 30}],
                        "grid": {"L": 60, "n": 1024}})";
  EXPECT_THROW(parse_scenario(std::string(dup)), DuplicateVelocity);
  EXPECT_THROW(parse_scenario(std::string(R"({"objects": [], "grid": {"L": 50, "n": 1024}})")), ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(R"({"objects": [{"type": "kink"}], "grid": {"L": 50, "n": 1024}})")),
               ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kSoliton), {"grid.m=3"}), ScenarioError);
  EXPECT_THROW(parse_scenario(std::string("{not json")), ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kSoliton), {"grid.n=1000"}), InvalidArgument);
  EXPECT_THROW(parse_scenario(std::string(kSoliton), {"grid.L=10"}), TailsTooLarge);
}

TEST(Scenario, OverridesUseDottedPaths) {
  const auto s = parse_scenario(std::string(kFlagship),
                                {"evolution.dt=1e-4", "objects.1.c=2.0", "name=renamed", "evolution.scheme=ifrk4"});
  EXPECT_DOUBLE_EQ(s.evolution.dt, 1e-4);
  EXPECT_EQ(s.name, "renamed");
  EXPECT_EQ(s.evolution.scheme, Scheme::IFRK4);
  EXPECT_DOUBLE_EQ(s.cfg.velocities()[1], 2.0);
  EXPECT_THROW(parse_scenario(std::string(kFlagship), {"novalue"}), ScenarioError);
}

TEST(Scenario, ResolvedConfigListsEveryConstant) {
  const auto r = resolved_config(parse_scenario(std::string(kFlagship)));
  for (const char* key : {"sigma", "sigma_requested", "m", "anchors", "nu1", "nu", "nu_prime", "nu2", "nu3", "omega",
                          "solver_budget", "grid", "evolution", "objects", "shape_pairs"})
    EXPECT_TRUE(r.contains(key)) << key;
}

TEST(Scenario, ParameterFailureIsRecorded) {
  const char* neg = R"({"objects": [{"type": "breather", "alpha": 1, "beta": 1, "center": -40},
                                    {"type": "breather", "alpha": 0.5, "beta": 0.5},
                                    {"type": "soliton", "c": 1, "x0": 40}],
                        "grid": {"L": 100, "n": 2048}})";
  const auto r = resolved_config(parse_scenario(std::string(neg)));
  EXPECT_TRUE(r.contains("parameters_error"));
}

TEST(RateFit, ExactExponential) {
  std::vector<double> t, d;
  for (int k = 0; k <= 40; ++k) {
    t.push_back(0.25 * k);
    d.push_back(3.0 * std::exp(-0.7 * t.back()));
  }
  const auto f = fit_exponential_rate(t, d, {0.0, 10.0});
  EXPECT_NEAR(f.varpi, 0.7, 1e-10);
  EXPECT_NEAR(f.C, 3.0, 1e-10);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_FALSE(f.floor_limited);
  EXPECT_EQ(fit_exponential_rate(t, d, {2.0, 4.0}).times.size(), 9u);
}

TEST(RateFit, NoiseFloor) {
  const std::vector<double> t{0, 1, 2, 3, 4}, d(5, 1e-14);
  const auto f = fit_exponential_rate(t, d, {0.0, 4.0});
  EXPECT_NEAR(f.varpi, 0.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 0.0, 1e-12);
  EXPECT_TRUE(f.floor_limited);
}

TEST(RateFit, RejectsNonPositiveDistances) {
  const std::vector<double> t{0, 1, 2}, d{1.0, 0.0, 0.5};
  EXPECT_THROW(fit_exponential_rate(t, d, {0.0, 2.0}), NonPositiveDistance);
  EXPECT_NO_THROW(fit_exponential_rate(t, {1.0, 0.5, 0.0}, {0.0, 1.0}));
  EXPECT_THROW(fit_exponential_rate(t, {1.0, 0.5, 0.2}, {5.0, 6.0}), InvalidArgument);
}

TEST(PlotData, HeaderAndColumns) {
  const auto dir = scratch("plot");
  emit_plot_data(dir / "empty.dat", {"t", "value"}, {{}, {}});
  EXPECT_EQ(slurp(dir / "empty.dat"), "# t value\n");
  emit_plot_data(dir / "two.dat", {"t", "v"}, {{0.0, 1.0}, {2.0, 3.0}});
  std::istringstream in(slurp(dir / "two.dat"));
  std::string header;
  std::getline(in, header);
  double a, b, c, d;
  in >> a >> b >> c >> d;
  EXPECT_EQ(header, "# t v");
  EXPECT_EQ(a, 0.0);
  EXPECT_EQ(b, 2.0);
  EXPECT_EQ(c, 1.0);
  EXPECT_EQ(d, 3.0);
}

TEST(Experiments, VerifyExactOnABreather) {
  const char* doc = R"({"name": "b", "objects": [{"type": "breather", "alpha": 1, "beta": 1}],
                        "grid": {"L": 50, "n": 4096}})";
  const auto dir = scratch("verify");
  const auto r = run_experiment(parse_scenario(std::string(doc)), Kind::VerifyExact, dir);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.summary["objects"][0]["residual"].get<double>(), 1e-7);
  EXPECT_TRUE(fs::exists(dir / "verify-exact" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "verify-exact" / "resolved-config.json"));
  EXPECT_TRUE(fs::exists(dir / "verify-exact" / "residuals.dat"));
}

TEST(Experiments, ShortConservationRun) {
  const char* doc = R"({"name": "b", "objects": [{"type": "breather", "alpha": 1, "beta": 1}],
                        "grid": {"L": 50, "n": 2048}, "evolution": {"dt": 2.5e-4, "t_end": 1.0, "save_every": 400}})";
  const auto r = run_experiment(parse_scenario(std::string(doc)), Kind::Conservation, scratch("cons"));
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.summary["drift"]["F"].get<double>(), 1e-6);
}

TEST(Experiments, SummariesAreDeterministic) {
  const auto s = parse_scenario(std::string(kFlagship));
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_experiment(s, Kind::Modulate, a);
  run_experiment(s, Kind::Modulate, b);
  EXPECT_EQ(slurp(a / "modulate" / "summary.json"), slurp(b / "modulate" / "summary.json"));
  EXPECT_EQ(slurp(a / "modulate" / "resolved-config.json"), slurp(b / "modulate" / "resolved-config.json"));
}

TEST(Experiments, KindNames) {
  for (Kind k : all_kinds) EXPECT_EQ(parse_kind(to_string(k)), k);
  EXPECT_THROW(parse_kind("nope"), InvalidArgument);
}
