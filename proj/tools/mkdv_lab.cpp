// Command-line driver for the experiment layer.
//
//   mkdv_lab <kind> --scenario file.json [--out dir] [--override key=value]...
//   mkdv_lab all --scenario file.json [--jobs N]
//
// Exit status: 0 pass, 1 threshold fail, 2 invalid input, 3 runtime failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "mkdv/lab/experiments.hpp"

namespace {

using namespace mkdv;
using namespace mkdv::lab;

enum Status { Pass = 0, ThresholdFail = 1, BadInput = 2, RuntimeFailure = 3 };

struct Outcome {
  Status status;
  std::string line;
};

Outcome run_one(const Scenario& s, Kind kind, const std::string& out) {
  const std::string name = to_string(kind);
  try {
    const auto r = run_experiment(s, kind, out);
    return {r.passed ? Pass : ThresholdFail,
            name + ": " + (r.passed ? "PASS" : "FAIL") + " (" + (fs::path(out) / name / "summary.json").string() + ")"};
  } catch (const InvalidArgument& e) {
    return {BadInput, name + ": invalid input: " + e.what()};
  } catch (const EmptyAdmissibleInterval& e) {
    return {BadInput, name + ": invalid input: " + e.what()};
  } catch (const Error& e) {
    return {RuntimeFailure, name + ": runtime failure: " + e.what()};
  } catch (const std::exception& e) {
    return {RuntimeFailure, name + ": runtime failure: " + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for mKdV solitons, breathers and their Lyapunov functionals"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  std::vector<std::string> overrides;
  int jobs = 1;

  std::vector<CLI::App*> subs;
  for (Kind k : all_kinds) subs.push_back(app.add_subcommand(to_string(k), "run the " + to_string(k) + " experiment"));
  subs.push_back(app.add_subcommand("all", "run every experiment"));
  for (auto* sub : subs) {
    sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sub->add_option("--out", out_dir, "output directory (default: scenario output_dir or $MKDV_OUT)");
    sub->add_option("--override", overrides, "key.path=value applied to the scenario document");
  }
  subs.back()->add_option("--jobs", jobs, "experiments run concurrently")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : BadInput;
  }

  Scenario s = [&]() -> Scenario {
    try {
      return load_scenario(scenario_path, overrides);
    } catch (const InvalidArgument& e) {
      std::cerr << "invalid scenario: " << e.what() << '\n';
      std::exit(BadInput);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "invalid scenario: " << e.what() << '\n';
      std::exit(BadInput);
    }
  }();
  if (out_dir.empty()) {
    const char* env = std::getenv("MKDV_OUT");
    out_dir = env ? env : s.output_dir;
  }

  std::vector<Kind> kinds;
  for (std::size_t i = 0; i + 1 < subs.size(); ++i)
    if (subs[i]->parsed()) kinds.push_back(all_kinds[i]);
  if (subs.back()->parsed()) kinds.assign(std::begin(all_kinds), std::end(all_kinds));

  std::vector<Outcome> outcomes;
  if (jobs <= 1 || kinds.size() == 1) {
    for (Kind k : kinds) outcomes.push_back(run_one(s, k, out_dir));
  } else {
    // workers share only the immutable scenario
    for (std::size_t start = 0; start < kinds.size(); start += static_cast<std::size_t>(jobs)) {
      std::vector<std::future<Outcome>> batch;
      for (std::size_t i = start; i < std::min(kinds.size(), start + jobs); ++i)
        batch.push_back(std::async(std::launch::async, run_one, std::cref(s), kinds[i], out_dir));
      for (auto& f : batch) outcomes.push_back(f.get());
    }
  }

  int status = Pass;
  for (const auto& o : outcomes) {
    std::cout << o.line << '\n';
    status = std::max(status, static_cast<int>(o.status));
  }
  return status;
}
