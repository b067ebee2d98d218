// Command-line front end: runs one or more experiment suites and prints a
// PASS/FAIL line per check.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "semiclass/errors.hpp"
#include "semiclass/experiment.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

void print_nested(const std::exception& e, int depth = 0) {
  std::cerr << std::string(static_cast<std::size_t>(depth) * 2, ' ') << e.what() << '\n';
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_nested(inner, depth + 1);
  }
}

std::vector<std::string> expand_experiments(const std::string& list) {
  if (list == "all") return semiclass::experiment_names();
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    if (comma > pos) out.push_back(list.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

void print_report(const semiclass::RunReport& r) {
  for (const auto& c : r.checks)
    std::printf("%s  %-40s value=%-14.6g margin=%.6g\n", c.pass ? "PASS" : "FAIL",
                (r.experiment + "/" + c.name).c_str(), c.value, c.margin);
  for (const auto& n : r.notes) std::printf("note  %s: %s\n", r.experiment.c_str(), n.c_str());
  std::printf("%s  %s (%.2f s)\n", r.pass() ? "PASS" : "FAIL", r.experiment.c_str(), r.wall_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum chaos laboratory: torus maps, semiclassical measures, billiards"};
  std::string experiment;
  std::optional<std::string> config_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool parallel = false, dump_state = false, list = false;
  std::vector<std::string> sets;
  app.add_option("-e,--experiment", experiment,
                 "Suite name, comma-separated list, or 'all'");
  app.add_option("-c,--config", config_path, "key = value configuration file");
  app.add_option("-o,--out", out_dir, "Output directory");
  app.add_option("-s,--seed", seed, "Random seed");
  app.add_flag("--parallel", parallel, "Run several suites concurrently in separate directories");
  app.add_flag("--dump-state", dump_state, "Write propagators and scarred states as binary containers");
  app.add_option("--set", sets, "Override a config key (key=value); repeatable");
  app.add_flag("--list", list, "List the available suites");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& n : semiclass::experiment_names()) std::cout << n << '\n';
    return 0;
  }

  Overrides overrides;
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "--set expects key=value, got '" << s << "'\n";
      return 2;
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (out_dir) overrides.emplace_back("out", *out_dir);
  if (seed) overrides.emplace_back("seed", std::to_string(*seed));
  if (dump_state) overrides.emplace_back("dump_state", "true");

  std::vector<semiclass::ExperimentConfig> configs;
  try {
    const auto base = semiclass::parse_config(config_path, overrides);
    const std::vector<std::string> names =
        experiment.empty() ? std::vector<std::string>{base.experiment} : expand_experiments(experiment);
    for (const std::string& name : names) {
      Overrides o = overrides;
      o.emplace_back("experiment", name);
      auto cfg = semiclass::parse_config(config_path, o);
      if (names.size() > 1) cfg.out = base.out / name;
      configs.push_back(cfg);
    }
  } catch (const semiclass::Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }

  bool all_pass = true;
  bool failed = false;
  auto run = [](const semiclass::ExperimentConfig& cfg) { return semiclass::run_experiment(cfg); };
  if (parallel && configs.size() > 1) {
    std::vector<std::future<semiclass::RunReport>> jobs;
    for (const auto& cfg : configs) jobs.push_back(std::async(std::launch::async, run, cfg));
    for (auto& j : jobs) {
      try {
        const auto r = j.get();
        print_report(r);
        all_pass = all_pass && r.pass();
      } catch (const std::exception& e) {
        print_nested(e);
        failed = true;
      }
    }
  } else {
    for (const auto& cfg : configs) {
      try {
        const auto r = run(cfg);
        print_report(r);
        all_pass = all_pass && r.pass();
      } catch (const std::exception& e) {
        print_nested(e);
        failed = true;
      }
    }
  }
  if (failed) return 3;
  return all_pass ? 0 : 1;
}
