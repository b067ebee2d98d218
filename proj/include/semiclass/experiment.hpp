#pragma once
// Named experiment suites, their configuration and their JSON run reports.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace semiclass {

// Every suite accepted by run_experiment, in canonical order.
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  std::string experiment = "egorov";
  std::filesystem::path out = "out";

  // Torus side. `N` holds the Hilbert-space dimensions; when it is not given
  // explicitly each suite substitutes its own list (see README).
  std::vector<int> Ns{512};
  bool Ns_explicit = false;
  std::int64_t map_a = 2, map_b = 1, map_c = 3, map_d = 2;
  int t_max = 5;         // Egorov times 1..t_max
  int mode_cutoff = 3;   // observables with max(|m1|, |m2|) ≤ mode_cutoff
  int husimi_grid = 0;   // 0 selects the default grid for each N
  double scar_eps = 0.1;

  // Entropy estimation.
  std::size_t samples = 1'000'000;
  std::vector<int> Ts{4, 6, 8};
  std::vector<double> epss{0.1, 0.15};
  std::size_t centers = 400;

  // Billiards.
  double half_length = 1.0;
  double radius = 1.0;
  double h = 0.01;
  std::vector<double> k_windows{15.0};
  double window_halfwidth = 1.0;
  double tube_fraction = 0.1;  // scar tube half-width as a fraction of r
  std::size_t bounces = 1'000'000;
  std::size_t short_bounces = 100'000;  // coverage and angular-momentum runs

  std::uint64_t seed = 0;
  bool dump_state = false;
};

// Parses key = value lines ('#' starts a comment) and then applies the
// overrides in order, so overrides win. Unknown keys, malformed values and
// failed preconditions raise ConfigError naming the key.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::pair<std::string, std::string>>& overrides = {});
ExperimentConfig parse_config(const std::optional<std::filesystem::path>& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {});
// Re-checks every precondition; parse_config calls this before returning.
void validate(const ExperimentConfig& cfg);

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  // Signed distance to the threshold, positive when passing.
  double margin = 0.0;
};

struct RunReport {
  std::string experiment;
  std::vector<CheckResult> checks;
  double wall_seconds = 0.0;
  std::vector<std::string> artifacts;  // relative to the output directory
  std::vector<std::string> notes;

  bool pass() const noexcept;
  nlohmann::json to_json() const;
};

// Runs cfg.experiment, writes its artifacts and report.json into cfg.out and
// returns the report. Unknown names raise ConfigError; library errors are
// rethrown with the suite name prefixed.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace semiclass
