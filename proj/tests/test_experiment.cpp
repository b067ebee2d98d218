#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>

#include "semiclass/errors.hpp"
#include "semiclass/experiment.hpp"

using namespace semiclass;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "semiclass_test_experiment" / name;
  fs::remove_all(dir);
  return dir;
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return out;
}

const CheckResult* find_check(const RunReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("empty config gives the documented defaults") {
  const ExperimentConfig c = parse_config_text("");
  CHECK(c.experiment == "egorov");
  CHECK(c.Ns == std::vector<int>{512});
  CHECK_FALSE(c.Ns_explicit);
  CHECK(c.map_a == 2);
  CHECK(c.map_b == 1);
  CHECK(c.map_c == 3);
  CHECK(c.map_d == 2);
  CHECK(c.h == 0.01);
  CHECK(c.seed == 0);
}

TEST_CASE("config text and overrides") {
  const std::string text = "# comment\nexperiment = qe-catmap\nN = 64, 128  # trailing\nh=0.02\n\nseed = 7\n";
  const ExperimentConfig c = parse_config_text(text);
  CHECK(c.experiment == "qe-catmap");
  CHECK(c.Ns == std::vector<int>{64, 128});
  CHECK(c.Ns_explicit);
  CHECK(c.h == 0.02);
  CHECK(c.seed == 7);

  const ExperimentConfig o = parse_config_text(text, {{"N", "256"}});
  CHECK(o.Ns == std::vector<int>{256});

  const fs::path dir = fresh_dir("config");
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << text;
  CHECK(parse_config(dir / "run.cfg", {{"N", "32"}}).Ns == std::vector<int>{32});
  CHECK(parse_config(std::nullopt).Ns == std::vector<int>{512});
  CHECK_THROWS_AS(parse_config(dir / "missing.cfg"), ConfigError);
}

TEST_CASE("config errors name the key") {
  const auto message = [](const std::string& text) -> std::string {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  const std::string n0 = message("N = 0");
  CHECK(n0.find("'N'") != std::string::npos);
  CHECK(n0.find("N >= 1") != std::string::npos);
  CHECK(message("colour = blue").find("unknown config key 'colour'") != std::string::npos);
  CHECK(message("h = small").find("'h'") != std::string::npos);
  CHECK(message("map = 1,2,3").find("'map'") != std::string::npos);
  CHECK(message("map = 2,1,1,1").find("'map'") != std::string::npos);
  CHECK(message("just text").find("line 1") != std::string::npos);
  CHECK(message("experiment = nothing").find("unknown experiment") != std::string::npos);
  CHECK_FALSE(message("experiment = billiard-circle").size());
}

TEST_CASE("the Egorov suite passes at small N") {
  ExperimentConfig c;
  c.experiment = "egorov";
  c.Ns = {16, 24};
  c.Ns_explicit = true;
  c.t_max = 3;
  c.mode_cutoff = 2;
  c.out = fresh_dir("egorov");
  const RunReport r = run_experiment(c);
  CHECK(r.pass());
  const CheckResult* e = find_check(r, "egorov_max_defect");
  REQUIRE(e != nullptr);
  CHECK(e->value < 1e-9);
  CHECK(e->margin > 0.0);
  CHECK(fs::exists(c.out / "report.json"));
  for (const auto& a : r.artifacts) CHECK(fs::exists(c.out / a));

  // Every declared check appears exactly once.
  std::map<std::string, int> seen;
  for (const auto& chk : r.checks) ++seen[chk.name];
  for (const auto& [name, n] : seen) CHECK_MESSAGE(n == 1, name);
}

TEST_CASE("the circle suite passes") {
  ExperimentConfig c;
  c.experiment = "billiard-circle";
  c.short_bounces = 10'000;
  c.out = fresh_dir("circle");
  const RunReport r = run_experiment(c);
  CHECK(r.pass());
  const CheckResult* k1 = find_check(r, "circle_k1_rel_error");
  REQUIRE(k1 != nullptr);
  CHECK(k1->value < 0.01);
  const auto json = r.to_json();
  CHECK(json["experiment"] == "billiard-circle");
  CHECK(json["checks"].size() == r.checks.size());
}

TEST_CASE("runs with equal seeds write identical CSV files") {
  for (const char* suite : {"ergodic-orbit", "scar-construction"}) {
    ExperimentConfig c;
    c.experiment = suite;
    c.bounces = 20'000;
    c.short_bounces = 20'000;
    c.seed = 3;
    const fs::path first = fresh_dir(std::string(suite) + "_a");
    c.out = first;
    run_experiment(c);
    c.out = fresh_dir(std::string(suite) + "_b");
    run_experiment(c);
    const auto a = csv_files(first);
    const auto b = csv_files(c.out);
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);
  }
}

TEST_CASE("unknown experiments are rejected") {
  ExperimentConfig c;
  c.experiment = "nope";
  c.out = fresh_dir("nope");
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  CHECK(experiment_names().size() == 7);
}
