#include "semiclass/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "semiclass/billiard_quantum.hpp"
#include "semiclass/classical.hpp"
#include "semiclass/entropy.hpp"
#include "semiclass/errors.hpp"
#include "semiclass/io.hpp"
#include "semiclass/measures.hpp"
#include "semiclass/spectral.hpp"
#include "semiclass/torus_quantum.hpp"

namespace semiclass {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"egorov",          "qe-catmap",        "scar-construction",
                                              "entropy-sweep",   "billiard-circle",  "billiard-stadium",
                                              "ergodic-orbit"};
  return names;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* expected) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + v + "'");
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long r = std::stoll(v, &used);
    if (used != v.size()) bad_value(key, v, "an integer");
    return r;
  } catch (const std::logic_error&) {
    bad_value(key, v, "an integer");
  }
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const std::int64_t r = to_int(key, v);
  if (r < 0) bad_value(key, v, "a non-negative integer");
  return static_cast<std::size_t>(r);
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(r)) bad_value(key, v, "a finite real number");
    return r;
  } catch (const std::logic_error&) {
    bad_value(key, v, "a finite real number");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& v, F conv) {
  std::vector<T> out;
  for (const std::string& item : split_list(v)) out.push_back(static_cast<T>(conv(key, item)));
  if (out.empty()) bad_value(key, v, "a nonempty comma-separated list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& v)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"experiment", [](auto& c, auto&, auto& v) { c.experiment = v; }},
      {"out", [](auto& c, auto&, auto& v) { c.out = v; }},
      {"N",
       [](auto& c, auto& k, auto& v) {
         c.Ns = to_list<int>(k, v, to_int);
         c.Ns_explicit = true;
       }},
      {"map",
       [](auto& c, auto& k, auto& v) {
         const auto e = to_list<std::int64_t>(k, v, to_int);
         if (e.size() != 4) bad_value(k, v, "four integers a,b,c,d");
         c.map_a = e[0];
         c.map_b = e[1];
         c.map_c = e[2];
         c.map_d = e[3];
       }},
      {"t_max", [](auto& c, auto& k, auto& v) { c.t_max = static_cast<int>(to_int(k, v)); }},
      {"mode_cutoff", [](auto& c, auto& k, auto& v) { c.mode_cutoff = static_cast<int>(to_int(k, v)); }},
      {"husimi_grid", [](auto& c, auto& k, auto& v) { c.husimi_grid = static_cast<int>(to_int(k, v)); }},
      {"scar_eps", [](auto& c, auto& k, auto& v) { c.scar_eps = to_real(k, v); }},
      {"samples", [](auto& c, auto& k, auto& v) { c.samples = to_count(k, v); }},
      {"T", [](auto& c, auto& k, auto& v) { c.Ts = to_list<int>(k, v, to_int); }},
      {"eps", [](auto& c, auto& k, auto& v) { c.epss = to_list<double>(k, v, to_real); }},
      {"centers", [](auto& c, auto& k, auto& v) { c.centers = to_count(k, v); }},
      {"half_length", [](auto& c, auto& k, auto& v) { c.half_length = to_real(k, v); }},
      {"radius", [](auto& c, auto& k, auto& v) { c.radius = to_real(k, v); }},
      {"h", [](auto& c, auto& k, auto& v) { c.h = to_real(k, v); }},
      {"k_windows", [](auto& c, auto& k, auto& v) { c.k_windows = to_list<double>(k, v, to_real); }},
      {"window_halfwidth", [](auto& c, auto& k, auto& v) { c.window_halfwidth = to_real(k, v); }},
      {"tube_fraction", [](auto& c, auto& k, auto& v) { c.tube_fraction = to_real(k, v); }},
      {"bounces", [](auto& c, auto& k, auto& v) { c.bounces = to_count(k, v); }},
      {"short_bounces", [](auto& c, auto& k, auto& v) { c.short_bounces = to_count(k, v); }},
      {"seed",
       [](auto& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_count(k, v)); }},
      {"dump_state", [](auto& c, auto& k, auto& v) { c.dump_state = to_bool(k, v); }},
  };
  return table;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, key, value);
}

[[noreturn]] void precondition(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': precondition " + what + " violated");
}

bool quantum_suite(const std::string& name) {
  return name == "egorov" || name == "qe-catmap" || name == "scar-construction";
}

}  // namespace

void validate(const ExperimentConfig& c) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    throw ConfigError("unknown experiment '" + c.experiment + "'");
  if (c.out.empty()) precondition("out", "nonempty output directory");
  for (int n : c.Ns)
    if (n < 1) precondition("N", "N >= 1 (got N = " + std::to_string(n) + ")");
  try {
    const CatMap m(c.map_a, c.map_b, c.map_c, c.map_d);
    if (quantum_suite(c.experiment) && !m.matrix().quantizable())
      precondition("map", "checkerboard condition (a*b and c*d even)");
  } catch (const InvalidMap& e) {
    precondition("map", std::string("det = 1 and |trace| > 2: ") + e.what());
  }
  if (c.t_max < 1) precondition("t_max", "t_max >= 1");
  if (c.mode_cutoff < 1) precondition("mode_cutoff", "mode_cutoff >= 1");
  if (c.husimi_grid != 0 && c.husimi_grid < 8) precondition("husimi_grid", "0 or >= 8");
  if (!(c.scar_eps > 0.0 && c.scar_eps < 0.5)) precondition("scar_eps", "0 < eps < 0.5");
  if (c.samples < 1) precondition("samples", "samples >= 1");
  for (int t : c.Ts)
    if (t < 2) precondition("T", "T >= 2");
  for (double e : c.epss)
    if (!(e > 0.0 && e < 0.25)) precondition("eps", "0 < eps < 0.25");
  if (c.centers < 10) precondition("centers", "centers >= 10");
  if (c.half_length < 0.0) precondition("half_length", "half_length >= 0");
  if (!(c.radius > 0.0)) precondition("radius", "radius > 0");
  if (!(c.h > 0.0)) precondition("h", "h > 0");
  if (!(c.window_halfwidth > 0.0)) precondition("window_halfwidth", "window_halfwidth > 0");
  for (double k : c.k_windows) {
    if (!(k - c.window_halfwidth > 0.0)) precondition("k_windows", "k - window_halfwidth > 0");
    if (!((k + c.window_halfwidth) * c.h < 0.5)) precondition("k_windows", "(k + halfwidth)*h < 0.5");
  }
  if (!(c.tube_fraction > 0.0 && c.tube_fraction < 0.5))
    precondition("tube_fraction", "0 < tube_fraction < 0.5");
  if (c.bounces < 1) precondition("bounces", "bounces >= 1");
  if (c.short_bounces < 1) precondition("short_bounces", "short_bounces >= 1");
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  for (const auto& [k, v] : overrides) apply_setting(cfg, trim(k), trim(v));
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(const std::optional<std::filesystem::path>& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::string text;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file " + path->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config_text(text, overrides);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

bool RunReport::pass() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["pass"] = pass();
  j["wall_seconds"] = wall_seconds;
  j["checks"] = nlohmann::json::array();
  for (const CheckResult& c : checks)
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"value", finite_or_null(c.value)},
                           {"threshold", finite_or_null(c.threshold)},
                           {"margin", finite_or_null(c.margin)}});
  j["artifacts"] = artifacts;
  j["notes"] = notes;
  return j;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

namespace {

struct Context {
  const ExperimentConfig& cfg;
  RunReport& report;
  std::filesystem::path file(const std::string& name) {
    report.artifacts.push_back(name);
    return cfg.out / name;
  }
  void below(const std::string& name, double value, double limit) {
    report.checks.push_back({name, value < limit, value, limit, limit - value});
  }
  void above(const std::string& name, double value, double limit) {
    report.checks.push_back({name, value > limit, value, limit, value - limit});
  }
  void within(const std::string& name, double value, double lo, double hi) {
    const double margin = std::min(value - lo, hi - value);
    report.checks.push_back({name, margin >= 0.0, value, margin == value - lo ? lo : hi, margin});
  }
  void flag(const std::string& name, bool ok, double value = 0.0) {
    report.checks.push_back({name, ok, value, 0.0, ok ? 0.0 : -1.0});
  }
};

CatMap config_map(const ExperimentConfig& c) { return {c.map_a, c.map_b, c.map_c, c.map_d}; }

std::vector<int> suite_ns(const ExperimentConfig& c, std::vector<int> fallback) {
  return c.Ns_explicit ? c.Ns : fallback;
}

std::string tag(double k) {
  std::string s = io::format_double(k);
  std::replace(s.begin(), s.end(), '.', 'p');
  return "k" + s;
}

// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return std::nan("");
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Modes m ≠ 0 with max(|m1|, |m2|) ≤ k in the upper half-plane, so each cosine
// and sine appears once.
std::vector<Mode> half_plane_modes(int k) {
  std::vector<Mode> out;
  for (int m1 = 0; m1 <= k; ++m1)
    for (int m2 = -k; m2 <= k; ++m2)
      if (m1 > 0 || m2 > 0) out.push_back({m1, m2});
  return out;
}

void suite_egorov(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const CatMap map = config_map(cfg);
  const std::vector<Mode> modes = half_plane_modes(cfg.mode_cutoff);
  const std::vector<Mode> shifts{{1, 0}, {0, 1}, {1, 1}, {2, -1}, {3, 2}};
  double worst_egorov = 0.0, worst_unitary = 0.0, worst_intertwine = 0.0;
  std::vector<io::CsvRow> rows, unit_rows;
  const std::vector<int> ns = suite_ns(cfg, {64, 128, 256, 512});
  for (int n : ns) {
    const TorusHilbert h(n);
    const ComplexMatrix u = cat_propagator(h, map);
    const double ud = unitarity_defect(u);
    double id = 0.0;
    for (Mode s : shifts) id = std::max(id, intertwining_defect(h, u, map.matrix(), s));
    worst_unitary = std::max(worst_unitary, ud);
    worst_intertwine = std::max(worst_intertwine, id);
    unit_rows.push_back({static_cast<std::int64_t>(n), ud, id});
    std::vector<ComplexMatrix> powers{u};
    for (int t = 2; t <= cfg.t_max; ++t) powers.push_back(powers.back() * u);
    for (Mode m : modes)
      for (int kind = 0; kind < 2; ++kind) {
        const TrigObservable a = kind == 0 ? TrigObservable::cos_mode(m) : TrigObservable::sin_mode(m);
        for (int t = 1; t <= cfg.t_max; ++t) {
          const double d = egorov_defect_with_power(h, powers[t - 1], map, a, t);
          worst_egorov = std::max(worst_egorov, d);
          rows.push_back({static_cast<std::int64_t>(n), m.m1, m.m2,
                          std::string(kind == 0 ? "cos" : "sin"), static_cast<std::int64_t>(t), d});
        }
      }
    if (cfg.dump_state && n == ns.back())
      io::write_operator(ctx.file("propagator_N" + std::to_string(n) + ".sclb"), u);
  }
  io::write_csv(ctx.file("egorov_defects.csv"), {"N", "m1", "m2", "kind", "t", "defect"}, rows);
  io::write_csv(ctx.file("propagator_defects.csv"), {"N", "unitarity", "intertwining"}, unit_rows);
  ctx.below("egorov_max_defect", worst_egorov, 1e-9);
  ctx.below("unitarity_max_defect", worst_unitary, 1e-10);
  ctx.below("intertwining_max_defect", worst_intertwine, 1e-10);
}

void suite_qe_catmap(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const CatMap map = config_map(cfg);
  std::vector<int> ns = suite_ns(cfg, {64, 512});
  std::sort(ns.begin(), ns.end());
  const TrigObservable probe = TrigObservable::cos_mode({1, 0}, 2.0);
  const std::vector<TrigObservable> observables{
      probe, TrigObservable::sin_mode({1, 1}), TrigObservable::cos_mode({2, -1}, 0.5),
      TrigObservable::constant(0.25) + TrigObservable::cos_mode({0, 3})};
  // cos(2π(x + ξ)) has even m1 + m2 and so escapes the half-lattice parity
  // that forces the probe's matrix elements to vanish for N = 2^k.
  const TrigObservable diagonal = TrigObservable::cos_mode({1, 1}, 2.0);
  std::vector<io::CsvRow> summary;
  std::vector<double> variances, diag_variances;
  double worst_avg = 0.0, worst_residual = 0.0;
  for (int n : ns) {
    const TorusHilbert h(n);
    const EigenDecomposition dec = diagonalize(cat_propagator(h, map));
    worst_residual = std::max(worst_residual, dec.max_residual);
    const std::string sfx = "_N" + std::to_string(n);
    io::write_eigenphases(ctx.file("eigenphases" + sfx + ".csv"), dec, degeneracy_clusters(dec.phases));
    double avg_err = 0.0;
    for (const TrigObservable& a : observables) {
      const std::vector<double> mu = eigenbasis_matrix_elements(h, dec, a);
      double s = 0.0;
      for (double x : mu) s += x;
      avg_err = std::max(avg_err, std::abs(s / n - a.mean()));
    }
    worst_avg = std::max(worst_avg, avg_err);
    const std::vector<double> mu = eigenbasis_matrix_elements(h, dec, probe);
    std::vector<io::CsvRow> rows;
    for (std::size_t i = 0; i < mu.size(); ++i)
      rows.push_back({static_cast<std::int64_t>(i), dec.phases[i], mu[i]});
    io::write_csv(ctx.file("qe_matrix_elements" + sfx + ".csv"), {"index", "phase", "mu"}, rows);
    const double var = qe_variance(h, dec, probe);
    const double dvar = qe_variance(h, dec, diagonal);
    variances.push_back(var);
    diag_variances.push_back(dvar);
    summary.push_back({static_cast<std::int64_t>(n), var, dvar, avg_err, dec.max_residual});
    const HusimiGrid g = husimi(h, dec.vectors.col(0), cfg.husimi_grid ? cfg.husimi_grid
                                                                        : default_husimi_grid(n));
    io::write_husimi_pgm(ctx.file("eigenstate0_husimi" + sfx + ".pgm"), g);
  }
  io::write_csv(ctx.file("qe_summary.csv"), {"N", "variance_cos_x", "variance_cos_x_plus_xi", "basis_average_error",
                 "max_residual"},
                summary);
  ctx.below("basis_average_identity", worst_avg, 1e-10);
  ctx.below("eigenpair_residual", worst_residual, 1e-10);
  if (variances.size() >= 2) {
    ctx.below("qe_variance_decreases", variances.back(), variances.front());
    ctx.below("qe_variance_decreases_cos_x_plus_xi", diag_variances.back(), diag_variances.front());
  } else
    ctx.report.notes.push_back("qe_variance_decreases skipped: a single N was given");
}

void suite_scar(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const CatMap map = config_map(cfg);
  const double lambda = cat_lyapunov(map).lambda_plus;
  const TorusPoint origin{0.0, 0.0};
  const ModelMeasure atom = ModelMeasure::periodic_orbit(map, {origin});
  const ModelMeasure leb = ModelMeasure::lebesgue();
  const ModelMeasure half = ModelMeasure::mixture(0.5, atom, leb);
  std::vector<io::CsvRow> rows;
  int admissible = 0, passing = 0;
  for (int n : suite_ns(cfg, {56, 195, 260, 390, 780})) {
    const TorusHilbert h(n);
    const int p_max = static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n)) / lambda));
    const ComplexMatrix u = cat_propagator(h, map);
    const auto period = quantum_period(h, u, map, p_max);
    if (!period) {
      ctx.report.notes.push_back("N = " + std::to_string(n) + ": no quantum period <= " +
                                 std::to_string(p_max) + ", skipped");
      continue;
    }
    ++admissible;
    const ScarredState s = scarred_state(h, u, map, default_scar_window(h, map, period));
    const int grid = cfg.husimi_grid ? cfg.husimi_grid : default_husimi_grid(n);
    const HusimiGrid g = husimi(h, s.state, grid);
    const double mass = ball_mass(g, origin, cfg.scar_eps);
    const int cutoff = std::min(kDefaultWeakStarCutoff, (n - 1) / 2);
    const WignerCoefficients w = wigner_coefficients(h, s.state, cutoff);
    const double d_half = weak_star_distance(w, half, cutoff);
    const double d_leb = weak_star_distance(w, leb, cutoff);
    const double d_atom = weak_star_distance(w, atom, cutoff);
    const std::string sfx = "_N" + std::to_string(n);
    rows.push_back({static_cast<std::int64_t>(n), static_cast<std::int64_t>(period->P),
                    static_cast<std::int64_t>(s.t_half), s.theta, s.residual, mass, d_half, d_leb,
                    d_atom});
    io::write_husimi_csv(ctx.file("scar_husimi" + sfx + ".csv"), g);
    io::write_husimi_pgm(ctx.file("scar_husimi" + sfx + ".pgm"), g);
    io::write_wigner_csv(ctx.file("scar_wigner" + sfx + ".csv"), w);
    if (cfg.dump_state) io::write_state(ctx.file("scar_state" + sfx + ".sclb"), s.state);
    const bool mass_ok = mass >= 0.35 && mass <= 0.60;
    const bool nearest_ok = d_half < std::min(d_leb, d_atom);
    if (mass_ok && nearest_ok) ++passing;
    ctx.report.notes.push_back("N = " + std::to_string(n) + ": ball mass " + io::format_double(mass) +
                               (mass_ok ? " in" : " outside") + " [0.35, 0.60], half mixture " +
                               (nearest_ok ? "is" : "is not") + " the nearest model");
  }
  io::write_csv(ctx.file("scar_summary.csv"),
                {"N", "period", "t_half", "theta", "residual", "ball_mass", "d_half_mixture",
                 "d_lebesgue", "d_atom"},
                rows);
  ctx.report.notes.push_back(std::to_string(admissible) + " admissible N values");
  ctx.report.checks.push_back({"scar_half_weight_N_count", passing >= 3, static_cast<double>(passing),
                               3.0, passing - 3.0});
}

void suite_entropy(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const CatMap map = config_map(cfg);
  const double lambda = cat_lyapunov(map).lambda_plus;
  const ModelMeasure atom = ModelMeasure::periodic_orbit(map, {TorusPoint{0.0, 0.0}});
  const ModelMeasure leb = ModelMeasure::lebesgue();
  const ModelMeasure half = ModelMeasure::mixture(0.5, atom, leb);

  const double h_atom = model_entropy(atom, map);
  ctx.flag("model_entropy_atoms_exact", h_atom == 0.0, h_atom);
  const double leb_exact = map.matrix() == Sl2z(2, 1, 3, 2) ? std::log(2.0 + std::sqrt(3.0)) : lambda;
  ctx.below("model_entropy_lebesgue_exact", std::abs(model_entropy(leb, map) - leb_exact), 1e-14);
  double affine = 0.0;
  for (double a : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
    const double h = model_entropy(ModelMeasure::mixture(a, atom, leb), map);
    affine = std::max(affine, std::abs(h - (1.0 - a) * lambda));
  }
  ctx.below("model_entropy_affine", affine, 1e-14);

  // Brin–Katok estimates at the pinned resolution.
  const int T = 8;
  const double eps = 0.1;
  const SampleCloud uni = SampleCloud::uniform(cfg.samples, cfg.seed);
  const SampleCloud atoms = SampleCloud::atoms(atom.orbit(), cfg.samples);
  const SampleCloud mix = SampleCloud::from_model(half, cfg.samples, cfg.seed + 1);
  const EntropyEstimate e_leb = ks_entropy_estimate(map, uni, T, eps, cfg.centers, cfg.seed);
  const EntropyEstimate e_atoms = ks_entropy_estimate(map, atoms, T, eps, cfg.centers, cfg.seed);
  const EntropyEstimate e_mix = ks_entropy_estimate(map, mix, T, eps, cfg.centers, cfg.seed);
  ctx.below("brin_katok_lebesgue_rel_error", std::abs(e_leb.value - lambda) / lambda, 0.15);
  ctx.below("brin_katok_atoms_abs_error", std::abs(e_atoms.value), 0.05);
  ctx.below("brin_katok_mixture_rel_error", std::abs(e_mix.value - 0.5 * lambda) / (0.5 * lambda),
            0.20);
  io::write_csv(ctx.file("entropy_estimates.csv"),
                {"measure", "exact", "estimate", "stderr", "empty_ball_count", "centers_used"},
                {{std::string("lebesgue"), lambda, e_leb.value, e_leb.standard_error,
                  static_cast<std::int64_t>(e_leb.empty_ball_count),
                  static_cast<std::int64_t>(e_leb.centers_used)},
                 {std::string("atoms"), 0.0, e_atoms.value, e_atoms.standard_error,
                  static_cast<std::int64_t>(e_atoms.empty_ball_count),
                  static_cast<std::int64_t>(e_atoms.centers_used)},
                 {std::string("half_mixture"), 0.5 * lambda, e_mix.value, e_mix.standard_error,
                  static_cast<std::int64_t>(e_mix.empty_ball_count),
                  static_cast<std::int64_t>(e_mix.centers_used)}});

  // Scar-weight bound along the affine family.
  std::vector<io::CsvRow> bound_rows;
  bool exact = true;
  for (double a : {0.0, 0.25, 0.5, 0.5000001, 0.75, 1.0}) {
    const double h = model_entropy(ModelMeasure::mixture(a, atom, leb), map);
    const EntropyBoundReport r = entropy_bound_check(h, map, a);
    exact = exact && r.pass() == (a <= 0.5);
    if (a == 0.5) exact = exact && r.entropy_bound.margin == 0.0 && r.scar_weight.margin == 0.0;
    bound_rows.push_back({a, h, static_cast<std::int64_t>(r.pass()), r.entropy_bound.margin,
                          r.scar_weight.margin});
  }
  io::write_csv(ctx.file("entropy_bound.csv"),
                {"alpha", "entropy", "pass", "entropy_margin", "weight_margin"}, bound_rows);
  ctx.flag("entropy_bound_exact_on_affine_family", exact);

  io::write_entropy_sweep(ctx.file("entropy_sweep_lebesgue.csv"),
                          entropy_sweep(map, uni, cfg.Ts, cfg.epss, cfg.centers, cfg.seed));
  io::write_entropy_sweep(ctx.file("entropy_sweep_half_mixture.csv"),
                          entropy_sweep(map, mix, cfg.Ts, cfg.epss, cfg.centers, cfg.seed));
}

constexpr double kBesselJ0Zero = 2.404825557695773;

nlohmann::json mode_record(const BilliardMode& m, std::size_t index) {
  return {{"index", index}, {"k", m.k}, {"eigenvalue", m.eigenvalue}, {"residual", m.residual}};
}

BilliardState unit_state(Vec2 p, double angle) {
  return {p, {std::cos(angle), std::sin(angle)}};
}

void suite_circle(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const StadiumDomain disc{0.0, cfg.radius};
  const double oracle = kBesselJ0Zero / cfg.radius;
  EigenSolverOptions opts;
  opts.seed = cfg.seed + 1;
  std::vector<io::CsvRow> rows;
  std::vector<double> errs;
  const std::vector<double> hs{4.0 * cfg.h, 2.0 * cfg.h, cfg.h};
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const DiscreteDomain dom = DiscreteDomain::stadium(disc, hs[i]);
    const SparseMatrix op = build_laplacian(dom);
    const BilliardMode m = eigenmodes_near(dom, op, oracle, 1, opts).front();
    const double err = std::abs(m.k - oracle) / oracle;
    errs.push_back(err);
    rows.push_back({hs[i], static_cast<std::int64_t>(dom.size()), m.k, err, m.residual});
    if (i + 1 == hs.size()) {
      io::write_mode_pgm(ctx.file("circle_ground_mode.pgm"), dom, m);
      const auto jsonl = ctx.file("circle_modes.jsonl");
      std::filesystem::remove(jsonl);
      io::append_jsonl(jsonl, mode_record(m, 0));
      ctx.below("circle_k1_rel_error", err, 0.01);
    }
  }
  io::write_csv(ctx.file("circle_convergence.csv"), {"h", "nodes", "k1", "rel_error", "residual"}, rows);
  const double order = std::log(errs.front() / errs.back()) / std::log(hs.front() / hs.back());
  ctx.within("circle_convergence_order", order, 1.7, 2.3);

  const BilliardState s0 = unit_state({0.3 * cfg.radius, 0.1 * cfg.radius}, 1.0);
  const double l0 = circle_angular_momentum(s0);
  double drift = 0.0;
  for_each_chord(disc, s0, cfg.short_bounces, [&](Vec2 from, Vec2 to) {
    const Vec2 d = (to - from) * (1.0 / (to - from).norm());
    drift = std::max(drift, std::abs(from.x * d.y - from.y * d.x - l0));
  });
  ctx.below("circle_angular_momentum_drift", drift, 1e-9);
  io::write_billiard_orbit(ctx.file("circle_orbit.csv"),
                           billiard_flow(disc, s0, std::min<std::size_t>(cfg.short_bounces, 1000)));
}

void suite_stadium(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const StadiumDomain stadium{cfg.half_length, cfg.radius};
  const DiscreteDomain dom = DiscreteDomain::stadium(stadium, cfg.h);
  const SparseMatrix op = build_laplacian(dom);
  EigenSolverOptions opts;
  opts.seed = cfg.seed + 1;
  const RegionObservable left = regions::left_half();
  std::vector<double> qe_vars;
  for (double k : cfg.k_windows) {
    const std::string t = tag(k);
    const double lo = k - cfg.window_halfwidth, hi = k + cfg.window_halfwidth;
    const std::vector<BilliardMode> modes = eigenmodes_in_window(dom, op, lo, hi, opts);
    std::vector<double> bb, scar;
    std::vector<io::CsvRow> rows;
    const auto jsonl = ctx.file("stadium_modes_" + t + ".jsonl");
    std::filesystem::remove(jsonl);
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const BilliardMode& m = modes[i];
      const double b = cfg.half_length > 0.0 ? bouncing_ball_score(dom, m).ratio : std::nan("");
      const double s = scar_score(dom, m, cfg.tube_fraction * cfg.radius).ratio;
      const double l = position_measure(dom, m, left);
      bb.push_back(b);
      scar.push_back(s);
      rows.push_back({static_cast<std::int64_t>(i), m.k, m.eigenvalue, m.residual, b, s, l});
      nlohmann::json rec = mode_record(m, i);
      rec["bouncing_ball"] = finite_or_null(b);
      rec["scar"] = s;
      rec["left_half"] = l;
      io::append_jsonl(jsonl, rec);
    }
    io::write_csv(ctx.file("stadium_modes_" + t + ".csv"),
                  {"index", "k", "eigenvalue", "residual", "bouncing_ball", "scar", "left_half"}, rows);

    // Gram defect of the window's modes in the grid inner product.
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(dom.size()), static_cast<Eigen::Index>(modes.size()));
    for (std::size_t i = 0; i < modes.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = modes[i].psi;
    Eigen::MatrixXd gram = basis.transpose() * basis * dom.cell_area();
    gram -= Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    ctx.below("mode_orthogonality_" + t, modes.empty() ? 0.0 : gram.cwiseAbs().maxCoeff(), 1e-8);

    const double weyl = stadium.area() / (4.0 * std::numbers::pi) * hi * hi;
    const double counted = static_cast<double>(count_below(op, hi * hi));
    ctx.below("weyl_law_rel_error_" + t, std::abs(counted - weyl) / weyl, 0.15);

    ctx.flag("window_nonempty_" + t, !modes.empty(), static_cast<double>(modes.size()));
    if (modes.empty()) continue;
    if (cfg.half_length > 0.0) {
      const std::size_t best = static_cast<std::size_t>(std::max_element(bb.begin(), bb.end()) - bb.begin());
      io::write_mode_pgm(ctx.file("stadium_bouncing_ball_" + t + ".pgm"), dom, modes[best]);
      ctx.above("bouncing_ball_max_" + t, bb[best], 1.5);
      ctx.within("bouncing_ball_median_" + t, quantile(bb, 0.5), 0.8, 1.2);
    }
    const std::size_t top = static_cast<std::size_t>(std::max_element(scar.begin(), scar.end()) - scar.begin());
    io::write_mode_pgm(ctx.file("stadium_scar_" + t + ".pgm"), dom, modes[top]);
    ctx.above("scar_max_above_p90_" + t, scar[top], quantile(scar, 0.9));
    ctx.within("scar_median_" + t, quantile(scar, 0.5), 0.8, 1.2);
    if (modes.size() >= 10) qe_vars.push_back(qe_spatial_variance(dom, modes, left));
  }
  if (qe_vars.size() >= 2)
    ctx.below("qe_spatial_variance_decreases", qe_vars.back(), qe_vars.front());
}

void suite_ergodic(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const StadiumDomain stadium{cfg.half_length, cfg.radius};
  const BilliardState s0 = unit_state({0.1 * cfg.radius, 0.05 * cfg.radius}, 0.6);
  const double frac = ergodic_average(stadium, s0, HalfPlaneRegion(0.0, true), cfg.bounces);
  ctx.within("left_half_occupation", frac, 0.48, 0.52);
  const CoverageReport cov = billiard_coverage(stadium, s0, 32, 16, cfg.short_bounces);
  ctx.report.checks.push_back({"coverage_32x16_all_cells", cov.cells_visited == cov.cells_in_domain,
                               static_cast<double>(cov.cells_visited),
                               static_cast<double>(cov.cells_in_domain),
                               static_cast<double>(cov.cells_visited) -
                                   static_cast<double>(cov.cells_in_domain)});
  std::vector<io::CsvRow> rows;
  std::vector<double> img(cov.visits.size());
  for (std::size_t iy = 0; iy < 16; ++iy)
    for (std::size_t ix = 0; ix < 32; ++ix) {
      const std::size_t v = cov.visits[iy * 32 + ix];
      rows.push_back({static_cast<std::int64_t>(ix), static_cast<std::int64_t>(iy),
                      static_cast<std::int64_t>(v)});
      img[(15 - iy) * 32 + ix] = static_cast<double>(v);
    }
  io::write_csv(ctx.file("coverage.csv"), {"ix", "iy", "visits"}, rows);
  io::render_grid_pgm(img, 32, 16, ctx.file("coverage.pgm"));
  io::write_billiard_orbit(ctx.file("stadium_orbit.csv"),
                           billiard_flow(stadium, s0, std::min<std::size_t>(cfg.bounces, 1000)));
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  static const std::map<std::string, void (*)(Context&)> suites{
      {"egorov", suite_egorov},          {"qe-catmap", suite_qe_catmap},
      {"scar-construction", suite_scar}, {"entropy-sweep", suite_entropy},
      {"billiard-circle", suite_circle}, {"billiard-stadium", suite_stadium},
      {"ergodic-orbit", suite_ergodic}};
  RunReport report;
  report.experiment = cfg.experiment;
  std::filesystem::create_directories(cfg.out);
  const auto start = std::chrono::steady_clock::now();
  Context ctx{cfg, report};
  try {
    suites.at(cfg.experiment)(ctx);
  } catch (const std::exception&) {
    std::throw_with_nested(Error("experiment '" + cfg.experiment + "' failed"));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.artifacts.push_back("report.json");
  nlohmann::json doc = report.to_json();
  doc["config"] = {{"N", cfg.Ns},
                   {"map", {cfg.map_a, cfg.map_b, cfg.map_c, cfg.map_d}},
                   {"h", cfg.h},
                   {"seed", cfg.seed},
                   {"samples", cfg.samples},
                   {"k_windows", cfg.k_windows}};
  io::write_json(cfg.out / "report.json", doc);
  return report;
}

}  // namespace semiclass
