#pragma once
// Kolmogorov–Sinai entropy of cat-map invariant measures: exact values for
// model measures and the Brin–Katok Bowen-ball estimator on sample clouds.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "semiclass/classical.hpp"
#include "semiclass/kernels.hpp"
#include "semiclass/measures.hpp"

namespace semiclass {

// Periodic orbit → 0, Lebesgue → λ₊, mixtures → affine combination.
double model_entropy(const ModelMeasure& m, const CatMap& map);

// Weighted point sample of a probability measure on T².
class SampleCloud {
 public:
  // Weights are normalized to sum 1. Throws InvalidArgument on size mismatch,
  // negative weights, zero total or an empty point list.
  SampleCloud(std::vector<TorusPoint> points, std::vector<double> weights, std::string source);

  static SampleCloud uniform(std::size_t n, std::uint64_t seed);
  // n equally weighted points cycling through the orbit.
  static SampleCloud atoms(const std::vector<TorusPoint>& orbit, std::size_t n);
  // Lebesgue draws uniformly, orbits give atoms, a mixture splits n as
  // round(α·n) / n − round(α·n) between its components.
  static SampleCloud from_model(const ModelMeasure& m, std::size_t n, std::uint64_t seed);
  // Inverse-CDF draw over grid cells, with uniform jitter inside the cell.
  static SampleCloud from_husimi(const HusimiGrid& g, std::size_t n, std::uint64_t seed);

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<TorusPoint>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::vector<TorusPoint> points_;
  std::vector<double> weights_;
  std::string source_;
};

// The cloud pushed through M^t for every t of the Bowen window of T, stored
// one structure-of-arrays slice per time step.
class CloudOrbit {
 public:
  CloudOrbit(const CatMap& map, const SampleCloud& cloud, int T);

  int T() const noexcept { return t_; }
  const CatMap& map() const noexcept { return map_; }
  std::size_t size() const noexcept { return weights_.size(); }
  // Mass of the Bowen ball B_T(rho, eps) and of the plain eps-ball at t = 0.
  kernels::BallMass ball_mass(TorusPoint rho, double eps) const;

 private:
  CatMap map_;
  std::vector<double> weights_;
  int t_;
  BowenWindow window_;
  std::vector<std::vector<double>> xs_, xis_;
};

// How the Bowen-ball mass is turned into a local entropy.
enum class BallNormalization {
  None,         // −(1/T)·log μ(B_T(ρ, ε))
  InitialBall,  // −(1/T)·log(μ(B_T(ρ, ε)) / μ(B_0(ρ, ε))), the default
};

struct EmptyBall {
  int T = 0;
  double eps = 0.0;
};

struct LocalEntropy {
  double value = 0.0;
  double ball_mass = 0.0;
  double initial_mass = 0.0;
};

using LocalEntropyResult = std::variant<LocalEntropy, EmptyBall>;

// Requires T ≥ 2, 0 < eps < 0.25 and a nonempty cloud.
LocalEntropyResult brin_katok_local(const CatMap& map, const SampleCloud& cloud, TorusPoint rho,
                                    int T, double eps,
                                    BallNormalization norm = BallNormalization::InitialBall);
LocalEntropyResult brin_katok_local(const CloudOrbit& orbit, TorusPoint rho, double eps,
                                    BallNormalization norm = BallNormalization::InitialBall);

struct EntropyEstimate {
  double value = 0.0;  // nats per step
  int T_used = 0;
  double eps_used = 0.0;
  double standard_error = 0.0;
  std::size_t empty_ball_count = 0;
  std::size_t centers_used = 0;
};

// Mean local entropy over n_centers centres drawn from the cloud by weight
// (seeded; the draw is made before any parallel work). EmptyBall centres are
// skipped and counted; more than half empty raises UnderResolved.
// Requires n_centers ≥ 10.
EntropyEstimate ks_entropy_estimate(const CatMap& map, const SampleCloud& cloud, int T, double eps,
                                    std::size_t n_centers, std::uint64_t seed = 0,
                                    BallNormalization norm = BallNormalization::InitialBall);
// Reuses a precomputed orbit of the same cloud.
EntropyEstimate ks_entropy_estimate(const CloudOrbit& orbit, const SampleCloud& cloud, double eps,
                                    std::size_t n_centers, std::uint64_t seed = 0,
                                    BallNormalization norm = BallNormalization::InitialBall);

// λ₊ − h. Throws InvalidArgument for h < 0.
double ruelle_pesin_gap(double h, const CatMap& map);

struct BoundClause {
  bool pass = false;
  double margin = 0.0;
};

struct EntropyBoundReport {
  double lambda_plus = 0.0;
  BoundClause entropy_bound;  // h ≥ λ₊/2, margin h − λ₊/2
  BoundClause scar_weight;    // α ≤ 1/2, margin (1/2 − α)·λ₊
  bool pass() const noexcept { return entropy_bound.pass && scar_weight.pass; }
};

// Throws InvalidArgument unless alpha ∈ [0, 1].
EntropyBoundReport entropy_bound_check(double h, const CatMap& map, double alpha);

struct SweepRow {
  int T = 0;
  double eps = 0.0;
  double estimate = 0.0;  // NaN when under-resolved
  double standard_error = 0.0;
  std::size_t empty_ball_count = 0;
  bool under_resolved = false;
};

// Estimates over the grid T × eps sharing one cloud orbit per T.
std::vector<SweepRow> entropy_sweep(const CatMap& map, const SampleCloud& cloud,
                                    const std::vector<int>& Ts, const std::vector<double>& epss,
                                    std::size_t n_centers, std::uint64_t seed = 0);

}  // namespace semiclass
