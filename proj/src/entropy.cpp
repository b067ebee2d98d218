#include "semiclass/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "semiclass/errors.hpp"
#include "semiclass/parallel.hpp"

namespace semiclass {

double model_entropy(const ModelMeasure& m, const CatMap& map) {
  switch (m.kind()) {
    case ModelMeasure::Kind::Lebesgue:
      return cat_lyapunov(map).lambda_plus;
    case ModelMeasure::Kind::PeriodicOrbit:
      return 0.0;
    case ModelMeasure::Kind::Mixture:
      return m.alpha() * model_entropy(m.first(), map) +
             (1.0 - m.alpha()) * model_entropy(m.second(), map);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Sample clouds

SampleCloud::SampleCloud(std::vector<TorusPoint> points, std::vector<double> weights,
                         std::string source)
    : points_(std::move(points)), weights_(std::move(weights)), source_(std::move(source)) {
  if (points_.empty()) throw InvalidArgument("SampleCloud: no points");
  if (points_.size() != weights_.size())
    throw InvalidArgument("SampleCloud: point and weight counts differ");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("SampleCloud: negative or non-finite weight");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("SampleCloud: weights sum to zero");
  for (double& w : weights_) w /= total;
}

namespace {

void draw_uniform(std::mt19937_64& rng, std::size_t n, std::vector<TorusPoint>& out) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng);
    const double xi = u(rng);
    out.push_back(TorusPoint::reduced(x, xi));
  }
}

void draw_model(const ModelMeasure& m, std::size_t n, std::mt19937_64& rng,
                std::vector<TorusPoint>& out) {
  switch (m.kind()) {
    case ModelMeasure::Kind::Lebesgue:
      draw_uniform(rng, n, out);
      return;
    case ModelMeasure::Kind::PeriodicOrbit:
      for (std::size_t i = 0; i < n; ++i) out.push_back(m.orbit()[i % m.orbit().size()]);
      return;
    case ModelMeasure::Kind::Mixture: {
      const auto na = static_cast<std::size_t>(std::llround(m.alpha() * static_cast<double>(n)));
      draw_model(m.first(), na, rng, out);
      draw_model(m.second(), n - na, rng, out);
      return;
    }
  }
}

}  // namespace

SampleCloud SampleCloud::uniform(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("SampleCloud::uniform: n must be positive");
  std::mt19937_64 rng(seed);
  std::vector<TorusPoint> pts;
  pts.reserve(n);
  draw_uniform(rng, n, pts);
  return SampleCloud(std::move(pts), std::vector<double>(n, 1.0), "uniform");
}

SampleCloud SampleCloud::atoms(const std::vector<TorusPoint>& orbit, std::size_t n) {
  if (orbit.empty() || n == 0) throw InvalidArgument("SampleCloud::atoms: empty orbit or n = 0");
  std::vector<TorusPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(orbit[i % orbit.size()]);
  return SampleCloud(std::move(pts), std::vector<double>(n, 1.0), "atoms");
}

SampleCloud SampleCloud::from_model(const ModelMeasure& m, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("SampleCloud::from_model: n must be positive");
  std::mt19937_64 rng(seed);
  std::vector<TorusPoint> pts;
  pts.reserve(n);
  draw_model(m, n, rng, pts);
  return SampleCloud(std::move(pts), std::vector<double>(n, 1.0), "model");
}

SampleCloud SampleCloud::from_husimi(const HusimiGrid& g, std::size_t n, std::uint64_t seed) {
  if (n == 0 || g.G <= 0) throw InvalidArgument("SampleCloud::from_husimi: empty grid or n = 0");
  std::vector<double> cdf(g.values.size());
  std::partial_sum(g.values.begin(), g.values.end(), cdf.begin());
  const double total = cdf.back();
  if (!(total > 0.0)) throw InvalidArgument("SampleCloud::from_husimi: grid has no mass");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cell = 1.0 / g.G;
  std::vector<TorusPoint> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = u(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    if (it == cdf.end()) --it;
    const auto idx = static_cast<std::size_t>(it - cdf.begin());
    const auto i = static_cast<int>(idx / static_cast<std::size_t>(g.G));
    const auto j = static_cast<int>(idx % static_cast<std::size_t>(g.G));
    const double jx = u(rng) - 0.5;
    const double jxi = u(rng) - 0.5;
    pts.push_back(TorusPoint::reduced((i + jx) * cell, (j + jxi) * cell));
  }
  return SampleCloud(std::move(pts), std::vector<double>(n, 1.0), "husimi");
}

// ---------------------------------------------------------------------------
// Bowen balls

CloudOrbit::CloudOrbit(const CatMap& map, const SampleCloud& cloud, int T)
    : map_(map), weights_(cloud.weights()), t_(T), window_(bowen_window(T)) {
  if (T < 0) throw InvalidArgument("CloudOrbit: T must be >= 0");
  const std::size_t n = cloud.size();
  const auto slices = static_cast<std::size_t>(window_.last - window_.first + 1);
  xs_.assign(slices, std::vector<double>(n));
  xis_.assign(slices, std::vector<double>(n));
  const auto ref = static_cast<std::size_t>(-window_.first);
  parallel_for(n, [&](std::size_t i) {
    TorusPoint p = cloud.points()[i];
    xs_[ref][i] = p.x;
    xis_[ref][i] = p.xi;
    for (int t = 1; t <= window_.last; ++t) {
      p = cat_apply(map_, p);
      xs_[ref + t][i] = p.x;
      xis_[ref + t][i] = p.xi;
    }
    p = cloud.points()[i];
    for (int t = 1; t <= -window_.first; ++t) {
      p = cat_apply_inverse(map_, p);
      xs_[ref - t][i] = p.x;
      xis_[ref - t][i] = p.xi;
    }
  });
}

kernels::BallMass CloudOrbit::ball_mass(TorusPoint rho, double eps) const {
  const std::size_t slices = xs_.size();
  std::vector<kernels::SliceView> views(slices);
  std::vector<double> cx(slices), cxi(slices);
  for (std::size_t s = 0; s < slices; ++s) {
    views[s] = {xs_[s], xis_[s]};
    const TorusPoint c = cat_iterate(map_, rho, window_.first + static_cast<int>(s));
    cx[s] = c.x;
    cxi[s] = c.xi;
  }
  kernels::BallQuery q;
  q.slices = views;
  q.center_x = cx;
  q.center_xi = cxi;
  q.weights = weights_;
  q.reference_slice = static_cast<std::size_t>(-window_.first);
  q.eps = eps;
  return kernels::bowen_ball_mass(q);
}

namespace {

void check_local_args(int T, double eps) {
  if (T < 2) throw InvalidArgument("brin_katok_local: T must be >= 2");
  if (!(eps > 0.0 && eps < 0.25)) throw InvalidArgument("brin_katok_local: eps must lie in (0, 0.25)");
}

}  // namespace

LocalEntropyResult brin_katok_local(const CloudOrbit& orbit, TorusPoint rho, double eps,
                                    BallNormalization norm) {
  check_local_args(orbit.T(), eps);
  const kernels::BallMass bm = orbit.ball_mass(rho, eps);
  if (bm.bowen_count == 0 || !(bm.bowen > 0.0)) return EmptyBall{orbit.T(), eps};
  LocalEntropy le;
  le.ball_mass = bm.bowen;
  le.initial_mass = bm.initial;
  const double ratio = norm == BallNormalization::InitialBall ? bm.bowen / bm.initial : bm.bowen;
  le.value = std::max(0.0, -std::log(std::min(1.0, ratio)) / orbit.T());
  return le;
}

LocalEntropyResult brin_katok_local(const CatMap& map, const SampleCloud& cloud, TorusPoint rho,
                                    int T, double eps, BallNormalization norm) {
  check_local_args(T, eps);
  return brin_katok_local(CloudOrbit(map, cloud, T), rho, eps, norm);
}

EntropyEstimate ks_entropy_estimate(const CatMap& map, const SampleCloud& cloud, int T, double eps,
                                    std::size_t n_centers, std::uint64_t seed,
                                    BallNormalization norm) {
  check_local_args(T, eps);
  return ks_entropy_estimate(CloudOrbit(map, cloud, T), cloud, eps, n_centers, seed, norm);
}

EntropyEstimate ks_entropy_estimate(const CloudOrbit& orbit, const SampleCloud& cloud, double eps,
                                    std::size_t n_centers, std::uint64_t seed,
                                    BallNormalization norm) {
  if (n_centers < 10) throw InvalidArgument("ks_entropy_estimate: n_centers must be >= 10");
  if (cloud.size() != orbit.size())
    throw InvalidArgument("ks_entropy_estimate: cloud does not match the precomputed orbit");
  check_local_args(orbit.T(), eps);

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(cloud.weights().begin(), cloud.weights().end());
  std::vector<TorusPoint> centers(n_centers);
  for (auto& c : centers) c = cloud.points()[pick(rng)];

  std::vector<LocalEntropyResult> res(n_centers);
  parallel_for(n_centers, [&](std::size_t k) { res[k] = brin_katok_local(orbit, centers[k], eps, norm); });

  EntropyEstimate est;
  est.T_used = orbit.T();
  est.eps_used = eps;
  std::vector<double> vals;
  for (const auto& r : res) {
    if (const auto* le = std::get_if<LocalEntropy>(&r))
      vals.push_back(le->value);
    else
      ++est.empty_ball_count;
  }
  if (2 * est.empty_ball_count > n_centers)
    throw UnderResolved("ks_entropy_estimate: " + std::to_string(est.empty_ball_count) + " of " +
                        std::to_string(n_centers) +
                        " Bowen balls are empty; use a larger cloud or a smaller T");
  est.centers_used = vals.size();
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  est.value = mean;
  est.standard_error = vals.size() > 1
                           ? std::sqrt(ss / static_cast<double>(vals.size() - 1) /
                                       static_cast<double>(vals.size()))
                           : 0.0;
  return est;
}

double ruelle_pesin_gap(double h, const CatMap& map) {
  if (!(h >= 0.0)) throw InvalidArgument("ruelle_pesin_gap: entropy must be >= 0");
  return cat_lyapunov(map).lambda_plus - h;
}

EntropyBoundReport entropy_bound_check(double h, const CatMap& map, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidArgument("entropy_bound_check: alpha must lie in [0, 1]");
  EntropyBoundReport rep;
  rep.lambda_plus = cat_lyapunov(map).lambda_plus;
  rep.entropy_bound.margin = h - 0.5 * rep.lambda_plus;
  rep.entropy_bound.pass = rep.entropy_bound.margin >= 0.0;
  rep.scar_weight.margin = (0.5 - alpha) * rep.lambda_plus;
  rep.scar_weight.pass = rep.scar_weight.margin >= 0.0;
  return rep;
}

std::vector<SweepRow> entropy_sweep(const CatMap& map, const SampleCloud& cloud,
                                    const std::vector<int>& Ts, const std::vector<double>& epss,
                                    std::size_t n_centers, std::uint64_t seed) {
  std::vector<SweepRow> rows;
  for (int T : Ts) {
    check_local_args(T, epss.empty() ? 0.1 : epss.front());
    const CloudOrbit orbit(map, cloud, T);
    for (double eps : epss) {
      SweepRow row;
      row.T = T;
      row.eps = eps;
      try {
        const EntropyEstimate e = ks_entropy_estimate(orbit, cloud, eps, n_centers, seed);
        row.estimate = e.value;
        row.standard_error = e.standard_error;
        row.empty_ball_count = e.empty_ball_count;
      } catch (const UnderResolved&) {
        row.estimate = std::numeric_limits<double>::quiet_NaN();
        row.under_resolved = true;
        row.empty_ball_count = n_centers;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace semiclass
