#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "semiclass/classical.hpp"
#include "semiclass/errors.hpp"

using namespace semiclass;

TEST_CASE("map construction rejects non-unimodular and elliptic matrices") {
  CHECK_THROWS_AS(CatMap(2, 1, 1, 2), InvalidMap);   // det 3
  CHECK_THROWS_AS(CatMap(1, 1, 0, 1), InvalidMap);   // parabolic
  CHECK_THROWS_AS(CatMap(0, -1, 1, 0), InvalidMap);  // elliptic
  CHECK_NOTHROW(CatMap(2, 1, 3, 2));
  CHECK(CatMap::default_map().matrix().quantizable());
  CHECK_FALSE(Sl2z(2, 1, 1, 1).quantizable());
}

TEST_CASE("cat_apply on reference points") {
  const CatMap m = CatMap::default_map();
  CHECK(cat_apply(m, {0.0, 0.0}) == TorusPoint{0.0, 0.0});
  CHECK(cat_apply(m, {0.5, 0.5}) == TorusPoint{0.5, 0.5});
  const TorusPoint p = cat_apply(m, {0.25, 0.0});
  CHECK(p.x == doctest::Approx(0.5));
  CHECK(p.xi == doctest::Approx(0.75));
  const TorusPoint q{0.123, 0.789};
  CHECK(torus_distance(cat_apply_inverse(m, cat_apply(m, q)), q) < 1e-14);
  CHECK(torus_distance(cat_iterate(m, q, -3), cat_apply_inverse(m, cat_apply_inverse(m, cat_apply_inverse(m, q)))) < 1e-12);
}

TEST_CASE("cat_apply permutes every rational lattice") {
  const CatMap m = CatMap::default_map();
  for (int q = 1; q <= 64; ++q) {
    std::set<std::pair<int, int>> image;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) {
        const TorusPoint p = cat_apply(m, {static_cast<double>(i) / q, static_cast<double>(j) / q});
        const int a = static_cast<int>(std::lround(p.x * q)) % q;
        const int b = static_cast<int>(std::lround(p.xi * q)) % q;
        image.insert({a, b});
      }
    CHECK(image.size() == static_cast<std::size_t>(q * q));
  }
}

TEST_CASE("cat_apply preserves Lebesgue measure (chi-square on 16x16)") {
  const CatMap m = CatMap::default_map();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> counts(256, 0.0);
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const TorusPoint p = cat_apply(m, {u(rng), u(rng)});
    counts[static_cast<std::size_t>(std::floor(p.x * 16) * 16 + std::floor(p.xi * 16))] += 1.0;
  }
  const double expected = n / 256.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Upper 0.001 quantile of chi-square with 255 degrees of freedom.
  CHECK(chi2 < 330.5);
}

TEST_CASE("Lyapunov exponents in closed form") {
  CHECK(cat_lyapunov(CatMap(2, 1, 1, 1)).lambda_plus == doctest::Approx(std::log((3 + std::sqrt(5.0)) / 2)).epsilon(1e-14));
  CHECK(cat_lyapunov(CatMap(2, 1, 3, 2)).lambda_plus == doctest::Approx(std::log(2 + std::sqrt(3.0))).epsilon(1e-14));
  CHECK(cat_lyapunov(CatMap(1, 1, 1, 2)).lambda_plus == cat_lyapunov(CatMap(2, 1, 1, 1)).lambda_plus);
  CHECK(cat_lyapunov(CatMap(-2, 1, 3, -2)).lambda_plus == doctest::Approx(std::log(2 + std::sqrt(3.0))));
}

TEST_CASE("fixed points match a brute-force lattice scan") {
  for (const CatMap& m : {CatMap(2, 1, 3, 2), CatMap(2, 1, 1, 1), CatMap(3, 2, 4, 3), CatMap(1, 2, 2, 5)}) {
    const auto orbits = periodic_points(m, 1);
    const auto& s = m.matrix();
    const std::int64_t q = std::abs((s.a() - 1) * (s.d() - 1) - s.b() * s.c());
    CHECK(q == std::abs(s.trace() - 2));
    std::size_t total = 0;
    bool has_origin = false;
    for (const auto& o : orbits) {
      total += o.size();
      for (const auto& p : o) has_origin = has_origin || (p.x == 0.0 && p.xi == 0.0);
    }
    CHECK(total == static_cast<std::size_t>(q));
    CHECK(has_origin);
    std::size_t scan = 0;
    for (std::int64_t i = 0; i < q; ++i)
      for (std::int64_t j = 0; j < q; ++j) {
        const TorusPoint p{static_cast<double>(i) / q, static_cast<double>(j) / q};
        if (torus_distance(cat_apply(m, p), p) < 1e-12) ++scan;
      }
    CHECK(scan == total);
  }
  CHECK(periodic_points(CatMap::default_map(), 1).size() == 2);
  CHECK_THROWS_AS(periodic_points(CatMap::default_map(), 0), InvalidArgument);
  CHECK_THROWS_AS(periodic_points(CatMap::default_map(), 20, 1000), ResourceError);
}

TEST_CASE("periodic orbits of period 3 close up") {
  const CatMap m = CatMap::default_map();
  for (const auto& orbit : periodic_points(m, 3))
    for (const auto& p : orbit) CHECK(torus_distance(cat_iterate(m, p, 3), p) < 1e-12);
}

TEST_CASE("Bowen distance: metric properties and stable-manifold growth") {
  const CatMap m = CatMap::default_map();
  const TorusPoint p{0.3, 0.4}, q{0.31, 0.38};
  CHECK(bowen_distance(m, p, p, 6) == 0.0);
  CHECK(bowen_distance(m, p, q, 0) == doctest::Approx(torus_distance(p, q)));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const TorusPoint a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    for (int T = 0; T <= 6; ++T) {
      const double ab = bowen_distance(m, a, b, T);
      CHECK(ab == bowen_distance(m, b, a, T));
      CHECK(ab <= bowen_distance(m, a, c, T) + bowen_distance(m, c, b, T) + 1e-12);
      CHECK(ab <= bowen_distance(m, a, b, T + 1) + 1e-15);
    }
  }
  // Separation along the stable direction grows under the backward half of
  // the window.
  const double lam = 2.0 + std::sqrt(3.0);
  const double d0 = 1e-7;
  const TorusPoint s{0.2 + d0 / 2.0, 0.2 - d0 * std::sqrt(3.0) / 2.0};
  const TorusPoint base{0.2, 0.2};
  for (int T : {2, 4, 6}) {
    const double expected = d0 * std::pow(lam, T / 2);
    CHECK(bowen_distance(m, base, s, T) == doctest::Approx(expected).epsilon(1e-5));
  }
  CHECK_THROWS_AS(bowen_distance(m, p, q, -1), InvalidArgument);
}

TEST_CASE("billiard reference collisions") {
  const StadiumDomain circle{0.0, 1.0};
  const BilliardState s = billiard_step(circle, {{-1.0, 0.0}, {1.0, 0.0}});
  CHECK(s.position.x == doctest::Approx(1.0));
  CHECK(s.position.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.direction.x == doctest::Approx(-1.0));

  const StadiumDomain stadium{1.0, 1.0};
  const BilliardState t = billiard_step(stadium, {{-1.0, 0.0}, {1.0, 0.0}});
  CHECK(t.position.x == doctest::Approx(2.0));
  CHECK(std::abs(t.position.y) < 1e-12);
  CHECK(t.direction.x == doctest::Approx(-1.0));
  CHECK(std::abs(t.direction.y) < 1e-12);
}

TEST_CASE("specular law: incidence equals reflection") {
  const StadiumDomain circle{0.0, 1.0};
  const double ang = 0.7;
  const BilliardState in{{0.2, -0.3}, {std::cos(ang), std::sin(ang)}};
  const BoundaryHit hit = first_boundary_hit(circle, in.position, in.direction);
  const BilliardState out = billiard_step(circle, in);
  const Vec2 tangent{-hit.normal.y, hit.normal.x};
  // Normal component flips, tangential component is kept.
  CHECK(std::abs(out.direction.dot(hit.normal) + in.direction.dot(hit.normal)) < 1e-12);
  CHECK(std::abs(out.direction.dot(tangent) - in.direction.dot(tangent)) < 1e-12);
}

TEST_CASE("reflection keeps unit speed over long orbits") {
  const StadiumDomain stadium{1.0, 1.0};
  const double ang = 0.61;
  const OrbitSegment seg = billiard_flow(stadium, {{0.1, 0.05}, {std::cos(ang), std::sin(ang)}}, 5000);
  CHECK(seg.states.size() == 5001);
  for (const auto& st : seg.states) CHECK(std::abs(st.direction.norm() - 1.0) < 1e-12);
  for (std::size_t i = 1; i < seg.times.size(); ++i) CHECK(seg.times[i] > seg.times[i - 1]);
}

TEST_CASE("angular momentum in the circle") {
  CHECK(circle_angular_momentum({{-1.0, 0.0}, {1.0, 0.0}}) == 0.0);
  CHECK(circle_angular_momentum({{1.0, 0.0}, {0.0, 1.0}}) == doctest::Approx(1.0));
  const StadiumDomain circle{0.0, 1.0};
  const BilliardState s0{{0.3, 0.1}, {std::cos(1.0), std::sin(1.0)}};
  const double l0 = circle_angular_momentum(s0);
  double drift = 0.0;
  BilliardState s = s0;
  for (int i = 0; i < 100000; ++i) {
    s = billiard_step(circle, s);
    drift = std::max(drift, std::abs(circle_angular_momentum(s) - l0));
  }
  CHECK(drift < 1e-9);
}

TEST_CASE("ergodic averages") {
  const StadiumDomain stadium{1.0, 1.0};
  const BilliardState s{{0.1, 0.05}, {std::cos(0.6), std::sin(0.6)}};
  CHECK(ergodic_average(stadium, s, EverywhereRegion{}, 1000) == doctest::Approx(1.0).epsilon(1e-12));
  const double left = ergodic_average(stadium, s, HalfPlaneRegion(0.0, true), 1'000'000);
  CHECK(std::abs(left - 0.5) < 0.02);

  // Angular momentum 0.8 keeps the orbit outside the caustic of radius 0.8.
  const StadiumDomain circle{0.0, 1.0};
  const BilliardState c{{0.0, -0.8}, {1.0, 0.0}};
  CHECK(std::abs(circle_angular_momentum(c)) == doctest::Approx(0.8));
  CHECK(ergodic_average(circle, c, DiscRegion({0.0, 0.0}, 0.3), 10000) == 0.0);
}

TEST_CASE("segment lengths inside regions") {
  const RectangleRegion rect({0.0, 0.0}, {1.0, 1.0});
  CHECK(rect.length_inside({-1.0, 0.5}, {2.0, 0.5}) == doctest::Approx(1.0));
  CHECK(rect.length_inside({-1.0, 2.0}, {2.0, 2.0}) == 0.0);
  const DiscRegion disc({0.0, 0.0}, 1.0);
  CHECK(disc.length_inside({-2.0, 0.0}, {2.0, 0.0}) == doctest::Approx(2.0));
  CHECK(disc.length_inside({0.0, 0.0}, {0.5, 0.0}) == doctest::Approx(0.5));
  const HalfPlaneRegion half(0.0, true);
  CHECK(half.length_inside({-1.0, 0.0}, {1.0, 1.0}) == doctest::Approx(std::sqrt(5.0) / 2));
}

TEST_CASE("stadium coverage of a 32x16 grid within 1e5 bounces") {
  const StadiumDomain stadium{1.0, 1.0};
  const CoverageReport cov = billiard_coverage(stadium, {{0.1, 0.05}, {std::cos(0.6), std::sin(0.6)}}, 32, 16, 100000);
  CHECK(cov.cells_in_domain > 400);
  CHECK(cov.cells_visited == cov.cells_in_domain);
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS((StadiumDomain{-1.0, 1.0}.validate()), GeometryError);
  CHECK_THROWS_AS((StadiumDomain{1.0, 0.0}.validate()), GeometryError);
  const StadiumDomain st{1.0, 1.0};
  CHECK(st.area() == doctest::Approx(4.0 + std::numbers::pi));
  CHECK(st.perimeter() == doctest::Approx(4.0 + 2.0 * std::numbers::pi));
  CHECK(st.contains({1.9, 0.0}));
  CHECK_FALSE(st.contains({1.9, 0.9}));
}
