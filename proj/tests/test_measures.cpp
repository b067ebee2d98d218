#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "semiclass/errors.hpp"
#include "semiclass/measures.hpp"

using namespace semiclass;
using std::numbers::pi;

namespace {

StateVector random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  StateVector v(n);
  for (int i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
  return v / v.norm();
}

TrigObservable random_observable(std::mt19937_64& rng, int k) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> d(-k, k);
  TrigObservable a = TrigObservable::constant(g(rng));
  for (int i = 0; i < 5; ++i) {
    const Mode m{d(rng), d(rng)};
    if (m == Mode{}) continue;
    a = a + TrigObservable::cos_mode(m, g(rng)) + TrigObservable::sin_mode(m, g(rng));
  }
  return a;
}

}  // namespace

TEST_CASE("matrix elements: reference values") {
  const TorusHilbert h(256);
  std::mt19937_64 rng(1);
  const StateVector psi = random_state(256, rng);
  CHECK(matrix_element(h, psi, TrigObservable::constant(1.0)) == doctest::Approx(1.0).epsilon(1e-14));

  const TorusHilbert h32(32);
  const TrigObservable ax = TrigObservable::cos_mode({1, 0}, 1.5) + TrigObservable::sin_mode({3, 0}, -0.5);
  for (int j : {0, 5, 31}) {
    StateVector e = StateVector::Zero(32);
    e[j] = 1.0;
    CHECK(matrix_element(h32, e, ax) == doctest::Approx(ax.evaluate({j / 32.0, 0.0})).epsilon(1e-13));
  }

  const double mu = matrix_element(h, coherent_state(h, {0.0, 0.0}), TrigObservable::cos_mode({1, 0}, 2.0));
  CHECK(mu < 2.0);
  CHECK(2.0 - mu < 10.0 / 256);
  CHECK(mu == doctest::Approx(2.0 * std::exp(-pi / (2.0 * 256))).epsilon(1e-6));
}

TEST_CASE("matrix elements are real and linear") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  const TorusHilbert h(45);
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector psi = random_state(45, rng);
    const TrigObservable a = random_observable(rng, 6), b = random_observable(rng, 6);
    const double s = g(rng);
    const cplx raw = psi.dot(apply_weyl(h, a, psi));
    CHECK(std::abs(raw.imag()) < 1e-13);
    CHECK(matrix_element(h, psi, a + b.scaled(s)) ==
          doctest::Approx(matrix_element(h, psi, a) + s * matrix_element(h, psi, b)).epsilon(1e-12));
  }
}

TEST_CASE("Wigner coefficients") {
  const TorusHilbert h(64);
  std::mt19937_64 rng(3);
  const StateVector psi = random_state(64, rng);
  const WignerCoefficients w = wigner_coefficients(h, psi, 8);
  CHECK(std::abs(w.at({0, 0}) - cplx(1.0, 0.0)) < 1e-14);
  for (int m1 = -8; m1 <= 8; ++m1)
    for (int m2 = -8; m2 <= 8; ++m2) CHECK(std::abs(w.at({m1, m2})) <= 1.0 + 1e-14);
  CHECK_THROWS_AS(w.at({9, 0}), InvalidArgument);
  CHECK_THROWS_AS(wigner_coefficients(h, psi, 32), AliasingError);

  // A position eigenstate: the phase-space translation in momentum only
  // multiplies it by a phase, and the mode e^{2πix} has unit modulus.
  StateVector e = StateVector::Zero(64);
  e[9] = 1.0;
  CHECK(std::abs(e.dot(apply_translation(h, 0, 1, e))) == doctest::Approx(1.0));
  const WignerCoefficients we = wigner_coefficients(h, e, 2);
  CHECK(std::abs(we.at({1, 0})) == doctest::Approx(1.0));
  CHECK(std::abs(we.at({0, 1})) < 1e-14);
}

TEST_CASE("eigenbasis averages: trace identity") {
  const CatMap m = CatMap::default_map();
  for (int n : {30, 64}) {
    const TorusHilbert h(n);
    const EigenDecomposition dec = diagonalize(cat_propagator(h, m));
    const int k = 4;
    std::vector<cplx> avg(static_cast<std::size_t>((2 * k + 1) * (2 * k + 1)), 0.0);
    for (int c = 0; c < n; ++c) {
      const WignerCoefficients w = wigner_coefficients(h, dec.vectors.col(c), k);
      for (int m1 = -k; m1 <= k; ++m1)
        for (int m2 = -k; m2 <= k; ++m2)
          avg[static_cast<std::size_t>((m1 + k) * (2 * k + 1) + (m2 + k))] += w.at({m1, m2}) / static_cast<double>(n);
    }
    const WignerCoefficients wavg(k, avg);
    CHECK(weak_star_distance(wavg, ModelMeasure::lebesgue(), k) < 1e-12);

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 5; ++trial) {
      const TrigObservable a = random_observable(rng, 5);
      const auto mu = eigenbasis_matrix_elements(h, dec, a);
      double s = 0.0;
      for (double x : mu) s += x;
      CHECK(std::abs(s / n - a.mean()) < 1e-12);
    }
  }
}

TEST_CASE("eigenstate measures are invariant under the map") {
  const CatMap m = CatMap::default_map();
  const TorusHilbert h(50);
  const EigenDecomposition dec = diagonalize(cat_propagator(h, m));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const TrigObservable a = random_observable(rng, 3);
    const auto mu = eigenbasis_matrix_elements(h, dec, a);
    const auto mu_m = eigenbasis_matrix_elements(h, dec, a.composed(m.matrix(), 1));
    for (std::size_t i = 0; i < mu.size(); ++i) CHECK(std::abs(mu[i] - mu_m[i]) < 1e-9);
  }
}

TEST_CASE("Husimi grids") {
  const TorusHilbert h(128);
  const HusimiGrid g = husimi(h, coherent_state(h, {0.5, 0.5}), 64);
  double total = 0.0, mn = 1.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    total += g.values[i];
    mn = std::min(mn, g.values[i]);
    if (g.values[i] > g.values[arg]) arg = i;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mn >= 0.0);
  CHECK(arg == 32 * 64 + 32);
  CHECK_THROWS_AS(husimi(h, coherent_state(h, {0.0, 0.0}), 4), InvalidArgument);
  CHECK(default_husimi_grid(100) == 20);
  CHECK(default_husimi_grid(4) == 8);
}

TEST_CASE("coherent-state ball masses") {
  const TorusHilbert h(128);
  const HusimiGrid g = husimi(h, coherent_state(h, {0.0, 0.0}), default_husimi_grid(128));
  CHECK(ball_mass(g, {0.0, 0.0}, 3.0 / std::sqrt(128.0)) >= 0.95);
  double prev = 0.0;
  for (double eps = 0.02; eps < 0.5; eps += 0.02) {
    const double b = ball_mass(g, {0.3, 0.7}, eps);
    CHECK(b >= prev);
    prev = b;
  }
  CHECK_THROWS_AS(ball_mass(g, {0.0, 0.0}, 0.5), InvalidArgument);
}

TEST_CASE("uniform grid ball masses") {
  HusimiGrid u{64, std::vector<double>(64 * 64, 1.0 / (64.0 * 64.0))};
  const double cell_layer = 2 * pi * 0.1 / 64;
  CHECK(std::abs(ball_mass(u, {0.4, 0.1}, 0.1) - pi * 0.01) <= cell_layer);
  // The disc of radius ½ has area π/4; the lattice count may fall short by a
  // layer of cells along its rim.
  CHECK(ball_mass(u, {0.0, 0.0}, 0.4999) >= pi / 4 - pi / 64);
  HusimiGrid fine{512, std::vector<double>(512 * 512, 1.0 / (512.0 * 512.0))};
  CHECK(ball_mass(fine, {0.0, 0.0}, 0.4999) == doctest::Approx(pi / 4).epsilon(0.01));
}

TEST_CASE("eigenbasis-averaged Husimi is nearly uniform") {
  const TorusHilbert h(64);
  const EigenDecomposition dec = diagonalize(cat_propagator(h, CatMap::default_map()));
  const int G = 16;
  std::vector<double> avg(G * G, 0.0);
  for (int c = 0; c < 64; ++c) {
    const HusimiGrid g = husimi(h, dec.vectors.col(c), G);
    for (int i = 0; i < G * G; ++i) avg[i] += g.values[i] / 64.0;
  }
  for (double v : avg) CHECK(v == doctest::Approx(1.0 / (G * G)).epsilon(0.02));
}

TEST_CASE("one step of the propagator moves coherent states classically") {
  const CatMap m = CatMap::default_map();
  const int n = 512;
  const TorusHilbert h(n);
  const ComplexMatrix u = cat_propagator(h, m);
  const double lam = 2.0 + std::sqrt(3.0);
  for (TorusPoint rho : {TorusPoint{0.3, 0.6}, TorusPoint{0.11, 0.83}}) {
    const HusimiGrid g = husimi(h, u * coherent_state(h, rho), 48);
    const double r = std::min(0.49, 5.0 * lam / std::sqrt(static_cast<double>(n)));
    CHECK(ball_mass(g, cat_apply(m, rho), r) >= 0.5);
    // Much tighter than the allowed radius in practice.
    CHECK(ball_mass(g, cat_apply(m, rho), 0.25) >= 0.5);
  }
}

TEST_CASE("QE variance properties") {
  const TorusHilbert h(60);
  const EigenDecomposition dec = diagonalize(cat_propagator(h, CatMap::default_map()));
  CHECK(qe_variance(h, dec, TrigObservable::constant(3.0)) < 1e-28);
  const TrigObservable a = TrigObservable::cos_mode({1, 1}, 2.0);
  CHECK(qe_variance(h, dec, a + TrigObservable::constant(5.0)) ==
        doctest::Approx(qe_variance(h, dec, a)).epsilon(1e-10));
}

TEST_CASE("QE variance decays for 2cos(2pi(x+xi)) between N = 64 and 512") {
  const CatMap m = CatMap::default_map();
  const TrigObservable a = TrigObservable::cos_mode({1, 1}, 2.0);
  const TorusHilbert h64(64), h512(512);
  const double v64 = qe_variance(h64, diagonalize(cat_propagator(h64, m)), a);
  const double v512 = qe_variance(h512, diagonalize(cat_propagator(h512, m)), a);
  CHECK(v512 < v64);
}

TEST_CASE("model measures") {
  const CatMap m = CatMap::default_map();
  const ModelMeasure atom = ModelMeasure::periodic_orbit(m, {{0.0, 0.0}});
  for (Mode k : {Mode{1, 0}, Mode{3, -2}, Mode{8, 8}}) CHECK(std::abs(atom.fourier_coefficient(k) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(ModelMeasure::lebesgue().fourier_coefficient({1, 2})) == 0.0);
  CHECK(std::abs(ModelMeasure::lebesgue().fourier_coefficient({0, 0}) - cplx(1.0, 0.0)) == 0.0);
  const ModelMeasure mix = ModelMeasure::mixture(0.25, atom, ModelMeasure::lebesgue());
  CHECK(mix.fourier_coefficient({2, 1}).real() == doctest::Approx(0.25));
  CHECK_THROWS_AS(ModelMeasure::periodic_orbit(m, {{0.1, 0.2}}), InvalidArgument);
  CHECK_THROWS_AS(ModelMeasure::periodic_orbit(m, {}), InvalidArgument);
  CHECK_THROWS_AS(ModelMeasure::mixture(1.5, atom, atom), InvalidArgument);
  const auto orbits = periodic_points(m, 2);
  for (const auto& o : orbits) CHECK_NOTHROW(ModelMeasure::periodic_orbit(m, o));
}

TEST_CASE("weak-star distance") {
  const TorusHilbert h(64);
  const WignerCoefficients w = wigner_coefficients(h, coherent_state(h, {0.0, 0.0}), 8);
  const ModelMeasure atom = ModelMeasure::periodic_orbit(CatMap::default_map(), {{0.0, 0.0}});
  CHECK(weak_star_distance(w, atom, 1) < 0.1);
  CHECK(weak_star_distance(w, ModelMeasure::lebesgue(), 1) > 0.9);
  CHECK_THROWS_AS(weak_star_distance(w, atom, 9), InvalidArgument);
}
