#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "semiclass/errors.hpp"
#include "semiclass/measures.hpp"
#include "semiclass/spectral.hpp"

using namespace semiclass;
using std::numbers::pi;

namespace {

// Smallest P ≤ p_max with U^P ∝ I by explicit powers.
int brute_force_period(const ComplexMatrix& u, int p_max) {
  ComplexMatrix p = u;
  for (int t = 1; t <= p_max; ++t) {
    const cplx z = p(0, 0);
    if (std::abs(std::abs(z) - 1.0) < 1e-8 &&
        (p - z * ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < 1e-8)
      return t;
    p = p * u;
  }
  return -1;
}

}  // namespace

TEST_CASE("diagonalize reference matrices") {
  const EigenDecomposition id = diagonalize(ComplexMatrix::Identity(5, 5));
  for (double ph : id.phases) CHECK(std::abs(circular_difference(ph, 0.0)) < 1e-14);
  CHECK(id.orthogonality_defect < 1e-14);

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = {0.0, 1.0};
  d(1, 1) = {0.0, -1.0};
  const EigenDecomposition dd = diagonalize(d);
  REQUIRE(dd.phases.size() == 2);
  CHECK(dd.phases[0] == doctest::Approx(pi / 2));
  CHECK(dd.phases[1] == doctest::Approx(3 * pi / 2));

  ComplexMatrix bad = ComplexMatrix::Identity(3, 3);
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(diagonalize(bad), InvalidArgument);
}

TEST_CASE("spectral reconstruction of cat propagators") {
  for (int n : {16, 64, 101}) {
    const TorusHilbert h(n);
    const ComplexMatrix u = cat_propagator(h, CatMap::default_map());
    const EigenDecomposition dec = diagonalize(u);
    CHECK(dec.phases.size() == static_cast<std::size_t>(n));
    CHECK(std::is_sorted(dec.phases.begin(), dec.phases.end()));
    CHECK(operator_norm(reconstruct(dec) - u) < 1e-9);
    CHECK(dec.orthogonality_defect < 1e-10);
    CHECK(dec.max_residual < 1e-10);
  }
}

TEST_CASE("order of SL(2, Z) elements modulo q") {
  const Sl2z m(2, 1, 3, 2);
  CHECK(sl2_order_mod(m, 1, 10) == 1);
  CHECK(sl2_order_mod(m, 2, 10) == 2);
  const int p = *sl2_order_mod(m, 7, 100);
  CHECK(m.power(p).a() % 7 == 1);
  CHECK(m.power(p).b() % 7 == 0);
  CHECK_FALSE(sl2_order_mod(m, 1000003, 5).has_value());
}

TEST_CASE("quantum period: N = 1 and brute force for small N") {
  const CatMap m = CatMap::default_map();
  const auto one = quantum_period(TorusHilbert(1), m, 10);
  REQUIRE(one.has_value());
  CHECK(one->P == 1);
  for (int n = 2; n <= 40; ++n) {
    const TorusHilbert h(n);
    const ComplexMatrix u = cat_propagator(h, m);
    const auto qp = quantum_period(h, u, m, 120);
    const int brute = brute_force_period(u, 120);
    CAPTURE(n);
    if (brute < 0) {
      CHECK_FALSE(qp.has_value());
      continue;
    }
    REQUIRE(qp.has_value());
    CHECK(qp->P == brute);
    // The classical order modulo 2N is always a multiple of the period.
    if (qp->order_mod_2N) CHECK(*qp->order_mod_2N % qp->P == 0);
    // U^P = e^{i·global_phase}.
    const ComplexMatrix up = [&] {
      ComplexMatrix p = ComplexMatrix::Identity(n, n);
      for (int t = 0; t < qp->P; ++t) p = p * u;
      return p;
    }();
    CHECK((up - std::polar(1.0, qp->global_phase) * ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("eigenphases sit on the P-th roots of the global phase") {
  for (int n : {56, 195}) {
    const TorusHilbert h(n);
    const CatMap m = CatMap::default_map();
    const ComplexMatrix u = cat_propagator(h, m);
    const auto qp = quantum_period(h, u, m, 40);
    REQUIRE(qp.has_value());
    const EigenDecomposition dec = diagonalize(u);
    for (double ph : dec.phases) {
      double best = 10.0;
      for (int k = 0; k < qp->P; ++k)
        best = std::min(best, std::abs(circular_difference(ph, (qp->global_phase + 2 * pi * k) / qp->P)));
      CHECK(best < 1e-6);
    }
    const DegeneracyReport rep = degeneracy_clusters(dec.phases, 1e-6);
    CHECK(rep.clusters.size() <= static_cast<std::size_t>(qp->P));
  }
}

TEST_CASE("degeneracy clusters only split under refinement") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2 * pi);
  std::vector<double> phases;
  for (int i = 0; i < 60; ++i) {
    const double c = u(rng);
    phases.push_back(c);
    phases.push_back(std::fmod(c + 1e-4 * (i % 3), 2 * pi));
  }
  phases.push_back(2 * pi - 1e-9);  // wraps onto the cluster at 0
  phases.push_back(1e-9);
  std::sort(phases.begin(), phases.end());
  double tol = 0.05;
  auto owner = [](const DegeneracyReport& r, std::size_t n) {
    std::vector<std::size_t> o(n);
    for (std::size_t c = 0; c < r.clusters.size(); ++c)
      for (std::size_t m : r.clusters[c].members) o[m] = c;
    return o;
  };
  DegeneracyReport coarse = degeneracy_clusters(phases, tol);
  for (int level = 0; level < 12; ++level) {
    tol /= 2;
    const DegeneracyReport fine = degeneracy_clusters(phases, tol);
    CHECK(fine.clusters.size() >= coarse.clusters.size());
    const auto oc = owner(coarse, phases.size()), of = owner(fine, phases.size());
    // Members of one fine cluster share their coarse cluster.
    for (std::size_t i = 0; i < phases.size(); ++i)
      for (std::size_t j = 0; j < phases.size(); ++j)
        if (of[i] == of[j]) CHECK(oc[i] == oc[j]);
    coarse = fine;
  }
  const DegeneracyReport wrap = degeneracy_clusters({1e-9, 2 * pi - 1e-9, 3.0}, 1e-6);
  CHECK(wrap.clusters.size() == 2);
}

TEST_CASE("scarred state basics") {
  const CatMap m = CatMap::default_map();
  const TorusHilbert h(260);
  const ComplexMatrix u = cat_propagator(h, m);
  const ScarredState one = scarred_state(h, u, m, 1);
  CHECK(std::abs(std::abs(one.state.dot(coherent_state(h, {0.0, 0.0}))) - 1.0) < 1e-12);
  const HusimiGrid g1 = husimi(h, one.state, default_husimi_grid(260));
  CHECK(ball_mass(g1, {0.0, 0.0}, 0.1) > 0.9);

  const auto qp = quantum_period(h, u, m, 20);
  REQUIRE(qp.has_value());
  const ScarredState s = scarred_state(h, u, m, default_scar_window(h, m, qp));
  CHECK(s.state.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(wigner_coefficients(h, s.state, 2).at({0, 0}) - cplx(1.0, 0.0)) < 1e-12);
  CHECK(s.period.has_value());

  const EigenDecomposition dec = diagonalize(u);
  const Projection pr = project_onto_phase(dec, s.state, s.theta, 1e-6);
  CHECK(pr.overlap >= 0.9);
  CHECK_FALSE(pr.weak);
  const Projection auto_pr = project_degenerate(dec, s.state, 1e-6);
  CHECK(std::abs(circular_difference(auto_pr.phase, s.theta)) < 1e-6);
}

TEST_CASE("projection of eigenvectors and orthogonal states") {
  const TorusHilbert h(64);
  const EigenDecomposition dec = diagonalize(cat_propagator(h, CatMap::default_map()));
  const StateVector v = dec.vectors.col(5);
  const Projection self = project_degenerate(dec, v, 1e-8);
  CHECK(self.overlap == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(std::abs(self.state.dot(v)) - 1.0) < 1e-10);
  // A vector from a different cluster has no weight at this phase.
  std::size_t other = 0;
  while (std::abs(circular_difference(dec.phases[other], dec.phases[5])) < 1e-3) ++other;
  const Projection orth = project_onto_phase(dec, dec.vectors.col(static_cast<Eigen::Index>(other)), dec.phases[5], 1e-8);
  CHECK(orth.weak);
  CHECK(orth.overlap < 1e-20);
  CHECK_THROWS_AS(project_degenerate(dec, v, 0.0), InvalidArgument);
}

TEST_CASE("circular difference") {
  CHECK(circular_difference(0.1, 2 * pi - 0.1) == doctest::Approx(0.2));
  CHECK(circular_difference(2 * pi - 0.1, 0.1) == doctest::Approx(-0.2));
  CHECK(std::abs(circular_difference(3.0, 3.0)) == 0.0);
}
