#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "semiclass/billiard_quantum.hpp"
#include "semiclass/errors.hpp"

using namespace semiclass;
using std::numbers::pi;

namespace {

double square_eigenvalue(int n, int p, int q) {
  const double h = 1.0 / (n + 1);
  const double sp = std::sin(pi * p * h / 2), sq = std::sin(pi * q * h / 2);
  return 4.0 / (h * h) * (sp * sp + sq * sq);
}

BilliardMode uniform_field(const DiscreteDomain& dom) {
  BilliardMode m;
  m.psi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dom.size()), 1.0);
  m.psi /= std::sqrt(m.psi.squaredNorm() * dom.cell_area());
  return m;
}

}  // namespace

TEST_CASE("discrete Laplacian structure") {
  const DiscreteDomain sq = DiscreteDomain::unit_square(30);
  const SparseMatrix op = build_laplacian(sq);
  CHECK(op.rows() == 900);
  const SparseMatrix diff = op - SparseMatrix(op.transpose());
  CHECK(diff.norm() == 0.0);
  const Eigen::VectorXd rows = op * Eigen::VectorXd::Ones(op.cols());
  for (std::size_t k = 0; k < sq.size(); ++k) {
    const auto [i, j] = sq.node(k);
    const bool near_wall = sq.index(i - 1, j) < 0 || sq.index(i + 1, j) < 0 || sq.index(i, j - 1) < 0 ||
                           sq.index(i, j + 1) < 0;
    if (near_wall)
      CHECK(rows[static_cast<Eigen::Index>(k)] > 0.0);
    else
      CHECK(std::abs(rows[static_cast<Eigen::Index>(k)]) < 1e-9);
  }

  const DiscreteDomain st = DiscreteDomain::stadium({1.0, 1.0}, 0.04);
  const SparseMatrix ops = build_laplacian(st);
  CHECK((ops - SparseMatrix(ops.transpose())).norm() == 0.0);
}

TEST_CASE("unit square eigenvalues match the closed form") {
  const int n = 40;
  const DiscreteDomain sq = DiscreteDomain::unit_square(n);
  const SparseMatrix op = build_laplacian(sq);
  const auto modes = eigenmodes_near(sq, op, std::sqrt(square_eigenvalue(n, 1, 1)), 1);
  REQUIRE(modes.size() == 1);
  CHECK(modes[0].eigenvalue == doctest::Approx(square_eigenvalue(n, 1, 1)).epsilon(1e-10));
  CHECK(modes[0].residual < 1e-8);
  CHECK(modes[0].hbar == doctest::Approx(1.0 / modes[0].k));

  std::vector<double> exact;
  for (int p = 1; p <= n; ++p)
    for (int q = 1; q <= n; ++q) exact.push_back(square_eigenvalue(n, p, q));
  std::sort(exact.begin(), exact.end());
  for (double lambda : {50.0, 200.0, 333.3}) {
    const auto expect = static_cast<std::size_t>(std::lower_bound(exact.begin(), exact.end(), lambda) - exact.begin());
    CHECK(count_below(op, lambda) == expect);
  }

  const auto window = eigenmodes_in_window(sq, op, 8.0, 10.0);
  std::size_t expect = 0;
  for (double e : exact) expect += (e >= 64.0 && e <= 100.0);
  CHECK(window.size() == expect);
  for (std::size_t a = 0; a < window.size(); ++a)
    for (std::size_t b = a; b < window.size(); ++b) {
      const double g = window[a].psi.dot(window[b].psi) * sq.cell_area();
      CHECK(std::abs(g - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
}

TEST_CASE("circle eigenvalues approach the Bessel zeros") {
  const StadiumDomain disc{0.0, 1.0};
  const DiscreteDomain d = DiscreteDomain::stadium(disc, 0.02);
  const SparseMatrix op = build_laplacian(d);
  const auto m1 = eigenmodes_near(d, op, 2.4, 1);
  REQUIRE(m1.size() == 1);
  CHECK(std::abs(m1[0].k - 2.404825557695773) / 2.404825557695773 < 0.01);
  const auto m2 = eigenmodes_near(d, op, 3.83, 2);
  REQUIRE(m2.size() == 2);
  for (const auto& m : m2) CHECK(std::abs(m.k - 3.831705970207512) / 3.831705970207512 < 0.01);

  const DiscreteDomain coarse = DiscreteDomain::stadium(disc, 0.04);
  const double e_coarse = std::abs(eigenmodes_near(coarse, build_laplacian(coarse), 2.4, 1)[0].k - 2.404825557695773);
  const double e_fine = std::abs(m1[0].k - 2.404825557695773);
  CHECK(e_coarse / e_fine == doctest::Approx(4.0).epsilon(0.35));
}

TEST_CASE("position measures") {
  const DiscreteDomain d = DiscreteDomain::stadium({0.0, 1.0}, 0.02);
  const auto m = eigenmodes_near(d, build_laplacian(d), 2.4, 1)[0];
  CHECK(position_measure(d, m, regions::everything()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(position_measure(d, m, regions::left_half()) - 0.5) < 0.02);
  const auto left = regions::left_half();
  const RegionObservable rest = [&](Vec2 p) { return 1.0 - left(p); };
  CHECK(position_measure(d, m, left) + position_measure(d, m, rest) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(region_fraction(d, regions::everything()) == 1.0);
  CHECK(std::abs(region_fraction(d, regions::annulus(0.0, 0.5)) - 0.25) < 0.03);
}

TEST_CASE("region indicators") {
  CHECK(regions::left_half()({-0.1, 0.0}) == 1.0);
  CHECK(regions::left_half()({0.1, 0.0}) == 0.0);
  CHECK(regions::horizontal_tube(0.1)({3.0, -0.05}) == 1.0);
  CHECK(regions::horizontal_tube(0.1)({3.0, 0.2}) == 0.0);
  CHECK(regions::central_rectangle(1.0)({0.9, 0.9}) == 1.0);
  CHECK(regions::central_rectangle(1.0)({1.1, 0.0}) == 0.0);
  CHECK(regions::annulus(0.5, 1.0)({0.7, 0.0}) == 1.0);
  CHECK(regions::annulus(0.5, 1.0)({0.2, 0.0}) == 0.0);
}

TEST_CASE("scar and bouncing-ball scores on synthetic fields") {
  const DiscreteDomain d = DiscreteDomain::stadium({1.0, 1.0}, 0.02);
  const BilliardMode flat = uniform_field(d);
  const MassReport s = scar_score(d, flat, 0.1);
  CHECK(s.ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.reference == doctest::Approx(region_fraction(d, regions::horizontal_tube(0.1))));
  CHECK(bouncing_ball_score(d, flat).ratio == doctest::Approx(1.0).epsilon(1e-12));

  BilliardMode tube = flat;
  for (std::size_t k = 0; k < d.size(); ++k)
    if (std::abs(d.position(k).y) > 0.1) tube.psi[static_cast<Eigen::Index>(k)] = 0.0;
  tube.psi /= std::sqrt(tube.psi.squaredNorm() * d.cell_area());
  const MassReport t = scar_score(d, tube, 0.1);
  CHECK(t.mass == doctest::Approx(1.0));
  CHECK(t.ratio == doctest::Approx(1.0 / t.reference));

  CHECK_THROWS_AS(scar_score(d, flat, 0.6), InvalidArgument);
  const DiscreteDomain sq = DiscreteDomain::unit_square(40);
  CHECK_THROWS_AS(bouncing_ball_score(sq, uniform_field(sq)), InvalidArgument);
}

TEST_CASE("spatial QE variance") {
  const DiscreteDomain d = DiscreteDomain::stadium({1.0, 1.0}, 0.03);
  const SparseMatrix op = build_laplacian(d);
  const auto modes = eigenmodes_in_window(d, op, 6.0, 8.0);
  REQUIRE(modes.size() >= 10);
  CHECK(qe_spatial_variance(d, modes, regions::everything()) < 1e-20);
  CHECK(qe_spatial_variance(d, modes, regions::left_half()) < 0.01);
  const std::vector<BilliardMode> few(modes.begin(), modes.begin() + 9);
  CHECK_THROWS_AS(qe_spatial_variance(d, few, regions::everything()), InvalidArgument);
}

TEST_CASE("domain preconditions") {
  CHECK_THROWS_AS(DiscreteDomain::stadium({1.0, 1.0}, 0.1), GeometryError);
  CHECK_THROWS_AS(DiscreteDomain::stadium({1.0, 1.0}, 0.0), GeometryError);
  CHECK_THROWS_AS(DiscreteDomain::stadium({1.0, -1.0}, 0.01), GeometryError);
  const DiscreteDomain d = DiscreteDomain::stadium({1.0, 1.0}, 0.05);
  CHECK(d.size() >= 1000);
  CHECK_THROWS_AS(eigenmodes_near(d, build_laplacian(d), 12.0, 1), InvalidArgument);
}

TEST_CASE("stadium modes are Dirichlet-orthonormal") {
  const DiscreteDomain d = DiscreteDomain::stadium({1.0, 1.0}, 0.025);
  const auto modes = eigenmodes_in_window(d, build_laplacian(d), 9.0, 10.0);
  REQUIRE(!modes.empty());
  double defect = 0.0;
  for (std::size_t a = 0; a < modes.size(); ++a)
    for (std::size_t b = 0; b < modes.size(); ++b)
      defect = std::max(defect, std::abs(modes[a].psi.dot(modes[b].psi) * d.cell_area() - (a == b ? 1.0 : 0.0)));
  CHECK(defect < 1e-8);
  for (const auto& m : modes) {
    CHECK(m.residual < 1e-8);
    CHECK(m.psi.maxCoeff() >= -m.psi.minCoeff());
  }
}
