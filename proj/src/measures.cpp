#include "semiclass/measures.hpp"

#include <cmath>
#include <string>

#include "semiclass/errors.hpp"
#include "semiclass/kernels.hpp"
#include "semiclass/parallel.hpp"

namespace semiclass {

double matrix_element(const TorusHilbert& h, const StateVector& psi, const TrigObservable& a) {
  return psi.dot(apply_weyl(h, a, psi)).real();
}

WignerCoefficients::WignerCoefficients(int cutoff, std::vector<cplx> values)
    : k_(cutoff), v_(std::move(values)) {
  const auto side = static_cast<std::size_t>(2 * cutoff + 1);
  if (cutoff < 0 || v_.size() != side * side)
    throw InvalidArgument("WignerCoefficients: value count does not match the cutoff box");
}

cplx WignerCoefficients::at(Mode m) const {
  if (std::abs(m.m1) > k_ || std::abs(m.m2) > k_)
    throw InvalidArgument("WignerCoefficients: mode outside cutoff " + std::to_string(k_));
  const auto side = static_cast<std::size_t>(2 * k_ + 1);
  return v_[static_cast<std::size_t>(m.m1 + k_) * side + static_cast<std::size_t>(m.m2 + k_)];
}

WignerCoefficients wigner_coefficients(const TorusHilbert& h, const StateVector& psi, int cutoff) {
  if (cutoff < 0) throw InvalidArgument("wigner_coefficients: cutoff must be >= 0");
  if (2 * cutoff >= h.N())
    throw AliasingError("wigner_coefficients: cutoff " + std::to_string(cutoff) +
                        " aliases for N = " + std::to_string(h.N()) + " (need 2K < N)");
  const int side = 2 * cutoff + 1;
  std::vector<cplx> vals(static_cast<std::size_t>(side) * side);
  for (int m1 = -cutoff; m1 <= cutoff; ++m1)
    for (int m2 = -cutoff; m2 <= cutoff; ++m2)
      vals[static_cast<std::size_t>(m1 + cutoff) * side + (m2 + cutoff)] =
          psi.dot(apply_fourier_mode(h, Mode{m1, m2}, psi));
  return WignerCoefficients(cutoff, std::move(vals));
}

int default_husimi_grid(int N) {
  return std::max(8, static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(N)))));
}

HusimiGrid husimi(const TorusHilbert& h, const StateVector& psi, int G) {
  if (G < 8) throw InvalidArgument("husimi: G must be >= 8");
  HusimiGrid grid;
  grid.G = G;
  grid.values.assign(static_cast<std::size_t>(G) * G, 0.0);
  const std::span<const cplx> target(psi.data(), static_cast<std::size_t>(psi.size()));
  parallel_for(static_cast<std::size_t>(G), [&](std::size_t i) {
    for (int j = 0; j < G; ++j) {
      const StateVector c =
          coherent_state(h, TorusPoint{static_cast<double>(i) / G, static_cast<double>(j) / G});
      const cplx ov = kernels::cdot(
          std::span<const cplx>(c.data(), static_cast<std::size_t>(c.size())), target);
      grid.values[i * G + j] = std::norm(ov);
    }
  });
  double total = 0.0;
  for (double v : grid.values) total += v;
  if (total > 0.0)
    for (double& v : grid.values) v /= total;
  return grid;
}

double ball_mass(const HusimiGrid& g, TorusPoint center, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw InvalidArgument("ball_mass: eps must lie in (0, 0.5)");
  double s = 0.0;
  for (int i = 0; i < g.G; ++i)
    for (int j = 0; j < g.G; ++j)
      if (torus_distance({static_cast<double>(i) / g.G, static_cast<double>(j) / g.G}, center) < eps)
        s += g.at(i, j);
  return s;
}

std::vector<double> eigenbasis_matrix_elements(const TorusHilbert& h, const EigenDecomposition& dec,
                                               const TrigObservable& a) {
  const auto n = static_cast<std::size_t>(dec.vectors.cols());
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t k) {
    const StateVector v = dec.vectors.col(static_cast<Eigen::Index>(k));
    out[k] = matrix_element(h, v, a);
  });
  return out;
}

double qe_variance(const TorusHilbert& h, const EigenDecomposition& dec, const TrigObservable& a) {
  const std::vector<double> mu = eigenbasis_matrix_elements(h, dec, a);
  const double c0 = a.mean();
  double s = 0.0;
  for (double v : mu) s += (v - c0) * (v - c0);
  return mu.empty() ? 0.0 : s / static_cast<double>(mu.size());
}

ModelMeasure ModelMeasure::lebesgue() { return ModelMeasure{}; }

ModelMeasure ModelMeasure::periodic_orbit(const CatMap& map, std::vector<TorusPoint> orbit) {
  if (orbit.empty()) throw InvalidArgument("periodic orbit measure needs at least one point");
  for (const TorusPoint& p : orbit) {
    const TorusPoint q = cat_apply(map, p);
    bool found = false;
    for (const TorusPoint& r : orbit)
      if (torus_distance(q, r) < 1e-9) {
        found = true;
        break;
      }
    if (!found) throw InvalidArgument("periodic orbit measure: point list is not closed under the map");
  }
  ModelMeasure m;
  m.kind_ = Kind::PeriodicOrbit;
  m.orbit_ = std::move(orbit);
  return m;
}

ModelMeasure ModelMeasure::mixture(double alpha, ModelMeasure a, ModelMeasure b) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidArgument("mixture weight must lie in [0, 1]");
  ModelMeasure m;
  m.kind_ = Kind::Mixture;
  m.alpha_ = alpha;
  m.a_ = std::make_shared<const ModelMeasure>(std::move(a));
  m.b_ = std::make_shared<const ModelMeasure>(std::move(b));
  return m;
}

cplx ModelMeasure::fourier_coefficient(Mode m) const {
  switch (kind_) {
    case Kind::Lebesgue:
      return (m == Mode{}) ? cplx{1.0, 0.0} : cplx{};
    case Kind::PeriodicOrbit: {
      cplx s{};
      for (const TorusPoint& p : orbit_)
        s += std::polar(1.0, 2.0 * std::numbers::pi *
                                 (static_cast<double>(m.m1) * p.x + static_cast<double>(m.m2) * p.xi));
      return s / static_cast<double>(orbit_.size());
    }
    case Kind::Mixture:
      return alpha_ * a_->fourier_coefficient(m) + (1.0 - alpha_) * b_->fourier_coefficient(m);
  }
  return {};
}

double weak_star_distance(const WignerCoefficients& w, const ModelMeasure& model, int cutoff) {
  if (cutoff < 1 || cutoff > w.cutoff())
    throw InvalidArgument("weak_star_distance: cutoff must lie in [1, " +
                          std::to_string(w.cutoff()) + "]");
  double d = 0.0;
  for (int m1 = -cutoff; m1 <= cutoff; ++m1)
    for (int m2 = -cutoff; m2 <= cutoff; ++m2) {
      if (m1 == 0 && m2 == 0) continue;
      const Mode m{m1, m2};
      d = std::max(d, std::abs(w.at(m) - model.fourier_coefficient(m)));
    }
  return d;
}

}  // namespace semiclass
