#include "semiclass/torus_quantum.hpp"

#include <cmath>
#include <random>
#include <string>

#include "semiclass/errors.hpp"

namespace semiclass {

namespace {

using i128 = __int128;
constexpr double kPi = std::numbers::pi;

std::int64_t mod_floor(i128 v, std::int64_t q) {
  i128 r = v % q;
  if (r < 0) r += q;
  return static_cast<std::int64_t>(r);
}

// exp(iπ k / N) for an integer k, reduced mod 2N first so large k stay exact.
cplx half_root(i128 k, std::int64_t n) {
  const std::int64_t r = mod_floor(k, 2 * n);
  return std::polar(1.0, kPi * static_cast<double>(r) / static_cast<double>(n));
}

StateVector start_vector(int dim) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  StateVector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = {g(rng), g(rng)};
  return v / v.norm();
}

}  // namespace

TorusHilbert::TorusHilbert(int N) : n_(N) {
  if (N < 1) throw InvalidArgument("TorusHilbert: N must be >= 1, got " + std::to_string(N));
}

// ---------------------------------------------------------------------------
// TrigObservable

TrigObservable::TrigObservable(Coefficients coeffs) : c_(std::move(coeffs)) {
  for (auto it = c_.begin(); it != c_.end();) {
    if (it->second == cplx{}) {
      it = c_.erase(it);
      continue;
    }
    ++it;
  }
  for (const auto& [m, c] : c_) {
    const cplx partner = coefficient(-m);
    const double scale = 1.0 + std::abs(c);
    if (std::abs(partner - std::conj(c)) > 1e-12 * scale)
      throw InvalidObservable("observable is not real: c(" + std::to_string(m.m1) + "," +
                              std::to_string(m.m2) + ") and c(-m) are not conjugate");
  }
}

TrigObservable TrigObservable::constant(double value) {
  return TrigObservable(Coefficients{{Mode{0, 0}, cplx{value, 0.0}}});
}

TrigObservable TrigObservable::cos_mode(Mode m, double amplitude) {
  if (m == Mode{}) throw InvalidObservable("cos_mode needs a nonzero mode");
  return TrigObservable(Coefficients{{m, cplx{0.5 * amplitude, 0.0}}, {-m, cplx{0.5 * amplitude, 0.0}}});
}

TrigObservable TrigObservable::sin_mode(Mode m, double amplitude) {
  if (m == Mode{}) throw InvalidObservable("sin_mode needs a nonzero mode");
  return TrigObservable(Coefficients{{m, cplx{0.0, -0.5 * amplitude}}, {-m, cplx{0.0, 0.5 * amplitude}}});
}

cplx TrigObservable::coefficient(Mode m) const {
  const auto it = c_.find(m);
  return it == c_.end() ? cplx{} : it->second;
}

double TrigObservable::mean() const { return coefficient(Mode{}).real(); }

std::int64_t TrigObservable::max_frequency() const {
  std::int64_t k = 0;
  for (const auto& [m, c] : c_) k = std::max({k, std::abs(m.m1), std::abs(m.m2)});
  return k;
}

double TrigObservable::evaluate(TorusPoint p) const {
  double s = 0.0;
  for (const auto& [m, c] : c_) {
    const double arg = 2.0 * kPi * (static_cast<double>(m.m1) * p.x + static_cast<double>(m.m2) * p.xi);
    s += (c * std::polar(1.0, arg)).real();
  }
  return s;
}

TrigObservable TrigObservable::operator+(const TrigObservable& o) const {
  Coefficients sum = c_;
  for (const auto& [m, c] : o.c_) sum[m] += c;
  return TrigObservable(std::move(sum));
}

TrigObservable TrigObservable::scaled(double s) const {
  Coefficients out;
  for (const auto& [m, c] : c_) out[m] = c * s;
  return TrigObservable(std::move(out));
}

TrigObservable TrigObservable::composed(const Sl2z& map, int t) const {
  const Sl2z mt = map.transpose().power(t);
  Coefficients out;
  for (const auto& [m, c] : c_) {
    const auto [k1, k2] = mt.apply(m.m1, m.m2);
    out[Mode{k1, k2}] += c;
  }
  return TrigObservable(std::move(out));
}

// ---------------------------------------------------------------------------
// Translations and quantization

StateVector apply_translation(const TorusHilbert& h, std::int64_t n1, std::int64_t n2,
                              const StateVector& psi) {
  const std::int64_t n = h.N();
  StateVector out(n);
  const i128 base = -static_cast<i128>(n1) * n2;
  for (std::int64_t j = 0; j < n; ++j) {
    const cplx ph = half_root(base + 2 * static_cast<i128>(n2) * j, n);
    out[j] = ph * psi[mod_floor(static_cast<i128>(j) - n1, n)];
  }
  return out;
}

ComplexMatrix translation_op(const TorusHilbert& h, std::int64_t n1, std::int64_t n2) {
  const std::int64_t n = h.N();
  ComplexMatrix t = ComplexMatrix::Zero(n, n);
  const i128 base = -static_cast<i128>(n1) * n2;
  for (std::int64_t j = 0; j < n; ++j)
    t(j, mod_floor(static_cast<i128>(j) - n1, n)) = half_root(base + 2 * static_cast<i128>(n2) * j, n);
  return t;
}

ComplexMatrix fourier_mode_op(const TorusHilbert& h, Mode m) {
  return translation_op(h, -m.m2, m.m1);
}

StateVector apply_fourier_mode(const TorusHilbert& h, Mode m, const StateVector& psi) {
  return apply_translation(h, -m.m2, m.m1, psi);
}

ComplexMatrix weyl_quantize(const TorusHilbert& h, const TrigObservable& a) {
  const std::int64_t n = h.N();
  ComplexMatrix op = ComplexMatrix::Zero(n, n);
  for (const auto& [m, c] : a.coefficients()) {
    const std::int64_t n1 = -m.m2, n2 = m.m1;
    const i128 base = -static_cast<i128>(n1) * n2;
    for (std::int64_t j = 0; j < n; ++j)
      op(j, mod_floor(static_cast<i128>(j) - n1, n)) +=
          c * half_root(base + 2 * static_cast<i128>(n2) * j, n);
  }
  return op;
}

StateVector apply_weyl(const TorusHilbert& h, const TrigObservable& a, const StateVector& psi) {
  StateVector out = StateVector::Zero(h.N());
  for (const auto& [m, c] : a.coefficients()) out += c * apply_fourier_mode(h, m, psi);
  return out;
}

// ---------------------------------------------------------------------------
// Coherent states

StateVector coherent_state(const TorusHilbert& h, TorusPoint center) {
  const int n = h.N();
  const double nd = static_cast<double>(n);
  const TorusPoint c = TorusPoint::reduced(center.x, center.xi);
  // exp(−πN w²) < 1e−16 beyond this half-width.
  const double w = std::sqrt(std::log(1e16) / (kPi * nd));
  StateVector psi(n);
  for (int j = 0; j < n; ++j) {
    const double u = j / nd - c.x;
    const auto m_lo = static_cast<long>(std::floor(u - w));
    const auto m_hi = static_cast<long>(std::ceil(u + w));
    cplx s{};
    for (long m = m_lo; m <= m_hi; ++m) {
      const double d = u - static_cast<double>(m);
      const double g = std::exp(-kPi * nd * d * d);
      if (g == 0.0) continue;
      // N·ξ0·(j/N − m) = ξ0·j − N·ξ0·m, reduced mod 1 before scaling.
      const double ph = std::fmod(c.xi * j - nd * c.xi * static_cast<double>(m), 1.0);
      s += g * std::polar(1.0, 2.0 * kPi * ph);
    }
    psi[j] = s;
  }
  const double norm = psi.norm();
  if (norm == 0.0) throw NumericalError("coherent_state: vanishing norm", 0.0);
  return psi / norm;
}

// ---------------------------------------------------------------------------
// Cat propagator

ComplexMatrix cat_propagator(const TorusHilbert& h, const Sl2z& m) {
  if (!m.quantizable())
    throw QuantizationConditionError(
        "map violates the checkerboard condition (a·b and c·d must be even)");
  const std::int64_t n = h.N();
  const std::int64_t a = m.a(), b = m.b(), c = m.c(), d = m.d();
  ComplexMatrix u = ComplexMatrix::Zero(n, n);

  if (b == 0) {
    // a = d = s = ±1: (Uψ)_j = exp(iπ s c j²/N) ψ_{s j}.
    const std::int64_t s = a;
    for (std::int64_t j = 0; j < n; ++j)
      u(j, mod_floor(static_cast<i128>(s) * j, n)) =
          half_root(static_cast<i128>(s) * c * j * j, n);
  } else {
    const std::int64_t bb = std::abs(b);
    const double sgn = b > 0 ? 1.0 : -1.0;
    const std::int64_t period = 2 * n * bb;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n * bb));
    for (std::int64_t jp = 0; jp < n; ++jp) {
      for (std::int64_t j = 0; j < n; ++j) {
        cplx s{};
        for (std::int64_t br = 0; br < bb; ++br) {
          const i128 k = static_cast<i128>(jp) + static_cast<i128>(br) * n;
          const i128 q = static_cast<i128>(a) * j * j - 2 * static_cast<i128>(j) * k +
                         static_cast<i128>(d) * k * k;
          const std::int64_t r = mod_floor(q, period);
          s += std::polar(1.0, sgn * kPi * static_cast<double>(r) / static_cast<double>(n * bb));
        }
        u(jp, j) = scale * s;
      }
    }
  }

  for (std::int64_t i = 0; i < n; ++i) {
    const cplx z = u(i, 0);
    if (std::abs(z) > 1e-8) {
      u *= std::conj(z) / std::abs(z);
      break;
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Norms and defects

double operator_norm(int dim, const std::function<StateVector(const StateVector&)>& apply,
                     const std::function<StateVector(const StateVector&)>& apply_adjoint,
                     int max_iterations, double rel_tol) {
  StateVector v = start_vector(dim);
  double sigma = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const StateVector av = apply(v);
    const double est = av.norm();
    if (est == 0.0) return sigma;
    StateVector w = apply_adjoint(av);
    const double wn = w.norm();
    if (wn == 0.0) return est;
    v = w / wn;
    if (it > 3 && std::abs(est - sigma) <= rel_tol * est) return est;
    sigma = est;
  }
  return std::max(sigma, apply(v).norm());
}

double operator_norm(const ComplexMatrix& a, int max_iterations, double rel_tol) {
  if (a.rows() == 0) return 0.0;
  if (a.rows() != a.cols()) throw InvalidArgument("operator_norm: square matrix expected");
  return operator_norm(
      static_cast<int>(a.cols()), [&](const StateVector& x) -> StateVector { return a * x; },
      [&](const StateVector& x) -> StateVector { return a.adjoint() * x; }, max_iterations,
      rel_tol);
}

double unitarity_defect(const ComplexMatrix& u) {
  ComplexMatrix g = u.adjoint() * u;
  g.diagonal().array() -= 1.0;
  return operator_norm(g);
}

double intertwining_defect(const TorusHilbert& h, const ComplexMatrix& u, const Sl2z& m, Mode n) {
  const ComplexMatrix lhs = u * translation_op(h, n.m1, n.m2) * u.adjoint();
  const auto [k1, k2] = m.apply(n.m1, n.m2);
  const ComplexMatrix rhs = translation_op(h, k1, k2);
  const cplx tr = (rhs.adjoint() * lhs).trace();
  const cplx z = std::abs(tr) > 0.0 ? tr / std::abs(tr) : cplx{1.0, 0.0};
  return operator_norm(lhs - z * rhs);
}

namespace {

// ∥V† Op(A) V − Op(A∘M^t)∥ with V applied through fwd and V† through bwd.
double egorov_norm(const TorusHilbert& h, const CatMap& m, const TrigObservable& a, int t,
                   const std::function<StateVector(const StateVector&)>& fwd,
                   const std::function<StateVector(const StateVector&)>& bwd) {
  const TrigObservable evolved = a.composed(m.matrix(), t);
  // D is Hermitian, so D† = D.
  auto apply_d = [&](const StateVector& v) -> StateVector {
    return bwd(apply_weyl(h, a, fwd(v))) - apply_weyl(h, evolved, v);
  };
  // Three digits suffice for a defect compared against a fixed threshold.
  return operator_norm(h.N(), apply_d, apply_d, 200, 1e-3);
}

}  // namespace

double egorov_defect(const TorusHilbert& h, const ComplexMatrix& u, const CatMap& m,
                     const TrigObservable& a, int t) {
  if (t == 0) return 0.0;
  const ComplexMatrix ud = u.adjoint();
  const ComplexMatrix& f = t > 0 ? u : ud;
  const ComplexMatrix& b = t > 0 ? ud : u;
  const int steps = std::abs(t);
  return egorov_norm(
      h, m, a, t,
      [&](const StateVector& v) {
        StateVector x = v;
        for (int s = 0; s < steps; ++s) x = f * x;
        return x;
      },
      [&](const StateVector& v) {
        StateVector x = v;
        for (int s = 0; s < steps; ++s) x = b * x;
        return x;
      });
}

double egorov_defect_with_power(const TorusHilbert& h, const ComplexMatrix& u_t, const CatMap& m,
                                const TrigObservable& a, int t) {
  if (t == 0) return 0.0;
  const ComplexMatrix ud = u_t.adjoint();
  return egorov_norm(
      h, m, a, t, [&](const StateVector& v) -> StateVector { return u_t * v; },
      [&](const StateVector& v) -> StateVector { return ud * v; });
}

double egorov_defect(const TorusHilbert& h, const CatMap& m, const TrigObservable& a, int t) {
  if (t == 0) return 0.0;
  return egorov_defect(h, cat_propagator(h, m), m, a, t);
}

}  // namespace semiclass
