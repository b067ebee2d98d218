#pragma once
// Quantum mechanics on the torus at ħ_N = 1/(2πN): translations, Weyl
// quantization of trigonometric observables, coherent states and the
// quantized cat-map propagator.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <utility>

#include "semiclass/classical.hpp"

namespace semiclass {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

class TorusHilbert {
 public:
  // Throws InvalidArgument for N < 1.
  explicit TorusHilbert(int N);
  int N() const noexcept { return n_; }
  double hbar() const noexcept { return 1.0 / (2.0 * std::numbers::pi * n_); }

 private:
  int n_;
};

// Integer Fourier index (m1, m2).
struct Mode {
  std::int64_t m1 = 0;
  std::int64_t m2 = 0;
  Mode operator-() const noexcept { return {-m1, -m2}; }
  friend auto operator<=>(const Mode&, const Mode&) = default;
};

// Real trigonometric polynomial A(x, ξ) = Σ_m c_m exp(2πi(m1·x + m2·ξ)).
class TrigObservable {
 public:
  using Coefficients = std::map<Mode, cplx>;

  TrigObservable() = default;
  // Throws InvalidObservable unless c_{−m} = conj(c_m) for every m.
  explicit TrigObservable(Coefficients coeffs);

  static TrigObservable constant(double value);
  // amplitude·cos(2π m·v) and amplitude·sin(2π m·v), m ≠ 0.
  static TrigObservable cos_mode(Mode m, double amplitude = 1.0);
  static TrigObservable sin_mode(Mode m, double amplitude = 1.0);

  const Coefficients& coefficients() const noexcept { return c_; }
  cplx coefficient(Mode m) const;
  // Phase-space average, c_(0,0).
  double mean() const;
  // max over the support of max(|m1|, |m2|).
  std::int64_t max_frequency() const;
  double evaluate(TorusPoint p) const;

  TrigObservable operator+(const TrigObservable& o) const;
  TrigObservable scaled(double s) const;
  // A ∘ M^t: the coefficient at m moves to (Mᵀ)^t m.
  TrigObservable composed(const Sl2z& map, int t = 1) const;

 private:
  Coefficients c_;
};

// T(n): translation of phase space by n/N. Satisfies T(n)† = T(−n) and
// T(m)T(n) = exp(−iπσ(m,n)/N)·T(m+n), σ(m,n) = m1·n2 − m2·n1.
ComplexMatrix translation_op(const TorusHilbert& h, std::int64_t n1, std::int64_t n2);
StateVector apply_translation(const TorusHilbert& h, std::int64_t n1, std::int64_t n2,
                              const StateVector& psi);

// Quantization of the single Fourier mode exp(2πi m·v), equal to T(−m2, m1).
ComplexMatrix fourier_mode_op(const TorusHilbert& h, Mode m);
StateVector apply_fourier_mode(const TorusHilbert& h, Mode m, const StateVector& psi);

// Op_N(A) = Σ_m c_m · fourier_mode_op(m). Hermitian for real A, Op_N(1) = I.
ComplexMatrix weyl_quantize(const TorusHilbert& h, const TrigObservable& a);
StateVector apply_weyl(const TorusHilbert& h, const TrigObservable& a, const StateVector& psi);

// Normalized periodized Gaussian centred at `center`.
StateVector coherent_state(const TorusHilbert& h, TorusPoint center);

// Metaplectic propagator of an SL(2, Z) matrix satisfying the checkerboard
// condition; throws QuantizationConditionError otherwise. The global phase is
// fixed by making the first nonzero entry of column 0 real and positive.
ComplexMatrix cat_propagator(const TorusHilbert& h, const Sl2z& m);
inline ComplexMatrix cat_propagator(const TorusHilbert& h, const CatMap& m) {
  return cat_propagator(h, m.matrix());
}

// Largest singular value of a linear map given by its action and adjoint
// action. Power iteration on A†A from a fixed pseudo-random start.
double operator_norm(int dim, const std::function<StateVector(const StateVector&)>& apply,
                     const std::function<StateVector(const StateVector&)>& apply_adjoint,
                     int max_iterations = 200, double rel_tol = 1e-6);
double operator_norm(const ComplexMatrix& a, int max_iterations = 200, double rel_tol = 1e-6);

// ∥U†U − I∥_op.
double unitarity_defect(const ComplexMatrix& u);

// min over unimodular z of ∥U T(n) U† − z·T(Mn)∥_op.
double intertwining_defect(const TorusHilbert& h, const ComplexMatrix& u, const Sl2z& m, Mode n);

// ∥U^{−t} Op_N(A) U^t − Op_N(A ∘ M^t)∥_op, computed matrix-free.
double egorov_defect(const TorusHilbert& h, const CatMap& m, const TrigObservable& a, int t);
double egorov_defect(const TorusHilbert& h, const ComplexMatrix& u, const CatMap& m,
                     const TrigObservable& a, int t);
// Same defect with U^t supplied directly, for sweeps over many observables.
double egorov_defect_with_power(const TorusHilbert& h, const ComplexMatrix& u_t, const CatMap& m,
                                const TrigObservable& a, int t);

}  // namespace semiclass
