#pragma once
// Phase-space distributions of torus states and comparison with model
// invariant measures.

#include <memory>
#include <string>
#include <vector>

#include "semiclass/spectral.hpp"
#include "semiclass/torus_quantum.hpp"

namespace semiclass {

// μ_ψ(A) = ⟨ψ, Op_N(A) ψ⟩ (real part; the imaginary part is roundoff).
double matrix_element(const TorusHilbert& h, const StateVector& psi, const TrigObservable& a);

// ⟨ψ, W(m) ψ⟩ for max(|m1|, |m2|) ≤ cutoff, W(m) the quantized Fourier mode.
class WignerCoefficients {
 public:
  WignerCoefficients(int cutoff, std::vector<cplx> values);
  int cutoff() const noexcept { return k_; }
  // Throws InvalidArgument outside the cutoff box.
  cplx at(Mode m) const;

 private:
  int k_;
  std::vector<cplx> v_;
};

// Throws AliasingError when 2·cutoff ≥ N.
WignerCoefficients wigner_coefficients(const TorusHilbert& h, const StateVector& psi, int cutoff);

// Coherent-state smoothing sampled at (i/G, j/G), normalized to total 1.
struct HusimiGrid {
  int G = 0;
  std::vector<double> values;  // values[i * G + j] at (x, ξ) = (i/G, j/G)
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * G + j]; }
};

// Requires G ≥ 8.
HusimiGrid husimi(const TorusHilbert& h, const StateVector& psi, int G);
// ⌈2√N⌉, at least 8.
int default_husimi_grid(int N);

// Total value of the grid points within torus distance eps of center.
// Requires 0 < eps < 0.5.
double ball_mass(const HusimiGrid& g, TorusPoint center, double eps);

// ⟨v_n, Op_N(A) v_n⟩ for every column of the decomposition.
std::vector<double> eigenbasis_matrix_elements(const TorusHilbert& h, const EigenDecomposition& dec,
                                               const TrigObservable& a);
// (1/N) Σ_n |⟨v_n, Op_N(A) v_n⟩ − mean(A)|².
double qe_variance(const TorusHilbert& h, const EigenDecomposition& dec, const TrigObservable& a);

// Exactly representable invariant measures on T².
class ModelMeasure {
 public:
  enum class Kind { Lebesgue, PeriodicOrbit, Mixture };

  static ModelMeasure lebesgue();
  // Throws InvalidArgument if the points are empty or not closed under map.
  static ModelMeasure periodic_orbit(const CatMap& map, std::vector<TorusPoint> orbit);
  // alpha·a + (1 − alpha)·b; throws InvalidArgument unless alpha ∈ [0, 1].
  static ModelMeasure mixture(double alpha, ModelMeasure a, ModelMeasure b);

  Kind kind() const noexcept { return kind_; }
  const std::vector<TorusPoint>& orbit() const noexcept { return orbit_; }
  double alpha() const noexcept { return alpha_; }
  const ModelMeasure& first() const { return *a_; }
  const ModelMeasure& second() const { return *b_; }

  // ∫ exp(2πi m·v) dμ(v).
  cplx fourier_coefficient(Mode m) const;

 private:
  ModelMeasure() = default;
  Kind kind_ = Kind::Lebesgue;
  std::vector<TorusPoint> orbit_;
  double alpha_ = 1.0;
  std::shared_ptr<const ModelMeasure> a_, b_;
};

// max over 0 < max(|m1|, |m2|) ≤ cutoff of |w(m) − model(m)|.
// Throws InvalidArgument when cutoff exceeds w.cutoff().
inline constexpr int kDefaultWeakStarCutoff = 8;
double weak_star_distance(const WignerCoefficients& w, const ModelMeasure& model,
                          int cutoff = kDefaultWeakStarCutoff);

struct MassReport {
  std::string region;
  double mass = 0.0;
  double reference = 0.0;  // model (uniform) prediction
  double ratio = 0.0;      // mass / reference
};

}  // namespace semiclass
