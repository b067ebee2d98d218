#pragma once
// Eigenphases of unitary propagators, degeneracy clusters, quantum periods
// and time-averaged quasi-eigenstates.

#include <optional>
#include <vector>

#include "semiclass/torus_quantum.hpp"

namespace semiclass {

struct EigenDecomposition {
  std::vector<double> phases;  // ascending, each in [0, 2π)
  ComplexMatrix vectors;       // column n is the eigenvector of phases[n]
  double max_residual = 0.0;   // max_n ∥U v_n − e^{iφ_n} v_n∥
  double orthogonality_defect = 0.0;  // max |(V†V − I)_{ij}|
};

// Requires ∥U†U − I∥ < 1e−10 (InvalidArgument otherwise). Throws NumericalError
// carrying the residual if the eigenpairs miss residual_tol.
EigenDecomposition diagonalize(const ComplexMatrix& u, double residual_tol = 1e-10);

// Σ_n e^{iφ_n} v_n v_n†.
ComplexMatrix reconstruct(const EigenDecomposition& dec);

struct PhaseCluster {
  double mean_phase = 0.0;  // circular mean of the members, in [0, 2π)
  std::vector<std::size_t> members;
};

struct DegeneracyReport {
  std::vector<PhaseCluster> clusters;
  double tolerance = 0.0;
};

inline constexpr double kDefaultDegeneracyTol = 1e-8 * 2.0 * std::numbers::pi;

// Single-linkage clustering on the circle: neighbours closer than tol share a
// cluster. Refining tol can only split clusters.
DegeneracyReport degeneracy_clusters(const std::vector<double>& phases,
                                     double tol = kDefaultDegeneracyTol);

// Smallest t ≥ 1 with m^t ≡ I (mod modulus), if t ≤ t_max.
std::optional<int> sl2_order_mod(const Sl2z& m, std::int64_t modulus, int t_max);

struct QuantumPeriod {
  int P = 0;
  double global_phase = 0.0;  // U^P = e^{i·global_phase}·I, phase in [0, 2π)
  std::optional<int> order_mod_2N;  // order of M in SL(2, Z/2N), if ≤ the search limit
};

// Smallest P ≤ p_max with U^P ∝ I. Candidates are the multiples of the order
// of M mod N; each is confirmed on random vectors.
std::optional<QuantumPeriod> quantum_period(const TorusHilbert& h, const CatMap& m, int p_max);
std::optional<QuantumPeriod> quantum_period(const TorusHilbert& h, const ComplexMatrix& u,
                                            const CatMap& m, int p_max);

struct ScarredState {
  StateVector state;
  double theta = 0.0;
  int t_half = 0;
  std::optional<QuantumPeriod> period;  // as found while choosing theta
  double residual = 0.0;                // ∥(U − e^{iθ}) state∥
};

// Normalized Σ_{|t| < t_half} e^{−iθt} U^t ψ₀ with ψ₀ the coherent state at
// the origin. Without an explicit theta, a quantum period P ≤ 2·t_half is
// looked up and theta is the cluster centre (φ_g + 2πk)/P nearest to
// arg⟨ψ₀, Uψ₀⟩; with no period theta = 0. Throws DegenerateConstruction when
// the sum cancels.
ScarredState scarred_state(const TorusHilbert& h, const CatMap& m, int t_half,
                           std::optional<double> theta = std::nullopt);
ScarredState scarred_state(const TorusHilbert& h, const ComplexMatrix& u, const CatMap& m,
                           int t_half, std::optional<double> theta = std::nullopt);

// ⌈P/2⌉ when a period is known, else max(1, ⌊log N / λ⌋).
int default_scar_window(const TorusHilbert& h, const CatMap& m,
                        const std::optional<QuantumPeriod>& period);

struct Projection {
  StateVector state;      // normalized projection; zero vector if overlap is 0
  double phase = 0.0;     // centre of the phase window used
  double overlap = 0.0;   // ∥P ψ∥² / ∥ψ∥²
  std::vector<std::size_t> members;
  bool weak = false;      // overlap < 0.5
};

// Projection onto eigenvectors whose phase lies within tol of the dominant
// phase component of ψ (the window centre maximizing captured weight).
Projection project_degenerate(const EigenDecomposition& dec, const StateVector& psi, double tol);
// Same with the window centre given.
Projection project_onto_phase(const EigenDecomposition& dec, const StateVector& psi,
                              double phase, double tol);

// Shortest signed distance between two angles, in [−π, π].
double circular_difference(double a, double b) noexcept;

}  // namespace semiclass
