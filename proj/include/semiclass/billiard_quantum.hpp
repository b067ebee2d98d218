#pragma once
// Finite-difference Dirichlet eigenmodes of planar billiards and position-space
// diagnostics of those modes.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "semiclass/classical.hpp"
#include "semiclass/measures.hpp"

namespace semiclass {

using SparseMatrix = Eigen::SparseMatrix<double>;

// How a stencil arm that leaves the domain is closed.
enum class BoundaryTreatment {
  // Linear extrapolation to the true boundary crossing; keeps the matrix
  // symmetric and gives second-order eigenvalues on curved boundaries.
  GhostPoint,
  // Exterior neighbours contribute zero (plain masking).
  Staircase,
};

// Grid nodes x_i = x0 + i·h, y_j = y0 + j·h covering a bounding box, with the
// nodes strictly inside the domain numbered 0..size()−1.
class DiscreteDomain {
 public:
  // Throws GeometryError for invalid geometry, h ≤ 0, or fewer than 1000
  // interior nodes.
  static DiscreteDomain stadium(const StadiumDomain& domain, double h,
                                BoundaryTreatment treatment = BoundaryTreatment::GhostPoint);
  // Test geometry: the unit square with n × n interior nodes, h = 1/(n+1).
  static DiscreteDomain unit_square(int n);

  double h() const noexcept { return h_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double cell_area() const noexcept { return h_ * h_; }
  BoundaryTreatment treatment() const noexcept { return treatment_; }
  const std::optional<StadiumDomain>& geometry() const noexcept { return geometry_; }

  Vec2 node_position(int i, int j) const noexcept { return {x0_ + i * h_, y0_ + j * h_}; }
  Vec2 position(std::size_t k) const noexcept {
    return node_position(nodes_[k].first, nodes_[k].second);
  }
  // Unknown index of node (i, j), or −1 when outside / off the grid.
  std::int64_t index(int i, int j) const noexcept;
  const std::pair<int, int>& node(std::size_t k) const noexcept { return nodes_[k]; }

  // Fraction θ ∈ (0, 1] of h at which the arm from node k in direction
  // (di, dj) meets the boundary; 1 for the square. Clamped below at 1e−3.
  double crossing_fraction(std::size_t k, int di, int dj) const;

 private:
  DiscreteDomain() = default;
  double h_ = 0.0, x0_ = 0.0, y0_ = 0.0;
  int nx_ = 0, ny_ = 0;
  BoundaryTreatment treatment_ = BoundaryTreatment::GhostPoint;
  std::optional<StadiumDomain> geometry_;
  std::vector<std::int64_t> index_;
  std::vector<std::pair<int, int>> nodes_;
};

// −Δ_h: symmetric positive definite, scaled by 1/h². Throws GeometryError for
// an empty interior.
SparseMatrix build_laplacian(const DiscreteDomain& dom);

// Number of eigenvalues of op below lambda (Sylvester inertia of op − λI).
std::size_t count_below(const SparseMatrix& op, double lambda);

struct BilliardMode {
  double eigenvalue = 0.0;  // ≈ k²
  double k = 0.0;
  double hbar = 0.0;        // 1/k
  double residual = 0.0;    // ∥Δ_h ψ + k² ψ∥ / ∥ψ∥
  Eigen::VectorXd psi;      // Σ ψ² h² = 1, largest |ψ| entry positive
};

struct EigenSolverOptions {
  double residual_tol = 1e-8;
  // Target number of eigenvalues handled by one shift.
  std::size_t per_shift = 32;
  int max_refinements = 4;
  std::uint64_t seed = 1;
};

// The `count` modes with k nearest target_k, sorted by |k − target_k|.
// Requires target_k·h < 0.5. Throws NumericalError when residuals stay above
// tolerance.
std::vector<BilliardMode> eigenmodes_near(const DiscreteDomain& dom, const SparseMatrix& op,
                                          double target_k, std::size_t count,
                                          const EigenSolverOptions& opts = {});

// Every mode with k ∈ [k_lo, k_hi], sorted by k. The count is checked against
// the inertia of op.
std::vector<BilliardMode> eigenmodes_in_window(const DiscreteDomain& dom, const SparseMatrix& op,
                                               double k_lo, double k_hi,
                                               const EigenSolverOptions& opts = {});

// Position-only observable; indicators take values in {0, 1}.
using RegionObservable = std::function<double(Vec2)>;

namespace regions {
RegionObservable everything();
RegionObservable left_half();                         // x < 0
RegionObservable horizontal_tube(double halfwidth);   // |y| ≤ w
RegionObservable central_rectangle(double half_length);  // |x| ≤ a
RegionObservable annulus(double r_inner, double r_outer);
}  // namespace regions

// Σ region(node)·ψ²·h².
double position_measure(const DiscreteDomain& dom, const BilliardMode& mode,
                        const RegionObservable& region);
// Σ region(node) / #nodes, the uniform-field prediction on this grid.
double region_fraction(const DiscreteDomain& dom, const RegionObservable& region);

// Mass in |y| ≤ w over its cell-count area fraction. Requires a stadium with
// 0 < w < r/2.
MassReport scar_score(const DiscreteDomain& dom, const BilliardMode& mode, double halfwidth);
// Mass in |x| ≤ a over its cell-count area fraction. Requires a stadium with a > 0.
MassReport bouncing_ball_score(const DiscreteDomain& dom, const BilliardMode& mode);

// Mean of (position_measure − region_fraction)² over the modes. Requires ≥ 10 modes.
double qe_spatial_variance(const DiscreteDomain& dom, const std::vector<BilliardMode>& modes,
                           const RegionObservable& region);

}  // namespace semiclass
