#include "semiclass/billiard_quantum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "semiclass/errors.hpp"

namespace semiclass {

// ---------------------------------------------------------------------------
// Grids

DiscreteDomain DiscreteDomain::stadium(const StadiumDomain& domain, double h,
                                       BoundaryTreatment treatment) {
  domain.validate();
  if (!(h > 0.0) || !std::isfinite(h)) throw GeometryError("grid spacing h must be positive");
  DiscreteDomain d;
  d.h_ = h;
  d.treatment_ = treatment;
  d.geometry_ = domain;
  const Vec2 lo = domain.lower_left(), hi = domain.upper_right();
  d.x0_ = lo.x;
  d.y0_ = lo.y;
  d.nx_ = static_cast<int>(std::ceil((hi.x - lo.x) / h - 1e-9)) + 1;
  d.ny_ = static_cast<int>(std::ceil((hi.y - lo.y) / h - 1e-9)) + 1;
  d.index_.assign(static_cast<std::size_t>(d.nx_) * d.ny_, -1);
  for (int i = 0; i < d.nx_; ++i)
    for (int j = 0; j < d.ny_; ++j)
      if (domain.contains(d.node_position(i, j))) {
        d.index_[static_cast<std::size_t>(i) * d.ny_ + j] = static_cast<std::int64_t>(d.nodes_.size());
        d.nodes_.emplace_back(i, j);
      }
  if (d.nodes_.size() < 1000)
    throw GeometryError("grid has " + std::to_string(d.nodes_.size()) +
                        " interior nodes; at least 1000 are required (decrease h)");
  return d;
}

DiscreteDomain DiscreteDomain::unit_square(int n) {
  if (n < 1) throw GeometryError("unit_square: n must be >= 1");
  DiscreteDomain d;
  d.h_ = 1.0 / (n + 1);
  d.treatment_ = BoundaryTreatment::Staircase;
  d.x0_ = 0.0;
  d.y0_ = 0.0;
  d.nx_ = n + 2;
  d.ny_ = n + 2;
  d.index_.assign(static_cast<std::size_t>(d.nx_) * d.ny_, -1);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      d.index_[static_cast<std::size_t>(i) * d.ny_ + j] = static_cast<std::int64_t>(d.nodes_.size());
      d.nodes_.emplace_back(i, j);
    }
  return d;
}

std::int64_t DiscreteDomain::index(int i, int j) const noexcept {
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  return index_[static_cast<std::size_t>(i) * ny_ + j];
}

double DiscreteDomain::crossing_fraction(std::size_t k, int di, int dj) const {
  if (!geometry_) return 1.0;
  // Nodes may sit on the boundary up to rounding, so near-zero (even slightly
  // negative) distances are accepted here and clamped below.
  const BoundaryHit hit = first_boundary_hit(*geometry_, position(k),
                                             Vec2{static_cast<double>(di), static_cast<double>(dj)}, -1e-9);
  return std::clamp(hit.distance / h_, 1e-3, 1.0);
}

SparseMatrix build_laplacian(const DiscreteDomain& dom) {
  const std::size_t n = dom.size();
  if (n == 0) throw GeometryError("build_laplacian: empty interior");
  const double inv_h2 = 1.0 / (dom.h() * dom.h());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * n);
  constexpr int kDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (std::size_t k = 0; k < n; ++k) {
    const auto [i, j] = dom.node(k);
    double diag = 4.0;
    for (const auto& dir : kDirs) {
      const std::int64_t nb = dom.index(i + dir[0], j + dir[1]);
      if (nb >= 0) {
        trip.emplace_back(static_cast<int>(k), static_cast<int>(nb), -inv_h2);
      } else if (dom.treatment() == BoundaryTreatment::GhostPoint) {
        const double theta = dom.crossing_fraction(k, dir[0], dir[1]);
        diag += (1.0 - theta) / theta;
      }
    }
    trip.emplace_back(static_cast<int>(k), static_cast<int>(k), diag * inv_h2);
  }
  SparseMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

// ---------------------------------------------------------------------------
// Shift-invert machinery

namespace {

using Ldlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

// LDLᵀ factorizations of op − σI sharing one symbolic analysis.
class ShiftedFactor {
 public:
  explicit ShiftedFactor(const SparseMatrix& op) : op_(op) {
    ident_.resize(op.rows(), op.cols());
    ident_.setIdentity();
    solver_.analyzePattern(op_);
  }

  void factor(double sigma) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const SparseMatrix k = op_ - sigma * ident_;
      solver_.factorize(k);
      if (solver_.info() == Eigen::Success && solver_.vectorD().cwiseAbs().minCoeff() > 0.0) {
        sigma_ = sigma;
        return;
      }
      sigma += 1e-9 * std::max(1.0, std::abs(sigma));
    }
    throw NumericalError("shift-invert: LDLT factorization failed near sigma = " + std::to_string(sigma),
                         0.0);
  }

  double sigma() const noexcept { return sigma_; }
  std::size_t negatives() const {
    const Eigen::VectorXd& d = solver_.vectorD();
    return static_cast<std::size_t>((d.array() < 0.0).count());
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& x) const { return solver_.solve(x); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& x) const { return solver_.solve(x); }
  // One step of iterative refinement. LDLᵀ without pivoting on an indefinite
  // shift can lose several digits, which would otherwise cap the residuals.
  Eigen::MatrixXd solve_refined(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd y = solver_.solve(x);
    const Eigen::MatrixXd r = x - (op_ * y - sigma_ * y);
    y += solver_.solve(r);
    return y;
  }

 private:
  const SparseMatrix& op_;
  SparseMatrix ident_;
  Ldlt solver_;
  double sigma_ = 0.0;
};

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& v) {
  if (v.cols() == 0) return v;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  return qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), v.cols());
}

struct Ritz {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

// Rayleigh–Ritz of op on the span of the orthonormal columns of v.
Ritz rayleigh_ritz(const SparseMatrix& op, const Eigen::MatrixXd& v) {
  const Eigen::MatrixXd av = op * v;
  Eigen::MatrixXd hm = v.transpose() * av;
  hm = 0.5 * (hm + hm.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
  return {es.eigenvalues(), v * es.eigenvectors()};
}

Eigen::VectorXd residual_norms(const SparseMatrix& op, const Ritz& r) {
  const Eigen::MatrixXd res = op * r.vectors - r.vectors * r.values.asDiagonal();
  Eigen::VectorXd out(res.cols());
  for (Eigen::Index c = 0; c < res.cols(); ++c) out[c] = res.col(c).norm() / r.vectors.col(c).norm();
  return out;
}

// Eigenvectors of op with eigenvalue in [lo, hi] from the factorization at
// the interval midpoint. `expected` comes from inertia counts. Lanczos runs
// with full reorthogonalization; exact multiplets, which a single Krylov
// sequence cannot resolve, are recovered by restarting from a fresh vector
// with the vectors found so far deflated.
Eigen::MatrixXd lanczos_interval(const ShiftedFactor& f, Eigen::Index n, double lo, double hi,
                                 std::size_t expected, bool eig_below, bool eig_above,
                                 double residual_tol, std::mt19937_64& rng) {
  const double sigma = f.sigma();
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd found(n, 0);

  auto deflate = [&](Eigen::VectorXd& w) {
    if (found.cols() > 0) w -= found * (found.transpose() * w);
  };

  for (int run = 0; run < 8 && static_cast<std::size_t>(found.cols()) < expected; ++run) {
    const std::size_t missing = expected - static_cast<std::size_t>(found.cols());
    const Eigen::Index cap = std::min<Eigen::Index>(
        n - found.cols(), static_cast<Eigen::Index>(std::max<std::size_t>(80, 4 * missing + 40)));
    Eigen::MatrixXd q(n, cap);
    std::vector<double> alpha, beta;

    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = gauss(rng);
    deflate(w);
    q.col(0) = w / w.norm();

    Eigen::Index steps = 0;
    Eigen::MatrixXd keep;
    for (Eigen::Index j = 0; j < cap; ++j) {
      w = f.solve(Eigen::VectorXd(q.col(j)));
      deflate(w);
      const double a = q.col(j).dot(w);
      w -= a * q.col(j);
      if (j > 0) w -= beta.back() * q.col(j - 1);
      for (int pass = 0; pass < 2; ++pass) {
        w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
        deflate(w);
      }
      const double b = w.norm();
      alpha.push_back(a);
      beta.push_back(b);
      steps = j + 1;

      const bool breakdown = b <= 1e-12 * std::abs(a);
      const bool last = steps == cap || breakdown;
      if (!last && (steps < 10 || steps % 5 != 0)) {
        q.col(j + 1) = w / b;
        continue;
      }

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), steps);
      Eigen::VectorXd sub = steps > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), steps - 1))
                                      : Eigen::VectorXd(0);
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const Eigen::VectorXd& theta = es.eigenvalues();
      const Eigen::MatrixXd& s = es.eigenvectors();
      const double theta_max = theta.cwiseAbs().maxCoeff();

      bool inside_ok = true, below_ok = !eig_below, above_ok = !eig_above;
      std::vector<Eigen::Index> inside;
      for (Eigen::Index i = 0; i < steps; ++i) {
        if (theta[i] == 0.0) continue;
        const double lam = sigma + 1.0 / theta[i];
        // |β·s| bounds the residual of the inverted operator; dividing by θ²
        // estimates the residual of op itself, which is what gets checked.
        const double est = std::abs(b * s(steps - 1, i));
        const bool conv = breakdown || (est <= 1e-11 * theta_max &&
                                        est <= 0.05 * residual_tol * theta[i] * theta[i]);
        if (lam >= lo && lam <= hi) {
          inside.push_back(i);
          inside_ok = inside_ok && conv;
        } else if (conv && lam < lo) {
          below_ok = true;
        } else if (conv && lam > hi) {
          above_ok = true;
        }
      }
      const bool enough = inside.size() >= missing;
      if ((inside_ok && below_ok && above_ok) || (inside_ok && enough) || last) {
        keep.resize(steps, static_cast<Eigen::Index>(inside.size()));
        for (std::size_t c = 0; c < inside.size(); ++c) keep.col(static_cast<Eigen::Index>(c)) = s.col(inside[c]);
        break;
      }
      q.col(j + 1) = w / b;
    }
    if (keep.cols() == 0) continue;
    Eigen::MatrixXd y = q.leftCols(steps) * keep;
    Eigen::MatrixXd merged(n, found.cols() + y.cols());
    merged << found, y;
    found = orthonormalize(merged);
  }
  return found;
}

// Every eigenpair of op with eigenvalue in [lam_lo, lam_hi].
Ritz window_solve(const SparseMatrix& op, double lam_lo, double lam_hi, const EigenSolverOptions& opts) {
  const Eigen::Index n = op.rows();
  ShiftedFactor f(op);
  auto count_at = [&](double lam) {
    f.factor(lam);
    return f.negatives();
  };
  const std::size_t n_lo = count_at(lam_lo);
  const std::size_t n_hi = count_at(lam_hi);
  if (n_hi <= n_lo) return {Eigen::VectorXd(0), Eigen::MatrixXd(n, 0)};
  const std::size_t total = n_hi - n_lo;
  const std::size_t per = std::max<std::size_t>(4, opts.per_shift);
  const std::size_t nsub = (total + per - 1) / per;

  std::vector<double> edges(nsub + 1);
  std::vector<std::size_t> counts(nsub + 1);
  for (std::size_t s = 0; s <= nsub; ++s)
    edges[s] = lam_lo + (lam_hi - lam_lo) * static_cast<double>(s) / static_cast<double>(nsub);
  counts[0] = n_lo;
  counts[nsub] = n_hi;
  for (std::size_t s = 1; s < nsub; ++s) counts[s] = count_at(edges[s]);

  std::mt19937_64 rng(opts.seed);
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index cols = 0;
  for (std::size_t s = 0; s < nsub; ++s) {
    if (counts[s + 1] == counts[s]) continue;
    // Each sub-window is solved on a widened interval so that its edge
    // eigenvalues are not the slowest to converge under inverse iteration;
    // only the pairs inside the sub-window itself are kept.
    const double width = edges[s + 1] - edges[s];
    const double lo = edges[s] - 0.25 * width, hi = edges[s + 1] + 0.25 * width;
    const std::size_t c_lo = count_at(lo), c_hi = count_at(hi);
    const std::size_t expected = c_hi - c_lo;
    f.factor(0.5 * (edges[s] + edges[s + 1]));
    Eigen::MatrixXd y = lanczos_interval(f, n, lo, hi, expected, c_lo > 0,
                                         c_hi < static_cast<std::size_t>(n), opts.residual_tol, rng);
    if (static_cast<std::size_t>(y.cols()) < expected)
      throw NumericalError("shift-invert Lanczos resolved " + std::to_string(y.cols()) + " of " +
                               std::to_string(expected) + " eigenvalues in [" + std::to_string(lo) +
                               ", " + std::to_string(hi) + "]",
                           0.0);
    Ritz r = rayleigh_ritz(op, y);
    for (int it = 0; it < opts.max_refinements; ++it) {
      const Eigen::VectorXd res = residual_norms(op, r);
      double worst = 0.0;
      for (Eigen::Index i = 0; i < res.size(); ++i)
        if (r.values[i] >= edges[s] && r.values[i] <= edges[s + 1]) worst = std::max(worst, res[i]);
      if (worst <= 0.1 * opts.residual_tol) break;
      r = rayleigh_ritz(op, orthonormalize(f.solve_refined(r.vectors)));
    }
    std::vector<Eigen::Index> own;
    for (Eigen::Index i = 0; i < r.values.size(); ++i)
      if (r.values[i] >= edges[s] && (r.values[i] < edges[s + 1] || (s + 1 == nsub && r.values[i] <= lam_hi)))
        own.push_back(i);
    Eigen::MatrixXd keep(n, static_cast<Eigen::Index>(own.size()));
    for (std::size_t c = 0; c < own.size(); ++c) keep.col(static_cast<Eigen::Index>(c)) = r.vectors.col(own[c]);
    cols += keep.cols();
    blocks.push_back(std::move(keep));
  }

  Eigen::MatrixXd all(n, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    all.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  Ritz r = rayleigh_ritz(op, orthonormalize(all));
  std::vector<Eigen::Index> sel;
  for (Eigen::Index i = 0; i < r.values.size(); ++i)
    if (r.values[i] >= lam_lo && r.values[i] <= lam_hi) sel.push_back(i);
  if (sel.size() != total)
    throw NumericalError("eigen-solver found " + std::to_string(sel.size()) + " eigenvalues where the inertia count gives " +
                             std::to_string(total),
                         0.0);
  Ritz out{Eigen::VectorXd(static_cast<Eigen::Index>(sel.size())),
           Eigen::MatrixXd(n, static_cast<Eigen::Index>(sel.size()))};
  for (std::size_t c = 0; c < sel.size(); ++c) {
    out.values[static_cast<Eigen::Index>(c)] = r.values[sel[c]];
    out.vectors.col(static_cast<Eigen::Index>(c)) = r.vectors.col(sel[c]);
  }
  return out;
}

std::vector<BilliardMode> to_modes(const DiscreteDomain& dom, const SparseMatrix& op, const Ritz& r,
                                   double tol) {
  std::vector<BilliardMode> modes;
  modes.reserve(static_cast<std::size_t>(r.values.size()));
  const Eigen::VectorXd res = residual_norms(op, r);
  for (Eigen::Index c = 0; c < r.values.size(); ++c) {
    if (res[c] > tol)
      throw NumericalError("eigenmode residual above tolerance at eigenvalue " +
                               std::to_string(r.values[c]),
                           res[c]);
    BilliardMode m;
    m.eigenvalue = r.values[c];
    m.k = std::sqrt(m.eigenvalue);
    m.hbar = 1.0 / m.k;
    m.residual = res[c];
    m.psi = r.vectors.col(c) / (r.vectors.col(c).norm() * dom.h());
    Eigen::Index imax = 0;
    m.psi.cwiseAbs().maxCoeff(&imax);
    if (m.psi[imax] < 0.0) m.psi = -m.psi;
    modes.push_back(std::move(m));
  }
  return modes;
}

double weyl_density(const DiscreteDomain& dom) {
  // dN/dλ ≈ Area/(4π) with Area ≈ (#nodes)·h².
  return static_cast<double>(dom.size()) * dom.cell_area() / (4.0 * std::numbers::pi);
}

}  // namespace

std::size_t count_below(const SparseMatrix& op, double lambda) {
  ShiftedFactor f(op);
  f.factor(lambda);
  return f.negatives();
}

std::vector<BilliardMode> eigenmodes_in_window(const DiscreteDomain& dom, const SparseMatrix& op,
                                               double k_lo, double k_hi,
                                               const EigenSolverOptions& opts) {
  if (!(k_lo >= 0.0 && k_hi > k_lo)) throw InvalidArgument("eigenmodes_in_window: need 0 <= k_lo < k_hi");
  if (k_hi * dom.h() >= 0.5)
    throw InvalidArgument("eigenmodes_in_window: k·h must stay below 0.5 (k_hi = " +
                          std::to_string(k_hi) + ", h = " + std::to_string(dom.h()) + ")");
  const Ritz r = window_solve(op, k_lo * k_lo, k_hi * k_hi, opts);
  return to_modes(dom, op, r, opts.residual_tol);
}

std::vector<BilliardMode> eigenmodes_near(const DiscreteDomain& dom, const SparseMatrix& op,
                                          double target_k, std::size_t count,
                                          const EigenSolverOptions& opts) {
  if (count == 0) return {};
  if (!(target_k > 0.0)) throw InvalidArgument("eigenmodes_near: target_k must be positive");
  if (target_k * dom.h() >= 0.5)
    throw InvalidArgument("eigenmodes_near: k·h must stay below 0.5");
  if (count > static_cast<std::size_t>(op.rows()))
    throw InvalidArgument("eigenmodes_near: count exceeds the operator dimension");
  const double sigma = target_k * target_k;
  // Grow a λ-window around σ until it holds count + 2 eigenvalues (or all).
  double radius = std::max(1e-6 * sigma, (static_cast<double>(count) + 2.0) / weyl_density(dom));
  ShiftedFactor f(op);
  const std::size_t want = std::min<std::size_t>(count + 2, static_cast<std::size_t>(op.rows()));
  for (int it = 0; it < 60; ++it) {
    f.factor(sigma + radius);
    const std::size_t above = f.negatives();
    f.factor(sigma - radius);
    const std::size_t below = f.negatives();
    if (above - below >= want) break;
    radius *= 1.6;
  }
  const Ritz r = window_solve(op, sigma - radius, sigma + radius, opts);
  std::vector<BilliardMode> modes = to_modes(dom, op, r, opts.residual_tol);
  std::stable_sort(modes.begin(), modes.end(), [&](const BilliardMode& a, const BilliardMode& b) {
    return std::abs(a.k - target_k) < std::abs(b.k - target_k);
  });
  if (modes.size() > count) modes.resize(count);
  return modes;
}

// ---------------------------------------------------------------------------
// Position-space diagnostics

namespace regions {
RegionObservable everything() {
  return [](Vec2) { return 1.0; };
}
RegionObservable left_half() {
  return [](Vec2 p) { return p.x < 0.0 ? 1.0 : 0.0; };
}
RegionObservable horizontal_tube(double w) {
  return [w](Vec2 p) { return std::abs(p.y) <= w ? 1.0 : 0.0; };
}
RegionObservable central_rectangle(double a) {
  return [a](Vec2 p) { return std::abs(p.x) <= a ? 1.0 : 0.0; };
}
RegionObservable annulus(double r_in, double r_out) {
  return [r_in, r_out](Vec2 p) {
    const double r = p.norm();
    return (r >= r_in && r < r_out) ? 1.0 : 0.0;
  };
}
}  // namespace regions

double position_measure(const DiscreteDomain& dom, const BilliardMode& mode,
                        const RegionObservable& region) {
  if (static_cast<std::size_t>(mode.psi.size()) != dom.size())
    throw InvalidArgument("position_measure: mode does not belong to this grid");
  double s = 0.0;
  for (std::size_t k = 0; k < dom.size(); ++k) {
    const double v = mode.psi[static_cast<Eigen::Index>(k)];
    s += region(dom.position(k)) * v * v;
  }
  return s * dom.cell_area();
}

double region_fraction(const DiscreteDomain& dom, const RegionObservable& region) {
  double s = 0.0;
  for (std::size_t k = 0; k < dom.size(); ++k) s += region(dom.position(k));
  return s / static_cast<double>(dom.size());
}

namespace {

MassReport mass_report(const DiscreteDomain& dom, const BilliardMode& mode,
                       const RegionObservable& region, std::string name) {
  MassReport r;
  r.region = std::move(name);
  r.mass = position_measure(dom, mode, region);
  r.reference = region_fraction(dom, region);
  r.ratio = r.reference > 0.0 ? r.mass / r.reference : 0.0;
  return r;
}

}  // namespace

MassReport scar_score(const DiscreteDomain& dom, const BilliardMode& mode, double halfwidth) {
  if (!dom.geometry()) throw InvalidArgument("scar_score: needs a stadium grid");
  const double r = dom.geometry()->radius;
  if (!(halfwidth > 0.0 && halfwidth < 0.5 * r))
    throw InvalidArgument("scar_score: tube half-width must lie in (0, r/2)");
  return mass_report(dom, mode, regions::horizontal_tube(halfwidth),
                     "|y| <= " + std::to_string(halfwidth));
}

MassReport bouncing_ball_score(const DiscreteDomain& dom, const BilliardMode& mode) {
  if (!dom.geometry() || !(dom.geometry()->half_length > 0.0))
    throw InvalidArgument("bouncing_ball_score: needs a stadium grid with a > 0");
  const double a = dom.geometry()->half_length;
  return mass_report(dom, mode, regions::central_rectangle(a), "|x| <= " + std::to_string(a));
}

double qe_spatial_variance(const DiscreteDomain& dom, const std::vector<BilliardMode>& modes,
                           const RegionObservable& region) {
  if (modes.size() < 10) throw InvalidArgument("qe_spatial_variance: needs at least 10 modes");
  const double frac = region_fraction(dom, region);
  double s = 0.0;
  for (const auto& m : modes) {
    const double d = position_measure(dom, m, region) - frac;
    s += d * d;
  }
  return s / static_cast<double>(modes.size());
}

}  // namespace semiclass
