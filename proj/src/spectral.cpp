#include "semiclass/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "semiclass/errors.hpp"

namespace semiclass {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double p) {
  double r = std::fmod(p, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

}  // namespace

double circular_difference(double a, double b) noexcept {
  double d = std::fmod(a - b, kTwoPi);
  if (d > std::numbers::pi) d -= kTwoPi;
  if (d < -std::numbers::pi) d += kTwoPi;
  return d;
}

EigenDecomposition diagonalize(const ComplexMatrix& u, double residual_tol) {
  const Eigen::Index n = u.rows();
  if (n == 0 || u.cols() != n) throw InvalidArgument("diagonalize: nonempty square matrix expected");
  {
    ComplexMatrix g = u.adjoint() * u;
    g.diagonal().array() -= 1.0;
    if (g.norm() > 1e-10 && operator_norm(g) > 1e-10)
      throw InvalidArgument("diagonalize: operator is not unitary to 1e-10");
  }

  Eigen::ComplexSchur<ComplexMatrix> schur(u, true);
  if (schur.info() != Eigen::Success)
    throw NumericalError("diagonalize: Schur iteration did not converge",
                         std::numeric_limits<double>::infinity());
  const ComplexMatrix& q = schur.matrixU();
  const ComplexMatrix& t = schur.matrixT();

  std::vector<double> raw(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) raw[i] = wrap_phase(std::arg(t(i, i)));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return raw[a] < raw[b]; });

  EigenDecomposition dec;
  dec.phases.resize(static_cast<std::size_t>(n));
  dec.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    dec.phases[k] = raw[order[k]];
    dec.vectors.col(k) = q.col(order[k]);
  }

  const ComplexMatrix uv = u * dec.vectors;
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx z = std::polar(1.0, dec.phases[k]);
    dec.max_residual = std::max(dec.max_residual, (uv.col(k) - z * dec.vectors.col(k)).norm());
  }
  ComplexMatrix gram = dec.vectors.adjoint() * dec.vectors;
  gram.diagonal().array() -= 1.0;
  dec.orthogonality_defect = gram.cwiseAbs().maxCoeff();
  if (dec.max_residual > residual_tol || dec.orthogonality_defect > residual_tol)
    throw NumericalError("diagonalize: eigenpair residual " + std::to_string(dec.max_residual) +
                             " exceeds tolerance",
                         std::max(dec.max_residual, dec.orthogonality_defect));
  return dec;
}

ComplexMatrix reconstruct(const EigenDecomposition& dec) {
  Eigen::VectorXcd d(static_cast<Eigen::Index>(dec.phases.size()));
  for (std::size_t k = 0; k < dec.phases.size(); ++k) d[k] = std::polar(1.0, dec.phases[k]);
  return dec.vectors * d.asDiagonal() * dec.vectors.adjoint();
}

DegeneracyReport degeneracy_clusters(const std::vector<double>& phases, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("degeneracy_clusters: tol must be positive");
  DegeneracyReport rep;
  rep.tolerance = tol;
  const std::size_t n = phases.size();
  if (n == 0) return rep;

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> ph(n);
  for (std::size_t i = 0; i < n; ++i) ph[i] = wrap_phase(phases[i]);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ph[a] < ph[b]; });

  // Start the sweep just after the largest gap so no cluster straddles it.
  std::size_t start = 0;
  double largest = -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double next = k + 1 < n ? ph[idx[k + 1]] : ph[idx[0]] + kTwoPi;
    const double gap = next - ph[idx[k]];
    if (gap > largest) {
      largest = gap;
      start = (k + 1) % n;
    }
  }
  const bool one_ring = n > 1 && largest <= tol;

  PhaseCluster cur;
  auto flush = [&] {
    double s = 0.0, c = 0.0;
    for (std::size_t m : cur.members) {
      s += std::sin(ph[m]);
      c += std::cos(ph[m]);
    }
    cur.mean_phase = wrap_phase(std::atan2(s, c));
    std::sort(cur.members.begin(), cur.members.end());
    rep.clusters.push_back(std::move(cur));
    cur = PhaseCluster{};
  };
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t k = (start + step) % n;
    if (!cur.members.empty() && !one_ring) {
      const std::size_t prev = (start + step - 1) % n;
      double gap = ph[idx[k]] - ph[idx[prev]];
      if (gap < 0.0) gap += kTwoPi;
      if (gap > tol) flush();
    }
    cur.members.push_back(idx[k]);
  }
  flush();
  return rep;
}

std::optional<int> sl2_order_mod(const Sl2z& m, std::int64_t modulus, int t_max) {
  if (modulus < 1) throw InvalidArgument("sl2_order_mod: modulus must be >= 1");
  auto md = [modulus](std::int64_t v) {
    v %= modulus;
    return v < 0 ? v + modulus : v;
  };
  const std::int64_t a = md(m.a()), b = md(m.b()), c = md(m.c()), d = md(m.d());
  std::int64_t p = a, q = b, r = c, s = d;
  const std::int64_t one = md(1);
  for (int t = 1; t <= t_max; ++t) {
    if (p == one && q == 0 && r == 0 && s == one) return t;
    const std::int64_t np = md(p * a + q * c), nq = md(p * b + q * d);
    const std::int64_t nr = md(r * a + s * c), ns = md(r * b + s * d);
    p = np, q = nq, r = nr, s = ns;
  }
  return std::nullopt;
}

std::optional<QuantumPeriod> quantum_period(const TorusHilbert& h, const ComplexMatrix& u,
                                            const CatMap& m, int p_max) {
  if (p_max < 1) throw InvalidArgument("quantum_period: p_max must be >= 1");
  const int n = h.N();
  const auto base = sl2_order_mod(m.matrix(), n, p_max);
  if (!base) return std::nullopt;

  std::mt19937_64 rng(20240607);
  std::normal_distribution<double> g;
  StateVector v0(n), v1(n);
  for (int i = 0; i < n; ++i) {
    v0[i] = {g(rng), g(rng)};
    v1[i] = {g(rng), g(rng)};
  }
  v0.normalize();
  v1.normalize();
  StateVector w0 = v0, w1 = v1;
  int applied = 0;
  for (int p = *base; p <= p_max; p += *base) {
    for (; applied < p; ++applied) {
      w0 = u * w0;
      w1 = u * w1;
    }
    const cplx z = v0.dot(w0);  // ⟨v0, U^p v0⟩
    if (std::abs(std::abs(z) - 1.0) > 1e-8) continue;
    const cplx zu = z / std::abs(z);
    if ((w0 - zu * v0).norm() > 1e-8 || (w1 - zu * v1).norm() > 1e-8) continue;
    QuantumPeriod qp;
    qp.P = p;
    qp.global_phase = wrap_phase(std::arg(zu));
    qp.order_mod_2N = sl2_order_mod(m.matrix(), 2 * static_cast<std::int64_t>(n),
                                    std::max(p_max, 2 * p));
    return qp;
  }
  return std::nullopt;
}

std::optional<QuantumPeriod> quantum_period(const TorusHilbert& h, const CatMap& m, int p_max) {
  return quantum_period(h, cat_propagator(h, m), m, p_max);
}

int default_scar_window(const TorusHilbert& h, const CatMap& m,
                        const std::optional<QuantumPeriod>& period) {
  if (period) return (period->P + 1) / 2;
  const double lam = cat_lyapunov(m).lambda_plus;
  return std::max(1, static_cast<int>(std::floor(std::log(static_cast<double>(h.N())) / lam)));
}

ScarredState scarred_state(const TorusHilbert& h, const ComplexMatrix& u, const CatMap& m,
                           int t_half, std::optional<double> theta) {
  if (t_half < 1) throw InvalidArgument("scarred_state: t_half must be >= 1");
  const StateVector psi0 = coherent_state(h, TorusPoint{0.0, 0.0});

  ScarredState out;
  out.t_half = t_half;
  if (theta) {
    out.theta = wrap_phase(*theta);
  } else {
    out.period = quantum_period(h, u, m, 2 * t_half);
    if (out.period) {
      const double rq = std::arg(psi0.dot(u * psi0));
      const int p = out.period->P;
      double best = 0.0, best_dist = std::numeric_limits<double>::infinity();
      for (int k = 0; k < p; ++k) {
        const double c = wrap_phase((out.period->global_phase + kTwoPi * k) / p);
        const double dist = std::abs(circular_difference(c, rq));
        if (dist < best_dist) {
          best_dist = dist;
          best = c;
        }
      }
      out.theta = best;
    }
  }

  StateVector sum = psi0;
  StateVector fwd = psi0, bwd = psi0;
  const ComplexMatrix ud = u.adjoint();
  for (int t = 1; t < t_half; ++t) {
    fwd = u * fwd;
    bwd = ud * bwd;
    sum += std::polar(1.0, -out.theta * t) * fwd + std::polar(1.0, out.theta * t) * bwd;
  }
  const double norm = sum.norm();
  if (norm < 1e-8 * std::sqrt(2.0 * t_half - 1.0))
    throw DegenerateConstruction("scarred_state: time average cancels (norm " +
                                 std::to_string(norm) + "); retry with a shifted theta");
  out.state = sum / norm;
  out.residual = (u * out.state - std::polar(1.0, out.theta) * out.state).norm();
  return out;
}

ScarredState scarred_state(const TorusHilbert& h, const CatMap& m, int t_half,
                           std::optional<double> theta) {
  return scarred_state(h, cat_propagator(h, m), m, t_half, theta);
}

Projection project_onto_phase(const EigenDecomposition& dec, const StateVector& psi, double phase,
                              double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("project_degenerate: tol must be positive");
  const double total = psi.squaredNorm();
  if (total == 0.0) throw InvalidArgument("project_degenerate: zero state");
  const Eigen::VectorXcd coeffs = dec.vectors.adjoint() * psi;

  Projection pr;
  pr.phase = wrap_phase(phase);
  StateVector proj = StateVector::Zero(psi.size());
  double captured = 0.0;
  for (std::size_t k = 0; k < dec.phases.size(); ++k) {
    if (std::abs(circular_difference(dec.phases[k], pr.phase)) > tol) continue;
    pr.members.push_back(k);
    captured += std::norm(coeffs[static_cast<Eigen::Index>(k)]);
    proj += coeffs[static_cast<Eigen::Index>(k)] * dec.vectors.col(static_cast<Eigen::Index>(k));
  }
  pr.overlap = captured / total;
  pr.weak = pr.overlap < 0.5;
  const double pn = proj.norm();
  pr.state = pn > 0.0 ? StateVector(proj / pn) : StateVector::Zero(psi.size());
  return pr;
}

Projection project_degenerate(const EigenDecomposition& dec, const StateVector& psi, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("project_degenerate: tol must be positive");
  const Eigen::VectorXcd coeffs = dec.vectors.adjoint() * psi;
  const std::size_t n = dec.phases.size();
  double best_w = -1.0, best_phase = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double w = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (std::abs(circular_difference(dec.phases[k], dec.phases[c])) <= tol)
        w += std::norm(coeffs[static_cast<Eigen::Index>(k)]);
    if (w > best_w) {
      best_w = w;
      best_phase = dec.phases[c];
    }
  }
  return project_onto_phase(dec, psi, best_phase, tol);
}

}  // namespace semiclass
