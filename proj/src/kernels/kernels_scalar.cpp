#include "semiclass/kernels.hpp"

#include <cassert>
#include <cmath>

namespace semiclass::kernels::scalar {

namespace {

inline double wrapped_sq(double a, double b) {
  double d = a - b;
  d -= std::nearbyint(d);
  return d * d;
}

}  // namespace

BallMass bowen_ball_mass(const BallQuery& q) {
  const std::size_t n = q.weights.size();
  const std::size_t n_slices = q.slices.size();
  const double eps2 = q.eps * q.eps;
  const SliceView& ref = q.slices[q.reference_slice];
  const double rx = q.center_x[q.reference_slice];
  const double rxi = q.center_xi[q.reference_slice];

  BallMass out;
  for (std::size_t i = 0; i < n; ++i) {
    const double d0 = wrapped_sq(ref.x[i], rx) + wrapped_sq(ref.xi[i], rxi);
    if (!(d0 < eps2)) continue;
    out.initial += q.weights[i];
    ++out.initial_count;
    bool inside = true;
    for (std::size_t s = 0; s < n_slices && inside; ++s) {
      if (s == q.reference_slice) continue;
      const double d = wrapped_sq(q.slices[s].x[i], q.center_x[s]) +
                       wrapped_sq(q.slices[s].xi[i], q.center_xi[s]);
      inside = d < eps2;
    }
    if (inside) {
      out.bowen += q.weights[i];
      ++out.bowen_count;
    }
  }
  return out;
}

std::complex<double> cdot(std::span<const std::complex<double>> a,
                          std::span<const std::complex<double>> b) {
  assert(a.size() == b.size());
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace semiclass::kernels::scalar
