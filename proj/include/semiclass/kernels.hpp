#pragma once
// Data-parallel inner loops with a scalar reference path and an AVX2 path
// selected at runtime. Both paths must agree to rounding (see test_kernels).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace semiclass::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

// One time slice of a point cloud orbit, stored as structure-of-arrays.
struct SliceView {
  std::span<const double> x;
  std::span<const double> xi;
};

// Result of one Bowen-ball query: total weight (and point count) inside the
// dynamical ball, and inside the plain ε-ball at the reference slice.
struct BallMass {
  double bowen = 0.0;
  double initial = 0.0;
  std::size_t bowen_count = 0;
  std::size_t initial_count = 0;
};

// Query description. `center_x[s]`, `center_xi[s]` hold the reference orbit at
// slice s; `reference_slice` is the t = 0 slice. Distances are flat-torus
// Euclidean distances on [0,1)².
struct BallQuery {
  std::span<const SliceView> slices;
  std::span<const double> center_x;
  std::span<const double> center_xi;
  std::span<const double> weights;
  std::size_t reference_slice = 0;
  double eps = 0.1;
};

using BallMassFn = BallMass (*)(const BallQuery&);
using CdotFn = std::complex<double> (*)(std::span<const std::complex<double>>,
                                        std::span<const std::complex<double>>);
using DotFn = double (*)(std::span<const double>, std::span<const double>);
using AxpyFn = void (*)(double, std::span<const double>, std::span<double>);

namespace scalar {
BallMass bowen_ball_mass(const BallQuery& q);
// Σ conj(a_i)·b_i
std::complex<double> cdot(std::span<const std::complex<double>> a,
                          std::span<const std::complex<double>> b);
double dot(std::span<const double> a, std::span<const double> b);
// y += alpha·x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace scalar

#if defined(SEMICLASS_HAVE_AVX2_TU)
namespace avx2 {
BallMass bowen_ball_mass(const BallQuery& q);
std::complex<double> cdot(std::span<const std::complex<double>> a,
                          std::span<const std::complex<double>> b);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace avx2
#endif

// True when the AVX2 translation unit is built and the CPU reports AVX2+FMA.
bool avx2_available();

// ISA picked for this process: AVX2 when available unless the environment
// variable SEMICLASS_LAB_SIMD=scalar is set.
Isa active_isa();

// Overrides the dispatch (tests and benchmarks). Requesting Avx2 on a CPU
// without it falls back to Scalar; returns the ISA actually installed.
Isa force_isa(Isa isa);

BallMass bowen_ball_mass(const BallQuery& q);
std::complex<double> cdot(std::span<const std::complex<double>> a,
                          std::span<const std::complex<double>> b);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace semiclass::kernels
