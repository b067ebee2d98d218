#include "semiclass/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace semiclass::kernels {

namespace {

struct Table {
  Isa isa;
  BallMassFn ball_mass;
  CdotFn cdot;
  DotFn dot;
  AxpyFn axpy;
};

constexpr Table kScalarTable{Isa::Scalar, &scalar::bowen_ball_mass, &scalar::cdot,
                             &scalar::dot, &scalar::axpy};
#if defined(SEMICLASS_HAVE_AVX2_TU)
constexpr Table kAvx2Table{Isa::Avx2, &avx2::bowen_ball_mass, &avx2::cdot, &avx2::dot,
                           &avx2::axpy};
#endif

const Table* pick_default() {
  const char* env = std::getenv("SEMICLASS_LAB_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalarTable;
#if defined(SEMICLASS_HAVE_AVX2_TU)
  if (avx2_available()) return &kAvx2Table;
#endif
  return &kScalarTable;
}

std::atomic<const Table*>& table_slot() {
  static std::atomic<const Table*> slot{pick_default()};
  return slot;
}

inline const Table& table() { return *table_slot().load(std::memory_order_acquire); }

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(SEMICLASS_HAVE_AVX2_TU)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return table().isa; }

Isa force_isa(Isa isa) {
#if defined(SEMICLASS_HAVE_AVX2_TU)
  if (isa == Isa::Avx2 && avx2_available()) {
    table_slot().store(&kAvx2Table, std::memory_order_release);
    return Isa::Avx2;
  }
#endif
  table_slot().store(&kScalarTable, std::memory_order_release);
  return Isa::Scalar;
}

BallMass bowen_ball_mass(const BallQuery& q) { return table().ball_mass(q); }

std::complex<double> cdot(std::span<const std::complex<double>> a,
                          std::span<const std::complex<double>> b) {
  return table().cdot(a, b);
}

double dot(std::span<const double> a, std::span<const double> b) { return table().dot(a, b); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  table().axpy(alpha, x, y);
}

}  // namespace semiclass::kernels
