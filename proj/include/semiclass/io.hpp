#pragma once
// File emitters: CSV tables, PGM rasters, a binary container for states and
// operators, and JSON lines.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "semiclass/billiard_quantum.hpp"
#include "semiclass/classical.hpp"
#include "semiclass/entropy.hpp"
#include "semiclass/measures.hpp"
#include "semiclass/spectral.hpp"
#include "semiclass/torus_quantum.hpp"

namespace semiclass::io {

using CsvCell = std::variant<std::int64_t, double, std::string>;
using CsvRow = std::vector<CsvCell>;

// Doubles are printed with 12 significant digits. Throws std::runtime_error
// naming the path on I/O failure.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<CsvRow>& rows);
std::string format_double(double v);

// Binary P5 image, row-major, values scaled so the maximum maps to 255. An
// all-zero grid gives all-zero bytes. Requires width·height = values.size() > 0.
void render_grid_pgm(const std::vector<double>& values, int width, int height,
                     const std::filesystem::path& path);
std::string pgm_bytes(const std::vector<double>& values, int width, int height);

// Binary container: "SCLB" magic, uint64 N, uint32 kind, uint64 rows, uint64
// cols, then rows·cols little-endian (re, im) double pairs in row-major order.
enum class ContainerKind : std::uint32_t { State = 1, Operator = 2 };

void write_state(const std::filesystem::path& path, const StateVector& psi);
void write_operator(const std::filesystem::path& path, const ComplexMatrix& op);
struct Container {
  ContainerKind kind = ContainerKind::State;
  std::uint64_t N = 0;
  ComplexMatrix data;  // N × 1 for states
};
Container read_container(const std::filesystem::path& path);

// Appends one compact JSON object per line.
void append_jsonl(const std::filesystem::path& path, const nlohmann::json& record);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

// Table writers for the library's result types.
void write_billiard_orbit(const std::filesystem::path& path, const OrbitSegment& orbit);
void write_torus_orbit(const std::filesystem::path& path, const TorusOrbit& orbit);
void write_husimi_csv(const std::filesystem::path& path, const HusimiGrid& g);
void write_husimi_pgm(const std::filesystem::path& path, const HusimiGrid& g);
void write_wigner_csv(const std::filesystem::path& path, const WignerCoefficients& w);
void write_eigenphases(const std::filesystem::path& path, const EigenDecomposition& dec,
                       const DegeneracyReport& clusters);
void write_entropy_sweep(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

// |ψ|² on the full node grid, exterior zero, top row = largest y.
std::vector<double> mode_intensity_grid(const DiscreteDomain& dom, const BilliardMode& mode);
void write_mode_pgm(const std::filesystem::path& path, const DiscreteDomain& dom,
                    const BilliardMode& mode);

}  // namespace semiclass::io
