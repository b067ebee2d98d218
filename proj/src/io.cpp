#include "semiclass/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace semiclass::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void check(const std::ios& s, const std::filesystem::path& path) {
  if (!s) throw std::runtime_error("I/O error on " + path.string());
}

template <class T>
void put_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

constexpr char kMagic[4] = {'S', 'C', 'L', 'B'};

void write_container(const std::filesystem::path& path, ContainerKind kind, std::uint64_t n,
                     const ComplexMatrix& m) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out.write(kMagic, 4);
  put_le<std::uint64_t>(out, n);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kind));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_le<double>(out, m(r, c).real());
      put_le<double>(out, m(r, c).imag());
    }
  check(out, path);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<CsvRow>& rows) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const CsvRow& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>)
              out << format_double(v);
            else
              out << v;
          },
          row[i]);
    }
    out << '\n';
  }
  check(out, path);
}

std::string pgm_bytes(const std::vector<double>& values, int width, int height) {
  if (width <= 0 || height <= 0 || values.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("PGM: grid must be nonempty and match width x height");
  double mx = 0.0;
  for (double v : values)
    if (std::isfinite(v)) mx = std::max(mx, v);
  std::string s = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  s.reserve(s.size() + values.size());
  for (double v : values) {
    long b = 0;
    if (mx > 0.0 && std::isfinite(v) && v > 0.0) b = std::lround(255.0 * v / mx);
    s.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(b, 0L, 255L))));
  }
  return s;
}

void render_grid_pgm(const std::vector<double>& values, int width, int height,
                     const std::filesystem::path& path) {
  const std::string bytes = pgm_bytes(values, width, height);
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  check(out, path);
}

void write_state(const std::filesystem::path& path, const StateVector& psi) {
  write_container(path, ContainerKind::State, static_cast<std::uint64_t>(psi.size()), psi);
}

void write_operator(const std::filesystem::path& path, const ComplexMatrix& op) {
  write_container(path, ContainerKind::Operator, static_cast<std::uint64_t>(op.rows()), op);
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path.string() + ": not a state/operator container");
  Container c;
  c.N = get_le<std::uint64_t>(in);
  const auto kind = get_le<std::uint32_t>(in);
  if (kind != 1 && kind != 2) throw std::runtime_error(path.string() + ": unknown container kind");
  c.kind = static_cast<ContainerKind>(kind);
  const auto rows = get_le<std::uint64_t>(in);
  const auto cols = get_le<std::uint64_t>(in);
  if (!in || rows > (1u << 20) || cols > (1u << 20))
    throw std::runtime_error(path.string() + ": corrupt header");
  c.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t k = 0; k < cols; ++k) {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      c.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = {re, im};
    }
  if (!in) throw std::runtime_error(path.string() + ": truncated data");
  return c;
}

void append_jsonl(const std::filesystem::path& path, const nlohmann::json& record) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::app);
  out << record.dump() << '\n';
  check(out, path);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  check(out, path);
}

void write_billiard_orbit(const std::filesystem::path& path, const OrbitSegment& orbit) {
  std::vector<CsvRow> rows;
  rows.reserve(orbit.states.size());
  for (std::size_t i = 0; i < orbit.states.size(); ++i) {
    const auto& s = orbit.states[i];
    rows.push_back({static_cast<std::int64_t>(i), s.position.x, s.position.y, s.direction.x,
                    s.direction.y});
  }
  write_csv(path, {"step", "x", "y", "dx", "dy"}, rows);
}

void write_torus_orbit(const std::filesystem::path& path, const TorusOrbit& orbit) {
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < orbit.points.size(); ++i)
    rows.push_back({static_cast<std::int64_t>(orbit.steps[i]), orbit.points[i].x, orbit.points[i].xi});
  write_csv(path, {"step", "x", "xi"}, rows);
}

void write_husimi_csv(const std::filesystem::path& path, const HusimiGrid& g) {
  std::vector<CsvRow> rows;
  rows.reserve(g.values.size());
  for (int i = 0; i < g.G; ++i)
    for (int j = 0; j < g.G; ++j)
      rows.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(j),
                      static_cast<double>(i) / g.G, static_cast<double>(j) / g.G, g.at(i, j)});
  write_csv(path, {"i", "j", "x", "xi", "value"}, rows);
}

void write_husimi_pgm(const std::filesystem::path& path, const HusimiGrid& g) {
  // Columns follow x, rows follow ξ with the largest ξ on top.
  std::vector<double> img(g.values.size());
  for (int r = 0; r < g.G; ++r)
    for (int c = 0; c < g.G; ++c)
      img[static_cast<std::size_t>(r) * g.G + c] = g.at(c, g.G - 1 - r);
  render_grid_pgm(img, g.G, g.G, path);
}

void write_wigner_csv(const std::filesystem::path& path, const WignerCoefficients& w) {
  std::vector<CsvRow> rows;
  const int k = w.cutoff();
  for (int m1 = -k; m1 <= k; ++m1)
    for (int m2 = -k; m2 <= k; ++m2) {
      const cplx v = w.at(Mode{m1, m2});
      rows.push_back({static_cast<std::int64_t>(m1), static_cast<std::int64_t>(m2), v.real(), v.imag()});
    }
  write_csv(path, {"m1", "m2", "re", "im"}, rows);
}

void write_eigenphases(const std::filesystem::path& path, const EigenDecomposition& dec,
                       const DegeneracyReport& clusters) {
  std::vector<std::int64_t> cluster_of(dec.phases.size(), -1);
  for (std::size_t c = 0; c < clusters.clusters.size(); ++c)
    for (std::size_t m : clusters.clusters[c].members)
      if (m < cluster_of.size()) cluster_of[m] = static_cast<std::int64_t>(c);
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < dec.phases.size(); ++i)
    rows.push_back({static_cast<std::int64_t>(i), dec.phases[i], cluster_of[i]});
  write_csv(path, {"index", "phase", "cluster_id"}, rows);
}

void write_entropy_sweep(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::vector<CsvRow> out;
  for (const SweepRow& r : rows)
    out.push_back({static_cast<std::int64_t>(r.T), r.eps, r.estimate, r.standard_error,
                   static_cast<std::int64_t>(r.empty_ball_count)});
  write_csv(path, {"T", "eps", "estimate", "stderr", "empty_ball_count"}, out);
}

std::vector<double> mode_intensity_grid(const DiscreteDomain& dom, const BilliardMode& mode) {
  const int w = dom.nx(), h = dom.ny();
  std::vector<double> img(static_cast<std::size_t>(w) * h, 0.0);
  for (std::size_t k = 0; k < dom.size(); ++k) {
    const auto [i, j] = dom.node(k);
    const double v = mode.psi[static_cast<Eigen::Index>(k)];
    img[static_cast<std::size_t>(h - 1 - j) * w + i] = v * v;
  }
  return img;
}

void write_mode_pgm(const std::filesystem::path& path, const DiscreteDomain& dom,
                    const BilliardMode& mode) {
  render_grid_pgm(mode_intensity_grid(dom, mode), dom.nx(), dom.ny(), path);
}

}  // namespace semiclass::io
