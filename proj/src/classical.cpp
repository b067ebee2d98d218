#include "semiclass/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>
#include <unordered_set>
#include <utility>

#include "semiclass/errors.hpp"

namespace semiclass {

double wrap_unit(double v) noexcept {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  return r;
}

double torus_distance(TorusPoint p, TorusPoint q) noexcept {
  double dx = p.x - q.x;
  double dy = p.xi - q.xi;
  dx -= std::nearbyint(dx);
  dy -= std::nearbyint(dy);
  return std::sqrt(dx * dx + dy * dy);
}

Sl2z::Sl2z(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
    : a_(a), b_(b), c_(c), d_(d) {
  if (a * d - b * c != 1)
    throw InvalidMap("matrix [[" + std::to_string(a) + "," + std::to_string(b) + "],[" +
                     std::to_string(c) + "," + std::to_string(d) + "]] has determinant " +
                     std::to_string(a * d - b * c) + ", expected 1");
}

Sl2z Sl2z::operator*(const Sl2z& o) const {
  return {a_ * o.a_ + b_ * o.c_, a_ * o.b_ + b_ * o.d_, c_ * o.a_ + d_ * o.c_,
          c_ * o.b_ + d_ * o.d_};
}

Sl2z Sl2z::power(int t) const {
  Sl2z base = t < 0 ? inverse() : *this;
  unsigned e = static_cast<unsigned>(t < 0 ? -t : t);
  Sl2z acc = identity();
  while (e != 0) {
    if (e & 1u) acc = acc * base;
    e >>= 1;
    if (e != 0) base = base * base;
  }
  return acc;
}

CatMap::CatMap(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
    : CatMap(Sl2z(a, b, c, d)) {}

CatMap::CatMap(const Sl2z& m) : m_(m) {
  if (!m.hyperbolic())
    throw InvalidMap("cat map must be hyperbolic (|trace| > 2), trace = " +
                     std::to_string(m.trace()));
}

TorusPoint cat_apply(const CatMap& map, TorusPoint p) noexcept {
  const Sl2z& m = map.matrix();
  const double x = static_cast<double>(m.a()) * p.x + static_cast<double>(m.b()) * p.xi;
  const double xi = static_cast<double>(m.c()) * p.x + static_cast<double>(m.d()) * p.xi;
  return TorusPoint::reduced(x, xi);
}

TorusPoint cat_apply_inverse(const CatMap& map, TorusPoint p) noexcept {
  const Sl2z& m = map.matrix();
  const double x = static_cast<double>(m.d()) * p.x - static_cast<double>(m.b()) * p.xi;
  const double xi = -static_cast<double>(m.c()) * p.x + static_cast<double>(m.a()) * p.xi;
  return TorusPoint::reduced(x, xi);
}

TorusPoint cat_iterate(const CatMap& map, TorusPoint p, int t) noexcept {
  for (int s = 0; s < t; ++s) p = cat_apply(map, p);
  for (int s = 0; s > t; --s) p = cat_apply_inverse(map, p);
  return p;
}

LyapunovData cat_lyapunov(const CatMap& map) noexcept {
  const double tr = std::abs(static_cast<double>(map.matrix().trace()));
  const double lam = std::log((tr + std::sqrt(tr * tr - 4.0)) / 2.0);
  return {lam, lam};
}

namespace {

using i128 = __int128;

std::int64_t mod_floor(i128 v, std::int64_t q) {
  i128 r = v % q;
  if (r < 0) r += q;
  return static_cast<std::int64_t>(r);
}

// Solutions j ∈ [0, q) of coef·j ≡ rhs (mod q).
std::vector<std::int64_t> solve_linear_congruence(std::int64_t coef, std::int64_t rhs,
                                                  std::int64_t q) {
  coef = mod_floor(coef, q);
  rhs = mod_floor(rhs, q);
  const std::int64_t g = std::gcd(coef, q);  // gcd(0, q) = q
  if (rhs % g != 0) return {};
  const std::int64_t qg = q / g;
  const std::int64_t cg = (coef / g) % qg;
  const std::int64_t rg = (rhs / g) % qg;
  // modular inverse of cg mod qg (extended Euclid)
  std::int64_t j0 = 0;
  if (qg > 1) {
    std::int64_t old_r = cg, r = qg, old_s = 1, s = 0;
    while (r != 0) {
      const std::int64_t quot = old_r / r;
      std::tie(old_r, r) = std::make_pair(r, old_r - quot * r);
      std::tie(old_s, s) = std::make_pair(s, old_s - quot * s);
    }
    j0 = mod_floor(static_cast<i128>(mod_floor(old_s, qg)) * rg, qg);
  }
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(g));
  for (std::int64_t k = 0; k < g; ++k) out.push_back(j0 + k * qg);
  return out;
}

}  // namespace

std::vector<std::vector<TorusPoint>> periodic_points(const CatMap& map, int period,
                                                     std::int64_t max_points) {
  if (period < 1) throw InvalidArgument("periodic_points: period must be >= 1");
  const Sl2z mp = map.matrix().power(period);
  const std::int64_t a11 = mp.a() - 1, a12 = mp.b(), a21 = mp.c(), a22 = mp.d() - 1;
  const i128 det = static_cast<i128>(a11) * a22 - static_cast<i128>(a12) * a21;
  const i128 q128 = det < 0 ? -det : det;
  if (q128 == 0) throw InvalidArgument("periodic_points: M^period - I is singular");
  if (q128 > max_points)
    throw ResourceError("periodic_points: |det(M^p - I)| exceeds the search budget of " +
                        std::to_string(max_points) + " points");
  const std::int64_t q = static_cast<std::int64_t>(q128);

  // Every solution has denominator dividing q: scan numerators i and solve the
  // congruence with the smaller gcd for j, then check the other one.
  const bool use_first =
      std::gcd(mod_floor(a12, q), q) <= std::gcd(mod_floor(a22, q), q);
  std::vector<std::pair<std::int64_t, std::int64_t>> pts;
  pts.reserve(static_cast<std::size_t>(q));
  for (std::int64_t i = 0; i < q; ++i) {
    const std::int64_t coef = use_first ? a12 : a22;
    const i128 rhs = -(static_cast<i128>(use_first ? a11 : a21) * i);
    for (std::int64_t j : solve_linear_congruence(coef, mod_floor(rhs, q), q)) {
      const i128 other = use_first ? static_cast<i128>(a21) * i + static_cast<i128>(a22) * j
                                   : static_cast<i128>(a11) * i + static_cast<i128>(a12) * j;
      if (mod_floor(other, q) == 0) pts.emplace_back(i, j);
    }
  }

  const Sl2z& m = map.matrix();
  auto key = [q](std::int64_t i, std::int64_t j) { return static_cast<i128>(i) * q + j; };
  struct Hash {
    std::size_t operator()(i128 v) const noexcept {
      return std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(v) ^
                                        static_cast<std::uint64_t>(v >> 64));
    }
  };
  std::unordered_set<i128, Hash> seen;
  std::vector<std::vector<TorusPoint>> orbits;
  const double qd = static_cast<double>(q);
  for (auto [i0, j0] : pts) {
    if (seen.count(key(i0, j0))) continue;
    std::vector<TorusPoint> orbit;
    std::int64_t i = i0, j = j0;
    do {
      seen.insert(key(i, j));
      orbit.push_back({static_cast<double>(i) / qd, static_cast<double>(j) / qd});
      const std::int64_t ni = mod_floor(static_cast<i128>(m.a()) * i + static_cast<i128>(m.b()) * j, q);
      const std::int64_t nj = mod_floor(static_cast<i128>(m.c()) * i + static_cast<i128>(m.d()) * j, q);
      i = ni;
      j = nj;
    } while (i != i0 || j != j0);
    orbits.push_back(std::move(orbit));
  }
  return orbits;
}

BowenWindow bowen_window(int T) noexcept { return {-(T / 2), T - T / 2}; }

double bowen_distance(const CatMap& map, TorusPoint p, TorusPoint q, int T) {
  if (T < 0) throw InvalidArgument("bowen_distance: T must be >= 0");
  const BowenWindow w = bowen_window(T);
  double best = torus_distance(p, q);
  TorusPoint fp = p, fq = q;
  for (int t = 1; t <= w.last; ++t) {
    fp = cat_apply(map, fp);
    fq = cat_apply(map, fq);
    best = std::max(best, torus_distance(fp, fq));
  }
  TorusPoint bp = p, bq = q;
  for (int t = -1; t >= w.first; --t) {
    bp = cat_apply_inverse(map, bp);
    bq = cat_apply_inverse(map, bq);
    best = std::max(best, torus_distance(bp, bq));
  }
  return best;
}

TorusOrbit cat_orbit(const CatMap& map, TorusPoint p, int n_steps) {
  TorusOrbit orbit;
  orbit.points.reserve(static_cast<std::size_t>(n_steps) + 1);
  orbit.steps.reserve(static_cast<std::size_t>(n_steps) + 1);
  for (int t = 0; t <= n_steps; ++t) {
    orbit.points.push_back(p);
    orbit.steps.push_back(t);
    p = cat_apply(map, p);
  }
  return orbit;
}

}  // namespace semiclass
