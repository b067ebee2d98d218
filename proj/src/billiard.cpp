#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "semiclass/classical.hpp"
#include "semiclass/errors.hpp"

namespace semiclass {

double Vec2::norm() const noexcept { return std::hypot(x, y); }

void StadiumDomain::validate() const {
  if (!(half_length >= 0.0) || !(radius > 0.0) || !std::isfinite(half_length) ||
      !std::isfinite(radius))
    throw GeometryError("stadium needs half_length >= 0 and radius > 0");
}

double StadiumDomain::area() const noexcept {
  return 4.0 * half_length * radius + std::numbers::pi * radius * radius;
}

double StadiumDomain::perimeter() const noexcept {
  return 4.0 * half_length + 2.0 * std::numbers::pi * radius;
}

bool StadiumDomain::contains(Vec2 p, double tol) const noexcept {
  const double ax = std::abs(p.x);
  if (ax <= half_length) return std::abs(p.y) < radius - tol;
  const double dx = ax - half_length;
  const double rr = radius - tol;
  return rr > 0.0 && dx * dx + p.y * p.y < rr * rr;
}

namespace {

constexpr double kSideTol = 1e-12;

// Far root of |p + t·dir − c|² = r², or −inf when the ray misses.
double far_circle_root(Vec2 p, Vec2 dir, Vec2 c, double r) {
  const Vec2 f = p - c;
  const double b = dir.dot(f);
  const double cc = f.dot(f) - r * r;
  const double disc = b * b - cc;
  if (disc < 0.0) return -std::numeric_limits<double>::infinity();
  const double sq = std::sqrt(disc);
  if (b <= 0.0) return -b + sq;
  const double near = -b - sq;
  return near == 0.0 ? 0.0 : cc / near;
}

}  // namespace

BoundaryHit first_boundary_hit(const StadiumDomain& domain, Vec2 p, Vec2 dir,
                               double min_distance) {
  const double a = domain.half_length;
  const double r = domain.radius;
  BoundaryHit best;
  best.distance = std::numeric_limits<double>::infinity();

  auto consider = [&](double t, Vec2 point, Vec2 normal) {
    if (t > min_distance && t < best.distance) best = {t, point, normal};
  };

  if (a > 0.0) {
    for (const double side : {1.0, -1.0}) {
      if (dir.y * side <= 0.0) continue;
      const double t = (side * r - p.y) / dir.y;
      const double xh = p.x + t * dir.x;
      if (std::abs(xh) <= a + kSideTol) consider(t, {xh, side * r}, {0.0, side});
    }
  }
  for (const double side : {1.0, -1.0}) {
    const Vec2 c{side * a, 0.0};
    const double t = far_circle_root(p, dir, c, r);
    if (!std::isfinite(t)) continue;
    const Vec2 raw = p + dir * t;
    if (side * raw.x < a - kSideTol) continue;
    const Vec2 rel = raw - c;
    const double len = rel.norm();
    const Vec2 n = rel * (1.0 / len);
    consider(t, c + n * r, n);
  }
  if (!std::isfinite(best.distance))
    throw GeometryError("billiard ray does not reach the boundary; start point outside the domain?");
  return best;
}

BilliardState billiard_step(const StadiumDomain& domain, const BilliardState& s) {
  const BoundaryHit hit = first_boundary_hit(domain, s.position, s.direction);
  const double cos_inc = s.direction.dot(hit.normal);
  if (std::abs(cos_inc) < kGrazingCos)
    throw GrazingError("grazing collision with |cos(incidence)| = " + std::to_string(cos_inc),
                       cos_inc);
  Vec2 d = s.direction - hit.normal * (2.0 * cos_inc);
  d = d * (1.0 / d.norm());
  return {hit.point, d};
}

BilliardState for_each_chord(const StadiumDomain& domain, const BilliardState& s,
                             std::size_t n_bounces,
                             const std::function<void(Vec2, Vec2)>& visit) {
  BilliardState cur = s;
  for (std::size_t k = 0; k < n_bounces; ++k) {
    BilliardState next;
    try {
      next = billiard_step(domain, cur);
    } catch (const GrazingError& e) {
      throw GrazingError(std::string(e.what()) + " at bounce " + std::to_string(k),
                         e.cos_incidence(), k);
    }
    visit(cur.position, next.position);
    cur = next;
  }
  return cur;
}

OrbitSegment billiard_flow(const StadiumDomain& domain, const BilliardState& s,
                           std::size_t n_bounces) {
  if (n_bounces < 1) throw InvalidArgument("billiard_flow: n_bounces must be >= 1");
  OrbitSegment seg;
  seg.states.reserve(n_bounces + 1);
  seg.times.reserve(n_bounces + 1);
  seg.states.push_back(s);
  seg.times.push_back(0.0);
  BilliardState cur = s;
  for (std::size_t k = 0; k < n_bounces; ++k) {
    try {
      cur = billiard_step(domain, cur);
    } catch (const GrazingError& e) {
      throw GrazingError(std::string(e.what()) + " at bounce " + std::to_string(k),
                         e.cos_incidence(), k);
    }
    const double len = (cur.position - seg.states.back().position).norm();
    seg.states.push_back(cur);
    seg.times.push_back(seg.times.back() + len);
  }
  return seg;
}

double circle_angular_momentum(const BilliardState& s) noexcept {
  return s.position.x * s.direction.y - s.position.y * s.direction.x;
}

double HalfPlaneRegion::length_inside(Vec2 a, Vec2 b) const {
  const double total = (b - a).norm();
  const bool ia = contains(a), ib = contains(b);
  if (ia && ib) return total;
  if (a.x == b.x) return ia ? total : 0.0;
  const double t = (boundary_ - a.x) / (b.x - a.x);
  if (t <= 0.0 || t >= 1.0) return ia ? total : 0.0;
  return ia ? t * total : (1.0 - t) * total;
}

double DiscRegion::length_inside(Vec2 a, Vec2 b) const {
  const Vec2 d = b - a;
  const double len = d.norm();
  if (len == 0.0) return 0.0;
  const Vec2 u = d * (1.0 / len);
  const Vec2 f = a - center_;
  const double bq = u.dot(f);
  const double disc = bq * bq - (f.dot(f) - radius_ * radius_);
  if (disc <= 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  const double t0 = std::max(0.0, -bq - sq);
  const double t1 = std::min(len, -bq + sq);
  return std::max(0.0, t1 - t0);
}

double RectangleRegion::length_inside(Vec2 a, Vec2 b) const {
  const Vec2 d = b - a;
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {a.x - lo_.x, hi_.x - a.x, a.y - lo_.y, hi_.y - a.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return 0.0;
      continue;
    }
    const double t = q[k] / p[k];
    if (p[k] < 0.0)
      t0 = std::max(t0, t);
    else
      t1 = std::min(t1, t);
  }
  return t1 > t0 ? (t1 - t0) * d.norm() : 0.0;
}

double ergodic_average(const StadiumDomain& domain, const BilliardState& s, const Region& region,
                       std::size_t n_bounces) {
  double inside = 0.0, total = 0.0;
  for_each_chord(domain, s, n_bounces, [&](Vec2 from, Vec2 to) {
    inside += region.length_inside(from, to);
    total += (to - from).norm();
  });
  return total > 0.0 ? inside / total : 0.0;
}

CoverageReport billiard_coverage(const StadiumDomain& domain, const BilliardState& s,
                                 std::size_t nx, std::size_t ny, std::size_t n_bounces) {
  const Vec2 lo = domain.lower_left();
  const Vec2 hi = domain.upper_right();
  const double cw = (hi.x - lo.x) / static_cast<double>(nx);
  const double ch = (hi.y - lo.y) / static_cast<double>(ny);

  CoverageReport rep;
  rep.visits.assign(nx * ny, 0);
  std::vector<char> tracked(nx * ny, 0);
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Vec2 c{lo.x + (static_cast<double>(ix) + 0.5) * cw,
                   lo.y + (static_cast<double>(iy) + 0.5) * ch};
      if (domain.contains(c)) {
        tracked[iy * nx + ix] = 1;
        ++rep.cells_in_domain;
      }
    }

  const double step = 0.25 * std::min(cw, ch);
  auto mark = [&](Vec2 p) {
    const auto ix = static_cast<std::ptrdiff_t>(std::floor((p.x - lo.x) / cw));
    const auto iy = static_cast<std::ptrdiff_t>(std::floor((p.y - lo.y) / ch));
    if (ix < 0 || iy < 0 || ix >= static_cast<std::ptrdiff_t>(nx) ||
        iy >= static_cast<std::ptrdiff_t>(ny))
      return;
    const std::size_t k = static_cast<std::size_t>(iy) * nx + static_cast<std::size_t>(ix);
    if (tracked[k]) ++rep.visits[k];
  };
  for_each_chord(domain, s, n_bounces, [&](Vec2 from, Vec2 to) {
    const Vec2 d = to - from;
    const auto n = static_cast<std::size_t>(std::ceil(d.norm() / step));
    for (std::size_t k = 0; k <= n; ++k)
      mark(from + d * (static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(n, 1))));
  });
  rep.cells_visited = static_cast<std::size_t>(
      std::count_if(rep.visits.begin(), rep.visits.end(), [](std::size_t v) { return v > 0; }));
  return rep;
}

}  // namespace semiclass
