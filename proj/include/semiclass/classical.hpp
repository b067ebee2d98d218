#pragma once
// Classical dynamics: hyperbolic torus automorphisms and planar billiards.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace semiclass {

// ---------------------------------------------------------------------------
// Torus phase space
// ---------------------------------------------------------------------------

// Reduces a real to [0, 1).
double wrap_unit(double v) noexcept;

struct TorusPoint {
  double x = 0.0;
  double xi = 0.0;

  // Point with both coordinates reduced mod 1.
  static TorusPoint reduced(double x, double xi) noexcept { return {wrap_unit(x), wrap_unit(xi)}; }
  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

// Flat quotient metric: Euclidean distance minimized over integer translates.
double torus_distance(TorusPoint p, TorusPoint q) noexcept;

// Integer 2x2 matrix with determinant 1, row-major [[a, b], [c, d]].
class Sl2z {
 public:
  Sl2z(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);
  static Sl2z identity() { return {1, 0, 0, 1}; }

  std::int64_t a() const noexcept { return a_; }
  std::int64_t b() const noexcept { return b_; }
  std::int64_t c() const noexcept { return c_; }
  std::int64_t d() const noexcept { return d_; }
  std::int64_t trace() const noexcept { return a_ + d_; }

  Sl2z operator*(const Sl2z& o) const;
  Sl2z inverse() const noexcept { return {d_, -b_, -c_, a_}; }
  Sl2z transpose() const noexcept { return {a_, c_, b_, d_}; }
  // Integer power; negative exponents use the inverse.
  Sl2z power(int t) const;

  // Checkerboard condition a·b and c·d even, required for quantization in the
  // periodic (θ = 0) sector.
  bool quantizable() const noexcept { return (a_ * b_) % 2 == 0 && (c_ * d_) % 2 == 0; }
  bool hyperbolic() const noexcept { return trace() > 2 || trace() < -2; }

  // Integer action on a lattice vector.
  std::pair<std::int64_t, std::int64_t> apply(std::int64_t n1, std::int64_t n2) const noexcept {
    return {a_ * n1 + b_ * n2, c_ * n1 + d_ * n2};
  }

  friend bool operator==(const Sl2z&, const Sl2z&) = default;

 private:
  std::int64_t a_, b_, c_, d_;
};

// Hyperbolic element of SL(2, Z) acting on T².
class CatMap {
 public:
  // Throws InvalidMap unless det = 1 and |trace| > 2.
  CatMap(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);
  explicit CatMap(const Sl2z& m);

  // [[2,1],[3,2]]: trace 4 and quantizable.
  static CatMap default_map() { return {2, 1, 3, 2}; }

  const Sl2z& matrix() const noexcept { return m_; }
  CatMap power(int t) const { return CatMap(m_.power(t)); }

 private:
  Sl2z m_;
};

// (a·x + b·ξ mod 1, c·x + d·ξ mod 1)
TorusPoint cat_apply(const CatMap& map, TorusPoint p) noexcept;
TorusPoint cat_apply_inverse(const CatMap& map, TorusPoint p) noexcept;
// M^t p for any integer t.
TorusPoint cat_iterate(const CatMap& map, TorusPoint p, int t) noexcept;

struct LyapunovData {
  double lambda_plus = 0.0;  // log of the expanding eigenvalue, nats per step
  double lambda_max = 0.0;   // maximal expansion rate; equals lambda_plus for linear maps
};

LyapunovData cat_lyapunov(const CatMap& map) noexcept;

// All rational points with M^period v ≡ v (mod 1), grouped into M-orbits.
// Their number is |det(M^period − I)|. Throws ResourceError when that exceeds
// max_points, InvalidArgument when period < 1.
std::vector<std::vector<TorusPoint>> periodic_points(const CatMap& map, int period,
                                                     std::int64_t max_points = 10'000'000);

// Discrete-time Bowen distance: max of torus_distance(M^t p, M^t q) over
// t ∈ [−⌊T/2⌋, ⌈T/2⌉]. Throws InvalidArgument for T < 0.
double bowen_distance(const CatMap& map, TorusPoint p, TorusPoint q, int T);

// Bowen window [first, last] for a given T.
struct BowenWindow {
  int first;
  int last;
};
BowenWindow bowen_window(int T) noexcept;

struct TorusOrbit {
  std::vector<TorusPoint> points;
  std::vector<int> steps;
};

TorusOrbit cat_orbit(const CatMap& map, TorusPoint p, int n_steps);

// ---------------------------------------------------------------------------
// Planar billiards
// ---------------------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const noexcept { return {x * s, y * s}; }
  double dot(Vec2 o) const noexcept { return x * o.x + y * o.y; }
  double norm() const noexcept;
};

// Rectangle [−a, a] × [−r, r] capped by two radius-r half discs centred at
// (±a, 0). half_length = 0 is the disc of radius r.
struct StadiumDomain {
  double half_length = 1.0;
  double radius = 1.0;

  // Throws GeometryError on negative half_length or non-positive radius.
  void validate() const;
  bool is_circle() const noexcept { return half_length == 0.0; }
  double area() const noexcept;
  double perimeter() const noexcept;
  // Strictly inside, with a margin tol (positive tol shrinks the domain).
  bool contains(Vec2 p, double tol = 0.0) const noexcept;
  // Bounding box corners.
  Vec2 lower_left() const noexcept { return {-(half_length + radius), -radius}; }
  Vec2 upper_right() const noexcept { return {half_length + radius, radius}; }
};

struct BoundaryHit {
  double distance = 0.0;  // path length to the hit
  Vec2 point;             // hit location, snapped onto the boundary
  Vec2 normal;            // outward unit normal at the hit
};

// First boundary crossing along p + t·dir, t > min_distance. p must lie in the
// closed domain.
BoundaryHit first_boundary_hit(const StadiumDomain& domain, Vec2 p, Vec2 dir,
                               double min_distance = 1e-12);

struct BilliardState {
  Vec2 position;
  Vec2 direction;  // unit vector
};

// Grazing threshold on |cos(incidence)|.
inline constexpr double kGrazingCos = 1e-10;

// Free flight to the next collision and specular reflection there.
// Throws GrazingError when |dir · n| < kGrazingCos.
BilliardState billiard_step(const StadiumDomain& domain, const BilliardState& s);

struct OrbitSegment {
  std::vector<BilliardState> states;  // states[0] is the initial state
  std::vector<double> times;          // cumulative arc length, strictly increasing
};

// n_bounces successive collisions at unit speed. GrazingError is rethrown
// with its bounce index.
OrbitSegment billiard_flow(const StadiumDomain& domain, const BilliardState& s,
                           std::size_t n_bounces);

// Streams the n_bounces chords of the orbit to visit(from, to) without
// storing them; returns the final state.
BilliardState for_each_chord(const StadiumDomain& domain, const BilliardState& s,
                             std::size_t n_bounces,
                             const std::function<void(Vec2 from, Vec2 to)>& visit);

// x·dy − y·dx; conserved in the circular billiard.
double circle_angular_momentum(const BilliardState& s) noexcept;

// Position-space region used for time averages.
class Region {
 public:
  virtual ~Region() = default;
  virtual bool contains(Vec2 p) const = 0;
  // Length of the straight segment [a, b] lying inside the region.
  virtual double length_inside(Vec2 a, Vec2 b) const = 0;
};

// Whole plane; used as "the whole domain".
class EverywhereRegion final : public Region {
 public:
  bool contains(Vec2) const override { return true; }
  double length_inside(Vec2 a, Vec2 b) const override { return (b - a).norm(); }
};

// {x < boundary} (left) or {x > boundary} (right).
class HalfPlaneRegion final : public Region {
 public:
  HalfPlaneRegion(double boundary_x, bool left) : boundary_(boundary_x), left_(left) {}
  bool contains(Vec2 p) const override { return left_ ? p.x < boundary_ : p.x > boundary_; }
  double length_inside(Vec2 a, Vec2 b) const override;

 private:
  double boundary_;
  bool left_;
};

class DiscRegion final : public Region {
 public:
  DiscRegion(Vec2 center, double radius) : center_(center), radius_(radius) {}
  bool contains(Vec2 p) const override { return (p - center_).norm() < radius_; }
  double length_inside(Vec2 a, Vec2 b) const override;

 private:
  Vec2 center_;
  double radius_;
};

class RectangleRegion final : public Region {
 public:
  RectangleRegion(Vec2 lower, Vec2 upper) : lo_(lower), hi_(upper) {}
  bool contains(Vec2 p) const override {
    return p.x > lo_.x && p.x < hi_.x && p.y > lo_.y && p.y < hi_.y;
  }
  double length_inside(Vec2 a, Vec2 b) const override;

 private:
  Vec2 lo_, hi_;
};

// Fraction of arc length the orbit spends in region over n_bounces chords.
double ergodic_average(const StadiumDomain& domain, const BilliardState& s, const Region& region,
                       std::size_t n_bounces);

// Visits of an nx × ny grid laid over the bounding box. Only cells whose
// centre lies inside the domain are tracked.
struct CoverageReport {
  std::size_t cells_in_domain = 0;
  std::size_t cells_visited = 0;
  std::vector<std::size_t> visits;  // per cell, row-major (iy * nx + ix); 0 outside the domain
};

CoverageReport billiard_coverage(const StadiumDomain& domain, const BilliardState& s,
                                 std::size_t nx, std::size_t ny, std::size_t n_bounces);

}  // namespace semiclass
