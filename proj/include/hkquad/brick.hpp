#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "hkquad/errors.hpp"

namespace hk {

/// Compile-time cap on the dimension of a point. The engine is a desk-scale
/// tool; Fubini over two 4-dimensional factors is the largest case it serves.
inline constexpr int kMaxDim = 8;

/// A point in n-dimensional space, n in [1, kMaxDim]. Inline storage keeps
/// the hot kernels allocation-free.
struct Point {
  std::array<double, kMaxDim> c{};
  int n = 0;

  Point() = default;
  Point(std::initializer_list<double> xs);
  static Point make(const double* xs, int n);
  static Point scalar(double x) { return Point{x}; }

  int dim() const { return n; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  bool operator==(const Point& o) const;
  std::string repr() const;

  /// Validates dimension and finiteness; throws DomainError.
  void check_valid() const;
};

double distance(const Point& a, const Point& b);

/// Closed coordinate-aligned interval [lo_1,hi_1] x ... x [lo_n,hi_n].
/// Construction rejects degenerate edges (lo_i >= hi_i).
struct Brick {
  Point lo;
  Point hi;

  Brick() = default;
  Brick(Point lo_, Point hi_);
  /// 1D convenience.
  Brick(double a, double b) : Brick(Point{a}, Point{b}) {}

  int dim() const { return lo.n; }
  double edge(int i) const { return hi[i] - lo[i]; }
  bool contains(const Point& p) const;          // closed containment
  bool contains_brick(const Brick& inner) const;
  bool strictly_inside(const Point& p) const;   // open containment
  Point center() const;
  std::string repr() const;

  bool operator==(const Brick& o) const { return lo == o.lo && hi == o.hi; }
};

/// A brick with its associated tag point; the tag lies in the closed brick.
struct TaggedBrick {
  Brick brick;
  Point tag;

  TaggedBrick() = default;
  TaggedBrick(Brick b, Point t);
};

/// A finite tagged division of `parent`: non-overlapping interiors, exact
/// cover, every tag in its own closed brick.
struct TaggedDivision {
  std::vector<TaggedBrick> items;
  Brick parent;
};

double volume(const Brick& b);
double diameter(const Brick& b);

/// mu(I) * d^-n with d the longest edge; 1 exactly when b is a cube.
double regularity(const Brick& b);

/// Splits every axis at its midpoint: 2^n children, each of half diameter.
/// Throws DepthExhaustionError when a midpoint collides with an endpoint in
/// floating point.
std::vector<Brick> bisect(const Brick& b);

/// Cuts `outer \ inner` into at most 3^n - 1 bricks by extending the faces
/// of `inner` across `outer`. Requires inner to be contained in outer.
std::vector<Brick> complement_partition(const Brick& outer, const Brick& inner);

enum class ViolationKind {
  none,
  dimension_mismatch,
  tag_outside_brick,
  item_outside_parent,
  interior_overlap,
  cover_gap,
};

struct ValidationReport {
  bool ok = true;
  ViolationKind kind = ViolationKind::none;
  // Indices into items of the offending brick(s); second is -1 when the
  // violation involves a single brick.
  long first = -1;
  long second = -1;
  std::string message;
};

/// Checks the three division invariants and reports the first violation.
/// `coord_tol` is the per-coordinate tolerance for cover checking; internal
/// builders produce exact shared faces so the default 0 suffices, while
/// externally supplied divisions should pass 1e-12.
ValidationReport validate_division(const TaggedDivision& d, double coord_tol = 0.0);

}  // namespace hk
