#include "hkquad/brick.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hkquad/kahan.hpp"

namespace hk {

Point::Point(std::initializer_list<double> xs) {
  if (xs.size() == 0 || xs.size() > static_cast<std::size_t>(kMaxDim))
    throw DomainError("point dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  n = static_cast<int>(xs.size());
  int i = 0;
  for (double x : xs) c[static_cast<std::size_t>(i++)] = x;
  check_valid();
}

Point Point::make(const double* xs, int n_) {
  if (n_ < 1 || n_ > kMaxDim)
    throw DomainError("point dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  Point p;
  p.n = n_;
  std::copy(xs, xs + n_, p.c.begin());
  p.check_valid();
  return p;
}

void Point::check_valid() const {
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(c[static_cast<std::size_t>(i)]))
      throw DomainError("point coordinate " + std::to_string(i) + " is not finite");
}

bool Point::operator==(const Point& o) const {
  if (n != o.n) return false;
  for (int i = 0; i < n; ++i)
    if (c[static_cast<std::size_t>(i)] != o.c[static_cast<std::size_t>(i)]) return false;
  return true;
}

std::string Point::repr() const {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (int i = 0; i < n; ++i) os << (i ? ", " : "") << (*this)[i];
  os << ")";
  return os.str();
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Brick::Brick(Point lo_, Point hi_) : lo(lo_), hi(hi_) {
  if (lo.n != hi.n) throw DomainError("brick corner dimensions differ");
  lo.check_valid();
  hi.check_valid();
  for (int i = 0; i < lo.n; ++i)
    if (!(lo[i] < hi[i]))
      throw DomainError("degenerate brick: axis " + std::to_string(i) + " has lo >= hi");
}

bool Brick::contains(const Point& p) const {
  if (p.n != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  return true;
}

bool Brick::contains_brick(const Brick& inner) const {
  if (inner.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (inner.lo[i] < lo[i] || inner.hi[i] > hi[i]) return false;
  return true;
}

bool Brick::strictly_inside(const Point& p) const {
  if (p.n != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (p[i] <= lo[i] || p[i] >= hi[i]) return false;
  return true;
}

Point Brick::center() const {
  Point m;
  m.n = dim();
  for (int i = 0; i < dim(); ++i) m[i] = 0.5 * (lo[i] + hi[i]);
  return m;
}

std::string Brick::repr() const {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < dim(); ++i) {
    if (i) os << "x";
    os << "[" << lo[i] << "," << hi[i] << "]";
  }
  return os.str();
}

TaggedBrick::TaggedBrick(Brick b, Point t) : brick(std::move(b)), tag(std::move(t)) {
  if (!brick.contains(tag))
    throw DomainError("tag " + tag.repr() + " outside brick " + brick.repr());
}

double volume(const Brick& b) {
  double v = 1.0;
  for (int i = 0; i < b.dim(); ++i) v *= b.edge(i);
  return v;
}

double diameter(const Brick& b) {
  double s = 0.0;
  for (int i = 0; i < b.dim(); ++i) {
    double e = b.edge(i);
    s += e * e;
  }
  return std::sqrt(s);
}

double regularity(const Brick& b) {
  double d = 0.0;
  for (int i = 0; i < b.dim(); ++i) d = std::max(d, b.edge(i));
  double r = volume(b);
  for (int i = 0; i < b.dim(); ++i) r /= d;
  return r;
}

std::vector<Brick> bisect(const Brick& b) {
  const int n = b.dim();
  Point mid = b.center();
  for (int i = 0; i < n; ++i)
    if (!(b.lo[i] < mid[i] && mid[i] < b.hi[i]))
      throw DepthExhaustionError("bisection midpoint collides with an endpoint on axis " +
                                 std::to_string(i) + " of " + b.repr());
  std::vector<Brick> out;
  out.reserve(static_cast<std::size_t>(1) << n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Point lo, hi;
    lo.n = hi.n = n;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        lo[i] = mid[i];
        hi[i] = b.hi[i];
      } else {
        lo[i] = b.lo[i];
        hi[i] = mid[i];
      }
    }
    out.emplace_back(lo, hi);
  }
  return out;
}

std::vector<Brick> complement_partition(const Brick& outer, const Brick& inner) {
  const int n = outer.dim();
  if (inner.dim() != n) throw DomainError("complement_partition: dimension mismatch");
  if (!outer.contains_brick(inner))
    throw DomainError("complement_partition: inner " + inner.repr() +
                      " not contained in outer " + outer.repr());

  // Per axis up to three segments split at the inner faces.
  std::array<std::array<std::pair<double, double>, 3>, kMaxDim> segs;
  std::array<int, kMaxDim> nseg{};
  std::array<int, kMaxDim> inner_idx{};
  for (int i = 0; i < n; ++i) {
    int k = 0;
    if (outer.lo[i] < inner.lo[i]) segs[i][k++] = {outer.lo[i], inner.lo[i]};
    inner_idx[i] = k;
    segs[i][k++] = {inner.lo[i], inner.hi[i]};
    if (inner.hi[i] < outer.hi[i]) segs[i][k++] = {inner.hi[i], outer.hi[i]};
    nseg[i] = k;
  }

  std::vector<Brick> out;
  std::array<int, kMaxDim> idx{};
  for (;;) {
    bool is_inner = true;
    for (int i = 0; i < n; ++i) is_inner = is_inner && (idx[i] == inner_idx[i]);
    if (!is_inner) {
      Point lo, hi;
      lo.n = hi.n = n;
      for (int i = 0; i < n; ++i) {
        lo[i] = segs[i][static_cast<std::size_t>(idx[i])].first;
        hi[i] = segs[i][static_cast<std::size_t>(idx[i])].second;
      }
      out.emplace_back(lo, hi);
    }
    int ax = 0;
    while (ax < n && ++idx[ax] == nseg[ax]) idx[ax++] = 0;
    if (ax == n) break;
  }
  return out;
}

namespace {

bool interiors_overlap(const Brick& a, const Brick& b, double tol) {
  for (int i = 0; i < a.dim(); ++i)
    if (a.hi[i] <= b.lo[i] + tol || b.hi[i] <= a.lo[i] + tol) return false;
  return true;
}

}  // namespace

ValidationReport validate_division(const TaggedDivision& d, double coord_tol) {
  ValidationReport r;
  const int n = d.parent.dim();
  auto fail = [&](ViolationKind k, long i, long j, std::string msg) {
    r.ok = false;
    r.kind = k;
    r.first = i;
    r.second = j;
    r.message = std::move(msg);
    return r;
  };

  if (d.items.empty())
    return fail(ViolationKind::cover_gap, -1, -1, "empty division");

  for (std::size_t i = 0; i < d.items.size(); ++i) {
    const auto& tb = d.items[i];
    if (tb.brick.dim() != n)
      return fail(ViolationKind::dimension_mismatch, static_cast<long>(i), -1,
                  "item dimension differs from parent");
    if (!tb.brick.contains(tb.tag))
      return fail(ViolationKind::tag_outside_brick, static_cast<long>(i), -1,
                  "tag " + tb.tag.repr() + " outside " + tb.brick.repr());
    for (int k = 0; k < n; ++k)
      if (tb.brick.lo[k] < d.parent.lo[k] - coord_tol ||
          tb.brick.hi[k] > d.parent.hi[k] + coord_tol)
        return fail(ViolationKind::item_outside_parent, static_cast<long>(i), -1,
                    "brick " + tb.brick.repr() + " leaves parent " + d.parent.repr());
  }

  // Sweep along axis 0 to keep the pairwise overlap check near-linear for
  // builder output.
  std::vector<std::size_t> order(d.items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d.items[a].brick.lo[0] < d.items[b].brick.lo[0];
  });
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const Brick& a = d.items[order[oi]].brick;
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const Brick& b = d.items[order[oj]].brick;
      if (b.lo[0] >= a.hi[0] - coord_tol) break;
      if (interiors_overlap(a, b, coord_tol))
        return fail(ViolationKind::interior_overlap, static_cast<long>(order[oi]),
                    static_cast<long>(order[oj]),
                    a.repr() + " overlaps " + b.repr());
    }
  }

  // Non-overlapping closed bricks inside the parent cover it exactly iff
  // their volumes sum to the parent volume.
  NeumaierSum acc;
  for (const auto& tb : d.items) acc.add(volume(tb.brick));
  double sum = acc.value();
  double pv = volume(d.parent);
  double tol = coord_tol > 0.0
                   ? coord_tol * static_cast<double>(d.items.size() + 1)
                   : 4.0 * n * std::abs(pv) * 1e-16 * static_cast<double>(n + 1);
  if (std::abs(sum - pv) > std::max(tol, 4.0 * n * 1e-16 * std::abs(pv)))
    return fail(ViolationKind::cover_gap, -1, -1,
                "item volumes sum to " + std::to_string(sum) + ", parent volume " +
                    std::to_string(pv));
  return r;
}

}  // namespace hk
