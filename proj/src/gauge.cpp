#include "hkquad/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <unordered_map>

namespace hk {

std::string to_string(GaugeKind k) {
  switch (k) {
    case GaugeKind::constant: return "constant";
    case GaugeKind::min_combined: return "min-combined";
    case GaugeKind::boundary: return "boundary";
    case GaugeKind::cauchy_ext: return "cauchy-ext";
    case GaugeKind::null_cover: return "null-cover";
    case GaugeKind::user: return "user";
  }
  return "?";
}

Gauge::Gauge(Brick domain, Fn fn, GaugeKind kind, std::string note)
    : domain_(std::move(domain)), fn_(std::move(fn)), kind_(kind), note_(std::move(note)) {}

double Gauge::operator()(const Point& p) const {
  if (!domain_.contains(p))
    throw DomainError("gauge evaluated outside its domain at " + p.repr());
  double d = fn_(p);
  if (!std::isfinite(d) || d <= 0.0)
    throw GaugeError("gauge produced a non-positive or non-finite value " +
                         std::to_string(d),
                     p.repr());
  return d;
}

std::string Gauge::description() const {
  return note_.empty() ? to_string(kind_) : to_string(kind_) + ": " + note_;
}

Gauge constant_gauge(const Brick& domain, double delta) {
  if (!std::isfinite(delta) || delta <= 0.0)
    throw DomainError("constant gauge requires a finite delta > 0, got " +
                      std::to_string(delta));
  return Gauge(domain, [delta](const Point&) { return delta; }, GaugeKind::constant);
}

Gauge min_combine(const Gauge& g1, const Gauge& g2) {
  if (!(g1.domain() == g2.domain()))
    throw DomainError("min_combine: gauge domains differ");
  return Gauge(
      g1.domain(), [g1, g2](const Point& p) { return std::min(g1(p), g2(p)); },
      GaugeKind::min_combined);
}

double farthest_vertex_distance(const Brick& b, const Point& tag) {
  double s = 0.0;
  for (int i = 0; i < b.dim(); ++i) {
    double d = std::max(std::abs(tag[i] - b.lo[i]), std::abs(b.hi[i] - tag[i]));
    s += d * d;
  }
  return std::sqrt(s);
}

bool is_fine(const TaggedBrick& tb, const Gauge& g) {
  if (!g.domain().contains_brick(tb.brick))
    throw DomainError("is_fine: brick " + tb.brick.repr() + " not inside gauge domain");
  if (!tb.brick.contains(tb.tag)) return false;
  return farthest_vertex_distance(tb.brick, tb.tag) < g(tb.tag);
}

namespace {

// Least distance from an interior point to the boundary of `b`.
double boundary_distance(const Brick& b, const Point& p) {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < b.dim(); ++i)
    d = std::min(d, std::min(p[i] - b.lo[i], b.hi[i] - p[i]));
  return d;
}

bool on_boundary(const Brick& b, const Point& p) {
  if (!b.contains(p)) return false;
  for (int i = 0; i < b.dim(); ++i)
    if (p[i] == b.lo[i] || p[i] == b.hi[i]) return true;
  return false;
}

// Distance from p to the nearest vertex of b other than p itself.
double nearest_other_vertex(const Brick& b, const Point& p) {
  const int n = b.dim();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Point v;
    v.n = n;
    for (int i = 0; i < n; ++i) v[i] = (mask & (1u << i)) ? b.hi[i] : b.lo[i];
    double d = distance(v, p);
    if (d > 0.0) best = std::min(best, d);
  }
  return best;
}

}  // namespace

Gauge boundary_gauge(const std::vector<std::pair<Brick, Gauge>>& parts) {
  if (parts.empty()) throw DomainError("boundary_gauge: no parts");
  const int n = parts.front().first.dim();

  // The common parent is the bounding box; validate the parts as a division.
  Point lo = parts.front().first.lo, hi = parts.front().first.hi;
  for (const auto& [b, g] : parts) {
    if (b.dim() != n) throw DomainError("boundary_gauge: dimension mismatch");
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], b.lo[i]);
      hi[i] = std::max(hi[i], b.hi[i]);
    }
  }
  Brick parent(lo, hi);
  TaggedDivision d;
  d.parent = parent;
  for (const auto& [b, g] : parts) d.items.emplace_back(b, b.lo);
  if (auto rep = validate_division(d); !rep.ok)
    throw DomainError("boundary_gauge: parts do not form a division: " + rep.message);

  auto parts_copy = std::make_shared<std::vector<std::pair<Brick, Gauge>>>(parts);
  auto fn = [parts_copy](const Point& p) {
    double delta = std::numeric_limits<double>::infinity();
    bool boundary = false;
    for (const auto& [b, g] : *parts_copy)
      if (on_boundary(b, p)) boundary = true;
    for (const auto& [b, g] : *parts_copy) {
      if (!b.contains(p)) continue;
      if (boundary) {
        // P on some part boundary: half the distance to the nearest other
        // vertex of every part containing P, min-combined with their gauges.
        delta = std::min(delta, std::min(0.5 * nearest_other_vertex(b, p), g(p)));
      } else {
        delta = std::min(delta, std::min(g(p), 0.5 * boundary_distance(b, p)));
      }
    }
    return delta;
  };
  return Gauge(parent, fn, GaugeKind::boundary);
}

namespace {

struct PointKey {
  std::array<std::uint64_t, kMaxDim> bits{};
  int n = 0;
  bool operator==(const PointKey& o) const {
    if (n != o.n) return false;
    for (int i = 0; i < n; ++i) if (bits[static_cast<std::size_t>(i)] != o.bits[static_cast<std::size_t>(i)]) return false;
    return true;
  }
};

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(k.n);
    for (int i = 0; i < k.n; ++i) {
      h ^= k.bits[static_cast<std::size_t>(i)] + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<std::size_t>(h);
  }
};

PointKey key_of(const Point& p) {
  PointKey k;
  k.n = p.n;
  for (int i = 0; i < p.n; ++i) {
    double x = p[i] == 0.0 ? 0.0 : p[i];  // normalize -0
    std::uint64_t b;
    std::memcpy(&b, &x, sizeof b);
    k.bits[static_cast<std::size_t>(i)] = b;
  }
  return k;
}

}  // namespace

Gauge null_cover_gauge(const std::vector<CoveredPoint>& points, double eps,
                       const Gauge& base, std::size_t max_points) {
  if (!std::isfinite(eps) || eps <= 0.0)
    throw DomainError("null_cover_gauge: eps must be positive");
  auto map = std::make_shared<std::unordered_map<PointKey, double, PointKeyHash>>();
  std::size_t count = std::min(points.size(), max_points);
  for (std::size_t j = 0; j < count; ++j) {
    const auto& cp = points[j];
    if (cp.level < 1) throw DomainError("null_cover_gauge: level must be >= 1");
    // Half-width eps / (2^(1+j) * 2^level); j is 1-based in the cover. The
    // extra 2^-level factor makes sum |f| mu <= eps hold with constant 1.
    double hw = std::ldexp(eps, -static_cast<int>(j + 2) - cp.level);
    if (hw <= 0.0) hw = std::numeric_limits<double>::denorm_min();
    auto [it, inserted] = map->emplace(key_of(cp.p), hw);
    if (!inserted) it->second = std::min(it->second, hw);
  }
  Gauge b = base;
  auto fn = [map, b](const Point& p) {
    double d = b(p);
    auto it = map->find(key_of(p));
    if (it != map->end()) d = std::min(d, it->second);
    return d;
  };
  return Gauge(base.domain(), fn, GaugeKind::null_cover);
}

std::vector<double> rational_sequence(std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  if (n == 0) return out;
  out.push_back(0.0);
  for (long s = 2; out.size() < n; ++s) {
    for (long num = 1; num < s && out.size() < n; ++num) {
      long den = s - num;
      if (std::gcd(num, den) != 1) continue;
      double v = static_cast<double>(num) / static_cast<double>(den);
      out.push_back(v);
      if (out.size() < n) out.push_back(-v);
    }
  }
  return out;
}

}  // namespace hk
