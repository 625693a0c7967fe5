#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hkquad/brick.hpp"
#include "hkquad/gauge.hpp"

namespace hk {

/// Which candidate tag the bisection builder prefers. All rules fall back to
/// the full candidate ladder (lower corner, center, vertices for n <= 3), so
/// the produced division is fine either way; the rule only reorders.
/// `supplied` tries a seeded jittered interior point first and is what the
/// variation search uses to diversify divisions.
enum class TagRule { corner, center, supplied };

struct BuilderConfig {
  int max_depth = 1100;  // bisection levels per axis
  TagRule tag_rule = TagRule::corner;
  std::uint64_t rng_seed = 0;
  long max_items = 0;  // 0 = unbounded
  /// 1D only: restrict candidate tags to interval endpoints (Stieltjes sums
  /// take their tags at the ends).
  bool endpoint_tags_only = false;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t bits_of(double x) {
  std::uint64_t b;
  static_assert(sizeof b == sizeof x);
  __builtin_memcpy(&b, &x, sizeof b);
  return b;
}

inline Point jitter_tag(const Brick& b, std::uint64_t seed) {
  std::uint64_t h = seed ^ 0x6a09e667f3bcc909ull;
  Point t;
  t.n = b.dim();
  for (int i = 0; i < b.dim(); ++i) {
    h = splitmix64(h ^ bits_of(b.lo[i]) ^ (bits_of(b.hi[i]) << 1));
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    t[i] = b.lo[i] + u * (b.hi[i] - b.lo[i]);
    if (t[i] > b.hi[i]) t[i] = b.hi[i];
  }
  return t;
}

/// Enumerates the candidate tags for one brick in the order implied by the
/// rule; calls probe(tag) until it returns true. Returns whether any
/// candidate was accepted.
template <class Probe>
bool try_candidates(const Brick& b, const BuilderConfig& cfg, Probe&& probe) {
  const int n = b.dim();
  if (cfg.endpoint_tags_only && n == 1) {
    if (probe(b.lo)) return true;
    return probe(b.hi);
  }
  if (cfg.tag_rule == TagRule::supplied && probe(jitter_tag(b, cfg.rng_seed))) return true;
  Point corner = b.lo;
  Point center = b.center();
  if (cfg.tag_rule == TagRule::center) {
    if (probe(center)) return true;
    if (probe(corner)) return true;
  } else {
    if (probe(corner)) return true;
    if (probe(center)) return true;
  }
  if (n <= 3) {
    for (unsigned mask = 1; mask < (1u << n); ++mask) {  // mask 0 is the corner
      Point v;
      v.n = n;
      for (int i = 0; i < n; ++i) v[i] = (mask & (1u << i)) ? b.hi[i] : b.lo[i];
      if (probe(v)) return true;
    }
  }
  return false;
}

/// Depth-first Cousin bisection. GaugeF is double(const Point&) and must be
/// strictly positive (checked here); Emit is void(const Brick&, const Point&).
/// Returns the maximum depth used. Throws DepthExhaustionError past
/// cfg.max_depth and GaugeError on a bad gauge value.
template <class GaugeF, class Emit>
int bisect_stream(const Brick& root, GaugeF&& gauge, const BuilderConfig& cfg,
                  Emit&& emit, int start_depth = 0) {
  struct Frame {
    Brick b;
    int depth;
  };
  std::vector<Frame> stack;
  stack.push_back({root, start_depth});
  int max_used = start_depth;
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    max_used = std::max(max_used, f.depth);
    Point chosen;
    double worst_gauge = std::numeric_limits<double>::infinity();
    auto probe = [&](const Point& t) {
      double d = gauge(t);
      if (!std::isfinite(d) || d <= 0.0)
        throw GaugeError("gauge value " + std::to_string(d), t.repr());
      worst_gauge = std::min(worst_gauge, d);
      if (farthest_vertex_distance(f.b, t) < d) {
        chosen = t;
        return true;
      }
      return false;
    };
    if (try_candidates(f.b, cfg, probe)) {
      emit(f.b, chosen);
      continue;
    }
    if (f.depth >= cfg.max_depth)
      throw DepthExhaustionError(
          "bisection exhausted depth " + std::to_string(cfg.max_depth) +
          " on brick " + f.b.repr() + " (diameter " + std::to_string(diameter(f.b)) +
          ", smallest candidate gauge " + std::to_string(worst_gauge) +
          "): the gauge is effectively zero there");
    auto kids = bisect(f.b);
    // Push in reverse so children are processed in natural mask order.
    for (auto it = kids.rbegin(); it != kids.rend(); ++it)
      stack.push_back({*it, f.depth + 1});
  }
  return max_used;
}

}  // namespace detail

/// Theorem-4 construction: a fine tagged division of `domain` by recursive
/// bisection. Deterministic for fixed inputs and seed.
TaggedDivision cousin_bisect(const Brick& domain, const Gauge& g, const BuilderConfig& cfg = {});

/// Theorem-3 sweep construction for one dimension: walks left to right,
/// tagging at the sweep point and rescuing across gauge cusps so interior
/// points where the gauge vanishes become tags themselves.
TaggedDivision one_dim_chain(const Brick& domain, const Gauge& g);

/// Product of an m-dimensional division with per-x-tag n-dimensional
/// divisions: items (I* x J*, (x, y)).
TaggedDivision product_division(const TaggedDivision& dx,
                                const std::function<TaggedDivision(const Point&)>& dy_for);

/// Theorem-34 outer gauge: delta_1(x) = min_j delta(x, y_j) / 2 over the tags
/// of the y-division associated with x.
Gauge fubini_outer_gauge(const Brick& x_domain,
                         const std::function<double(const Point&)>& delta_xy,
                         const std::function<const TaggedDivision&(const Point&)>& dy_for);

/// Division of the whole real line: two rays plus a fine middle division.
/// Ray terms contribute zero to any sum by convention.
struct InfiniteDivision {
  double u = 0.0;  // left ray (-inf, u]
  double v = 0.0;  // right ray [v, inf)
  double a = 0.0, b = 0.0;  // requested cutoffs, u < a < b < v
  TaggedDivision middle;
};

InfiniteDivision infinite_division(const Gauge::Fn& delta, double a, double b,
                                   const BuilderConfig& cfg = {});

}  // namespace hk
