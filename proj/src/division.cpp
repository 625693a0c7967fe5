#include "hkquad/division.hpp"

#include <algorithm>
#include <cmath>

namespace hk {

TaggedDivision cousin_bisect(const Brick& domain, const Gauge& g, const BuilderConfig& cfg) {
  if (!g.domain().contains_brick(domain))
    throw DomainError("cousin_bisect: domain not inside gauge domain");
  TaggedDivision d;
  d.parent = domain;
  long cap = cfg.max_items > 0 ? cfg.max_items : 0;
  detail::bisect_stream(domain, [&](const Point& p) { return g(p); }, cfg,
                        [&](const Brick& b, const Point& t) {
                          d.items.emplace_back(b, t);
                          if (cap && static_cast<long>(d.items.size()) > cap)
                            throw DepthExhaustionError(
                                "cousin_bisect: division exceeds max_items");
                        });
  return d;
}

namespace {

// Searches for a tag xi in (t, c] whose gauge ball reaches back over t, i.e.
// xi - delta(xi) < t <= xi. Used when the plain sweep stalls because the
// gauge vanishes toward an interior point; that point (or its immediate
// floating-point neighborhood) must become a tag. Returns the candidate with
// the largest forward reach.
struct Reach {
  double xi;
  double delta;
  double advance;
};

std::optional<Reach> reach_forward(double t, double c, const Gauge& g) {
  std::optional<Reach> best;
  auto consider = [&](double xi) {
    if (!(xi > t) || xi > c) return;
    double d;
    try {
      d = g(Point{xi});
    } catch (const Error&) {
      return;
    }
    if (!(xi - d < t)) return;
    double adv = std::min(c, xi + 0.9 * d);
    if (adv <= t) return;
    if (!best || adv > best->advance) best = Reach{xi, d, adv};
  };
  // Immediate floating-point neighbors cross an exact cusp point.
  double xi = t;
  for (int k = 0; k < 64; ++k) {
    xi = std::nextafter(xi, c);
    consider(xi);
    if (xi >= c) break;
  }
  // Geometric probes catch reach-back from farther ahead.
  for (int k = 0; k <= 80; ++k) {
    double s = (c - t) * std::ldexp(1.0, -k);
    if (s <= 0.0) break;
    consider(t + s);
  }
  return best;
}

}  // namespace

TaggedDivision one_dim_chain(const Brick& domain, const Gauge& g) {
  if (domain.dim() != 1) throw DomainError("one_dim_chain: domain must be 1-dimensional");
  if (!g.domain().contains_brick(domain))
    throw DomainError("one_dim_chain: domain not inside gauge domain");
  const double b = domain.lo[0], c = domain.hi[0];
  TaggedDivision d;
  d.parent = domain;
  double t = b;
  while (t < c) {
    double dc = g(Point{c});
    if (c - t < dc) {
      d.items.emplace_back(Brick(t, c), Point{c});
      break;
    }
    double dt = g(Point{t});
    double step = 0.9 * dt;
    double t2 = std::min(t + step, c);
    if (t2 > t && t2 < c) {
      d.items.emplace_back(Brick(t, t2), Point{t});
      t = t2;
      continue;
    }
    if (t2 >= c) {  // the last stride would cover [t, c] tagged at t
      if (c - t < dt) {
        d.items.emplace_back(Brick(t, c), Point{t});
        break;
      }
      t2 = std::nextafter(c, b);
      if (t2 > t) {
        d.items.emplace_back(Brick(t, t2), Point{t});
        t = t2;
        continue;
      }
    }
    auto r = reach_forward(t, c, g);
    if (!r)
      throw DepthExhaustionError(
          "one_dim_chain: sweep stagnated at t=" + std::to_string(t) +
          " (gauge " + std::to_string(dt) + " below the representable increment)");
    d.items.emplace_back(Brick(t, r->advance), Point{r->xi});
    t = r->advance;
  }
  return d;
}

TaggedDivision product_division(
    const TaggedDivision& dx,
    const std::function<TaggedDivision(const Point&)>& dy_for) {
  if (dx.items.empty()) throw DomainError("product_division: empty x-division");
  TaggedDivision out;
  bool parent_set = false;
  for (const auto& ix : dx.items) {
    TaggedDivision dy = dy_for(ix.tag);
    const int nx = ix.brick.dim(), ny = dy.parent.dim();
    if (nx + ny > kMaxDim)
      throw DomainError("product_division: combined dimension exceeds " +
                        std::to_string(kMaxDim));
    if (!parent_set) {
      Point lo, hi;
      lo.n = hi.n = nx + ny;
      for (int i = 0; i < nx; ++i) { lo[i] = dx.parent.lo[i]; hi[i] = dx.parent.hi[i]; }
      for (int i = 0; i < ny; ++i) { lo[nx + i] = dy.parent.lo[i]; hi[nx + i] = dy.parent.hi[i]; }
      out.parent = Brick(lo, hi);
      parent_set = true;
    }
    for (const auto& iy : dy.items) {
      Point lo, hi, tag;
      lo.n = hi.n = tag.n = nx + ny;
      for (int i = 0; i < nx; ++i) {
        lo[i] = ix.brick.lo[i];
        hi[i] = ix.brick.hi[i];
        tag[i] = ix.tag[i];
      }
      for (int i = 0; i < ny; ++i) {
        lo[nx + i] = iy.brick.lo[i];
        hi[nx + i] = iy.brick.hi[i];
        tag[nx + i] = iy.tag[i];
      }
      out.items.emplace_back(Brick(lo, hi), tag);
    }
  }
  return out;
}

Gauge fubini_outer_gauge(
    const Brick& x_domain, const std::function<double(const Point&)>& delta_xy,
    const std::function<const TaggedDivision&(const Point&)>& dy_for) {
  auto fn = [delta_xy, dy_for, nx = x_domain.dim()](const Point& x) {
    const TaggedDivision& dy = dy_for(x);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& iy : dy.items) {
      Point xy;
      xy.n = nx + iy.tag.n;
      for (int i = 0; i < nx; ++i) xy[i] = x[i];
      for (int i = 0; i < iy.tag.n; ++i) xy[nx + i] = iy.tag[i];
      d = std::min(d, 0.5 * delta_xy(xy));
    }
    return d;
  };
  return Gauge(x_domain, fn, GaugeKind::user, "fubini outer");
}

InfiniteDivision infinite_division(const Gauge::Fn& delta, double a, double b,
                                   const BuilderConfig& cfg) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("infinite_division: need finite cutoffs a < b");
  // Smallest integers beyond a-1 and b+1; widen a few times if the chain
  // cannot finish with this gauge.
  double u = std::floor(a - 1.0), v = std::ceil(b + 1.0);
  for (int attempt = 0;; ++attempt) {
    Brick middle_domain(u, v);
    Gauge g(middle_domain, delta, GaugeKind::user, "infinite-range restriction");
    try {
      InfiniteDivision out;
      out.u = u;
      out.v = v;
      out.a = a;
      out.b = b;
      out.middle = one_dim_chain(middle_domain, g);
      (void)cfg;
      return out;
    } catch (const DepthExhaustionError&) {
      if (attempt >= 2) throw;
      u -= 1.0;
      v += 1.0;
    }
  }
}

}  // namespace hk
