#include "hkquad/integrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>

#include "hkquad/kahan.hpp"
#include "hkquad/par.hpp"

namespace hk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double check_term(double t, const Point& tag) {
  if (!std::isfinite(t))
    throw EvalError("integrand produced a non-finite value at " + tag.repr());
  return t;
}

// ---------------------------------------------------------------------------
// Riemann sums over materialized divisions
// ---------------------------------------------------------------------------

constexpr std::size_t kSumChunk = 4096;

}  // namespace

IntervalIntegrand as_interval(const PointIntegrand& f) {
  return IntervalIntegrand{[f](const Point& tag, const Brick& b) { return f(tag) * volume(b); }};
}

std::string to_string(IntegralStatus s) {
  switch (s) {
    case IntegralStatus::converged: return "converged";
    case IntegralStatus::depth_exhausted: return "depth_exhausted";
    case IntegralStatus::max_refinements: return "max_refinements";
    case IntegralStatus::oscillating: return "oscillating";
  }
  return "?";
}

double riemann_sum_serial(const IntervalIntegrand& h, const TaggedDivision& d) {
  NeumaierSum acc;
  for (const auto& tb : d.items) acc.add(check_term(h(tb.tag, tb.brick), tb.tag));
  return acc.value();
}

double riemann_sum(const IntervalIntegrand& h, const TaggedDivision& d) {
  const std::size_t n = d.items.size();
  const std::size_t nchunks = (n + kSumChunk - 1) / kSumChunk;
  if (nchunks <= 1) return riemann_sum_serial(h, d);

  std::vector<NeumaierSum> partial(nchunks);
  std::exception_ptr err;
  long err_chunk = -1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_cap())
  for (long ci = 0; ci < static_cast<long>(nchunks); ++ci) {
    try {
      NeumaierSum acc;
      std::size_t lo = static_cast<std::size_t>(ci) * kSumChunk;
      std::size_t hi = std::min(n, lo + kSumChunk);
      for (std::size_t i = lo; i < hi; ++i)
        acc.add(check_term(h(d.items[i].tag, d.items[i].brick), d.items[i].tag));
      partial[static_cast<std::size_t>(ci)] = acc;
    } catch (...) {
#pragma omp critical(hk_riemann_err)
      if (err_chunk < 0 || ci < err_chunk) {
        err_chunk = ci;
        err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  NeumaierSum total;
  for (const auto& p : partial) total.merge(p);
  return total.value();
}

namespace {

// ---------------------------------------------------------------------------
// Driver gauge: delta0 * 2^-m globally, an extra 8^-h(x) on accumulated hot
// regions (1D), min-combined with a dist/2 cusp around singular points.
// ---------------------------------------------------------------------------

struct HotMap1D {
  std::vector<double> xs;  // breakpoints
  std::vector<int> ex;     // per-segment exponent, size xs.size() + 1

  int exponent(double x) const {
    if (xs.empty()) return 0;
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    return ex[i];
  }

  // Adds +1 on each interval of `hot` (disjoint, sorted).
  void add(const std::vector<std::pair<double, double>>& hot) {
    if (hot.empty()) return;
    if (xs.size() > 4'000'000) return;  // stop growing; global halving still refines
    std::vector<double> nxs;
    nxs.reserve(xs.size() + 2 * hot.size());
    nxs.insert(nxs.end(), xs.begin(), xs.end());
    for (const auto& [a, b] : hot) {
      nxs.push_back(a);
      nxs.push_back(b);
    }
    std::sort(nxs.begin(), nxs.end());
    nxs.erase(std::unique(nxs.begin(), nxs.end()), nxs.end());
    std::vector<int> nex(nxs.size() + 1, 0);
    for (std::size_t i = 0; i <= nxs.size(); ++i) {
      double sample;
      if (nxs.empty())
        sample = 0.0;
      else if (i == 0)
        sample = nxs.front() - 1.0;
      else if (i == nxs.size())
        sample = nxs.back() + 1.0;
      else
        sample = nxs[i - 1] + 0.5 * (nxs[i] - nxs[i - 1]);
      int e = exponent(sample);
      auto it = std::upper_bound(hot.begin(), hot.end(), sample,
                                 [](double v, const std::pair<double, double>& iv) {
                                   return v < iv.second;
                                 });
      if (it != hot.end() && it->first < sample && sample < it->second) ++e;
      nex[i] = e;
    }
    xs = std::move(nxs);
    ex = std::move(nex);
  }
};

struct DriverGauge {
  double delta0 = 1.0;
  int m = 0;
  std::shared_ptr<HotMap1D> hot;          // 1D only
  std::vector<double> singular_1d;        // sorted
  std::vector<Point> singular_nd;
  int dim = 1;

  double eval1(double x) const {
    double d = std::ldexp(delta0, -m - 3 * (hot ? hot->exponent(x) : 0));
    if (!singular_1d.empty()) {
      auto it = std::lower_bound(singular_1d.begin(), singular_1d.end(), x);
      double dist = kInf;
      if (it != singular_1d.end()) dist = std::min(dist, *it - x);
      if (it != singular_1d.begin()) dist = std::min(dist, x - *(it - 1));
      if (dist > 0.0) d = std::min(d, 0.5 * dist);
    }
    return d;
  }

  double operator()(const Point& p) const {
    if (dim == 1) return eval1(p[0]);
    double d = std::ldexp(delta0, -m);
    for (const auto& s : singular_nd) {
      double dist = distance(p, s);
      if (dist > 0.0) d = std::min(d, 0.5 * dist);
    }
    return d;
  }

  Gauge as_gauge(const Brick& domain) const {
    DriverGauge copy = *this;
    return Gauge(domain, [copy](const Point& p) { return copy(p); }, GaugeKind::min_combined,
                 "driver round " + std::to_string(m));
  }
};

// ---------------------------------------------------------------------------
// One refinement round: parallel bisection + fused compensated sum.
// ---------------------------------------------------------------------------

struct HotCandidate {
  double curv;
  double lo, hi;
};

struct RoundAccum {
  NeumaierSum sum;
  long items = 0;
  int max_depth = 0;
  // Neighbor-window second-difference tracking (1D curvature proxy).
  int window = 0;
  double v0 = 0.0, v1 = 0.0;       // previous two per-width term values
  double lo1 = 0.0, hi1 = 0.0;     // previous brick
  std::vector<HotCandidate> top;   // bounded min-heap by curv

  static constexpr std::size_t kTopCap = 4096;

  void push_hot(double curv, double lo, double hi) {
    if (curv <= 0.0) return;
    auto cmp = [](const HotCandidate& a, const HotCandidate& b) {
      return a.curv > b.curv || (a.curv == b.curv && a.lo < b.lo);
    };
    if (top.size() < kTopCap) {
      top.push_back({curv, lo, hi});
      std::push_heap(top.begin(), top.end(), cmp);
    } else if (curv > top.front().curv) {
      std::pop_heap(top.begin(), top.end(), cmp);
      top.back() = {curv, lo, hi};
      std::push_heap(top.begin(), top.end(), cmp);
    }
  }
};

struct ResourceCap {};  // internal: round exceeded max_items

struct Unit {
  Brick b;
  Point tag;   // valid when leaf
  bool leaf = false;
  int depth = 0;
};

// Expands the root until there are enough independent subtrees to schedule.
template <class GaugeF>
std::vector<Unit> expand_units(const Brick& root, GaugeF&& gauge, const BuilderConfig& bc,
                               std::size_t target) {
  std::vector<Unit> units{{root, Point{}, false, 0}};
  for (;;) {
    std::size_t open = 0;
    for (const auto& u : units) open += !u.leaf;
    if (open == 0 || units.size() >= target) return units;
    std::vector<Unit> next;
    next.reserve(units.size() * 2);
    for (auto& u : units) {
      if (u.leaf) {
        next.push_back(std::move(u));
        continue;
      }
      Point chosen;
      auto probe = [&](const Point& t) {
        double d = gauge(t);
        if (!std::isfinite(d) || d <= 0.0)
          throw GaugeError("gauge value " + std::to_string(d), t.repr());
        if (farthest_vertex_distance(u.b, t) < d) {
          chosen = t;
          return true;
        }
        return false;
      };
      if (detail::try_candidates(u.b, bc, probe)) {
        next.push_back({u.b, chosen, true, u.depth});
      } else if (u.depth >= bc.max_depth) {
        throw DepthExhaustionError("bisection exhausted depth " +
                                   std::to_string(bc.max_depth) + " on " + u.b.repr());
      } else {
        for (auto& k : bisect(u.b)) next.push_back({std::move(k), Point{}, false, u.depth + 1});
      }
    }
    units = std::move(next);
  }
}

struct RoundResult {
  double sum = 0.0;
  long items = 0;
  long evals = 0;
  int max_depth = 0;
  std::vector<std::pair<double, double>> hot;
};

// TermF: double(const Point& tag, const Brick& b)
template <class GaugeF, class TermF>
RoundResult run_round(const Brick& domain, GaugeF&& gauge, const BuilderConfig& bc,
                      TermF&& term, long max_items, bool collect_hot) {
  const bool one_d = domain.dim() == 1;
  collect_hot = collect_hot && one_d;
  std::vector<Unit> units =
      expand_units(domain, gauge, bc, static_cast<std::size_t>(4 * thread_cap()));

  std::vector<RoundAccum> acc(units.size());
  std::atomic<long> emitted{0};
  std::atomic<bool> abort{false};
  std::exception_ptr err;
  long err_unit = -1;

#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_cap())
  for (long ui = 0; ui < static_cast<long>(units.size()); ++ui) {
    if (abort.load(std::memory_order_relaxed)) continue;
    RoundAccum& a = acc[static_cast<std::size_t>(ui)];
    const Unit& u = units[static_cast<std::size_t>(ui)];
    try {
      long local = 0;
      auto emit = [&](const Brick& b, const Point& tag) {
        double t = check_term(term(tag, b), tag);
        a.sum.add(t);
        ++a.items;
        if (collect_hot) {
          double w = b.hi[0] - b.lo[0];
          double v = t / w;  // per-width value; neighbor second difference
          if (a.window >= 2) {
            double curv = std::abs(a.v0 - 2.0 * a.v1 + v) * (a.hi1 - a.lo1);
            a.push_hot(curv, a.lo1, a.hi1);
          }
          a.v0 = a.v1;
          a.v1 = v;
          a.lo1 = b.lo[0];
          a.hi1 = b.hi[0];
          if (a.window < 2) ++a.window;
        }
        if (max_items > 0 && (++local & 0xfff) == 0) {
          if (emitted.fetch_add(4096, std::memory_order_relaxed) + 4096 > max_items) {
            abort.store(true, std::memory_order_relaxed);
            throw ResourceCap{};
          }
          if (abort.load(std::memory_order_relaxed)) throw ResourceCap{};
        }
      };
      if (u.leaf) {
        emit(u.b, u.tag);
      } else {
        int d = detail::bisect_stream(u.b, gauge, bc, emit, u.depth);
        a.max_depth = std::max(a.max_depth, d);
      }
    } catch (...) {
#pragma omp critical(hk_round_err)
      {
        if (err_unit < 0 || ui < err_unit) {
          err_unit = ui;
          err = std::current_exception();
        }
        abort.store(true, std::memory_order_relaxed);
      }
    }
  }
  if (err) std::rethrow_exception(err);

  RoundResult r;
  NeumaierSum total;
  std::vector<HotCandidate> cands;
  for (auto& a : acc) {
    total.merge(a.sum);
    r.items += a.items;
    r.max_depth = std::max(r.max_depth, a.max_depth);
    cands.insert(cands.end(), a.top.begin(), a.top.end());
  }
  r.sum = total.value();
  r.evals = r.items;

  if (collect_hot && !cands.empty()) {
    std::sort(cands.begin(), cands.end(), [](const HotCandidate& a, const HotCandidate& b) {
      return a.curv > b.curv || (a.curv == b.curv && a.lo < b.lo);
    });
    std::size_t want = std::min<std::size_t>(
        {cands.size(), static_cast<std::size_t>(r.items / 10 + 1), 32768});
    cands.resize(want);
    std::sort(cands.begin(), cands.end(),
              [](const HotCandidate& a, const HotCandidate& b) { return a.lo < b.lo; });
    for (const auto& c : cands) {
      if (!r.hot.empty() && c.lo <= r.hot.back().second)
        r.hot.back().second = std::max(r.hot.back().second, c.hi);
      else
        r.hot.emplace_back(c.lo, c.hi);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// The adaptive driver
// ---------------------------------------------------------------------------

long default_max_items(int dim) { return dim == 1 ? 800'000'000L : 4'000'000L; }

struct DriveOut {
  IntegralResult res;
  DriverGauge gauge;  // state after the last completed round
};

template <class TermF>
DriveOut drive(const Brick& domain, TermF&& term, double tol, const IntegrateConfig& cfg,
               const std::vector<Point>& singulars, bool endpoint_tags,
               const std::vector<double>& forced_tags) {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("integrate: tol must be > 0");
  const int n = domain.dim();

  DriverGauge g;
  g.dim = n;
  g.delta0 = diameter(domain) / 4.0;
  if (n == 1) {
    g.hot = std::make_shared<HotMap1D>();
    for (const auto& s : singulars) g.singular_1d.push_back(s[0]);
    g.singular_1d.insert(g.singular_1d.end(), forced_tags.begin(), forced_tags.end());
    std::sort(g.singular_1d.begin(), g.singular_1d.end());
  } else {
    g.singular_nd = singulars;
  }

  BuilderConfig bc;
  bc.max_depth = cfg.max_depth;
  bc.rng_seed = cfg.rng_seed;
  bc.tag_rule = cfg.tag_rule;
  bc.endpoint_tags_only = endpoint_tags;
  long cap = cfg.max_items > 0 ? cfg.max_items : default_max_items(n);

  IntegralResult res;
  DriveOut out;
  double s0 = kNaN, s1 = kNaN;  // s_{m-2}, s_{m-1}
  double last_gap = kInf, prev_gap = kInf;
  long evals = 0;
  bool any_round = false;

  for (int m = 0; m <= cfg.max_refinements; ++m) {
    RoundResult round;
    try {
      round = run_round(domain, g, bc, term, cap, /*collect_hot=*/true);
    } catch (const ResourceCap&) {
      res.status = IntegralStatus::max_refinements;
      res.value = any_round ? s1 : kNaN;
      res.err_estimate = any_round ? last_gap + tol / 2 : kInf;
      res.refinements = m;
      res.evaluations = evals;
      out.res = res;
      out.gauge = g;
      return out;
    } catch (const DepthExhaustionError&) {
      res.status = IntegralStatus::depth_exhausted;
      res.value = any_round ? s1 : kNaN;
      res.err_estimate = any_round ? last_gap + tol / 2 : kInf;
      res.refinements = m;
      res.evaluations = evals;
      out.res = res;
      out.gauge = g;
      return out;
    }
    evals += round.evals;
    double s = round.sum;
    prev_gap = last_gap;
    last_gap = std::abs(s - s1);
    double gap2 = std::abs(s - s0);
    any_round = true;
    res.items = round.items;
    res.refinements = m;
    res.evaluations = evals;
    if (m >= 2 && last_gap < tol / 2 && gap2 < tol / 2) {
      res.status = IntegralStatus::converged;
      res.value = s;
      res.err_estimate = last_gap + tol / 2;
      out.res = res;
      out.gauge = g;
      return out;
    }
    s0 = s1;
    s1 = s;
    g.m += 1;
    if (g.hot) g.hot->add(round.hot);
  }

  // Out of refinement rounds: report the best bracket. Gaps that stopped
  // shrinking indicate oscillation rather than slow convergence.
  res.status = (std::isfinite(prev_gap) && last_gap >= 0.5 * prev_gap && last_gap > tol)
                   ? IntegralStatus::oscillating
                   : IntegralStatus::max_refinements;
  res.value = s1;
  res.err_estimate = last_gap + tol / 2;
  out.res = res;
  out.gauge = g;
  return out;
}

std::vector<Point> singulars_inside(const PointIntegrand& f, const Brick& domain) {
  std::vector<Point> out;
  for (const auto& s : f.singular_points)
    if (s.n == domain.dim() && domain.contains(s)) out.push_back(s);
  return out;
}

// Forward declaration: the plain driver for 1D ladder panels.
IntegralResult integrate_plain(const PointIntegrand& f, const Brick& domain, double tol,
                               const IntegrateConfig& cfg, DriverGauge* gauge_out);

// Dyadic Cauchy ladder toward `anchor` over [lo, hi] (anchor is lo or hi).
// Per-panel tolerance eps_j = tol / ((j+1)(j+2)) keeps the total under
// tol/2 without the exponential per-panel demands of deep ladders.
IntegralResult cauchy_ladder(const PointIntegrand& f, double lo, double hi, bool anchor_right,
                             double tol, const IntegrateConfig& cfg) {
  const double len = hi - lo;
  const int max_panels = 60;
  NeumaierSum sum;
  IntegralResult res;
  double err_acc = 0.0;
  double p_prev = kNaN;
  int grow_streak = 0;
  int converged_panels = 0;
  for (int j = 1; j <= max_panels; ++j) {
    double off0 = std::ldexp(len, -(j - 1));
    double off1 = std::ldexp(len, -j);
    double a, b;
    if (anchor_right) {
      a = hi - off0;
      b = hi - off1;
    } else {
      a = lo + off1;
      b = lo + off0;
    }
    if (!(a < b)) break;  // ladder ran out of representable width
    double eps_j = tol / (static_cast<double>(j + 1) * static_cast<double>(j + 2));
    IntegralResult panel = integrate_plain(f, Brick(a, b), eps_j, cfg, nullptr);
    res.refinements += panel.refinements;
    res.evaluations += panel.evaluations;
    res.items += panel.items;
    if (!panel.converged()) {
      // A panel that cannot stabilize within resources: report the partial
      // bracket with that status rather than inventing a value.
      res.status = panel.status;
      res.value = sum.value() + panel.value;
      res.err_estimate = err_acc + panel.err_estimate + std::abs(panel.value);
      return res;
    }
    double p = panel.value;
    sum.add(p);
    err_acc += panel.err_estimate;
    ++converged_panels;

    if (std::isfinite(p_prev) && std::abs(p) > tol / 4) {
      grow_streak = (std::abs(p) >= 0.9 * std::abs(p_prev)) ? grow_streak + 1 : 0;
      if (grow_streak >= 3 && j >= 5)
        throw NonintegrableError(
            "cauchy_extension: panel sums are not Cauchy near " +
            std::to_string(anchor_right ? hi : lo) + " (panel " + std::to_string(j) +
            " value " + std::to_string(p) + ")");
    }
    if (std::isfinite(p_prev)) {
      double ratio = std::abs(p_prev) > 0 ? std::abs(p) / std::abs(p_prev) : 0.0;
      ratio = std::clamp(ratio, 0.0, 0.9);
      double tail = std::abs(p) * ratio / (1.0 - ratio);
      if (j >= 2 && std::abs(p) < tol / 4 && tail < tol / 4) {
        res.status = IntegralStatus::converged;
        res.value = sum.value();
        res.err_estimate = err_acc + tail + std::abs(p);
        return res;
      }
    }
    p_prev = p;
  }
  if (converged_panels == max_panels || std::abs(p_prev) <= tol / 4) {
    // The ladder bottomed out at representable widths with vanishing panels.
    res.status = IntegralStatus::converged;
    res.value = sum.value();
    res.err_estimate = err_acc + (std::isfinite(p_prev) ? std::abs(p_prev) : 0.0);
    return res;
  }
  throw NonintegrableError("cauchy_extension: ladder did not stabilize within " +
                           std::to_string(max_panels) + " panels");
}

IntegralResult integrate_plain(const PointIntegrand& f, const Brick& domain, double tol,
                               const IntegrateConfig& cfg, DriverGauge* gauge_out) {
  auto term = [&f](const Point& tag, const Brick& b) { return f(tag) * volume(b); };
  auto singulars = singulars_inside(f, domain);
  DriveOut out = drive(domain, term, tol, cfg, singulars, /*endpoint_tags=*/false, {});
  if (gauge_out) *gauge_out = out.gauge;
  return out.res;
}

IntegralResult combine_parts(std::vector<IntegralResult> parts) {
  IntegralResult res;
  NeumaierSum v;
  for (const auto& p : parts) {
    v.add(p.value);
    res.err_estimate += p.err_estimate;
    res.refinements += p.refinements;
    res.items += p.items;
    res.evaluations += p.evaluations;
    if (!p.converged()) res.status = p.status;
  }
  res.value = v.value();
  return res;
}

}  // namespace

DriverArtifacts integrate_with_artifacts(const PointIntegrand& f, const Brick& domain,
                                         double tol, const IntegrateConfig& cfg,
                                         bool materialize_division) {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("integrate: tol must be > 0");
  const auto singulars = singulars_inside(f, domain);

  // A 1D domain with declared singular points routes through the Cauchy
  // ladder anchored at each of them; the plain refinement driver cannot
  // resolve gauge-forced oscillation budgets at the points themselves.
  if (domain.dim() == 1 && !singulars.empty()) {
    std::vector<double> cuts;
    for (const auto& s : singulars) cuts.push_back(s[0]);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double lo = domain.lo[0], hi = domain.hi[0];
    const bool lo_sing = std::binary_search(cuts.begin(), cuts.end(), lo);
    const bool hi_sing = std::binary_search(cuts.begin(), cuts.end(), hi);
    std::vector<double> bounds{lo};
    for (double c : cuts)
      if (c > lo && c < hi) bounds.push_back(c);
    bounds.push_back(hi);

    struct Seg {
      double a, b;
      bool sing_left, sing_right;
    };
    std::vector<Seg> segs;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
      segs.push_back({bounds[i], bounds[i + 1],
                      i == 0 ? lo_sing : true,
                      i + 2 == bounds.size() ? hi_sing : true});

    std::vector<IntegralResult> parts;
    double seg_tol = tol / static_cast<double>(segs.size());
    for (const auto& s : segs) {
      if (s.sing_left && s.sing_right) {
        double mid = 0.5 * (s.a + s.b);
        parts.push_back(cauchy_ladder(f, s.a, mid, /*anchor_right=*/false, seg_tol / 2, cfg));
        parts.push_back(cauchy_ladder(f, mid, s.b, /*anchor_right=*/true, seg_tol / 2, cfg));
      } else if (s.sing_left) {
        parts.push_back(cauchy_ladder(f, s.a, s.b, /*anchor_right=*/false, seg_tol, cfg));
      } else if (s.sing_right) {
        parts.push_back(cauchy_ladder(f, s.a, s.b, /*anchor_right=*/true, seg_tol, cfg));
      } else {
        parts.push_back(integrate_plain(f, Brick(s.a, s.b), seg_tol, cfg, nullptr));
      }
    }
    DriverArtifacts art{combine_parts(std::move(parts)),
                        Gauge(domain,
                              [g = DriverGauge{diameter(domain) / 4.0, 0, nullptr,
                                               cuts, {}, 1}](const Point& p) { return g(p); },
                              GaugeKind::cauchy_ext, "ladder base gauge"),
                        std::nullopt};
    return art;
  }

  DriverGauge g;
  auto term = [&f](const Point& tag, const Brick& b) { return f(tag) * volume(b); };
  DriveOut out = drive(domain, term, tol, cfg, singulars, false, {});
  DriverArtifacts art{out.res, out.gauge.as_gauge(domain), std::nullopt};
  if (materialize_division && out.res.items > 0 && out.res.items <= 2'000'000) {
    BuilderConfig bc;
    bc.max_depth = cfg.max_depth;
    bc.rng_seed = cfg.rng_seed;
    bc.tag_rule = cfg.tag_rule;
    art.final_division = cousin_bisect(domain, art.final_gauge, bc);
  }
  return art;
}

IntegralResult integrate(const PointIntegrand& f, const Brick& domain, double tol,
                         const IntegrateConfig& cfg) {
  return integrate_with_artifacts(f, domain, tol, cfg).result;
}

HenstockResidual henstock_residual(const PointIntegrand& f,
                                   const std::function<double(const Brick&)>& F,
                                   const TaggedDivision& d) {
  NeumaierSum pos, neg, abs_acc;
  for (const auto& tb : d.items) {
    double t = check_term(f(tb.tag) * volume(tb.brick) - F(tb.brick), tb.tag);
    abs_acc.add(std::abs(t));
    if (t >= 0)
      pos.add(t);
    else
      neg.add(t);
  }
  return {std::max(std::abs(pos.value()), std::abs(neg.value())), abs_acc.value()};
}

IntegralResult integrate_stieltjes(const PointIntegrand& f, const StieltjesWeight& w,
                                   const Brick& domain, double tol,
                                   const IntegrateConfig& cfg) {
  if (domain.dim() != 1) throw DomainError("integrate_stieltjes: domain must be 1D");
  auto term = [&](const Point& tag, const Brick& b) {
    double gv = w.g(b.hi[0]), gu = w.g(b.lo[0]);
    if (!std::isfinite(gv) || !std::isfinite(gu))
      throw EvalError("stieltjes weight non-finite on " + b.repr());
    return f(tag) * (gv - gu);
  };
  auto singulars = singulars_inside(f, domain);
  DriveOut out = drive(domain, term, tol, cfg, singulars, /*endpoint_tags=*/true,
                       cfg.forced_tag_points);
  return out.res;
}

ByPartsResult by_parts(const std::function<double(double)>& f,
                       const std::function<double(double)>& g, const Brick& domain,
                       double tol, const IntegrateConfig& cfg) {
  if (domain.dim() != 1) throw DomainError("by_parts: domain must be 1D");
  ByPartsResult r;
  PointIntegrand fp{[f](const Point& p) { return f(p[0]); }, {}};
  PointIntegrand gp{[g](const Point& p) { return g(p[0]); }, {}};
  r.f_dg = integrate_stieltjes(fp, StieltjesWeight{g}, domain, tol, cfg);
  r.g_df = integrate_stieltjes(gp, StieltjesWeight{f}, domain, tol, cfg);
  const double a = domain.lo[0], b = domain.hi[0];
  r.boundary = f(b) * g(b) - f(a) * g(a);

  // Variation residual of (delta f)(delta g) over the finest division used:
  // rebuild that division from the last driver gauge scale.
  long items = std::max(r.f_dg.items, r.g_df.items);
  double width = (b - a) / static_cast<double>(std::max<long>(items, 4));
  DriverGauge dg;
  dg.dim = 1;
  dg.delta0 = std::max(width, 1e-9 * (b - a));
  dg.singular_1d = cfg.forced_tag_points;
  std::sort(dg.singular_1d.begin(), dg.singular_1d.end());
  BuilderConfig bc;
  bc.max_depth = cfg.max_depth;
  auto term = [&](const Point&, const Brick& br) {
    return std::abs((f(br.hi[0]) - f(br.lo[0])) * (g(br.hi[0]) - g(br.lo[0])));
  };
  RoundResult round = run_round(domain, dg, bc, term, default_max_items(1), false);
  r.residual = round.sum;
  r.identity_holds = r.f_dg.converged() && r.g_df.converged() &&
                     std::abs(r.f_dg.value + r.g_df.value - r.boundary) <= 3.0 * tol;
  return r;
}

IntegralResult cauchy_extension(const PointIntegrand& f, double a, double c, Side side,
                                double tol, const IntegrateConfig& cfg) {
  if (!(a < c)) throw DomainError("cauchy_extension: need a < c");
  return cauchy_ladder(f, a, c, side == Side::right, tol, cfg);
}

IntegralResult integrate_symmetric_check(const PointIntegrand& f, double singularity,
                                         const Brick& domain, double tol,
                                         const IntegrateConfig& cfg) {
  if (domain.dim() != 1) throw DomainError("integrate_symmetric_check: domain must be 1D");
  const double a = domain.lo[0], b = domain.hi[0];
  if (!(a < singularity && singularity < b))
    throw DomainError("integrate_symmetric_check: singularity must be strictly inside");
  // Both sides must converge independently; no principal-value cancellation.
  IntegralResult left = cauchy_ladder(f, a, singularity, /*anchor_right=*/true, tol / 2, cfg);
  IntegralResult right = cauchy_ladder(f, singularity, b, /*anchor_right=*/false, tol / 2, cfg);
  return combine_parts({left, right});
}

IntegralResult denjoy_extension(const PointIntegrand& f, const Brick& domain,
                                const std::vector<GapInterval>& gaps, double tol,
                                const IntegrateConfig& cfg,
                                const std::optional<IntegralResult>& off_gaps_supplied,
                                const std::vector<IntegralResult>* per_gap_supplied) {
  if (domain.dim() != 1) throw DomainError("denjoy_extension: domain must be 1D");
  const double b = domain.lo[0], c = domain.hi[0];
  std::vector<GapInterval> gs = gaps;
  std::sort(gs.begin(), gs.end(), [](const GapInterval& x, const GapInterval& y) {
    return x.lo < y.lo;
  });
  double prev = b;
  for (const auto& g : gs) {
    if (!(g.lo < g.hi) || g.lo < prev || g.hi > c)
      throw DomainError("denjoy_extension: gaps must be disjoint open intervals in the domain");
    prev = g.hi;
  }

  std::vector<IntegralResult> parts;
  const std::size_t ncomp = gs.size() + gs.size() + 1;
  double comp_tol = tol / static_cast<double>(std::max<std::size_t>(ncomp, 1));

  if (off_gaps_supplied) {
    parts.push_back(*off_gaps_supplied);
  } else {
    // Off-gap region = finitely many closed segments.
    double lo = b;
    for (const auto& g : gs) {
      if (g.lo > lo) parts.push_back(integrate(f, Brick(lo, g.lo), comp_tol, cfg));
      lo = g.hi;
    }
    if (lo < c) parts.push_back(integrate(f, Brick(lo, c), comp_tol, cfg));
  }
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (per_gap_supplied && i < per_gap_supplied->size()) {
      parts.push_back((*per_gap_supplied)[i]);
      continue;
    }
    double mid = 0.5 * (gs[i].lo + gs[i].hi);
    parts.push_back(cauchy_ladder(f, gs[i].lo, mid, /*anchor_right=*/false, comp_tol / 2, cfg));
    parts.push_back(cauchy_ladder(f, mid, gs[i].hi, /*anchor_right=*/true, comp_tol / 2, cfg));
  }
  return combine_parts(std::move(parts));
}

IntegralResult integrate_infinite(const PointIntegrand& f, double tol,
                                  const IntegrateConfig& cfg) {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("integrate_infinite: tol must be > 0");
  const int kmax = 40;
  std::vector<IntegralResult> parts;
  parts.push_back(integrate(f, Brick(-1.0, 1.0), tol / 4, cfg));

  for (int side = 0; side < 2; ++side) {
    int calm = 0;
    double prev_inc = kInf;
    int grow = 0;
    for (int k = 1;; ++k) {
      if (k > kmax)
        throw NonintegrableError(
            std::string("integrate_infinite: ") + (side ? "left" : "right") +
            " tail failed to stabilize by cutoff 2^40");
      double lo = std::ldexp(1.0, k - 1), hi = std::ldexp(1.0, k);
      Brick shell = side ? Brick(-hi, -lo) : Brick(lo, hi);
      double shell_tol = tol / (8.0 * static_cast<double>(k) * static_cast<double>(k + 1));
      IntegralResult inc = integrate(f, shell, shell_tol, cfg);
      parts.push_back(inc);
      if (!inc.converged()) {
        IntegralResult res = combine_parts(std::move(parts));
        return res;
      }
      double mag = std::abs(inc.value);
      grow = (std::isfinite(prev_inc) && mag >= prev_inc && mag > tol) ? grow + 1 : 0;
      if (grow >= 3)
        throw NonintegrableError(std::string("integrate_infinite: divergent ") +
                                 (side ? "left" : "right") + " tail (increment " +
                                 std::to_string(inc.value) + " at cutoff 2^" +
                                 std::to_string(k) + ")");
      prev_inc = mag;
      calm = (mag < tol / 4) ? calm + 1 : 0;
      if (calm >= 2) break;
    }
  }
  IntegralResult res = combine_parts(std::move(parts));
  // Truncated rays contribute zero by the division convention; fold the last
  // increments into the error margin.
  res.err_estimate += tol / 4;
  return res;
}

namespace {

PointIntegrand slice_integrand(const PointIntegrand& f, const Point& fixed, int fixed_dims,
                               bool fixed_first) {
  PointIntegrand out;
  out.eval = [f, fixed, fixed_dims, fixed_first](const Point& free) {
    Point xy;
    xy.n = fixed_dims + free.n;
    if (fixed_first) {
      for (int i = 0; i < fixed_dims; ++i) xy[i] = fixed[i];
      for (int i = 0; i < free.n; ++i) xy[fixed_dims + i] = free[i];
    } else {
      for (int i = 0; i < free.n; ++i) xy[i] = free[i];
      for (int i = 0; i < fixed_dims; ++i) xy[free.n + i] = fixed[i];
    }
    return f(xy);
  };
  // Project singular points whose fixed coordinates match exactly.
  for (const auto& s : f.singular_points) {
    bool match = true;
    for (int i = 0; i < fixed_dims; ++i) {
      double sc = fixed_first ? s[i] : s[s.n - fixed_dims + i];
      if (sc != fixed[i]) match = false;
    }
    if (!match) continue;
    Point proj;
    proj.n = s.n - fixed_dims;
    for (int i = 0; i < proj.n; ++i) proj[i] = fixed_first ? s[fixed_dims + i] : s[i];
    out.singular_points.push_back(proj);
  }
  return out;
}

}  // namespace

FubiniResult fubini(const PointIntegrand& f, const Brick& x_domain, const Brick& y_domain,
                    double tol, const IntegrateConfig& cfg) {
  const int nx = x_domain.dim(), ny = y_domain.dim();
  if (nx + ny > kMaxDim) throw DomainError("fubini: combined dimension too large");
  FubiniResult out;

  // Double integral over the product brick.
  Point lo, hi;
  lo.n = hi.n = nx + ny;
  for (int i = 0; i < nx; ++i) { lo[i] = x_domain.lo[i]; hi[i] = x_domain.hi[i]; }
  for (int i = 0; i < ny; ++i) { lo[nx + i] = y_domain.lo[i]; hi[nx + i] = y_domain.hi[i]; }
  IntegrateConfig dcfg = cfg;
  if (dcfg.max_items == 0) dcfg.max_items = 4'000'000;
  out.dbl = integrate(f, Brick(lo, hi), tol, dcfg);

  auto iterated = [&](bool x_outer) {
    const Brick& outer_dom = x_outer ? x_domain : y_domain;
    const Brick& inner_dom = x_outer ? y_domain : x_domain;
    std::vector<Point>& failed = x_outer ? out.failed_inner_tags_xy : out.failed_inner_tags_yx;
    IntegrateConfig icfg = cfg;
    icfg.max_items = 200'000;
    icfg.max_refinements = std::min(cfg.max_refinements, 40);
    double inner_tol = tol / (4.0 * std::max(1.0, volume(outer_dom)));
    PointIntegrand outer_f;
    outer_f.eval = [&, inner_tol](const Point& t) {
      PointIntegrand inner = slice_integrand(f, t, x_outer ? nx : ny, x_outer);
      IntegralResult r;
      bool failed_here = false;
      try {
        r = integrate(inner, inner_dom, inner_tol, icfg);
        failed_here = !r.converged();
      } catch (const Error&) {
        failed_here = true;
      }
      if (failed_here) {
#pragma omp critical(hk_fubini_failed)
        failed.push_back(t);
        return 0.0;  // integrable-almost-everywhere convention
      }
      return r.value;
    };
    IntegrateConfig ocfg = cfg;
    ocfg.max_items = 100'000;
    IntegralResult r = integrate(outer_f, outer_dom, tol, ocfg);
    r.err_estimate += inner_tol * volume(outer_dom);
    return r;
  };
  out.iterated_xy = iterated(true);
  out.iterated_yx = iterated(false);
  return out;
}

}  // namespace hk
