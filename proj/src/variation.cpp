#include "hkquad/variation.hpp"

#include <algorithm>
#include <cmath>

#include "hkquad/kahan.hpp"
#include "hkquad/par.hpp"

namespace hk {

double variation_lower(const IntervalIntegrand& h, const Brick& domain, const Gauge& g,
                       int effort) {
  if (effort < 1) effort = 1;
  std::vector<double> sums(static_cast<std::size_t>(effort),
                           -std::numeric_limits<double>::infinity());
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_cap())
  for (int seed = 0; seed < effort; ++seed) {
    try {
      BuilderConfig bc;
      bc.rng_seed = static_cast<std::uint64_t>(seed);
      bc.tag_rule = static_cast<TagRule>(seed % 3);
      TaggedDivision d = cousin_bisect(domain, g, bc);
      NeumaierSum acc;
      for (const auto& tb : d.items) acc.add(std::abs(h(tb.tag, tb.brick)));
      sums[static_cast<std::size_t>(seed)] = acc.value();
    } catch (...) {
#pragma omp critical(hk_varlower_err)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return *std::max_element(sums.begin(), sums.end());
}

VariationEstimate variation_bracket(const PointIntegrand& f, const Brick& domain, double tol,
                                    const IntegrateConfig& cfg) {
  PointIntegrand af;
  af.eval = [f](const Point& p) { return std::abs(f(p)); };
  af.singular_points = f.singular_points;

  VariationEstimate est;
  Gauge lower_gauge = constant_gauge(domain, diameter(domain) / 4.0);
  try {
    DriverArtifacts art = integrate_with_artifacts(af, domain, tol, cfg);
    if (art.result.converged()) {
      est.upper = art.result.value + art.result.err_estimate;
    } else {
      est.upper_infinite = true;  // no certified upper bound
    }
    lower_gauge = art.final_gauge;
  } catch (const NonintegrableError&) {
    est.upper_infinite = true;
  }
  const int effort = 8;
  est.lower = variation_lower(as_interval(af), domain, lower_gauge, effort);
  est.divisions_tried = effort;
  est.gauge_used = lower_gauge.description();
  if (!est.upper_infinite && est.lower > est.upper) est.upper = est.lower;
  return est;
}

VariationEstimate outer_measure(const PointSet& X, const Brick& domain, const Gauge& g,
                                int effort) {
  VariationEstimate est;
  IntervalIntegrand h{[&X](const Point& tag, const Brick& b) {
    return X.membership(tag) ? volume(b) : 0.0;
  }};

  if (!X.point_list.empty()) {
    // Null-cover certificate: for a listed set the outer measure is under any
    // eps, certified by the Theorem-45 gauge construction.
    const double eps = 1e-9;
    std::vector<CoveredPoint> pts;
    pts.reserve(X.point_list.size());
    for (const auto& p : X.point_list) pts.push_back({p, 1});
    Gauge cover = null_cover_gauge(pts, eps, g);
    est.lower = variation_lower(h, domain, cover, std::max(1, effort));
    est.upper = eps;
    est.gauge_used = "null-cover(eps=1e-9) over " + std::to_string(pts.size()) + " points";
    est.divisions_tried = effort;
    if (est.lower > est.upper) est.upper = est.lower;  // lower is exact for the gauge
    return est;
  }

  est.lower = variation_lower(h, domain, g, std::max(1, effort));
  est.divisions_tried = effort;
  est.gauge_used = g.description();
  PointIntegrand ind;
  ind.eval = [&X](const Point& p) { return X.membership(p) ? 1.0 : 0.0; };
  try {
    IntegralResult r = integrate(ind, domain, 1e-4, {});
    if (r.converged())
      est.upper = r.value + r.err_estimate;
    else
      est.upper_infinite = true;
  } catch (const Error&) {
    est.upper_infinite = true;
  }
  if (!est.upper_infinite && est.lower > est.upper) est.upper = est.lower;
  return est;
}

namespace {

struct Probe {
  Brick b;
  bool valid = false;
};

Probe clipped_probe(const Brick& domain, const Point& P, const Point& lo_off,
                    const Point& hi_off, double alpha) {
  const int n = domain.dim();
  Point lo, hi;
  lo.n = hi.n = n;
  for (int i = 0; i < n; ++i) {
    lo[i] = std::max(domain.lo[i], P[i] - lo_off[i]);
    hi[i] = std::min(domain.hi[i], P[i] + hi_off[i]);
    if (!(lo[i] < hi[i])) return {};
  }
  Brick b(lo, hi);
  if (!b.contains(P)) return {};
  if (regularity(b) < alpha - 1e-12) return {};
  return {b, true};
}

}  // namespace

DerivativeReport derivative_at(const std::function<double(const Brick&)>& F, const Point& P,
                               const Brick& domain, double alpha, double tol) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("derivative_at: alpha must lie in (0, 1]");
  if (!domain.contains(P)) throw DomainError("derivative_at: point outside domain");
  const int n = domain.dim();

  double s0 = domain.edge(0);
  for (int i = 1; i < n; ++i) s0 = std::min(s0, domain.edge(i));
  s0 *= 0.25;

  DerivativeReport rep;
  std::vector<double> prev_vals;
  const int kmax = 44;
  for (int k = 0; k <= kmax; ++k) {
    double s = std::ldexp(s0, -k);
    std::vector<double> vals;
    auto eval_probe = [&](const Point& lo_off, const Point& hi_off) {
      Probe pr = clipped_probe(domain, P, lo_off, hi_off, alpha);
      if (!pr.valid) return;
      double v = F(pr.b) / volume(pr.b);
      if (!std::isfinite(v))
        throw EvalError("derivative_at: F non-finite on probe " + pr.b.repr());
      vals.push_back(v);
    };
    Point half, zero, full;
    half.n = zero.n = full.n = n;
    for (int i = 0; i < n; ++i) {
      half[i] = 0.5 * s;
      zero[i] = 0.0;
      full[i] = s;
    }
    eval_probe(half, half);  // centered
    for (int ax = 0; ax < n; ++ax) {  // 2n one-sided probes
      Point lo = half, hi = half;
      lo[ax] = s;
      hi[ax] = 0.0;
      eval_probe(lo, hi);
      lo[ax] = 0.0;
      hi[ax] = s;
      eval_probe(lo, hi);
    }
    // Alpha-extremal slab: one long axis, the rest scaled to hit r = alpha.
    if (n > 1) {
      double ratio = std::pow(alpha, 1.0 / static_cast<double>(n - 1));
      Point lo = half, hi = half;
      for (int i = 1; i < n; ++i) {
        lo[i] = 0.5 * s * ratio;
        hi[i] = 0.5 * s * ratio;
      }
      eval_probe(lo, hi);
    } else {
      Point lo, hi;
      lo.n = hi.n = 1;
      lo[0] = s / 3.0;
      hi[0] = 2.0 * s / 3.0;
      eval_probe(lo, hi);
    }
    if (vals.empty()) continue;

    if (!prev_vals.empty() && k >= 2) {
      double mn = vals.front(), mx = vals.front();
      for (double v : vals) { mn = std::min(mn, v); mx = std::max(mx, v); }
      for (double v : prev_vals) { mn = std::min(mn, v); mx = std::max(mx, v); }
      rep.band_lo = mn;
      rep.band_hi = mx;
      rep.scales_used = k + 1;
      if (mx - mn < tol) {
        NeumaierSum mean;
        for (double v : vals) mean.add(v);
        rep.has_derivative = true;
        rep.value = mean.value() / static_cast<double>(vals.size());
        return rep;
      }
    }
    prev_vals = std::move(vals);
  }
  rep.has_derivative = false;
  return rep;
}

double StepFunction::eval(const Point& p) const {
  if (!parent.contains(p)) throw DomainError("step function evaluated outside its brick");
  const int n = parent.dim();
  const long per_axis = 1L << k;
  long idx = 0;
  long stride = 1;
  for (int i = 0; i < n; ++i) {
    double w = parent.edge(i) / static_cast<double>(per_axis);
    long ci = static_cast<long>((p[i] - parent.lo[i]) / w);
    ci = std::clamp(ci, 0L, per_axis - 1);
    idx += ci * stride;
    stride *= per_axis;
  }
  return values[static_cast<std::size_t>(idx)];
}

StepFunction step_approx(const PointIntegrand& f, const Brick& domain, int k,
                         double cell_tol, const IntegrateConfig& cfg) {
  if (k < 0) throw DomainError("step_approx: level must be >= 0");
  const int n = domain.dim();
  const long per_axis = 1L << k;
  long ncells = 1;
  for (int i = 0; i < n; ++i) ncells *= per_axis;

  StepFunction s;
  s.parent = domain;
  s.k = k;
  s.values.assign(static_cast<std::size_t>(ncells), 0.0);

  NeumaierSum integral, errs;
  std::vector<double> cell_err(static_cast<std::size_t>(ncells), 0.0);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_cap())
  for (long ci = 0; ci < ncells; ++ci) {
    try {
      Point lo, hi;
      lo.n = hi.n = n;
      long rem = ci;
      for (int i = 0; i < n; ++i) {
        long ix = rem % per_axis;
        rem /= per_axis;
        double w = domain.edge(i) / static_cast<double>(per_axis);
        lo[i] = domain.lo[i] + static_cast<double>(ix) * w;
        hi[i] = (ix + 1 == per_axis) ? domain.hi[i] : lo[i] + w;
      }
      Brick cell(lo, hi);
      IntegralResult r = integrate(f, cell, cell_tol, cfg);
      if (!r.converged())
        throw EvalError("step_approx: cell integral did not converge on " + cell.repr());
      s.values[static_cast<std::size_t>(ci)] = r.value / volume(cell);
      cell_err[static_cast<std::size_t>(ci)] = r.err_estimate;
    } catch (...) {
#pragma omp critical(hk_step_err)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);

  for (long ci = 0; ci < ncells; ++ci) {
    // Recover the cell volume to accumulate the step integral exactly.
    long rem = ci;
    double vol = 1.0;
    for (int i = 0; i < n; ++i) {
      long ix = rem % per_axis;
      rem /= per_axis;
      double w = domain.edge(i) / static_cast<double>(per_axis);
      double lo = domain.lo[i] + static_cast<double>(ix) * w;
      double hi = (ix + 1 == per_axis) ? domain.hi[i] : lo + w;
      vol *= hi - lo;
    }
    integral.add(s.values[static_cast<std::size_t>(ci)] * vol);
    errs.add(cell_err[static_cast<std::size_t>(ci)]);
  }
  s.integral = integral.value();
  s.err_sum = errs.value();
  return s;
}

}  // namespace hk
