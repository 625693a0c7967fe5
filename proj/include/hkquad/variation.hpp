#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hkquad/brick.hpp"
#include "hkquad/gauge.hpp"
#include "hkquad/integrand.hpp"
#include "hkquad/integrate.hpp"

namespace hk {

/// Two-sided estimate of a variation V(h; I). `lower` is certified for the
/// reported gauge (it is an attained division sum); `upper` is certified only
/// when a theorem converts the variation into an integral, and is +infinity
/// when that integral diverges.
struct VariationEstimate {
  double lower = 0.0;
  double upper = 0.0;
  bool upper_infinite = false;
  std::string gauge_used;
  int divisions_tried = 0;
};

/// A set of points given by a membership predicate; `point_list`, when
/// non-empty, names a (truncated) countable enumeration of the set and
/// enables the null-cover upper bound.
struct PointSet {
  std::function<bool(const Point&)> membership;
  std::string description;
  std::vector<Point> point_list;
};

/// Largest division sum (D) sum |h| over `effort` generated g-fine divisions
/// (seeds and tag rules vary). A certified lower bound for V(h; I; g);
/// a heuristic lower bound for V(h; I).
double variation_lower(const IntervalIntegrand& h, const Brick& domain, const Gauge& g,
                       int effort);

/// Bracket for V(f mu; I): upper from the integral of |f| (with its error),
/// lower from division search under the driver's final gauge.
VariationEstimate variation_bracket(const PointIntegrand& f, const Brick& domain, double tol,
                                    const IntegrateConfig& cfg = {});

/// Variation estimate of chi(X, P) mu(J), i.e. the outer measure of X in the
/// domain. For sets presented as truncated point lists the upper bound comes
/// from the null-cover construction; otherwise from integrating the
/// indicator when that converges.
VariationEstimate outer_measure(const PointSet& X, const Brick& domain, const Gauge& g,
                                int effort);

/// Result of probing F(J)/mu(J) over shrinking bricks at P with regularity
/// >= alpha. When the spread over the last two scales stays above tol, the
/// observed oscillation band is reported instead of a value.
struct DerivativeReport {
  bool has_derivative = false;
  double value = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  int scales_used = 0;
};

DerivativeReport derivative_at(const std::function<double(const Brick&)>& F, const Point& P,
                               const Brick& domain, double alpha, double tol);

/// Step-function approximation over 2^(kn) equal cells; constants are the
/// cell averages of f, so the step integral reproduces the integral of f
/// within the summed cell errors.
struct StepFunction {
  Brick parent;
  int k = 0;
  std::vector<double> values;  // axis-0 fastest
  double integral = 0.0;
  double err_sum = 0.0;

  double eval(const Point& p) const;
  long cells() const { return static_cast<long>(values.size()); }
};

StepFunction step_approx(const PointIntegrand& f, const Brick& domain, int k,
                         double cell_tol = 1e-9, const IntegrateConfig& cfg = {});

}  // namespace hk
