#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hkquad/brick.hpp"
#include "hkquad/division.hpp"
#include "hkquad/gauge.hpp"
#include "hkquad/integrand.hpp"

namespace hk {

struct IntegrateConfig {
  int max_refinements = 60;
  int max_depth = 1100;
  long max_items = 0;  // 0 picks a per-dimension default
  std::uint64_t rng_seed = 0;
  TagRule tag_rule = TagRule::corner;
  /// Stieltjes only: points that may appear only as tags of vanishing-width
  /// bricks (the gauge shrinks like dist/2 around them), so jump locations
  /// are always tagged exactly.
  std::vector<double> forced_tag_points;
};

/// Compensated serial sum of h over the division, in item order.
/// Reference implementation for the parallel kernel.
double riemann_sum_serial(const IntervalIntegrand& h, const TaggedDivision& d);

/// Parallel chunked reduction; fixed chunking and in-order combination keep
/// the result bitwise independent of the worker count.
double riemann_sum(const IntervalIntegrand& h, const TaggedDivision& d);

/// Adaptive gauge-refinement integration of f over an n-dimensional brick.
/// Starts from a constant gauge diam/4, halves globally each round (with an
/// extra 1/8 shrink on the tenth of the bricks whose local second difference
/// contributes most, in one dimension), and stops when two consecutive
/// Riemann sums agree with the current one within tol/2.
///
/// Declared singular points on a 1D domain route through the dyadic
/// Cauchy-extension ladder anchored at each singular point; elsewhere the
/// gauge is shrunk around them so they appear only as tags of
/// vanishing-volume bricks (where f is taken as 0).
IntegralResult integrate(const PointIntegrand& f, const Brick& domain, double tol,
                         const IntegrateConfig& cfg = {});

/// integrate() plus the final gauge (and, when materialize_division is set
/// and the final division is of moderate size, the division itself).
struct DriverArtifacts {
  IntegralResult result;
  Gauge final_gauge;
  std::optional<TaggedDivision> final_division;
};
DriverArtifacts integrate_with_artifacts(const PointIntegrand& f, const Brick& domain,
                                         double tol, const IntegrateConfig& cfg = {},
                                         bool materialize_division = false);

/// Henstock-lemma residuals of a division against an indefinite integral F:
/// signed_max is the larger of |sum of positive terms| and |sum of negative
/// terms| (the extremal partial-division sum), abs_sum the full sum of
/// |f(P) mu(J) - F(J)|.
struct HenstockResidual {
  double signed_max = 0.0;
  double abs_sum = 0.0;
};
HenstockResidual henstock_residual(const PointIntegrand& f,
                                   const std::function<double(const Brick&)>& F,
                                   const TaggedDivision& d);

/// Riemann-Stieltjes integral of f dg over a 1D brick; sums use
/// f(P)(g(v) - g(u)) with tags restricted to interval endpoints.
IntegralResult integrate_stieltjes(const PointIntegrand& f, const StieltjesWeight& w,
                                   const Brick& domain, double tol,
                                   const IntegrateConfig& cfg = {});

/// Both Stieltjes integrals of a pair of point functions, the boundary term
/// f(b)g(b) - f(a)g(a), and the variation residual of the product of jumps
/// over the finest division used. The by-parts identity holds exactly when
/// that residual vanishes.
struct ByPartsResult {
  IntegralResult f_dg;
  IntegralResult g_df;
  double boundary = 0.0;
  double residual = 0.0;
  bool identity_holds = false;
};
ByPartsResult by_parts(const std::function<double(double)>& f,
                       const std::function<double(double)>& g, const Brick& domain,
                       double tol, const IntegrateConfig& cfg = {});

enum class Side { left, right };

/// Cauchy extension toward one endpoint: side=right integrates [a, c] with
/// the hard point at c (f integrable on every [a, b], b < c); side=left
/// mirrors. Panels follow the dyadic ladder b_j = c - (c-a) 2^-j; the sum
/// stops when the tail panels and the extrapolated remainder drop below
/// tol/4. Throws NonintegrableError when the panel sums are not Cauchy.
IntegralResult cauchy_extension(const PointIntegrand& f, double a, double c, Side side,
                                double tol, const IntegrateConfig& cfg = {});

/// Integrates across one interior singularity by running the Cauchy
/// extension independently on each side; succeeds only when both converge.
/// Principal-value cancellation is never used.
IntegralResult integrate_symmetric_check(const PointIntegrand& f, double singularity,
                                         const Brick& domain, double tol,
                                         const IntegrateConfig& cfg = {});

/// Finite-gap Denjoy reassembly: integral off the open gaps plus the gap
/// integrals (each computed by two-sided Cauchy extension when not
/// supplied). The countable-tail smallness condition is vacuous for finitely
/// many gaps.
struct GapInterval {
  double lo = 0.0, hi = 0.0;
};
IntegralResult denjoy_extension(const PointIntegrand& f, const Brick& domain,
                                const std::vector<GapInterval>& gaps, double tol,
                                const IntegrateConfig& cfg = {},
                                const std::optional<IntegralResult>& off_gaps_supplied = {},
                                const std::vector<IntegralResult>* per_gap_supplied = nullptr);

/// Integral over the whole line: doubling cutoffs (-2^k, 2^k) per side,
/// independently, until each side's increment stays below tol/4 twice in a
/// row. Ray terms contribute zero. Throws NonintegrableError (divergent
/// tail) if a side fails to stabilize by k = 40.
IntegralResult integrate_infinite(const PointIntegrand& f, double tol,
                                  const IntegrateConfig& cfg = {});

/// Double integral over x_domain x y_domain together with both iterated
/// integrals. Inner integrals that fail to converge are recorded and treated
/// as 0 (the null-set convention); the caller decides whether the failure
/// set is ignorable.
struct FubiniResult {
  IntegralResult dbl;
  IntegralResult iterated_xy;
  IntegralResult iterated_yx;
  std::vector<Point> failed_inner_tags_xy;
  std::vector<Point> failed_inner_tags_yx;
};
FubiniResult fubini(const PointIntegrand& f, const Brick& x_domain, const Brick& y_domain,
                    double tol, const IntegrateConfig& cfg = {});

}  // namespace hk
