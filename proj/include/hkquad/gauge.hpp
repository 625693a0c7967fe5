#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hkquad/brick.hpp"

namespace hk {

enum class GaugeKind { constant, min_combined, boundary, cauchy_ext, null_cover, user };

std::string to_string(GaugeKind k);

/// A strictly positive function delta(P) on a closed brick. Immutable after
/// construction; eval must be re-entrant (builders call it concurrently from
/// disjoint subproblems). Evaluation failure (non-finite or <= 0) is a hard
/// error carrying the offending point.
class Gauge {
 public:
  using Fn = std::function<double(const Point&)>;

  Gauge() = default;
  Gauge(Brick domain, Fn fn, GaugeKind kind, std::string note = "");

  /// Checked evaluation; throws GaugeError on a non-positive or non-finite
  /// result and DomainError when P lies outside the domain.
  double operator()(const Point& p) const;

  const Brick& domain() const { return domain_; }
  GaugeKind kind() const { return kind_; }
  const std::string& note() const { return note_; }
  std::string description() const;

 private:
  Brick domain_;
  Fn fn_;
  GaugeKind kind_ = GaugeKind::user;
  std::string note_;
};

/// delta(P) = delta everywhere; delta must be finite and positive.
Gauge constant_gauge(const Brick& domain, double delta);

/// Pointwise minimum; a division fine for the result is fine for both inputs.
/// Domains must match exactly.
Gauge min_combine(const Gauge& g1, const Gauge& g2);

/// True iff the tag lies in the closed brick and the brick sits strictly
/// inside the open ball of radius g(tag) about the tag (farthest-vertex test).
bool is_fine(const TaggedBrick& tb, const Gauge& g);

/// Farthest-vertex distance from `tag` to the vertices of `b`; the tagged
/// brick is fine for delta iff this value is < delta.
double farthest_vertex_distance(const Brick& b, const Point& tag);

/// The Theorem-5 gauge for a division of a parent brick into parts with
/// their own gauges: any fine tagged brick either lies inside one part, or
/// has its tag on a shared boundary so it splits along that boundary into
/// fine pieces.
Gauge boundary_gauge(const std::vector<std::pair<Brick, Gauge>>& parts);

/// A point of a countable list together with its dyadic magnitude level
/// (|f| <= 2^level at the point).
struct CoveredPoint {
  Point p;
  int level = 1;
};

/// Gauge shrinking to the Theorem-45 half-width eps / (2^(1+j) * 2^level_j)
/// at the j-th listed point (j starting at 1) and equal to `base` elsewhere.
/// Any fine division then satisfies sum |f| * mu over listed tags <= eps for
/// |f| <= 2^level. The list is truncated at max_points.
Gauge null_cover_gauge(const std::vector<CoveredPoint>& points, double eps,
                       const Gauge& base, std::size_t max_points = 10000);

/// The first n rationals in the enumeration 0, 1, -1, 1/2, -1/2, 2, -2,
/// 1/3, -1/3, 3, -3, ... (diagonals by numerator+denominator, each value
/// followed by its negative, later duplicates skipped).
std::vector<double> rational_sequence(std::size_t n);

}  // namespace hk
