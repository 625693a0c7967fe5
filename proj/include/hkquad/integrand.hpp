#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hkquad/brick.hpp"

namespace hk {

/// A point function f(P). At declared singular points the integrand is
/// defined as 0 (the usual convention for functions left undefined on a
/// null set); the adaptive driver additionally shrinks its gauges around
/// them so they appear only as tags of vanishing-volume bricks.
struct PointIntegrand {
  std::function<double(const Point&)> eval;
  std::vector<Point> singular_points;

  double operator()(const Point& p) const {
    for (const auto& s : singular_points)
      if (s == p) return 0.0;
    return eval(p);
  }
};

/// A brick-point function h(P, J); the general summand of eq-style sums.
struct IntervalIntegrand {
  std::function<double(const Point& tag, const Brick& brick)> eval;

  double operator()(const Point& tag, const Brick& brick) const { return eval(tag, brick); }
};

/// Point-function weight g for Stieltjes sums f(P) (g(v) - g(u)).
struct StieltjesWeight {
  std::function<double(double)> g;
};

/// f(P) * mu(J) as an interval integrand.
IntervalIntegrand as_interval(const PointIntegrand& f);

enum class IntegralStatus { converged, depth_exhausted, max_refinements, oscillating };

std::string to_string(IntegralStatus s);

struct IntegralResult {
  double value = 0.0;
  double err_estimate = 0.0;
  int refinements = 0;
  long items = 0;        // bricks in the final division
  long evaluations = 0;  // integrand evaluations
  IntegralStatus status = IntegralStatus::converged;

  bool converged() const { return status == IntegralStatus::converged; }
};

}  // namespace hk
