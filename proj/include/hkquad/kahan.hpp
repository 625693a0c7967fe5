#pragma once

#include <cmath>

namespace hk {

/// Neumaier-compensated accumulator. Used by every Riemann-sum kernel so
/// that reduction results are insensitive to term magnitude ordering.
struct NeumaierSum {
  double s = 0.0;
  double c = 0.0;

  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }

  /// Fold another compensated partial into this one (order matters; callers
  /// combine partials in a fixed chunk order for determinism).
  void merge(const NeumaierSum& other) {
    add(other.s);
    c += other.c;
  }

  double value() const { return s + c; }
};

}  // namespace hk
