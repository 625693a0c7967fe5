#pragma once

#include <stdexcept>
#include <string>

namespace hk {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid geometry or arguments (degenerate brick, dimension mismatch, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A gauge evaluated to a non-positive or non-finite value.
class GaugeError : public Error {
 public:
  GaugeError(const std::string& msg, std::string point_repr)
      : Error(msg + " at P=" + point_repr), point(std::move(point_repr)) {}
  std::string point;
};

/// Subdivision could not terminate: the gauge is effectively zero at the
/// remaining candidate tags (or the chain sweep stagnated below the
/// representable increment).
class DepthExhaustionError : public Error {
 public:
  explicit DepthExhaustionError(const std::string& msg) : Error(msg) {}
};

/// The integrand returned a non-finite value at a queried point.
class EvalError : public Error {
 public:
  explicit EvalError(const std::string& msg) : Error(msg) {}
};

/// A Cauchy-extension ladder or infinite-range scheme failed to stabilize:
/// the partial sums are not Cauchy (non-integrable endpoint / divergent tail).
class NonintegrableError : public Error {
 public:
  explicit NonintegrableError(const std::string& msg) : Error(msg) {}
};

/// Expression-language parse failure; `pos` is a 0-based offset into the source.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t pos_)
      : Error(msg + " (at position " + std::to_string(pos_) + ")"), pos(pos_) {}
  std::size_t pos;
};

}  // namespace hk
