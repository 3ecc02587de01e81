#pragma once

#include <stdexcept>
#include <string>

namespace sdcons {

// Dimension mismatch or ragged input.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation not defined for this input class (e.g. exact spectrum of a
// non-balanced digraph).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Precondition on scalar arguments violated.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A randomized construction could not meet its target.
class FeasibilityError : public std::runtime_error {
 public:
  FeasibilityError(const std::string& what, double best_ratio)
      : std::runtime_error(what), best_ratio_(best_ratio) {}
  double best_ratio() const noexcept { return best_ratio_; }

 private:
  double best_ratio_;
};

// Malformed config or graph file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sdcons
