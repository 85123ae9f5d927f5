#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmcf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or a scenario violating a hypothesis (kappa0 <= 0, K < 0, ...).
class ScenarioError : public Error {
public:
  using Error::Error;
};

/// Point outside the coordinate chart of a metric.
class ChartError : public Error {
public:
  using Error::Error;
};

/// |Du|^2 reached the light cone. Carries the offending node (or npos) and value.
class SpacelikeViolation : public Error {
public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  SpacelikeViolation(const std::string& where, double du2, std::size_t node = npos)
      : Error(where + ": space-like violation, |Du|^2 = " + std::to_string(du2) +
              (node == npos ? std::string{} : " at node " + std::to_string(node))),
        du2_(du2), node_(node) {}

  double du2() const noexcept { return du2_; }
  std::size_t node() const noexcept { return node_; }

private:
  double du2_;
  std::size_t node_;
};

/// Time step fell below the underflow threshold.
class StepUnderflow : public Error {
public:
  using Error::Error;
};

/// Newton stagnation, non-Cauchy continuation, or flow non-convergence.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace lmcf
