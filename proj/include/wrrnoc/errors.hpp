#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wrrnoc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a model input was violated (bad rate, bad weight, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The fixed-point iteration for an effective service time did not settle.
class NoConvergenceError : public Error {
public:
  NoConvergenceError(std::size_t class_index, int iterations)
      : Error("effective service iteration did not converge for class " +
              std::to_string(class_index) + " after " +
              std::to_string(iterations) + " iterations"),
        class_index_(class_index), iterations_(iterations) {}

  std::size_t class_index() const noexcept { return class_index_; }
  int iterations() const noexcept { return iterations_; }

private:
  std::size_t class_index_;
  int iterations_;
};

/// Where in a model a saturation was detected. Fields that do not apply are -1.
struct SaturationSite {
  int router = -1;
  int out_port = -1;
  int class_index = -1;
  int flow_index = -1;
  int stage_index = -1;
  double utilization = 0.0;
};

/// Utilization reached one somewhere; the queueing model is undefined there.
class SaturatedError : public Error {
public:
  SaturatedError(const std::string& what, SaturationSite site,
                 std::vector<double> utilization_map = {})
      : Error(what), site_(site), utilization_map_(std::move(utilization_map)) {}

  const SaturationSite& site() const noexcept { return site_; }
  /// Per-arbiter total utilization (indexed router * ports + port), when known.
  const std::vector<double>& utilization_map() const noexcept { return utilization_map_; }

private:
  SaturationSite site_;
  std::vector<double> utilization_map_;
};

class InsufficientSamplesError : public Error {
public:
  InsufficientSamplesError(std::size_t have, std::size_t need)
      : Error("only " + std::to_string(have) + " samples recorded, need " +
              std::to_string(need)),
        have_(have), need_(need) {}

  std::size_t have() const noexcept { return have_; }
  std::size_t need() const noexcept { return need_; }

private:
  std::size_t have_;
  std::size_t need_;
};

/// Scenario file violates the schema. `field()` is a dotted path such as
/// `sweep.lambda[2]`.
class ScenarioError : public Error {
public:
  ScenarioError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

}  // namespace wrrnoc
