#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gietlab {

enum class ErrorCode {
  InvalidArgument,
  ConfigError,
  NotAPermutation,
  Reducible,
  NotADiffeo,
  AtSingularity,
  NumericalConnection,
  RunLimitExceeded,
  PositivityTimeout,
  RangeError,
  FloorBudgetExceeded,
  OnBoundary,
  ScaleNotFound,
  OrbitHitsSingularity,
  WindowExhausted,
  DepthBudget,
  NotSameFloor,
  PartitionMismatch,
  DegenerateSeries,
};

std::string_view error_name(ErrorCode code);

// Exit status used by the command line tool for each error class:
// 2 configuration, 3 numerical connection, 4 budget exceeded, 1 otherwise.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, long long detail = -1);
  ErrorCode code() const noexcept { return code_; }
  // Splitting index, singularity index or orbit step, depending on the code.
  long long detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  long long detail_;
};

}  // namespace gietlab
