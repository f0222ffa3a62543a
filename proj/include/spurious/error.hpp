#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spurious {

enum class ErrorCode {
  RankDeficient,
  Inconsistent,
  InconsistentConstraints,
  SingularSystem,
  DimensionMismatch,
  InvalidArgument,
  NonPositiveGamma,
  SamplingFailure,
  SingularSchurComplement,
  NonOrthogonalGroups,
  ParallelParameters,
  ParallelTargets,
  DimensionTooSmall,
  SingularGram,
  SignAssumptionViolated,
  InconsistentMoments,
  EmptyGroup,
};

std::string_view to_string(ErrorCode code);

/// Thrown by every library operation when a precondition fails. The code
/// identifies which precondition, the message says where.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spurious
