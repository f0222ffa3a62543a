#include "spurious/error.hpp"

namespace spurious {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::Inconsistent: return "Inconsistent";
    case ErrorCode::InconsistentConstraints: return "InconsistentConstraints";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
    case ErrorCode::SamplingFailure: return "SamplingFailure";
    case ErrorCode::SingularSchurComplement: return "SingularSchurComplement";
    case ErrorCode::NonOrthogonalGroups: return "NonOrthogonalGroups";
    case ErrorCode::ParallelParameters: return "ParallelParameters";
    case ErrorCode::ParallelTargets: return "ParallelTargets";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::SignAssumptionViolated: return "SignAssumptionViolated";
    case ErrorCode::InconsistentMoments: return "InconsistentMoments";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
  }
  return "Unknown";
}

}  // namespace spurious
