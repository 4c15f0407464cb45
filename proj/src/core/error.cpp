#include "provgen/core/error.hpp"

namespace provgen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kMalformedImage: return "MalformedImage";
    case ErrorCode::kIllegalTransition: return "IllegalTransition";
    case ErrorCode::kNoEntityFound: return "NoEntityFound";
    case ErrorCode::kCyclicLayout: return "CyclicLayout";
    case ErrorCode::kUnsatisfiableLayout: return "UnsatisfiableLayout";
    case ErrorCode::kUnknownSubtask: return "UnknownSubtask";
    case ErrorCode::kInvalidPlan: return "InvalidPlan";
    case ErrorCode::kUnknownEntity: return "UnknownEntity";
    case ErrorCode::kRetriesExhausted: return "RetriesExhausted";
    case ErrorCode::kPlannerUnavailable: return "PlannerUnavailable";
    case ErrorCode::kGeneratorUnavailable: return "GeneratorUnavailable";
    case ErrorCode::kScorerUnavailable: return "ScorerUnavailable";
    case ErrorCode::kSessionFailure: return "SessionFailure";
    case ErrorCode::kMissingPlacement: return "MissingPlacement";
    case ErrorCode::kSolverDiverged: return "SolverDiverged";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kIllegalIntervention: return "IllegalIntervention";
    case ErrorCode::kNotReady: return "NotReady";
    case ErrorCode::kReplayDivergence: return "ReplayDivergence";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace provgen
