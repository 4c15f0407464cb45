#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace provgen {

enum class ErrorCode {
  kInvalidArgument,
  kMalformedRecord,
  kMalformedImage,
  kIllegalTransition,
  kNoEntityFound,
  kCyclicLayout,
  kUnsatisfiableLayout,
  kUnknownSubtask,
  kInvalidPlan,
  kUnknownEntity,
  kRetriesExhausted,
  kPlannerUnavailable,
  kGeneratorUnavailable,
  kScorerUnavailable,
  kSessionFailure,
  kMissingPlacement,
  kSolverDiverged,
  kCapacityExceeded,
  kDimensionMismatch,
  kUnknownSession,
  kIllegalIntervention,
  kNotReady,
  kReplayDivergence,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so the
// HTTP layer can map it to a {code, message} body without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace provgen
