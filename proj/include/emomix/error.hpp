#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emomix {

// Every failure the toolkit reports. The CLI maps each code to a distinct
// process exit status (see exit_code()).
enum class ErrorCode {
  kInvalidArgument = 1,
  kInvalidAudio,
  kUnsupportedSampleRate,
  kAudioTooShort,
  kInvalidRange,
  kTrackTooShort,
  kEmptyEmotionSet,
  kDidNotConverge,
  kDimensionMismatch,
  kMissingPairModel,
  kInvalidPercentage,
  kTransitionSumViolation,
  kUnknownEmotion,
  kOrderMismatch,
  kInsufficientVoicedOverlap,
  kZeroVariance,
  kDegenerateLabels,
  kParseError,
  kMissingFile,
  kIoError,
  kFormatError,
};

std::string_view error_name(ErrorCode code);

// Exit status used by the CLI: 10 + the enumerator value, so that 1 and 2 stay
// free for usage errors.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace emomix
