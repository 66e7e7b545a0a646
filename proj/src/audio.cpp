#include "emomix/audio.hpp"

#include <cmath>

#include <fmt/format.h>

#include "emomix/error.hpp"

namespace emomix {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidAudio: return "InvalidAudio";
    case ErrorCode::kUnsupportedSampleRate: return "UnsupportedSampleRate";
    case ErrorCode::kAudioTooShort: return "AudioTooShort";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kTrackTooShort: return "TrackTooShort";
    case ErrorCode::kEmptyEmotionSet: return "EmptyEmotionSet";
    case ErrorCode::kDidNotConverge: return "DidNotConverge";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kMissingPairModel: return "MissingPairModel";
    case ErrorCode::kInvalidPercentage: return "InvalidPercentage";
    case ErrorCode::kTransitionSumViolation: return "TransitionSumViolation";
    case ErrorCode::kUnknownEmotion: return "UnknownEmotion";
    case ErrorCode::kOrderMismatch: return "OrderMismatch";
    case ErrorCode::kInsufficientVoicedOverlap: return "InsufficientVoicedOverlap";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) { return 10 + static_cast<int>(code); }

void validate_audio(const AudioBuffer& audio) {
  if (audio.sample_rate != kPipelineSampleRate) {
    throw Error(ErrorCode::kUnsupportedSampleRate,
                fmt::format("sample rate {} Hz is not supported; expected {} Hz",
                            audio.sample_rate, kPipelineSampleRate));
  }
  if (audio.samples.empty()) {
    throw Error(ErrorCode::kInvalidAudio, "audio buffer is empty");
  }
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    const double s = audio.samples[i];
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      throw Error(ErrorCode::kInvalidAudio,
                  fmt::format("sample {} is {} (must be finite and within [-1, 1])", i, s));
    }
  }
}

}  // namespace emomix
