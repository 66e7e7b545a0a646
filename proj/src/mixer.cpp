#include "emomix/mixer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "emomix/error.hpp"

namespace emomix {

namespace {

constexpr double kTransitionTolerance = 1e-9;

void check_percentage(const std::string& who, double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 100.0) {
    throw Error(ErrorCode::kInvalidPercentage,
                fmt::format("percentage for '{}' is {} (must be within [0, 100])", who, p));
  }
}

}  // namespace

void MixSpec::validate() const {
  if (primary_emotion.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mix spec needs a primary emotion");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < reference_percentages.size(); ++i) {
    const auto& [emotion, p] = reference_percentages[i];
    if (emotion == primary_emotion) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("primary emotion '{}' cannot also be a reference", emotion));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (reference_percentages[j].first == emotion) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("reference emotion '{}' given twice", emotion));
      }
    }
    check_percentage(emotion, p);
    total += p;
  }
  if (primary_percentage) {
    check_percentage(primary_emotion, *primary_percentage);
    if (mode == MixMode::kMixing && *primary_percentage != 100.0) {
      throw Error(ErrorCode::kInvalidPercentage,
                  "mixing mode keeps the primary emotion at 100 %");
    }
  }
  if (mode == MixMode::kTransition) {
    total += primary_percentage.value_or(0.0);
    if (std::abs(total - 100.0) > kTransitionTolerance) {
      throw Error(ErrorCode::kTransitionSumViolation,
                  fmt::format("transition percentages sum to {}, not 100", total));
    }
  }
}

double percentage_to_attribute(double percentage) { return 1.0 - percentage / 100.0; }

double attribute_to_percentage(double attribute) { return 100.0 * (1.0 - attribute); }

EmotionAttributeVector build_manual_vector(const MixSpec& spec) {
  spec.validate();
  EmotionAttributeVector out;
  out.source = EmotionAttributeVector::Source::kManual;
  for (const auto& [emotion, p] : spec.reference_percentages) {
    out.entries.emplace_back(EmotionPair{spec.primary_emotion, emotion},
                             percentage_to_attribute(p));
  }
  return out;
}

std::vector<EmotionAttributeVector> sweep(const MixSpec& spec, const std::string& emotion,
                                          const std::vector<double>& steps) {
  const auto it = std::find_if(spec.reference_percentages.begin(),
                               spec.reference_percentages.end(),
                               [&](const auto& entry) { return entry.first == emotion; });
  if (it == spec.reference_percentages.end()) {
    throw Error(ErrorCode::kUnknownEmotion,
                fmt::format("'{}' is not a reference emotion of this mix", emotion));
  }
  const auto index = static_cast<std::size_t>(it - spec.reference_percentages.begin());
  std::vector<EmotionAttributeVector> out;
  out.reserve(steps.size());
  for (double step : steps) {
    MixSpec s = spec;
    s.reference_percentages[index].second = step;
    out.push_back(build_manual_vector(s));
  }
  return out;
}

MixSpec complete_references(MixSpec spec, const std::vector<std::string>& emotion_set) {
  for (const auto& [emotion, p] : spec.reference_percentages) {
    (void)p;
    if (std::find(emotion_set.begin(), emotion_set.end(), emotion) == emotion_set.end()) {
      throw Error(ErrorCode::kUnknownEmotion,
                  fmt::format("'{}' is not in the configured emotion set", emotion));
    }
  }
  if (std::find(emotion_set.begin(), emotion_set.end(), spec.primary_emotion) ==
      emotion_set.end()) {
    throw Error(ErrorCode::kUnknownEmotion,
                fmt::format("primary '{}' is not in the configured emotion set",
                            spec.primary_emotion));
  }
  // Emit entries in emotion_set order so CSV columns are stable.
  std::vector<std::pair<std::string, double>> ordered;
  for (const std::string& e : emotion_set) {
    if (e == spec.primary_emotion) continue;
    const auto it = std::find_if(spec.reference_percentages.begin(),
                                 spec.reference_percentages.end(),
                                 [&](const auto& entry) { return entry.first == e; });
    ordered.emplace_back(e, it == spec.reference_percentages.end() ? 0.0 : it->second);
  }
  spec.reference_percentages = std::move(ordered);
  return spec;
}

}  // namespace emomix
