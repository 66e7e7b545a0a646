#pragma once

// Manual emotion attribute vectors for run-time control. A reference emotion
// mixed in at p percent gets the attribute 1 - p / 100 against the primary
// emotion: 0 % leaves the maximal difference (1.0), 100 % makes the pair
// indistinguishable (0.0).

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emomix/attributes.hpp"

namespace emomix {

enum class MixMode { kMixing, kTransition };

struct MixSpec {
  std::string primary_emotion;
  std::vector<std::pair<std::string, double>> reference_percentages;  // ordered
  MixMode mode = MixMode::kMixing;
  // Mixing mode holds the primary at 100 % implicitly. In transition mode the
  // primary's share counts toward the 100 % total and defaults to 0.
  std::optional<double> primary_percentage;

  // Throws InvalidPercentage, InvalidArgument (primary listed as a reference,
  // duplicate references) or TransitionSumViolation.
  void validate() const;
};

double percentage_to_attribute(double percentage);
double attribute_to_percentage(double attribute);

EmotionAttributeVector build_manual_vector(const MixSpec& spec);

// One vector per step with `emotion`'s percentage replaced by the step value.
// Throws UnknownEmotion when `emotion` is not a reference of the spec.
std::vector<EmotionAttributeVector> sweep(const MixSpec& spec, const std::string& emotion,
                                          const std::vector<double>& steps);

// Adds every emotion of `emotion_set` other than the primary that the spec
// does not mention, at 0 %.
MixSpec complete_references(MixSpec spec, const std::vector<std::string>& emotion_set);

}  // namespace emomix
