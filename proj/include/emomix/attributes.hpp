#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace emomix {

// Ordered (primary, reference) emotion pair; one ranking function per pair.
struct EmotionPair {
  std::string first;
  std::string second;

  std::string id() const { return first + "-" + second; }
  friend bool operator==(const EmotionPair&, const EmotionPair&) = default;
};

// Pairs trained by default: (primary, e) for every other e in emotion_set,
// or all unordered pairs (in emotion_set order) when all_pairs is set.
std::vector<EmotionPair> configured_pairs(const std::vector<std::string>& emotion_set,
                                          const std::string& primary, bool all_pairs = false);

// Normalized relative-difference values in [0, 1]; smaller = more similar.
struct EmotionAttributeVector {
  enum class Source { kPredicted, kManual };

  std::vector<std::pair<EmotionPair, double>> entries;
  Source source = Source::kPredicted;

  std::optional<double> find(const EmotionPair& pair) const {
    for (const auto& [p, v] : entries) {
      if (p == pair) return v;
    }
    return std::nullopt;
  }
};

}  // namespace emomix
