#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "emomix/features.hpp"
#include "emomix/metrics.hpp"
#include "emomix/probe.hpp"
#include "emomix/ranking.hpp"

namespace emomix {

struct PipelineConfig {
  std::vector<std::string> emotion_set{"neutral", "angry", "happy", "sad", "surprise"};
  std::string primary_emotion = "surprise";
  bool all_pairs = false;

  double c = 0.1;
  SolverOptions solver;
  double similar_pair_factor = 4.0;

  ExtractOptions extract;

  int mcep_order = kDefaultMcepOrder;
  McdVariant mcd_variant = McdVariant::kAsWritten;

  TrainConfig probe;

  // Ranking pair subsampling, auto-split and probe noise derive their seeds
  // from this one value.
  std::uint64_t seed = 20230101;

  std::uint64_t problem_seed() const { return seed; }
  std::uint64_t probe_seed() const { return seed + 1; }
  std::uint64_t split_seed() const { return seed + 2; }

  // Throws InvalidArgument / UnknownEmotion.
  void validate() const;
};

// Unknown keys are a ParseError so typos do not silently fall back to defaults.
PipelineConfig config_from_json(std::string_view text);
std::string config_to_json(const PipelineConfig& config);
std::string config_hash(const PipelineConfig& config);

}  // namespace emomix
