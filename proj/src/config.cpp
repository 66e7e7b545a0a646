#include "emomix/config.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "emomix/error.hpp"
#include "emomix/manifest.hpp"
#include "emomix/persist.hpp"
#include "json.hpp"

namespace emomix {

using nlohmann::json;

void PipelineConfig::validate() const {
  if (emotion_set.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "emotion_set needs at least two emotions");
  }
  std::set<std::string> unique(emotion_set.begin(), emotion_set.end());
  if (unique.size() != emotion_set.size()) {
    throw Error(ErrorCode::kInvalidArgument, "emotion_set contains duplicates");
  }
  if (!unique.contains(primary_emotion)) {
    throw Error(ErrorCode::kUnknownEmotion,
                fmt::format("primary emotion '{}' is not in emotion_set", primary_emotion));
  }
  if (!(c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "c must be positive");
  if (!(solver.tolerance > 0.0) || solver.max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "solver tolerance/max_iterations out of range");
  }
  if (!(similar_pair_factor >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "similar_pair_factor must be >= 0");
  }
  extract.frame.validate();
  const PitchOptions& p = extract.pitch;
  if (!(p.f_min > 0.0) || !(p.f_min < p.f_max) || !(p.f_max < kPipelineSampleRate / 2.0) ||
      p.voicing_threshold < 0.0 || p.voicing_threshold > 1.0) {
    throw Error(ErrorCode::kInvalidRange, "pitch settings out of range");
  }
  if (mcep_order < 1 || mcep_order >= kMelBands) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("mcep_order must be in [1, {})", kMelBands));
  }
  if (!(probe.learning_rate > 0.0) || probe.l2_penalty < 0.0 || probe.epochs < 1 ||
      probe.noise_sigma < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "probe settings out of range");
  }
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw Error(ErrorCode::kParseError, fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

}  // namespace

PipelineConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, fmt::format("config: {}", e.what()));
  }
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
  PipelineConfig cfg;
  try {
    reject_unknown(j,
                   {"emotion_set", "primary_emotion", "all_pairs", "c", "tolerance",
                    "max_iterations", "similar_pair_factor", "frame_length", "hop_length", "f0_min",
                    "f0_max", "voicing_threshold", "mcep_order", "mcd_variant", "probe", "seed"},
                   "config");
    if (j.contains("emotion_set")) {
      cfg.emotion_set.clear();
      for (const auto& e : j.at("emotion_set")) cfg.emotion_set.push_back(to_lower(e.get<std::string>()));
    }
    if (j.contains("primary_emotion")) cfg.primary_emotion = to_lower(j.at("primary_emotion").get<std::string>());
    cfg.all_pairs = j.value("all_pairs", cfg.all_pairs);
    cfg.c = j.value("c", cfg.c);
    cfg.solver.tolerance = j.value("tolerance", cfg.solver.tolerance);
    cfg.solver.max_iterations = j.value("max_iterations", cfg.solver.max_iterations);
    cfg.similar_pair_factor = j.value("similar_pair_factor", cfg.similar_pair_factor);
    cfg.extract.frame.frame_length = j.value("frame_length", cfg.extract.frame.frame_length);
    cfg.extract.frame.hop_length = j.value("hop_length", cfg.extract.frame.hop_length);
    cfg.extract.pitch.f_min = j.value("f0_min", cfg.extract.pitch.f_min);
    cfg.extract.pitch.f_max = j.value("f0_max", cfg.extract.pitch.f_max);
    cfg.extract.pitch.voicing_threshold =
        j.value("voicing_threshold", cfg.extract.pitch.voicing_threshold);
    cfg.mcep_order = j.value("mcep_order", cfg.mcep_order);
    if (j.contains("mcd_variant")) {
      const std::string v = j.at("mcd_variant").get<std::string>();
      if (v == "as_written") {
        cfg.mcd_variant = McdVariant::kAsWritten;
      } else if (v == "literature") {
        cfg.mcd_variant = McdVariant::kLiterature;
      } else {
        throw Error(ErrorCode::kParseError, fmt::format("config: unknown mcd_variant '{}'", v));
      }
    }
    if (j.contains("probe")) {
      const json& p = j.at("probe");
      reject_unknown(p, {"learning_rate", "l2_penalty", "epochs", "noise_sigma"}, "config.probe");
      cfg.probe.learning_rate = p.value("learning_rate", cfg.probe.learning_rate);
      cfg.probe.l2_penalty = p.value("l2_penalty", cfg.probe.l2_penalty);
      cfg.probe.epochs = p.value("epochs", cfg.probe.epochs);
      cfg.probe.noise_sigma = p.value("noise_sigma", cfg.probe.noise_sigma);
    }
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("config: {}", e.what()));
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
  json j;
  j["emotion_set"] = cfg.emotion_set;
  j["primary_emotion"] = cfg.primary_emotion;
  j["all_pairs"] = cfg.all_pairs;
  j["c"] = cfg.c;
  j["tolerance"] = cfg.solver.tolerance;
  j["max_iterations"] = cfg.solver.max_iterations;
  j["similar_pair_factor"] = cfg.similar_pair_factor;
  j["frame_length"] = cfg.extract.frame.frame_length;
  j["hop_length"] = cfg.extract.frame.hop_length;
  j["f0_min"] = cfg.extract.pitch.f_min;
  j["f0_max"] = cfg.extract.pitch.f_max;
  j["voicing_threshold"] = cfg.extract.pitch.voicing_threshold;
  j["mcep_order"] = cfg.mcep_order;
  j["mcd_variant"] = cfg.mcd_variant == McdVariant::kAsWritten ? "as_written" : "literature";
  j["probe"] = {{"learning_rate", cfg.probe.learning_rate},
                {"l2_penalty", cfg.probe.l2_penalty},
                {"epochs", cfg.probe.epochs},
                {"noise_sigma", cfg.probe.noise_sigma}};
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

std::string config_hash(const PipelineConfig& config) {
  return sha256_hex(config_to_json(config) + kFeatureLayoutVersion);
}

}  // namespace emomix
