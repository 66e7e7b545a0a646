#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emomix/attributes.hpp"
#include "emomix/features.hpp"
#include "emomix/mixer.hpp"
#include "emomix/probe.hpp"
#include "emomix/ranking.hpp"

namespace emomix {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kProbeFormatVersion = 1;
inline constexpr std::uint32_t kFeatureCacheVersion = 1;

// Nine significant digits, as used in every CSV and JSON artifact.
std::string format_double(double v);
// v rounded to what format_double() prints.
double round_sig9(double v);

// Writes to a sibling temporary file and renames it into place.
void atomic_write(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

std::string ranking_model_to_json(const RankingModel& model);
RankingModel ranking_model_from_json(std::string_view text);
void save_ranking_model(const std::filesystem::path& path, const RankingModel& model);
RankingModel load_ranking_model(const std::filesystem::path& path);

std::string probe_model_to_json(const ProbeModel& model);
ProbeModel probe_model_from_json(std::string_view text);

// {"primary_emotion": "surprise", "mode": "mixing" | "transition",
//  "references": {"angry": 90, ...}, "primary_percentage": 20}
// Reference order follows the document. Throws ParseError, then whatever
// MixSpec::validate() throws.
MixSpec mix_spec_from_json(std::string_view text);

// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(std::string_view s);

// header: path,<pair ids...>; one row per (label, vector).
std::string attribute_csv(const std::vector<std::pair<std::string, EmotionAttributeVector>>& rows,
                          std::string_view first_column = "path");

struct FeatureRow {
  std::string path;
  FeatureVector features;
};

// header: path,<384 feature names>.
std::string feature_csv(const std::vector<FeatureRow>& rows);

// Binary feature cache: "EMXFEAT\0", u32 version, u32 dim, u64 rows,
// u32 layout length + layout bytes, then per row u32 path length + path bytes
// + dim little-endian IEEE-754 doubles.
std::string encode_feature_cache(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> decode_feature_cache(std::string_view bytes);

}  // namespace emomix
