#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emomix {

enum class Split { kUnassigned, kTrain, kTest, kEval };

std::string_view split_name(Split split);

struct ManifestEntry {
  std::string path;                 // as written in the manifest
  std::filesystem::path resolved;   // relative paths resolved against the manifest directory
  std::string speaker;
  std::string emotion;              // lower-cased
  Split split = Split::kUnassigned;
  std::optional<double> percent;    // optional `percent` column, used for plots
  std::size_t line = 0;             // 1-based source line (CSV) or entry index (JSON)
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> select(std::optional<Split> split,
                                           std::optional<std::string_view> emotion = {}) const;
};

struct ManifestOptions {
  std::vector<std::string> emotion_set;  // empty accepts any label
  bool check_files = true;
};

// CSV with header `path,speaker,emotion,split` (columns in any order, optional
// `percent`; split may be empty) or a JSON array of objects with the same
// keys. Throws ParseError (with line and column), UnknownEmotion, MissingFile
// and InvalidArgument for duplicate paths.
Manifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});
Manifest parse_manifest_csv(std::string_view text, const std::filesystem::path& base_dir,
                            const ManifestOptions& options);
Manifest parse_manifest_json(std::string_view text, const std::filesystem::path& base_dir,
                             const ManifestOptions& options);

// Assigns every unassigned entry to train/test/eval in 300:30:20 proportion
// per emotion after a seeded shuffle. At least one entry per emotion stays in
// train.
void auto_split(Manifest& manifest, std::uint64_t seed);

std::string manifest_csv(const Manifest& manifest);

std::string to_lower(std::string_view s);

}  // namespace emomix
