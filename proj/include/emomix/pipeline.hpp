#pragma once

// Command implementations behind the CLI. Each method writes its artifacts
// under the output directory; finish() adds a JSON run log with the config
// hash, seeds and per-stage timings. Models and CSVs are byte-identical for
// identical config, manifest and seed; only the run log carries timings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emomix/config.hpp"
#include "emomix/manifest.hpp"
#include "emomix/mixer.hpp"
#include "emomix/persist.hpp"

namespace emomix {

struct PairTrainingResult {
  RankingModel model;
  SolveReport report;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

struct EvalSummary {
  std::vector<double> scores;
  double mean = 0.0;
  double stddev = 0.0;
};

struct ProbeSweepRequest {
  std::string from_emotion;
  std::string to_emotion;
  int steps = 4;
};

class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path out_dir);

  const PipelineConfig& config() const { return config_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }

  // load_manifest() with the configured emotion set, then auto_split().
  Manifest load(const std::filesystem::path& manifest_path) const;

  // Features for each entry, reusing the content-addressed cache under
  // out_dir/cache. Files are processed in parallel.
  std::vector<FeatureVector> features(const std::vector<const ManifestEntry*>& entries);

  // features.csv and features.bin for every manifest entry.
  std::vector<FeatureRow> extract(const Manifest& manifest);

  // models/<pair>.json for each configured pair, plus rank_report.json.
  std::vector<PairTrainingResult> train_rank(const Manifest& manifest);

  // attributes.csv: one row per entry (optionally one split).
  std::vector<std::pair<std::string, EmotionAttributeVector>> predict(
      const Manifest& manifest, const std::filesystem::path& models_dir,
      std::optional<Split> split = {});

  // mix.csv
  EmotionAttributeVector mix(const MixSpec& spec);
  // sweep.csv
  std::vector<EmotionAttributeVector> sweep(const MixSpec& spec, const std::string& target,
                                            const std::vector<double>& steps);

  // mcd.csv / pcc.csv (+ .svg when plot is set). Entries pair up by position.
  EvalSummary eval_mcd(const Manifest& reference, const Manifest& test, bool plot);
  EvalSummary eval_pcc(const Manifest& reference, const Manifest& test, bool plot);

  // probe.json and probe_report.json.
  ProbeModel probe_train(const Manifest& manifest);
  // probabilities.csv, plus probe_sweep.csv/.svg when a sweep is requested.
  void probe_eval(const Manifest& manifest, const std::filesystem::path& probe_path,
                  const std::optional<ProbeSweepRequest>& sweep_request,
                  std::optional<Split> split = {});

  // report.md summarizing whatever reports exist in the output directory.
  std::string report();

  // run_log_<command>.json
  void finish(const std::string& command);

 private:
  class Stage;
  EvalSummary evaluate(const Manifest& reference, const Manifest& test, bool plot, bool pcc);
  void note_output(const std::filesystem::path& path);
  void write_output(const std::string& name, const std::string& contents);

  PipelineConfig config_;
  std::filesystem::path out_dir_;
  std::vector<std::pair<std::string, double>> stages_;
  std::vector<std::string> outputs_;
};

struct ToyCorpusOptions {
  int per_emotion = 12;
  double duration = 0.6;  // seconds
  std::uint64_t seed = 1;
};

// Writes <dir>/wav/<emotion>_<k>.wav and <dir>/manifest.csv with an empty
// split column. Each emotion gets its own pitch, loudness, contour and noise
// profile so the ranking and probe stages have something to separate.
std::filesystem::path make_toy_corpus(const std::filesystem::path& dir,
                                      const std::vector<std::string>& emotion_set,
                                      const ToyCorpusOptions& options = {});

}  // namespace emomix
