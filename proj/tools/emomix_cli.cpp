// emomix command-line front end. Every failure prints one line
//   error: <ErrorName>: <message>
// to stderr and exits with the code from emomix::exit_code().

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <omp.h>

#include "CLI11.hpp"
#include "emomix/error.hpp"
#include "emomix/persist.hpp"
#include "emomix/pipeline.hpp"

namespace {

using namespace emomix;

constexpr int kUsageExit = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    if (end > pos) out.push_back(to_lower(s.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error(ErrorCode::kParseError, fmt::format("{}: '{}' is not a number", what, text));
  }
  return v;
}

std::optional<Split> parse_split_flag(const std::string& s) {
  if (s.empty() || s == "all") return std::nullopt;
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  if (s == "eval") return Split::kEval;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown split '{}'", s));
}

struct MixArgs {
  std::string spec_path;
  std::string primary;
  std::vector<std::string> mix;
  std::string mode = "mixing";
  std::optional<double> primary_share;
};

void check_known(const MixSpec& spec, const PipelineConfig& config) {
  const auto known = [&](const std::string& e) {
    return std::find(config.emotion_set.begin(), config.emotion_set.end(), e) !=
           config.emotion_set.end();
  };
  if (!known(spec.primary_emotion)) {
    throw Error(ErrorCode::kUnknownEmotion, fmt::format("unknown emotion '{}'", spec.primary_emotion));
  }
  for (const auto& [emotion, pct] : spec.reference_percentages) {
    (void)pct;
    if (!known(emotion)) throw Error(ErrorCode::kUnknownEmotion, fmt::format("unknown emotion '{}'", emotion));
  }
}

MixSpec build_spec(const MixArgs& args, const PipelineConfig& config) {
  if (!args.spec_path.empty()) {
    if (!args.mix.empty() || !args.primary.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--spec cannot be combined with --primary/--mix");
    }
    MixSpec spec = mix_spec_from_json(read_file(args.spec_path));
    check_known(spec, config);
    return spec;
  }
  MixSpec spec;
  spec.primary_emotion = to_lower(args.primary.empty() ? config.primary_emotion : args.primary);
  for (const std::string& item : args.mix) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kParseError,
                  fmt::format("--mix expects emotion=percent, got '{}'", item));
    }
    spec.reference_percentages.emplace_back(to_lower(item.substr(0, eq)),
                                            parse_number(item.substr(eq + 1), "--mix"));
  }
  check_known(spec, config);
  if (args.mode == "mixing") {
    spec.mode = MixMode::kMixing;
  } else if (args.mode == "transition") {
    spec.mode = MixMode::kTransition;
  } else {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown mode '{}'", args.mode));
  }
  spec.primary_percentage = args.primary_share;
  spec.validate();
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative emotion attributes: features, ranking, mixing and evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string out_dir = "emomix_out";
  std::string emotions;
  std::string primary_emotion;
  app.add_option("--config", config_path, "JSON pipeline configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--jobs", jobs, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--emotions", emotions, "Comma-separated emotion set (overrides the config)");
  app.add_option("--primary-emotion", primary_emotion, "Primary emotion (overrides the config)");

  std::string manifest, models_dir, split, probe_path, reference, test;
  bool plot = false;
  MixArgs mix_args;
  std::string target;
  std::vector<double> steps{0.0, 30.0, 60.0, 90.0};
  std::string sweep_from, sweep_to;
  int sweep_steps = 4;
  int per_emotion = 12;
  double duration = 0.6;

  auto* extract = app.add_subcommand("extract", "Extract 384-dim feature vectors");
  extract->add_option("--manifest", manifest)->required();

  auto* train_rank = app.add_subcommand("train-rank", "Train one ranking function per emotion pair");
  train_rank->add_option("--manifest", manifest)->required();

  auto* predict = app.add_subcommand("predict", "Predict emotion attribute vectors");
  predict->add_option("--manifest", manifest)->required();
  predict->add_option("--models", models_dir, "Directory with <pair>.json models")->required();
  predict->add_option("--split", split, "train, test, eval or all")->default_str("all");

  const auto add_mix_options = [&](CLI::App* sub) {
    sub->add_option("--spec", mix_args.spec_path, "MixSpec JSON document");
    sub->add_option("--primary", mix_args.primary, "Primary emotion (default: config)");
    sub->add_option("--mix", mix_args.mix, "emotion=percent, repeatable")->delimiter(',');
    sub->add_option("--mode", mix_args.mode, "mixing or transition")->capture_default_str();
    sub->add_option("--primary-share", mix_args.primary_share,
                    "Primary percentage (transition mode)");
  };
  auto* mix = app.add_subcommand("mix", "Build a manual attribute vector");
  add_mix_options(mix);
  auto* sweep = app.add_subcommand("sweep", "Sweep one reference emotion's percentage");
  add_mix_options(sweep);
  sweep->add_option("--target", target, "Reference emotion to sweep")->required();
  sweep->add_option("--steps", steps, "Percentages")->delimiter(',')->capture_default_str();

  auto* eval_mcd = app.add_subcommand("eval-mcd", "Mel-cepstral distortion between paired utterances");
  auto* eval_pcc = app.add_subcommand("eval-pcc", "F0 Pearson correlation between paired utterances");
  for (CLI::App* sub : {eval_mcd, eval_pcc}) {
    sub->add_option("--reference", reference, "Reference manifest")->required();
    sub->add_option("--test", test, "Test manifest, paired by position")->required();
    sub->add_flag("--plot", plot, "Also write an SVG plot");
  }

  auto* probe_train = app.add_subcommand("probe-train", "Train the softmax emotion probe");
  probe_train->add_option("--manifest", manifest)->required();

  auto* probe_eval = app.add_subcommand("probe-eval", "Class probabilities from a trained probe");
  probe_eval->add_option("--manifest", manifest)->required();
  probe_eval->add_option("--probe", probe_path, "probe.json")->required();
  probe_eval->add_option("--split", split, "train, test, eval or all")->default_str("all");
  auto* from_opt = probe_eval->add_option("--sweep-from", sweep_from, "Start centroid emotion");
  auto* to_opt = probe_eval->add_option("--sweep-to", sweep_to, "End centroid emotion");
  from_opt->needs(to_opt);
  to_opt->needs(from_opt);
  probe_eval->add_option("--sweep-steps", sweep_steps)->capture_default_str();

  auto* report = app.add_subcommand("report", "Summarize the reports in --out as Markdown");

  auto* toy = app.add_subcommand("make-toy-corpus", "Write a synthetic WAV corpus and manifest");
  toy->add_option("--per-emotion", per_emotion)->capture_default_str();
  toy->add_option("--duration", duration, "Seconds per utterance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    fmt::print(stderr, "error: Usage: {}\n", msg);
    return kUsageExit;
  }

  try {
    PipelineConfig config;
    if (!config_path.empty()) config = config_from_json(read_file(config_path));
    if (seed) config.seed = *seed;
    if (!emotions.empty()) config.emotion_set = split_list(emotions);
    if (!primary_emotion.empty()) config.primary_emotion = to_lower(primary_emotion);
    config.validate();
    if (jobs > 0) omp_set_num_threads(jobs);

    Pipeline pipeline(config, out_dir);
    std::string command;
    if (*extract) {
      command = "extract";
      const auto rows = pipeline.extract(pipeline.load(manifest));
      fmt::print("extracted {} feature vectors\n", rows.size());
    } else if (*train_rank) {
      command = "train-rank";
      for (const PairTrainingResult& r : pipeline.train_rank(pipeline.load(manifest))) {
        fmt::print("{}: converged={} iterations={} train_acc={}{}\n", r.model.emotion_pair.id(),
                   r.report.converged, r.report.iterations, format_double(r.train_accuracy),
                   r.test_accuracy ? " test_acc=" + format_double(*r.test_accuracy) : "");
      }
    } else if (*predict) {
      command = "predict";
      const auto rows = pipeline.predict(pipeline.load(manifest), models_dir, parse_split_flag(split));
      fmt::print("predicted {} attribute vectors\n", rows.size());
    } else if (*mix) {
      command = "mix";
      const EmotionAttributeVector v = pipeline.mix(build_spec(mix_args, config));
      for (const auto& [pair, value] : v.entries) fmt::print("{}={}\n", pair.id(), format_double(value));
    } else if (*sweep) {
      command = "sweep";
      const auto rows = pipeline.sweep(build_spec(mix_args, config), to_lower(target), steps);
      fmt::print("wrote {} sweep rows\n", rows.size());
    } else if (*eval_mcd || *eval_pcc) {
      const bool pcc = eval_pcc->parsed();
      command = pcc ? "eval-pcc" : "eval-mcd";
      const Manifest ref = pipeline.load(reference);
      const Manifest tst = pipeline.load(test);
      const EvalSummary s = pcc ? pipeline.eval_pcc(ref, tst, plot) : pipeline.eval_mcd(ref, tst, plot);
      fmt::print("{} mean={} std={} n={}\n", pcc ? "pcc" : "mcd_db", format_double(s.mean),
                 format_double(s.stddev), s.scores.size());
    } else if (*probe_train) {
      command = "probe-train";
      const ProbeModel m = pipeline.probe_train(pipeline.load(manifest));
      fmt::print("trained probe over {} classes\n", m.num_classes());
    } else if (*probe_eval) {
      command = "probe-eval";
      std::optional<ProbeSweepRequest> req;
      if (!sweep_from.empty()) req = ProbeSweepRequest{to_lower(sweep_from), to_lower(sweep_to), sweep_steps};
      pipeline.probe_eval(pipeline.load(manifest), probe_path, req, parse_split_flag(split));
      fmt::print("wrote probabilities.csv\n");
    } else if (*report) {
      command = "report";
      pipeline.report();
      fmt::print("wrote report.md\n");
    } else if (*toy) {
      command = "make-toy-corpus";
      ToyCorpusOptions opts;
      opts.per_emotion = per_emotion;
      opts.duration = duration;
      opts.seed = config.seed;
      fmt::print("{}\n", make_toy_corpus(out_dir, config.emotion_set, opts).string());
    }
    pipeline.finish(command);
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    fmt::print(stderr, "error: {}: {}\n", error_name(e.code()), msg);
    return exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    fmt::print(stderr, "error: {}: {}\n", error_name(ErrorCode::kIoError), msg);
    return exit_code(ErrorCode::kIoError);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    fmt::print(stderr, "error: Internal: {}\n", msg);
    return 1;
  }
  return 0;
}
