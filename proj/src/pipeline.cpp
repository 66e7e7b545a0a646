#include "emomix/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <omp.h>

#include "emomix/error.hpp"
#include "emomix/svg.hpp"
#include "json.hpp"

namespace emomix {

namespace fs = std::filesystem;
using nlohmann::json;

class Pipeline::Stage {
 public:
  Stage(Pipeline& owner, std::string name)
      : owner_(owner), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~Stage() {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    owner_.stages_.emplace_back(name_, dt.count());
  }
  Stage(const Stage&) = delete;
  Stage& operator=(const Stage&) = delete;

 private:
  Pipeline& owner_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

namespace {

double r9(double v) { return round_sig9(v); }

// Runs body(i) for i in [0, n) across threads and rethrows the first failure
// (lowest index) after the loop.
template <typename F>
void parallel_for_each(std::size_t n, F&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string extract_params_key(const ExtractOptions& o) {
  return fmt::format("{}|{:.17g}|{:.17g}|{}|{:.17g}|{:.17g}|{:.17g}", kFeatureLayoutVersion,
                     o.frame.frame_length, o.frame.hop_length, static_cast<int>(o.frame.window),
                     o.pitch.f_min, o.pitch.f_max, o.pitch.voicing_threshold);
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

std::vector<const ManifestEntry*> all_entries(const Manifest& m) { return m.select({}); }

json json_number(double v) { return std::isfinite(v) ? json(r9(v)) : json(nullptr); }

}  // namespace

Pipeline::Pipeline(PipelineConfig config, fs::path out_dir)
    : config_(std::move(config)), out_dir_(std::move(out_dir)) {
  config_.validate();
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                fmt::format("cannot create output directory '{}': {}", out_dir_.string(),
                            ec.message()));
  }
}

void Pipeline::note_output(const fs::path& path) {
  outputs_.push_back(fs::relative(path, out_dir_).generic_string());
}

void Pipeline::write_output(const std::string& name, const std::string& contents) {
  const fs::path path = out_dir_ / name;
  atomic_write(path, contents);
  note_output(path);
}

Manifest Pipeline::load(const fs::path& manifest_path) const {
  ManifestOptions options;
  options.emotion_set = config_.emotion_set;
  Manifest m = load_manifest(manifest_path, options);
  auto_split(m, config_.split_seed());
  return m;
}

std::vector<FeatureVector> Pipeline::features(const std::vector<const ManifestEntry*>& entries) {
  Stage stage(*this, "features");
  const fs::path cache_dir = out_dir_ / "cache";
  fs::create_directories(cache_dir);
  const std::string params = sha256_hex(extract_params_key(config_.extract)).substr(0, 12);

  std::vector<FeatureVector> out(entries.size());
  std::vector<fs::path> fresh(entries.size());
  // Files fan out across threads; inside each file the frame loop stays serial.
  ExtractOptions options = config_.extract;
  options.parallel = entries.size() <= 1;
  parallel_for_each(entries.size(), [&](std::size_t i) {
    const std::string bytes = read_file(entries[i]->resolved);
    const fs::path cache = cache_dir / fmt::format("{}-{}.feat", sha256_hex(bytes), params);
    if (fs::is_regular_file(cache)) {
      try {
        std::vector<FeatureRow> rows = decode_feature_cache(read_file(cache));
        if (rows.size() == 1 && rows[0].features.values.size() == kFeatureDim) {
          out[i] = std::move(rows[0].features);
          return;
        }
      } catch (const Error&) {
        // Unreadable cache entries are recomputed and overwritten.
      }
    }
    const AudioBuffer audio = decode_wav(bytes, entries[i]->resolved.string());
    out[i] = extract_feature_vector(audio, options);
    fresh[i] = cache;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!fresh[i].empty()) atomic_write(fresh[i], encode_feature_cache({{entries[i]->path, out[i]}}));
  }
  return out;
}

std::vector<FeatureRow> Pipeline::extract(const Manifest& manifest) {
  const auto entries = all_entries(manifest);
  std::vector<FeatureVector> fv = features(entries);
  Stage stage(*this, "write");
  std::vector<FeatureRow> rows;
  rows.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) rows.push_back({entries[i]->path, std::move(fv[i])});
  write_output("features.csv", feature_csv(rows));
  write_output("features.bin", encode_feature_cache(rows));
  return rows;
}

std::vector<PairTrainingResult> Pipeline::train_rank(const Manifest& manifest) {
  const std::vector<EmotionPair> pairs =
      configured_pairs(config_.emotion_set, config_.primary_emotion, config_.all_pairs);

  // Features for every emotion that takes part, grouped per split.
  std::map<std::string, std::vector<FeatureVector>> train, test;
  {
    std::set<std::string> needed;
    for (const EmotionPair& p : pairs) {
      needed.insert(p.first);
      needed.insert(p.second);
    }
    std::vector<const ManifestEntry*> entries;
    for (const ManifestEntry& e : manifest.entries) {
      if (needed.contains(e.emotion) && (e.split == Split::kTrain || e.split == Split::kTest)) {
        entries.push_back(&e);
      }
    }
    std::vector<FeatureVector> fv = features(entries);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto& bucket = entries[i]->split == Split::kTrain ? train : test;
      bucket[entries[i]->emotion].push_back(std::move(fv[i]));
    }
  }

  std::vector<PairTrainingResult> results;
  {
    Stage stage(*this, "train");
    for (const EmotionPair& pair : pairs) {
      const auto& a = train[pair.first];
      const auto& b = train[pair.second];
      if (a.empty() || b.empty()) {
        throw Error(ErrorCode::kEmptyEmotionSet,
                    fmt::format("pair {}: no training utterances for '{}'", pair.id(),
                                a.empty() ? pair.first : pair.second));
      }
      ProblemOptions po;
      po.similar_pair_factor = config_.similar_pair_factor;
      po.seed = config_.problem_seed();
      const RankingProblem problem = build_problem(std::span(a), std::span(b), config_.c, po);
      PairTrainingResult r;
      r.model = solve(problem, config_.solver, &r.report);
      r.model.emotion_pair = pair;
      r.train_accuracy = pairwise_accuracy(r.model, stack_rows(a), stack_rows(b));
      const auto& ta = test[pair.first];
      const auto& tb = test[pair.second];
      if (!ta.empty() && !tb.empty()) {
        r.test_accuracy = pairwise_accuracy(r.model, stack_rows(ta), stack_rows(tb));
      }
      if (!r.report.converged) {
        fmt::print(stderr, "warning: pair {} did not converge after {} iterations (|g| = {})\n",
                   pair.id(), r.report.iterations, format_double(r.report.gradient_norm));
      }
      results.push_back(std::move(r));
    }
  }

  Stage stage(*this, "write");
  fs::create_directories(out_dir_ / "models");
  json report = json::array();
  for (const PairTrainingResult& r : results) {
    const fs::path path = out_dir_ / "models" / (r.model.emotion_pair.id() + ".json");
    save_ranking_model(path, r.model);
    note_output(path);
    report.push_back({{"pair", r.model.emotion_pair.id()},
                      {"converged", r.report.converged},
                      {"iterations", r.report.iterations},
                      {"objective", json_number(r.report.objective)},
                      {"gradient_norm", json_number(r.report.gradient_norm)},
                      {"train_pairwise_accuracy", json_number(r.train_accuracy)},
                      {"test_pairwise_accuracy",
                       r.test_accuracy ? json_number(*r.test_accuracy) : json(nullptr)},
                      {"n_first", train[r.model.emotion_pair.first].size()},
                      {"n_second", train[r.model.emotion_pair.second].size()}});
  }
  write_output("rank_report.json", json{{"pairs", report}}.dump(2) + "\n");
  return results;
}

std::vector<std::pair<std::string, EmotionAttributeVector>> Pipeline::predict(
    const Manifest& manifest, const fs::path& models_dir, std::optional<Split> split) {
  const std::vector<EmotionPair> pairs =
      configured_pairs(config_.emotion_set, config_.primary_emotion, config_.all_pairs);
  std::vector<RankingModel> models;
  for (const EmotionPair& pair : pairs) {
    const fs::path path = models_dir / (pair.id() + ".json");
    if (!fs::is_regular_file(path)) {
      throw Error(ErrorCode::kMissingPairModel,
                  fmt::format("no model for pair {} at '{}'", pair.id(), path.string()));
    }
    models.push_back(load_ranking_model(path));
  }
  const auto entries = manifest.select(split);
  const std::vector<FeatureVector> fv = features(entries);

  Stage stage(*this, "predict");
  std::vector<std::pair<std::string, EmotionAttributeVector>> rows;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    rows.emplace_back(entries[i]->path, predict_attribute_vector(models, pairs, fv[i].values));
  }
  write_output("attributes.csv", attribute_csv(rows));
  return rows;
}

EmotionAttributeVector Pipeline::mix(const MixSpec& spec) {
  Stage stage(*this, "mix");
  const MixSpec full = complete_references(spec, config_.emotion_set);
  EmotionAttributeVector v = build_manual_vector(full);
  write_output("mix.csv", attribute_csv({{"manual", v}}, "mix"));
  return v;
}

std::vector<EmotionAttributeVector> Pipeline::sweep(const MixSpec& spec, const std::string& target,
                                                    const std::vector<double>& steps) {
  Stage stage(*this, "sweep");
  const MixSpec full = complete_references(spec, config_.emotion_set);
  std::vector<EmotionAttributeVector> out = emomix::sweep(full, target, steps);
  std::vector<std::pair<std::string, EmotionAttributeVector>> rows;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    rows.emplace_back(fmt::format("{}={}", target, format_double(steps[i])), out[i]);
  }
  write_output("sweep.csv", attribute_csv(rows, "mix"));
  return out;
}

EvalSummary Pipeline::eval_mcd(const Manifest& reference, const Manifest& test, bool plot) {
  return evaluate(reference, test, plot, false);
}

EvalSummary Pipeline::eval_pcc(const Manifest& reference, const Manifest& test, bool plot) {
  return evaluate(reference, test, plot, true);
}

EvalSummary Pipeline::evaluate(const Manifest& reference, const Manifest& test, bool plot,
                               bool pcc) {
  if (reference.entries.size() != test.entries.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("reference has {} entries but test has {}; entries pair by position",
                            reference.entries.size(), test.entries.size()));
  }
  if (reference.entries.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to evaluate");

  EvalSummary summary;
  summary.scores.resize(reference.entries.size());
  {
    Stage stage(*this, pcc ? "eval_pcc" : "eval_mcd");
    const FrameSpec& spec = config_.extract.frame;
    parallel_for_each(reference.entries.size(), [&](std::size_t i) {
      const AudioBuffer ra = read_wav(reference.entries[i].resolved);
      const AudioBuffer ta = read_wav(test.entries[i].resolved);
      const McepSequence rm = extract_mcep(ra, config_.mcep_order, spec);
      const McepSequence tm = extract_mcep(ta, config_.mcep_order, spec);
      const AlignmentPath path = dtw_align(rm, tm);
      if (pcc) {
        const F0Contour rf = estimate_f0(ra, spec, config_.extract.pitch);
        const F0Contour tf = estimate_f0(ta, spec, config_.extract.pitch);
        summary.scores[i] = f0_pcc(rf, tf, path);
      } else {
        summary.scores[i] = mcd_along(rm, tm, path, config_.mcd_variant);
      }
    });
  }
  std::tie(summary.mean, summary.stddev) = mean_std(summary.scores);

  Stage stage(*this, "write");
  const std::string metric = pcc ? "pcc" : "mcd";
  std::string csv = fmt::format("reference,test,{}\n", pcc ? "pcc" : "mcd_db");
  for (std::size_t i = 0; i < summary.scores.size(); ++i) {
    csv += fmt::format("{},{},{}\n", csv_field(reference.entries[i].path),
                       csv_field(test.entries[i].path), format_double(summary.scores[i]));
  }
  csv += fmt::format("mean,,{}\nstd,,{}\n", format_double(summary.mean),
                     format_double(summary.stddev));
  write_output(metric + ".csv", csv);

  if (plot) {
    const bool by_percent = std::all_of(test.entries.begin(), test.entries.end(),
                                        [](const ManifestEntry& e) { return e.percent.has_value(); });
    std::vector<PlotSeries> series;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < test.entries.size(); ++i) {
      const ManifestEntry& e = test.entries[i];
      auto [it, inserted] = index.try_emplace(e.emotion, series.size());
      if (inserted) series.push_back({e.emotion, {}, {}});
      PlotSeries& s = series[it->second];
      s.x.push_back(by_percent ? *e.percent : static_cast<double>(i));
      s.y.push_back(summary.scores[i]);
    }
    write_output(metric + ".svg",
                 line_plot_svg(pcc ? "F0 Pearson correlation" : "Mel-cepstral distortion",
                               by_percent ? "percent" : "pair index", pcc ? "PCC" : "MCD [dB]",
                               series));
  }
  return summary;
}

ProbeModel Pipeline::probe_train(const Manifest& manifest) {
  const auto entries = manifest.select(Split::kTrain);
  const std::vector<FeatureVector> fv = features(entries);
  const auto test_entries = manifest.select(Split::kTest);
  const std::vector<FeatureVector> test_fv = features(test_entries);

  Stage stage(*this, "probe_train");
  // Classes are the configured emotions that have training data.
  std::vector<std::string> labels;
  for (const std::string& e : config_.emotion_set) {
    if (std::any_of(entries.begin(), entries.end(),
                    [&](const ManifestEntry* m) { return m->emotion == e; })) {
      labels.push_back(e);
    }
  }
  const auto label_of = [&](const std::string& emotion) {
    const auto it = std::find(labels.begin(), labels.end(), emotion);
    return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
  };
  std::vector<int> y;
  for (const ManifestEntry* e : entries) y.push_back(label_of(e->emotion));

  TrainConfig tc = config_.probe;
  tc.seed = config_.probe_seed();
  TrainReport report;
  ProbeModel model = train_probe(stack_rows(fv), y, labels, tc, &report);

  const auto accuracy = [&](const std::vector<const ManifestEntry*>& es,
                            const std::vector<FeatureVector>& xs) -> std::optional<double> {
    std::size_t used = 0, hit = 0;
    for (std::size_t i = 0; i < es.size(); ++i) {
      const int truth = label_of(es[i]->emotion);
      if (truth < 0) continue;
      const std::vector<double> p = classify(model, xs[i].values);
      ++used;
      hit += static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()) ==
             static_cast<std::size_t>(truth);
    }
    if (used == 0) return std::nullopt;
    return static_cast<double>(hit) / static_cast<double>(used);
  };
  const auto train_acc = accuracy(entries, fv);
  const auto test_acc = accuracy(test_entries, test_fv);

  write_output("probe.json", probe_model_to_json(model));
  json losses = json::array();
  for (double l : report.loss_history) losses.push_back(json_number(l));
  const json rep{{"classes", labels},
                 {"step_size", json_number(report.step_size)},
                 {"final_loss", report.loss_history.empty() ? json(nullptr)
                                                            : json_number(report.loss_history.back())},
                 {"train_accuracy", train_acc ? json_number(*train_acc) : json(nullptr)},
                 {"test_accuracy", test_acc ? json_number(*test_acc) : json(nullptr)},
                 {"loss_history", losses}};
  write_output("probe_report.json", rep.dump(2) + "\n");
  return model;
}

void Pipeline::probe_eval(const Manifest& manifest, const fs::path& probe_path,
                          const std::optional<ProbeSweepRequest>& sweep_request,
                          std::optional<Split> split) {
  const ProbeModel model = probe_model_from_json(read_file(probe_path));
  const auto entries = manifest.select(split);
  const std::vector<FeatureVector> fv = features(entries);

  Stage stage(*this, "probe_eval");
  std::string csv = "path,emotion";
  for (const std::string& l : model.emotion_labels) csv += ',' + csv_field("p_" + l);
  csv += ",predicted\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::vector<double> p = classify(model, fv[i].values);
    csv += csv_field(entries[i]->path) + ',' + csv_field(entries[i]->emotion);
    for (double v : p) csv += ',' + format_double(v);
    csv += ',' + csv_field(model.emotion_labels[static_cast<std::size_t>(
                     std::max_element(p.begin(), p.end()) - p.begin())]);
    csv += '\n';
  }
  write_output("probabilities.csv", csv);

  if (!sweep_request) return;
  const ProbeSweepRequest& req = *sweep_request;
  const auto centroid = [&](const std::string& emotion) {
    std::vector<double> c(kFeatureDim, 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i]->emotion != emotion) continue;
      for (std::size_t k = 0; k < kFeatureDim; ++k) c[k] += fv[i].values[k];
      ++n;
    }
    if (n == 0) {
      throw Error(ErrorCode::kEmptyEmotionSet,
                  fmt::format("no utterances of '{}' for the probability sweep", emotion));
    }
    for (double& v : c) v /= static_cast<double>(n);
    return c;
  };
  const std::vector<double> from = centroid(req.from_emotion);
  const std::vector<double> to = centroid(req.to_emotion);
  const auto probs = probability_sweep(model, from, to, req.steps);

  std::string sc = "step,t";
  for (const std::string& l : model.emotion_labels) sc += ',' + csv_field("p_" + l);
  sc += '\n';
  std::vector<PlotSeries> series;
  for (const std::string& l : model.emotion_labels) series.push_back({l, {}, {}});
  for (std::size_t s = 0; s < probs.size(); ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(probs.size() - 1);
    sc += fmt::format("{},{}", s, format_double(t));
    for (std::size_t k = 0; k < probs[s].size(); ++k) {
      sc += ',' + format_double(probs[s][k]);
      series[k].x.push_back(100.0 * t);
      series[k].y.push_back(probs[s][k]);
    }
    sc += '\n';
  }
  write_output("probe_sweep.csv", sc);
  write_output("probe_sweep.svg",
               line_plot_svg(fmt::format("Probe sweep {} -> {}", req.from_emotion, req.to_emotion),
                             fmt::format("% toward {}", req.to_emotion), "probability", series));
}

std::string Pipeline::report() {
  Stage stage(*this, "report");
  std::string md = "# emomix report\n\n";
  md += fmt::format("- config hash: `{}`\n- feature layout: `{}`\n- seed: {}\n\n",
                    config_hash(config_), kFeatureLayoutVersion, config_.seed);

  const auto load_json = [&](const std::string& name) -> std::optional<json> {
    const fs::path p = out_dir_ / name;
    if (!fs::is_regular_file(p)) return std::nullopt;
    try {
      return json::parse(read_file(p));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormatError, fmt::format("'{}': {}", p.string(), e.what()));
    }
  };
  const auto num = [](const json& v) {
    return v.is_number() ? format_double(v.get<double>()) : std::string("n/a");
  };

  if (const auto rank = load_json("rank_report.json")) {
    md += "## Ranking functions\n\n| pair | converged | iterations | train acc | test acc |\n"
          "|---|---|---|---|---|\n";
    for (const json& p : rank->at("pairs")) {
      md += fmt::format("| {} | {} | {} | {} | {} |\n", p.at("pair").get<std::string>(),
                        p.at("converged").get<bool>() ? "yes" : "no",
                        p.at("iterations").get<int>(), num(p.at("train_pairwise_accuracy")),
                        num(p.at("test_pairwise_accuracy")));
    }
    md += '\n';
  }
  if (const auto probe = load_json("probe_report.json")) {
    md += fmt::format("## Probe\n\n- classes: {}\n- train accuracy: {}\n- test accuracy: {}\n"
                      "- final loss: {}\n\n",
                      fmt::join(probe->at("classes").get<std::vector<std::string>>(), ", "),
                      num(probe->at("train_accuracy")), num(probe->at("test_accuracy")),
                      num(probe->at("final_loss")));
  }
  for (const auto& [file, title] : {std::pair{"mcd.csv", "MCD [dB]"}, std::pair{"pcc.csv", "F0 PCC"}}) {
    const fs::path p = out_dir_ / file;
    if (!fs::is_regular_file(p)) continue;
    const std::string text = read_file(p);
    std::string mean = "n/a", sd = "n/a";
    std::size_t rows = 0;
    std::size_t pos = text.find('\n');
    while (pos != std::string::npos && pos + 1 < text.size()) {
      const std::size_t end = text.find('\n', pos + 1);
      const std::string line = text.substr(pos + 1, end - pos - 1);
      pos = end;
      if (line.rfind("mean,,", 0) == 0) {
        mean = line.substr(6);
      } else if (line.rfind("std,,", 0) == 0) {
        sd = line.substr(5);
      } else if (!line.empty()) {
        ++rows;
      }
    }
    md += fmt::format("## {}\n\n- pairs: {}\n- mean: {}\n- std: {}\n\n", title, rows, mean, sd);
  }
  write_output("report.md", md);
  return md;
}

void Pipeline::finish(const std::string& command) {
  json stages = json::array();
  for (const auto& [name, seconds] : stages_) {
    stages.push_back({{"stage", name}, {"seconds", json_number(seconds)}});
  }
  const json log{{"command", command},
                 {"config_hash", config_hash(config_)},
                 {"feature_layout", kFeatureLayoutVersion},
                 {"seeds",
                  {{"seed", config_.seed},
                   {"ranking_pairs", config_.problem_seed()},
                   {"probe", config_.probe_seed()},
                   {"split", config_.split_seed()}}},
                 {"jobs", omp_get_max_threads()},
                 {"stages", stages},
                 {"outputs", outputs_}};
  atomic_write(out_dir_ / fmt::format("run_log_{}.json", command), log.dump(2) + "\n");
}

fs::path make_toy_corpus(const fs::path& dir, const std::vector<std::string>& emotion_set,
                         const ToyCorpusOptions& options) {
  if (options.per_emotion < 1 || !(options.duration >= 0.2)) {
    throw Error(ErrorCode::kInvalidArgument, "toy corpus needs >= 1 utterance of >= 0.2 s");
  }
  fs::create_directories(dir / "wav");
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = static_cast<std::size_t>(options.duration * kPipelineSampleRate);
  const double sr = kPipelineSampleRate;

  std::string manifest = "path,speaker,emotion,split\n";
  for (std::size_t e = 0; e < emotion_set.size(); ++e) {
    const double k = static_cast<double>(e);
    // Per-emotion prosody: base pitch, loudness, pitch slope and noise floor.
    const double base_f0 = 110.0 + 38.0 * k;
    const double amplitude = 0.18 + 0.07 * static_cast<double>((e * 3) % emotion_set.size());
    const double slope = (static_cast<int>(e % 3) - 1) * 0.35;
    const double noise = 0.004 + 0.006 * static_cast<double>(e % 2);
    const int harmonics = 3 + static_cast<int>(e % 4);
    for (int u = 0; u < options.per_emotion; ++u) {
      AudioBuffer audio;
      audio.samples.resize(n);
      const double f0 = base_f0 * (1.0 + 0.04 * (unit(rng) - 0.5));
      const double amp = amplitude * (1.0 + 0.1 * (unit(rng) - 0.5));
      const double vib_rate = 4.0 + 2.0 * unit(rng);
      double phase = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double frac = t / options.duration;
        const double f = f0 * (1.0 + slope * (frac - 0.5)) *
                         (1.0 + 0.02 * std::sin(2.0 * std::numbers::pi * vib_rate * t));
        phase += 2.0 * std::numbers::pi * f / sr;
        double s = 0.0;
        for (int h = 1; h <= harmonics; ++h) s += std::sin(h * phase) / h;
        const double env = std::sin(std::numbers::pi * std::min(1.0, frac * 1.02));
        audio.samples[i] = amp * env * s / 1.8 + noise * (2.0 * unit(rng) - 1.0);
      }
      const std::string name = fmt::format("{}_{:03d}.wav", emotion_set[e], u);
      write_wav(dir / "wav" / name, audio);
      manifest += fmt::format("wav/{},spk{},{},\n", name, u % 2, emotion_set[e]);
    }
  }
  const fs::path path = dir / "manifest.csv";
  atomic_write(path, manifest);
  return path;
}

}  // namespace emomix
