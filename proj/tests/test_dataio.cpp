#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "emomix/audio.hpp"
#include "emomix/config.hpp"
#include "emomix/error.hpp"
#include "emomix/manifest.hpp"
#include "emomix/persist.hpp"

using namespace emomix;
namespace fs = std::filesystem;

namespace {

template <typename F>
std::string expect_code(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << error_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    return e.what();
  }
  return {};
}

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("emomix_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void put16(std::string& s, std::uint16_t v) {
  s += static_cast<char>(v & 0xff);
  s += static_cast<char>(v >> 8);
}
void put32(std::string& s, std::uint32_t v) {
  put16(s, static_cast<std::uint16_t>(v & 0xffff));
  put16(s, static_cast<std::uint16_t>(v >> 16));
}

std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, const std::vector<std::int16_t>& samples) {
  std::string out = "RIFF";
  put32(out, static_cast<std::uint32_t>(36 + 2 * samples.size()));
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, format);
  put16(out, channels);
  put32(out, rate);
  put32(out, rate * channels * bits / 8);
  put16(out, static_cast<std::uint16_t>(channels * bits / 8));
  put16(out, bits);
  out += "data";
  put32(out, static_cast<std::uint32_t>(2 * samples.size()));
  for (std::int16_t v : samples) put16(out, static_cast<std::uint16_t>(v));
  return out;
}

ManifestOptions no_files(std::vector<std::string> emotions = {}) {
  return {std::move(emotions), false};
}

}  // namespace

TEST(Wav, RoundTrip) {
  TempDir dir;
  AudioBuffer a;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 5000; ++i) a.samples.push_back(u(rng));
  write_wav(dir.path() / "a.wav", a);
  const AudioBuffer b = read_wav(dir.path() / "a.wav");
  ASSERT_EQ(b.samples.size(), a.samples.size());
  EXPECT_EQ(b.sample_rate, 16000);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_NEAR(b.samples[i], std::clamp(a.samples[i], -1.0, 1.0), 1.0 / 32768.0);
  }
}

TEST(Wav, DecodesExactPcm) {
  const AudioBuffer a = decode_wav(wav_bytes(1, 1, 16000, 16, {0, 16384, -32768, 32767}), "x");
  EXPECT_EQ(a.samples, (std::vector<double>{0.0, 0.5, -1.0, 32767.0 / 32768.0}));
}

TEST(Wav, SkipsUnknownChunks) {
  std::string bytes = wav_bytes(1, 1, 16000, 16, {100, -100});
  std::string list = "LIST";
  put32(list, 3);
  list += "abc";
  list += '\0';
  bytes.insert(36, list);
  EXPECT_EQ(decode_wav(bytes, "x").samples.size(), 2u);
}

TEST(Wav, RejectsUnsupportedFormats) {
  expect_code(ErrorCode::kFormatError, [] { decode_wav("hello", "x"); });
  expect_code(ErrorCode::kFormatError, [] { decode_wav(wav_bytes(3, 1, 16000, 16, {0}), "x"); });
  expect_code(ErrorCode::kFormatError, [] { decode_wav(wav_bytes(1, 2, 16000, 16, {0, 0}), "x"); });
  expect_code(ErrorCode::kFormatError, [] { decode_wav(wav_bytes(1, 1, 16000, 8, {0}), "x"); });
  expect_code(ErrorCode::kUnsupportedSampleRate,
              [] { decode_wav(wav_bytes(1, 1, 44100, 16, {0}), "x"); });
  expect_code(ErrorCode::kMissingFile, [] { read_wav("/nonexistent/emomix.wav"); });
}

TEST(Manifest, ParsesCsvWithQuotesAndPercent) {
  const Manifest m = parse_manifest_csv(
      "emotion,path,speaker,split,percent\n"
      "Angry,\"a,1.wav\",s1,train,30\n"
      "\n"
      "sad,b.wav,s2,,\n",
      "/data", no_files());
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].path, "a,1.wav");
  EXPECT_EQ(m.entries[0].emotion, "angry");
  EXPECT_EQ(m.entries[0].resolved, fs::path("/data/a,1.wav"));
  EXPECT_EQ(m.entries[0].percent, 30.0);
  EXPECT_EQ(m.entries[0].split, Split::kTrain);
  EXPECT_EQ(m.entries[1].line, 4u);
  EXPECT_EQ(m.entries[1].split, Split::kUnassigned);
  EXPECT_FALSE(m.entries[1].percent.has_value());
}

TEST(Manifest, CsvErrorsCarryPosition) {
  const std::string head = "path,speaker,emotion,split\n";
  EXPECT_NE(expect_code(ErrorCode::kParseError,
                        [&] { parse_manifest_csv(head + "a.wav,s,angry,train,x\n", ".", no_files()); })
                .find("line 2, column 21"),
            std::string::npos);
  EXPECT_NE(expect_code(ErrorCode::kParseError,
                        [&] { parse_manifest_csv(head + "a.wav,s,angry,later\n", ".", no_files()); })
                .find("line 2, column 15"),
            std::string::npos);
  EXPECT_NE(expect_code(ErrorCode::kParseError,
                        [&] { parse_manifest_csv(head + "\"a.wav,s,angry,\n", ".", no_files()); })
                .find("line 2, column 1"),
            std::string::npos);
  expect_code(ErrorCode::kParseError, [] { parse_manifest_csv("path,emotion\n", ".", no_files()); });
  expect_code(ErrorCode::kParseError, [] { parse_manifest_csv("", ".", no_files()); });
}

TEST(Manifest, SemanticErrors) {
  const std::string head = "path,speaker,emotion,split\n";
  EXPECT_NE(expect_code(ErrorCode::kUnknownEmotion,
                        [&] {
                          parse_manifest_csv(head + "a.wav,s,angry,\nb.wav,s,bored,\n", ".",
                                             no_files({"angry", "sad"}));
                        })
                .find("line 3"),
            std::string::npos);
  expect_code(ErrorCode::kInvalidArgument,
              [&] { parse_manifest_csv(head + "a.wav,s,angry,\na.wav,s,sad,\n", ".", no_files()); });
  expect_code(ErrorCode::kMissingFile, [&] {
    parse_manifest_csv(head + "missing.wav,s,angry,\n", "/nonexistent", ManifestOptions{});
  });
}

TEST(Manifest, Json) {
  const Manifest m = parse_manifest_json(
      R"([{"path": "a.wav", "speaker": "s", "emotion": "HAPPY", "split": "eval", "percent": 60},
          {"path": "b.wav", "emotion": "sad"}])",
      "/d", no_files());
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].emotion, "happy");
  EXPECT_EQ(m.entries[0].split, Split::kEval);
  EXPECT_EQ(m.entries[0].percent, 60.0);
  EXPECT_EQ(m.entries[1].split, Split::kUnassigned);

  EXPECT_NE(expect_code(ErrorCode::kParseError,
                        [] { parse_manifest_json("[\n  {\"path\": }\n]", ".", no_files()); })
                .find("line 2"),
            std::string::npos);
  expect_code(ErrorCode::kParseError, [] { parse_manifest_json("{}", ".", no_files()); });
  expect_code(ErrorCode::kParseError, [] { parse_manifest_json(R"([{"path": "a"}])", ".", no_files()); });
}

TEST(Manifest, LoadDispatchesOnExtension) {
  TempDir dir;
  write_wav(dir.path() / "a.wav", AudioBuffer{{0.0, 0.1}});
  std::ofstream(dir.path() / "m.csv") << "path,speaker,emotion,split\na.wav,s,angry,train\n";
  std::ofstream(dir.path() / "m.json") << R"([{"path": "a.wav", "emotion": "angry"}])";
  EXPECT_EQ(load_manifest(dir.path() / "m.csv").entries.at(0).resolved, dir.path() / "a.wav");
  EXPECT_EQ(load_manifest(dir.path() / "m.json").entries.size(), 1u);
  expect_code(ErrorCode::kMissingFile, [&] { load_manifest(dir.path() / "none.csv"); });
}

TEST(Manifest, AutoSplitProportionsAndDeterminism) {
  std::string text = "path,speaker,emotion,split\n";
  for (int i = 0; i < 350; ++i) text += "a" + std::to_string(i) + ".wav,s,angry,\n";
  for (int i = 0; i < 3; ++i) text += "s" + std::to_string(i) + ".wav,s,sad,\n";
  text += "fixed.wav,s,sad,test\n";
  Manifest a = parse_manifest_csv(text, ".", no_files());
  Manifest b = a;
  auto_split(a, 9);
  auto_split(b, 9);
  EXPECT_EQ(manifest_csv(a), manifest_csv(b));
  EXPECT_EQ(a.select(Split::kTrain, "angry").size(), 300u);
  EXPECT_EQ(a.select(Split::kTest, "angry").size(), 30u);
  EXPECT_EQ(a.select(Split::kEval, "angry").size(), 20u);
  EXPECT_GE(a.select(Split::kTrain, "sad").size(), 1u);
  EXPECT_EQ(a.entries.back().split, Split::kTest);
  EXPECT_TRUE(a.select(Split::kUnassigned).empty());
  Manifest c = parse_manifest_csv(text, ".", no_files());
  auto_split(c, 10);
  EXPECT_NE(manifest_csv(a), manifest_csv(c));
}

TEST(Config, DefaultsAndOverrides) {
  const PipelineConfig d = config_from_json("{}");
  EXPECT_EQ(d.primary_emotion, "surprise");
  EXPECT_EQ(d.emotion_set.size(), 5u);
  EXPECT_EQ(d.seed, 20230101u);
  const PipelineConfig c = config_from_json(
      R"({"emotion_set": ["Angry", "Surprise"], "c": 0.5, "mcd_variant": "literature",
          "probe": {"epochs": 10}, "seed": 5})");
  EXPECT_EQ(c.emotion_set, (std::vector<std::string>{"angry", "surprise"}));
  EXPECT_EQ(c.c, 0.5);
  EXPECT_EQ(c.mcd_variant, McdVariant::kLiterature);
  EXPECT_EQ(c.probe.epochs, 10);
  EXPECT_EQ(c.probe_seed(), 6u);
  EXPECT_EQ(c.split_seed(), 7u);
  EXPECT_EQ(config_hash(config_from_json(config_to_json(c))), config_hash(c));
  EXPECT_NE(config_hash(c), config_hash(d));
}

TEST(Config, Rejects) {
  expect_code(ErrorCode::kParseError, [] { config_from_json(R"({"cee": 1})"); });
  expect_code(ErrorCode::kParseError, [] { config_from_json(R"({"probe": {"epoch": 1}})"); });
  expect_code(ErrorCode::kParseError, [] { config_from_json(R"({"mcd_variant": "x"})"); });
  expect_code(ErrorCode::kParseError, [] { config_from_json("[1"); });
  expect_code(ErrorCode::kInvalidArgument, [] { config_from_json(R"({"c": -1})").validate(); });
}

TEST(Persist, RankingModelRoundTrip) {
  RankingModel m;
  m.emotion_pair = {"surprise", "angry"};
  m.weights = {0.25, -1.0 / 3.0, 1e-12};
  m.standardization = {{1.0, 2.0, 3.0}, {0.5, 1.0, 2.0}};
  m.score_min = -1.5;
  m.score_max = 2.0;
  m.converged = true;
  const std::string json = ranking_model_to_json(m);
  const RankingModel r = ranking_model_from_json(json);
  EXPECT_EQ(r.emotion_pair, m.emotion_pair);
  ASSERT_EQ(r.weights.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.weights[i], round_sig9(m.weights[i]));
  EXPECT_EQ(r.score_max, 2.0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(ranking_model_to_json(r), json);
  expect_code(ErrorCode::kParseError, [] { ranking_model_from_json("{"); });
  expect_code(ErrorCode::kFormatError, [] { ranking_model_from_json("{}"); });
}

TEST(Persist, ProbeModelRoundTrip) {
  ProbeModel p;
  p.emotion_labels = {"angry", "sad"};
  p.weights = Eigen::MatrixXd{{1.0, 2.0}, {-0.5, 0.125}};
  p.biases = Eigen::VectorXd{{0.1, -0.1}};
  p.standardization = {{0.0, 1.0}, {1.0, 4.0}};
  const ProbeModel q = probe_model_from_json(probe_model_to_json(p));
  EXPECT_EQ(q.emotion_labels, p.emotion_labels);
  EXPECT_EQ(q.weights, p.weights);
  EXPECT_EQ(q.biases, p.biases);
  EXPECT_EQ(q.standardization.scale, p.standardization.scale);
}

TEST(Persist, FeatureCacheRoundTripIsExact) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<FeatureRow> rows(3);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].path = "wav/x" + std::to_string(r) + ".wav";
    rows[r].features.values.resize(kFeatureDim);
    for (double& v : rows[r].features.values) v = g(rng);
  }
  const std::string bytes = encode_feature_cache(rows);
  const auto back = decode_feature_cache(bytes);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    EXPECT_EQ(back[r].path, rows[r].path);
    EXPECT_EQ(back[r].features.values, rows[r].features.values);
    EXPECT_EQ(back[r].features.layout_version, kFeatureLayoutVersion);
  }
  EXPECT_EQ(encode_feature_cache(back), bytes);
  expect_code(ErrorCode::kFormatError, [&] { decode_feature_cache(bytes.substr(0, bytes.size() - 1)); });
  expect_code(ErrorCode::kFormatError, [&] { decode_feature_cache(bytes + "x"); });
  expect_code(ErrorCode::kFormatError, [] { decode_feature_cache("NOTCACHE"); });
}

TEST(Persist, AtomicWriteAndSha) {
  TempDir dir;
  atomic_write(dir.path() / "f.txt", "first");
  atomic_write(dir.path() / "f.txt", "second");
  EXPECT_EQ(read_file(dir.path() / "f.txt"), "second");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator{}), 1);
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Persist, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(round_sig9(1.0 / 3.0), 0.333333333);
}

TEST(Persist, MixSpecJson) {
  const MixSpec s = mix_spec_from_json(
      R"({"primary_emotion": "Surprise", "references": {"sad": 30, "angry": 90}})");
  EXPECT_EQ(s.primary_emotion, "surprise");
  ASSERT_EQ(s.reference_percentages.size(), 2u);
  EXPECT_EQ(s.reference_percentages[0].first, "sad");
  EXPECT_EQ(s.mode, MixMode::kMixing);
  const MixSpec t = mix_spec_from_json(
      R"({"primary_emotion": "surprise", "mode": "transition", "references": {"happy": 100}})");
  EXPECT_EQ(t.mode, MixMode::kTransition);
  expect_code(ErrorCode::kParseError, [] { mix_spec_from_json(R"({"primary": "surprise"})"); });
  expect_code(ErrorCode::kParseError,
              [] { mix_spec_from_json(R"({"primary_emotion": "surprise", "mode": "blend"})"); });
  expect_code(ErrorCode::kInvalidPercentage, [] {
    mix_spec_from_json(R"({"primary_emotion": "surprise", "references": {"sad": 130}})");
  });
  expect_code(ErrorCode::kTransitionSumViolation, [] {
    mix_spec_from_json(
        R"({"primary_emotion": "surprise", "mode": "transition", "references": {"sad": 30}})");
  });
}
