#include <random>

#include <gtest/gtest.h>

#include "emomix/error.hpp"
#include "emomix/mixer.hpp"

using namespace emomix;

namespace {

template <typename F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    FAIL() << "expected " << error_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

MixSpec surprise(std::vector<std::pair<std::string, double>> refs) {
  MixSpec s;
  s.primary_emotion = "surprise";
  s.reference_percentages = std::move(refs);
  return s;
}

double entry(const EmotionAttributeVector& v, const std::string& e) {
  return v.find({"surprise", e}).value();
}

}  // namespace

TEST(Mixer, ZeroPercentIsMaximalDifference) {
  EXPECT_EQ(entry(build_manual_vector(surprise({{"angry", 0.0}})), "angry"), 1.0);
}

TEST(Mixer, AngryNinety) {
  const auto v = build_manual_vector(surprise({{"angry", 90.0}, {"happy", 0.0}, {"sad", 0.0}}));
  ASSERT_EQ(v.entries.size(), 3u);
  EXPECT_NEAR(entry(v, "angry"), 0.1, 1e-15);
  EXPECT_EQ(entry(v, "happy"), 1.0);
  EXPECT_EQ(entry(v, "sad"), 1.0);
  EXPECT_EQ(v.source, EmotionAttributeVector::Source::kManual);
}

TEST(Mixer, TransitionSum) {
  MixSpec ok;
  ok.primary_emotion = "surprise";
  ok.mode = MixMode::kTransition;
  ok.reference_percentages = {{"happy", 40.0}, {"sad", 60.0}};
  EXPECT_NO_THROW(build_manual_vector(ok));

  MixSpec bad = ok;
  bad.reference_percentages = {{"happy", 40.0}, {"sad", 70.0}};
  expect_code(ErrorCode::kTransitionSumViolation, [&] { build_manual_vector(bad); });

  MixSpec with_primary = ok;
  with_primary.primary_percentage = 80.0;
  with_primary.reference_percentages = {{"angry", 20.0}};
  EXPECT_NO_THROW(build_manual_vector(with_primary));
  with_primary.primary_percentage = 70.0;
  expect_code(ErrorCode::kTransitionSumViolation, [&] { build_manual_vector(with_primary); });
}

TEST(Mixer, InvalidSpecs) {
  expect_code(ErrorCode::kInvalidPercentage, [] { build_manual_vector(surprise({{"angry", 101.0}})); });
  expect_code(ErrorCode::kInvalidPercentage, [] { build_manual_vector(surprise({{"angry", -0.5}})); });
  expect_code(ErrorCode::kInvalidPercentage,
              [] { build_manual_vector(surprise({{"angry", std::nan("")}})); });
  expect_code(ErrorCode::kInvalidArgument, [] { build_manual_vector(surprise({{"surprise", 10.0}})); });
  expect_code(ErrorCode::kInvalidArgument,
              [] { build_manual_vector(surprise({{"angry", 10.0}, {"angry", 20.0}})); });
  MixSpec s = surprise({{"angry", 10.0}});
  s.primary_percentage = 50.0;
  expect_code(ErrorCode::kInvalidPercentage, [&] { build_manual_vector(s); });
}

TEST(Sweep, PaperGrid) {
  const auto rows = sweep(surprise({{"angry", 0.0}, {"happy", 0.0}, {"sad", 0.0}}), "angry",
                          {0.0, 30.0, 60.0, 90.0});
  ASSERT_EQ(rows.size(), 4u);
  const double want[] = {1.0, 0.7, 0.4, 0.1};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(entry(rows[i], "angry"), want[i], 1e-15);
    EXPECT_EQ(entry(rows[i], "happy"), 1.0);
    EXPECT_EQ(entry(rows[i], "sad"), 1.0);
    if (i > 0) EXPECT_LT(entry(rows[i], "angry"), entry(rows[i - 1], "angry"));
  }
}

TEST(Sweep, EdgesAndErrors) {
  const MixSpec s = surprise({{"angry", 20.0}});
  EXPECT_TRUE(sweep(s, "angry", {}).empty());
  const auto ends = sweep(s, "angry", {0.0, 100.0});
  EXPECT_EQ(entry(ends[0], "angry"), 1.0);
  EXPECT_EQ(entry(ends[1], "angry"), 0.0);
  expect_code(ErrorCode::kUnknownEmotion, [&] { sweep(s, "sad", {10.0}); });
  expect_code(ErrorCode::kInvalidPercentage, [&] { sweep(s, "angry", {120.0}); });
}

TEST(Mixer, MonotoneAndLocal) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pct(0.0, 99.0);
  for (int i = 0; i < 200; ++i) {
    const MixSpec s = surprise({{"angry", pct(rng)}, {"happy", pct(rng)}, {"sad", pct(rng)}});
    MixSpec t = s;
    t.reference_percentages[1].second += 0.5;
    const auto a = build_manual_vector(s), b = build_manual_vector(t);
    EXPECT_LT(entry(b, "happy"), entry(a, "happy"));
    EXPECT_EQ(entry(b, "angry"), entry(a, "angry"));
    EXPECT_EQ(entry(b, "sad"), entry(a, "sad"));
    for (const auto& [p, v] : a.entries) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Mixer, RoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pct(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = pct(rng);
    EXPECT_NEAR(attribute_to_percentage(percentage_to_attribute(p)), p, 1e-12);
  }
}

TEST(Mixer, CompleteReferences) {
  const MixSpec full = complete_references(surprise({{"sad", 30.0}, {"angry", 90.0}}),
                                           {"neutral", "angry", "happy", "sad", "surprise"});
  ASSERT_EQ(full.reference_percentages.size(), 4u);
  EXPECT_EQ(full.reference_percentages[0], (std::pair<std::string, double>{"neutral", 0.0}));
  EXPECT_EQ(full.reference_percentages[1], (std::pair<std::string, double>{"angry", 90.0}));
  EXPECT_EQ(full.reference_percentages[2], (std::pair<std::string, double>{"happy", 0.0}));
  EXPECT_EQ(full.reference_percentages[3], (std::pair<std::string, double>{"sad", 30.0}));
}
