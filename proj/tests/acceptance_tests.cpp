// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <omp.h>

#include "emomix/error.hpp"
#include "emomix/features.hpp"
#include "emomix/metrics.hpp"
#include "emomix/mixer.hpp"
#include "emomix/persist.hpp"
#include "emomix/pipeline.hpp"
#include "emomix/probe.hpp"
#include "emomix/ranking.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace emomix;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

Eigen::VectorXd weights_of(const RankingModel& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.weights.data(),
                                           static_cast<Eigen::Index>(m.weights.size()));
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

AudioBuffer buffer(std::vector<double> samples) {
  AudioBuffer a;
  a.samples = std::move(samples);
  return a;
}

Outcome solver_correctness() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> cdist(0.01, 10.0);
  double worst_gap = 0.0, worst_time = 0.0;
  int instances = 0;
  for (int na = 1; na <= 4; ++na) {
    for (int nb = 1; na + nb <= 5; ++nb) {
      for (int rep = 0; rep < 25; ++rep) {
        const double c = cdist(rng);
        const auto t0 = Clock::now();
        const RankingProblem p =
            build_problem(random_matrix(na, 2, rng), random_matrix(nb, 2, rng), c);
        const RankingModel m = solve(p);
        worst_time = std::max(worst_time, seconds_since(t0));
        const double got = oracle::rank_objective(p.data, p.ordered_pairs, p.similar_pairs, c,
                                                  weights_of(m));
        const double want = oracle::rank_minimum(p.data, p.ordered_pairs, p.similar_pairs, c);
        worst_gap = std::max(worst_gap, std::abs(got - want));
        ++instances;
      }
    }
  }
  o.require(worst_gap <= 1e-6, fmt::format("objective gap {:.3g} > 1e-6", worst_gap));
  o.require(worst_time < 1.0, fmt::format("instance took {:.3g} s", worst_time));
  o.note(fmt::format("{} instances, max gap {:.2e}, max time {:.2e} s", instances, worst_gap,
                     worst_time));
  return o;
}

Outcome ranking_accuracy() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto sep = fixture::two_clusters(200, 10, 4.0, 2023);
  const double acc_sep = pairwise_accuracy(solve(build_problem(sep.train_a, sep.train_b, 0.1)),
                                           sep.test_a, sep.test_b);
  const auto over = fixture::two_clusters(200, 10, 1.0, 2023);
  const double acc_over = pairwise_accuracy(
      solve(build_problem(over.train_a, over.train_b, 0.1)), over.test_a, over.test_b);
  const double elapsed = seconds_since(t0);
  o.require(acc_sep == 1.0, fmt::format("4-sigma held-out accuracy {}", acc_sep));
  o.require(acc_over >= 0.9, fmt::format("1-sigma held-out accuracy {}", acc_over));
  o.require(elapsed < 5.0, fmt::format("runtime {:.3g} s", elapsed));
  o.note(fmt::format("4 sigma: {:.4f}, 1 sigma: {:.4f}, {:.2f} s", acc_sep, acc_over, elapsed));
  return o;
}

Outcome gradient_checks() {
  Outcome o;
  std::mt19937_64 rng(303);
  const double h = 1e-6;
  double worst_rank = 0.0, worst_probe = 0.0;

  const RankingProblem p = build_problem(random_matrix(7, 5, rng), random_matrix(6, 5, rng), 0.7);
  for (int point = 0; point < 10; ++point) {
    const Eigen::VectorXd w = random_matrix(5, 1, rng);
    const Eigen::VectorXd g = primal_gradient(p, w);
    Eigen::VectorXd fd(5);
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      fd[k] = (primal_objective(p, wp) - primal_objective(p, wm)) / (2 * h);
    }
    worst_rank = std::max(worst_rank, (g - fd).norm() / std::max(1.0, fd.norm()));
  }

  const Eigen::MatrixXd x = random_matrix(40, 4, rng);
  std::vector<int> y(40);
  for (int i = 0; i < 40; ++i) y[static_cast<std::size_t>(i)] = i % 3;
  for (int point = 0; point < 10; ++point) {
    const Eigen::MatrixXd w = random_matrix(3, 4, rng);
    const Eigen::VectorXd b = random_matrix(3, 1, rng);
    Eigen::MatrixXd gw;
    Eigen::VectorXd gb;
    probe_gradient(w, b, x, y, 0.01, gw, gb);
    Eigen::VectorXd analytic(15), fd(15);
    for (int c = 0; c < 3; ++c) {
      for (int j = 0; j < 4; ++j) {
        Eigen::MatrixXd wp = w, wm = w;
        wp(c, j) += h;
        wm(c, j) -= h;
        analytic[c * 4 + j] = gw(c, j);
        fd[c * 4 + j] = (probe_loss(wp, b, x, y, 0.01) - probe_loss(wm, b, x, y, 0.01)) / (2 * h);
      }
      Eigen::VectorXd bp = b, bm = b;
      bp(c) += h;
      bm(c) -= h;
      analytic[12 + c] = gb(c);
      fd[12 + c] = (probe_loss(w, bp, x, y, 0.01) - probe_loss(w, bm, x, y, 0.01)) / (2 * h);
    }
    worst_probe = std::max(worst_probe, (analytic - fd).norm() / std::max(1.0, fd.norm()));
  }
  o.require(worst_rank <= 1e-5, fmt::format("ranking relative error {:.3g}", worst_rank));
  o.require(worst_probe <= 1e-5, fmt::format("probe relative error {:.3g}", worst_probe));
  o.note(fmt::format("ranking {:.2e}, probe {:.2e}", worst_rank, worst_probe));
  return o;
}

Outcome metric_identities() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::normal_distribution<double> g;
  const auto seq = [&](std::size_t n, int order) {
    std::vector<double> v(n * static_cast<std::size_t>(order));
    for (double& x : v) x = g(rng);
    return McepSequence(n, order, v);
  };

  bool mcd_zero = true;
  double worst_mcd = 0.0, worst_dtw = 0.0;
  for (int t = 0; t < 20; ++t) {
    const McepSequence a = seq(12, 24);
    mcd_zero = mcd_zero && mcd(a, a) == 0.0;
    const McepSequence b = seq(9, 24);
    const AlignmentPath path = dtw_align(a, b);
    worst_mcd = std::max(worst_mcd,
                         std::abs(mcd(a, b) - oracle::mcd_scalar(a.values, b.values, 24, path.pairs)));
  }
  std::uniform_int_distribution<std::size_t> len(1, 6);
  for (int t = 0; t < 200; ++t) {
    const std::size_t na = len(rng), nb = len(rng);
    const McepSequence a = seq(na, 3), b = seq(nb, 3);
    worst_dtw = std::max(worst_dtw, std::abs(dtw_align(a, b).cost -
                                             oracle::dtw_bruteforce(a.values, na, b.values, nb, 3)));
  }

  std::uniform_real_distribution<double> f0(80.0, 320.0), u(0.0, 1.0);
  double worst_self = 0.0, worst_affine = 0.0;
  for (int t = 0; t < 50; ++t) {
    F0Contour x, pos, neg;
    for (int i = 0; i < 100; ++i) {
      const double v = u(rng) < 0.25 ? 0.0 : f0(rng);
      x.values.push_back(v);
      pos.values.push_back(v == 0.0 ? 0.0 : 2.5 * v + 10.0);
      neg.values.push_back(v == 0.0 ? 0.0 : -0.5 * v + 500.0);
    }
    worst_self = std::max(worst_self, std::abs(f0_pcc(x, x) - 1.0));
    worst_affine = std::max({worst_affine, std::abs(f0_pcc(x, pos) - 1.0),
                             std::abs(f0_pcc(x, neg) + 1.0)});
  }
  o.require(mcd_zero, "MCD(x,x) != 0");
  o.require(worst_self <= 1e-12, fmt::format("PCC(x,x) off by {:.3g}", worst_self));
  o.require(worst_affine <= 1e-12, fmt::format("PCC affine off by {:.3g}", worst_affine));
  o.require(worst_mcd <= 1e-9, fmt::format("MCD vs scalar oracle {:.3g}", worst_mcd));
  o.require(worst_dtw <= 1e-12, fmt::format("DTW vs enumeration {:.3g}", worst_dtw));
  o.note(fmt::format("PCC self {:.1e}, affine {:.1e}, MCD oracle {:.1e}, DTW {:.1e}", worst_self,
                     worst_affine, worst_mcd, worst_dtw));
  return o;
}

Outcome feature_invariants() {
  Outcome o;
  std::mt19937_64 rng(505);
  std::normal_distribution<double> g(0.0, 0.05);
  AudioBuffer noisy = buffer(oracle::sine(180.0, 0.4, 24000));
  for (double& v : noisy.samples) v += g(rng);
  const int saved = omp_get_max_threads();
  std::vector<std::vector<double>> by_jobs;
  for (int jobs : {1, 2, 4, 8}) {
    omp_set_num_threads(jobs);
    by_jobs.push_back(extract_feature_vector(noisy).values);
  }
  omp_set_num_threads(saved);
  ExtractOptions serial;
  serial.parallel = false;
  by_jobs.push_back(extract_feature_vector(noisy, serial).values);
  bool identical = by_jobs.front().size() == kFeatureDim;
  for (const auto& v : by_jobs) identical = identical && v == by_jobs.front();
  o.require(identical, "feature vectors differ across thread counts");

  const FeatureVector sine = extract_feature_vector(buffer(oracle::sine(220.0, 0.5, 16000)));
  const double mean_f0 = sine.values[(2 * 2 + 0) * kNumFunctionals + kMean];
  o.require(std::abs(mean_f0 - 220.0) <= 3.0, fmt::format("mean F0 {:.3f} Hz", mean_f0));

  std::normal_distribution<double> frame_noise(0.0, 0.2);
  std::vector<double> frame(800);
  for (double& v : frame) v = frame_noise(rng);
  const auto base = mfcc(frame, 16000);
  double worst_gain = 0.0;
  for (double gain : {0.05, 0.5, 3.0, 20.0}) {
    std::vector<double> scaled(frame);
    for (double& v : scaled) v *= gain;
    const auto m = mfcc(scaled, 16000);
    for (std::size_t k = 0; k < m.size(); ++k) worst_gain = std::max(worst_gain, std::abs(m[k] - base[k]));
  }
  o.require(worst_gain <= 1e-6, fmt::format("MFCC gain deviation {:.3g}", worst_gain));

  std::uniform_int_distribution<std::size_t> len(800, 48000);
  int frame_mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = len(rng);
    const std::size_t want = (n - 800) / 200 + 1;
    frame_mismatches += frame_count(n, 800, 200) != want;
    if (i < 50) {
      frame_mismatches += frame_signal(buffer(std::vector<double>(n, 0.1)), FrameSpec{}).count() != want;
    }
  }
  o.require(frame_mismatches == 0, fmt::format("{} frame-count mismatches", frame_mismatches));
  o.note(fmt::format("mean F0 {:.3f} Hz, MFCC gain {:.1e}", mean_f0, worst_gain));
  return o;
}

Outcome mixer_contract() {
  Outcome o;
  MixSpec s;
  s.primary_emotion = "surprise";
  s.reference_percentages = {{"angry", 0.0}, {"happy", 0.0}, {"sad", 0.0}};
  const auto rows = sweep(s, "angry", {0.0, 30.0, 60.0, 90.0});
  const double want[] = {1.0, 0.7, 0.4, 0.1};
  std::vector<double> got;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    got.push_back(rows[i].find({"surprise", "angry"}).value());
    o.require(std::abs(got.back() - want[i]) <= 1e-12, fmt::format("step {} = {}", i, got.back()));
    if (i > 0) o.require(got[i] < got[i - 1], "sweep not strictly decreasing");
  }
  MixSpec t;
  t.primary_emotion = "surprise";
  t.mode = MixMode::kTransition;
  bool rejected_low = false, rejected_high = false, accepted = true;
  try {
    t.reference_percentages = {{"happy", 40.0}, {"sad", 50.0}};
    build_manual_vector(t);
  } catch (const Error& e) {
    rejected_low = e.code() == ErrorCode::kTransitionSumViolation;
  }
  try {
    t.reference_percentages = {{"happy", 40.0}, {"sad", 70.0}};
    build_manual_vector(t);
  } catch (const Error& e) {
    rejected_high = e.code() == ErrorCode::kTransitionSumViolation;
  }
  try {
    t.reference_percentages = {{"happy", 40.0}, {"sad", 60.0}};
    build_manual_vector(t);
  } catch (const Error&) {
    accepted = false;
  }
  o.require(rejected_low && rejected_high, "transition sum != 100 accepted");
  o.require(accepted, "transition sum == 100 rejected");
  o.note(fmt::format("sweep {:.9g}/{:.9g}/{:.9g}/{:.9g}", got.at(0), got.at(1), got.at(2), got.at(3)));
  return o;
}

Outcome probe_behavior() {
  Outcome o;
  const std::vector<std::string> labels{"neutral", "angry", "happy", "sad"};
  const fixture::Labeled f = fixture::axis_clusters(4, 50, 6, 6.0, 707);
  const ProbeModel m = train_probe(f.x, f.y, labels, {});
  int hits = 0;
  for (Eigen::Index i = 0; i < f.x.rows(); ++i) {
    const auto p = classify(m, vec(f.x.row(i).transpose()));
    hits += std::max_element(p.begin(), p.end()) - p.begin() == f.y[static_cast<std::size_t>(i)];
  }
  const double acc = static_cast<double>(hits) / static_cast<double>(f.x.rows());
  o.require(acc >= 0.99, fmt::format("training accuracy {}", acc));

  std::mt19937_64 rng(708);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  std::vector<double> x(6);
  double worst_sum = 0.0;
  bool nonneg = true;
  for (int t = 0; t < 10000; ++t) {
    for (double& v : x) v = u(rng);
    const auto p = classify(m, x);
    double sum = 0.0;
    for (double v : p) {
      nonneg = nonneg && v >= 0.0;
      sum += v;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  o.require(worst_sum <= 1e-9 && nonneg, fmt::format("softmax sum deviation {:.3g}", worst_sum));

  bool monotone = true;
  for (int from = 0; from < 4; ++from) {
    for (int to = 0; to < 4; ++to) {
      if (from == to) continue;
      const auto rows = probability_sweep(m, vec(f.centers[static_cast<std::size_t>(from)]),
                                          vec(f.centers[static_cast<std::size_t>(to)]), 11);
      for (std::size_t s = 1; s < rows.size(); ++s) {
        monotone = monotone && rows[s][static_cast<std::size_t>(to)] > rows[s - 1][static_cast<std::size_t>(to)];
      }
    }
  }
  o.require(monotone, "centroid sweep not monotone in the target class");
  o.note(fmt::format("train accuracy {:.3f}, max sum deviation {:.1e}", acc, worst_sum));
  return o;
}

std::map<std::string, std::string> artifacts(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), root).generic_string();
    if (e.path().filename().string().rfind("run_log_", 0) == 0) continue;
    files[rel] = read_file(e.path());
  }
  return files;
}

void full_run(const fs::path& corpus_manifest, const fs::path& out, int jobs) {
  omp_set_num_threads(jobs);
  PipelineConfig cfg;
  cfg.probe.epochs = 150;
  Pipeline p(cfg, out);
  const Manifest m = p.load(corpus_manifest);
  p.extract(m);
  p.train_rank(m);
  p.predict(m, out / "models");
  MixSpec spec;
  spec.primary_emotion = "surprise";
  spec.reference_percentages = {{"angry", 90.0}};
  p.mix(spec);
  p.sweep(spec, "angry", {0.0, 30.0, 60.0, 90.0});
  Manifest ref = m, test = m;
  std::rotate(test.entries.begin(), test.entries.begin() + 1, test.entries.end());
  p.eval_mcd(ref, test, true);
  p.eval_pcc(ref, ref, true);
  p.probe_train(m);
  p.probe_eval(m, out / "probe.json", ProbeSweepRequest{"neutral", "angry", 5});
  p.report();
  p.finish("acceptance");
}

Outcome end_to_end_determinism(Clock::time_point program_start) {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "emomix_acceptance";
  fs::remove_all(root);
  const int saved = omp_get_max_threads();
  ToyCorpusOptions toy;
  toy.per_emotion = 10;
  toy.duration = 0.5;
  const PipelineConfig defaults;
  const fs::path manifest = make_toy_corpus(root / "corpus", defaults.emotion_set, toy);
  full_run(manifest, root / "run_a", 1);
  full_run(manifest, root / "run_b", 4);
  omp_set_num_threads(saved);

  const auto a = artifacts(root / "run_a"), b = artifacts(root / "run_b");
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) differing.push_back(name);
  }
  for (const auto& [name, bytes] : b) {
    if (!a.contains(name)) differing.push_back(name);
  }
  o.require(a.size() >= 10, fmt::format("only {} artifacts written", a.size()));
  o.require(differing.empty(), fmt::format("differing artifacts: {}", differing.size()));
  for (const auto& d : differing) o.note("differs: " + d);
  fs::remove_all(root);

  // The unit-test binaries run inside this process's wall time.
  int unit_failures = 0;
  std::istringstream list(EMOMIX_UNIT_TEST_BINARIES);
  std::string bin;
  int unit_count = 0;
  while (std::getline(list, bin, ':')) {
    if (bin.empty()) continue;
    const std::string cmd = "\"" + bin + "\" >/dev/null 2>&1";
    unit_failures += std::system(cmd.c_str()) != 0;
    ++unit_count;
  }
  const double total = seconds_since(program_start);
  o.require(unit_failures == 0, fmt::format("{} unit-test binaries failed", unit_failures));
  o.require(total < 120.0, fmt::format("suite took {:.1f} s", total));
  o.note(fmt::format("{} artifacts identical at 1 and 4 threads; {} unit binaries + acceptance in {:.1f} s",
                     a.size(), unit_count, total));
  return o;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"solver matches brute-force quadratic oracle", solver_correctness},
      {"held-out ranking accuracy on Gaussian clusters", ranking_accuracy},
      {"analytic gradients match finite differences", gradient_checks},
      {"metric identities and oracles", metric_identities},
      {"feature determinism and invariants", feature_invariants},
      {"mixer sweep and transition contract", mixer_contract},
      {"probe accuracy, simplex outputs and sweep monotonicity", probe_behavior},
      {"end-to-end determinism and suite runtime", [start] { return end_to_end_determinism(start); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::string notes;
    for (const auto& n : o.notes) notes += (notes.empty() ? "" : "; ") + n;
    fmt::print("{} criterion {}: {} ({})\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, notes);
  }
  return failures == 0 ? 0 : 1;
}
