#include "emomix/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "emomix/error.hpp"

namespace emomix {

std::vector<EmotionPair> configured_pairs(const std::vector<std::string>& emotion_set,
                                          const std::string& primary, bool all_pairs) {
  std::vector<EmotionPair> pairs;
  if (all_pairs) {
    for (std::size_t i = 0; i < emotion_set.size(); ++i) {
      for (std::size_t j = i + 1; j < emotion_set.size(); ++j) {
        // Keep the primary on the left whenever it takes part.
        if (emotion_set[j] == primary) {
          pairs.push_back({emotion_set[j], emotion_set[i]});
        } else {
          pairs.push_back({emotion_set[i], emotion_set[j]});
        }
      }
    }
    return pairs;
  }
  for (const std::string& e : emotion_set) {
    if (e != primary) pairs.push_back({primary, e});
  }
  return pairs;
}

Standardization Standardization::fit(const Eigen::MatrixXd& rows) {
  const auto n = static_cast<double>(rows.rows());
  Standardization s;
  s.mean.resize(static_cast<std::size_t>(rows.cols()));
  s.scale.resize(static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index k = 0; k < rows.cols(); ++k) {
    const double mean = rows.col(k).sum() / n;
    const double var = (rows.col(k).array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    s.mean[k] = mean;
    s.scale[k] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
  }
  return s;
}

Eigen::VectorXd Standardization::apply(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("feature vector has {} entries, model expects {}", x.size(), dim()));
  }
  Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) z[k] = (x[k] - mean[k]) / scale[k];
  return z;
}

Eigen::MatrixXd Standardization::apply_rows(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("rows have {} columns, model expects {}", rows.cols(), dim()));
  }
  Eigen::MatrixXd z(rows.rows(), rows.cols());
  for (Eigen::Index k = 0; k < rows.cols(); ++k) {
    z.col(k) = (rows.col(k).array() - mean[k]) / scale[k];
  }
  return z;
}

void RankingProblem::validate() const {
  if (!(c_tradeoff > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("trade-off C must be positive, got {}", c_tradeoff));
  }
  const auto n = static_cast<std::size_t>(data.rows());
  const auto check = [n](const std::vector<IndexPair>& pairs, const char* what) {
    for (const auto& [i, j] : pairs) {
      if (i >= n || j >= n || i == j) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("{} pair ({}, {}) is invalid for {} rows", what, i, j, n));
      }
    }
  };
  check(ordered_pairs, "ordered");
  check(similar_pairs, "similar");
  std::vector<IndexPair> a(ordered_pairs), b(similar_pairs);
  const auto canon = [](std::vector<IndexPair>& v) {
    for (auto& p : v) {
      if (p.first > p.second) std::swap(p.first, p.second);
    }
    std::sort(v.begin(), v.end());
  };
  canon(a);
  canon(b);
  std::vector<IndexPair> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (!common.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ordered and similar pair sets overlap");
  }
}

Eigen::MatrixXd stack_rows(std::span<const FeatureVector> rows) {
  if (rows.empty()) return {};
  const std::size_t dim = rows.front().values.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].values.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("row {} has {} entries, expected {}", i, rows[i].values.size(), dim));
    }
    for (std::size_t k = 0; k < dim; ++k) m(static_cast<Eigen::Index>(i), k) = rows[i].values[k];
  }
  return m;
}

RankingProblem build_problem(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b,
                             double c, const ProblemOptions& options) {
  if (set_a.rows() == 0 || set_b.rows() == 0) {
    throw Error(ErrorCode::kEmptyEmotionSet,
                fmt::format("both emotion sets need samples (|A| = {}, |B| = {})", set_a.rows(),
                            set_b.rows()));
  }
  if (!(c > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("trade-off C must be positive, got {}", c));
  }
  if (set_a.cols() != set_b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "emotion sets have different feature dimensions");
  }

  const auto na = static_cast<std::size_t>(set_a.rows());
  const auto nb = static_cast<std::size_t>(set_b.rows());
  Eigen::MatrixXd raw(set_a.rows() + set_b.rows(), set_a.cols());
  raw << set_a, set_b;

  RankingProblem p;
  p.c_tradeoff = c;
  p.count_a = na;
  p.standardization = Standardization::fit(raw);
  p.data = p.standardization.apply_rows(raw);

  p.ordered_pairs.reserve(na * nb);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) p.ordered_pairs.emplace_back(i, na + j);
  }

  std::vector<IndexPair> candidates;
  candidates.reserve(na * (na - 1) / 2 + nb * (nb - 1) / 2);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = i + 1; j < na; ++j) candidates.emplace_back(i, j);
  }
  for (std::size_t i = na; i < na + nb; ++i) {
    for (std::size_t j = i + 1; j < na + nb; ++j) candidates.emplace_back(i, j);
  }
  const auto cap = static_cast<std::size_t>(
      std::floor(options.similar_pair_factor * static_cast<double>(p.ordered_pairs.size())));
  if (candidates.size() > cap) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(cap);
    std::sort(candidates.begin(), candidates.end());
  }
  p.similar_pairs = std::move(candidates);
  return p;
}

RankingProblem build_problem(std::span<const FeatureVector> set_a,
                             std::span<const FeatureVector> set_b, double c,
                             const ProblemOptions& options) {
  if (set_a.empty() || set_b.empty()) {
    throw Error(ErrorCode::kEmptyEmotionSet,
                fmt::format("both emotion sets need samples (|A| = {}, |B| = {})", set_a.size(),
                            set_b.size()));
  }
  return build_problem(stack_rows(set_a), stack_rows(set_b), c, options);
}

namespace {

// Per-row coefficients v such that the data term of the gradient is X^T v,
// plus the value of the data term itself.
struct PairTerms {
  Eigen::VectorXd row_coeff;
  double penalty = 0.0;
};

PairTerms pair_terms(const RankingProblem& p, const Eigen::VectorXd& scores) {
  PairTerms t;
  t.row_coeff = Eigen::VectorXd::Zero(p.data.rows());
  for (const auto& [i, j] : p.ordered_pairs) {
    const double slack = 1.0 - (scores[i] - scores[j]);
    if (slack > 0.0) {
      t.penalty += slack * slack;
      t.row_coeff[i] -= slack;
      t.row_coeff[j] += slack;
    }
  }
  for (const auto& [i, j] : p.similar_pairs) {
    const double gap = scores[i] - scores[j];
    t.penalty += gap * gap;
    t.row_coeff[i] += gap;
    t.row_coeff[j] -= gap;
  }
  return t;
}

double objective_from_scores(const RankingProblem& p, const Eigen::VectorXd& w,
                             const Eigen::VectorXd& scores) {
  double penalty = 0.0;
  for (const auto& [i, j] : p.ordered_pairs) {
    const double slack = 1.0 - (scores[i] - scores[j]);
    if (slack > 0.0) penalty += slack * slack;
  }
  for (const auto& [i, j] : p.similar_pairs) {
    const double gap = scores[i] - scores[j];
    penalty += gap * gap;
  }
  return 0.5 * w.squaredNorm() + p.c_tradeoff * penalty;
}

}  // namespace

double primal_objective(const RankingProblem& problem, const Eigen::VectorXd& w) {
  return objective_from_scores(problem, w, problem.data * w);
}

Eigen::VectorXd primal_gradient(const RankingProblem& problem, const Eigen::VectorXd& w) {
  const PairTerms t = pair_terms(problem, problem.data * w);
  return w + 2.0 * problem.c_tradeoff * (problem.data.transpose() * t.row_coeff);
}

RankingModel solve(const RankingProblem& problem, const SolverOptions& options,
                   SolveReport* report) {
  problem.validate();
  const Eigen::MatrixXd& x = problem.data;
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double c2 = 2.0 * problem.c_tradeoff;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(n);
  double f = objective_from_scores(problem, w, scores);

  SolveReport local;
  SolveReport& rep = report != nullptr ? *report : local;
  rep = SolveReport{};
  rep.objective_history.push_back(f);

  Eigen::MatrixXd laplacian(n, n);
  for (int iter = 0;; ++iter) {
    const PairTerms t = pair_terms(problem, scores);
    const Eigen::VectorXd grad = w + c2 * (x.transpose() * t.row_coeff);
    rep.gradient_norm = grad.norm();
    rep.iterations = iter;
    if (rep.gradient_norm < options.tolerance) {
      rep.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    // Generalized Hessian I + 2C X^T L X, L the Laplacian of the active pairs.
    laplacian.setZero();
    const auto add_edge = [&laplacian](std::size_t i, std::size_t j) {
      laplacian(i, i) += 1.0;
      laplacian(j, j) += 1.0;
      laplacian(i, j) -= 1.0;
      laplacian(j, i) -= 1.0;
    };
    for (const auto& [i, j] : problem.ordered_pairs) {
      if (1.0 - (scores[i] - scores[j]) > 0.0) add_edge(i, j);
    }
    for (const auto& [i, j] : problem.similar_pairs) add_edge(i, j);
    Eigen::MatrixXd hessian = c2 * (x.transpose() * laplacian * x);
    hessian.diagonal().array() += 1.0;
    const Eigen::VectorXd step = hessian.ldlt().solve(-grad);

    const double slope = grad.dot(step);
    if (!(slope < 0.0)) break;
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd w_next, scores_next;
    double f_next = f;
    while (alpha > 1e-12) {
      w_next = w + alpha * step;
      scores_next = x * w_next;
      f_next = objective_from_scores(problem, w_next, scores_next);
      if (f_next <= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    w = std::move(w_next);
    scores = std::move(scores_next);
    f = f_next;
    rep.objective_history.push_back(f);
  }
  rep.objective = f;

  RankingModel model;
  model.weights.assign(w.data(), w.data() + d);
  model.standardization = problem.standardization;
  model.c = problem.c_tradeoff;
  model.converged = rep.converged;
  model.objective = f;
  if (n > 0) {
    model.score_min = scores.minCoeff();
    model.score_max = scores.maxCoeff();
  }
  return model;
}

double rank_score(const RankingModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("feature vector has {} entries, model expects {}", x.size(),
                            model.dim()));
  }
  const Eigen::VectorXd z = model.standardization.apply(x);
  const Eigen::Map<const Eigen::VectorXd> w(model.weights.data(),
                                            static_cast<Eigen::Index>(model.weights.size()));
  return w.dot(z);
}

double normalize_attribute(const RankingModel& model, double raw_score) {
  if (!(model.score_max > model.score_min)) return 0.5;
  const double v = (raw_score - model.score_min) / (model.score_max - model.score_min);
  return std::clamp(v, 0.0, 1.0);
}

EmotionAttributeVector predict_attribute_vector(std::span<const RankingModel> models,
                                                std::span<const EmotionPair> pairs,
                                                std::span<const double> x) {
  EmotionAttributeVector out;
  out.source = EmotionAttributeVector::Source::kPredicted;
  for (const EmotionPair& pair : pairs) {
    const auto it = std::find_if(models.begin(), models.end(), [&](const RankingModel& m) {
      return m.emotion_pair == pair;
    });
    if (it == models.end()) {
      throw Error(ErrorCode::kMissingPairModel,
                  fmt::format("no ranking model for pair '{}'", pair.id()));
    }
    out.entries.emplace_back(pair, normalize_attribute(*it, rank_score(*it, x)));
  }
  return out;
}

double pairwise_accuracy(const RankingModel& model, const Eigen::MatrixXd& set_a,
                         const Eigen::MatrixXd& set_b) {
  if (set_a.rows() == 0 || set_b.rows() == 0) {
    throw Error(ErrorCode::kEmptyEmotionSet, "pairwise accuracy needs samples on both sides");
  }
  const Eigen::Map<const Eigen::VectorXd> w(model.weights.data(),
                                            static_cast<Eigen::Index>(model.weights.size()));
  const Eigen::VectorXd sa = model.standardization.apply_rows(set_a) * w;
  const Eigen::VectorXd sb = model.standardization.apply_rows(set_b) * w;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < sa.size(); ++i) {
    for (Eigen::Index j = 0; j < sb.size(); ++j) {
      if (sa[i] > sb[j]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(sa.size() * sb.size());
}

}  // namespace emomix
