#pragma once

// Relative emotion attributes: one linear ranking function f(x) = w . z(x) per
// emotion pair, where z standardizes x with statistics stored in the model.
// Training minimizes the squared-slack primal
//
//   1/2 |w|^2 + C * ( sum_ordered max(0, 1 - w.(z_i - z_j))^2
//                   + sum_similar (w.(z_i - z_j))^2 )
//
// with Newton steps and Armijo backtracking. Ordered pairs make every sample of
// set A outrank every sample of set B; similar pairs keep scores within a set
// close together.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "emomix/attributes.hpp"
#include "emomix/features.hpp"

namespace emomix {

struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;  // every entry > 0

  // Per-column mean and population std; near-constant columns get scale 1.
  static Standardization fit(const Eigen::MatrixXd& rows);

  std::size_t dim() const { return mean.size(); }
  Eigen::VectorXd apply(std::span<const double> x) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& rows) const;
};

using IndexPair = std::pair<std::size_t, std::size_t>;

struct RankingProblem {
  Eigen::MatrixXd data;  // standardized rows; A rows first, then B rows
  std::vector<IndexPair> ordered_pairs;  // (i, j): row i must outrank row j
  std::vector<IndexPair> similar_pairs;  // (i, j): rows i and j should tie
  double c_tradeoff = 0.1;
  std::size_t count_a = 0;
  Standardization standardization;

  // Throws InvalidArgument on out-of-range indices, overlapping pair sets or
  // c <= 0.
  void validate() const;
};

struct ProblemOptions {
  double similar_pair_factor = 4.0;  // cap on similar pairs, as a multiple of ordered pairs
  std::uint64_t seed = 20230101;
};

// Ordered pairs are the full A x B product; similar pairs are the within-A
// and within-B pairs, subsampled with a fixed seed when they exceed the cap.
// Throws EmptyEmotionSet, InvalidArgument (c <= 0) or DimensionMismatch.
RankingProblem build_problem(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b,
                             double c, const ProblemOptions& options = {});
RankingProblem build_problem(std::span<const FeatureVector> set_a,
                             std::span<const FeatureVector> set_b, double c,
                             const ProblemOptions& options = {});

struct SolverOptions {
  double tolerance = 1e-8;  // on the gradient norm
  int max_iterations = 500;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  std::vector<double> objective_history;  // objective before the first step and after each step
};

struct RankingModel {
  EmotionPair emotion_pair;
  std::vector<double> weights;
  Standardization standardization;
  double score_min = 0.0;
  double score_max = 0.0;
  double c = 0.1;
  bool converged = false;
  double objective = 0.0;

  std::size_t dim() const { return weights.size(); }
};

double primal_objective(const RankingProblem& problem, const Eigen::VectorXd& w);
Eigen::VectorXd primal_gradient(const RankingProblem& problem, const Eigen::VectorXd& w);

// Never throws on non-convergence: the best iterate comes back with
// converged = false.
RankingModel solve(const RankingProblem& problem, const SolverOptions& options = {},
                   SolveReport* report = nullptr);

// w . standardize(x). Throws DimensionMismatch.
double rank_score(const RankingModel& model, std::span<const double> x);

// Clamped min-max normalization; 0.5 when the training scores are degenerate.
double normalize_attribute(const RankingModel& model, double raw_score);

// One normalized entry per pair, in `pairs` order. Throws MissingPairModel.
EmotionAttributeVector predict_attribute_vector(std::span<const RankingModel> models,
                                                std::span<const EmotionPair> pairs,
                                                std::span<const double> x);

// Fraction of (a, b) pairs with f(a) > f(b). Rows are raw (unstandardized).
double pairwise_accuracy(const RankingModel& model, const Eigen::MatrixXd& set_a,
                         const Eigen::MatrixXd& set_b);

Eigen::MatrixXd stack_rows(std::span<const FeatureVector> rows);

}  // namespace emomix
