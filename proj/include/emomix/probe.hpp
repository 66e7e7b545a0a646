#pragma once

// Linear softmax probe over feature vectors: multinomial logistic regression
// trained by full-batch gradient descent on mean cross-entropy plus an L2
// penalty on the weights (biases are not penalized).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emomix/ranking.hpp"

namespace emomix {

struct ProbeModel {
  Eigen::MatrixXd weights;  // K x d
  Eigen::VectorXd biases;   // K
  std::vector<std::string> emotion_labels;
  Standardization standardization;

  std::size_t num_classes() const { return emotion_labels.size(); }
  std::size_t dim() const { return standardization.dim(); }
  void validate() const;
};

struct TrainConfig {
  double learning_rate = 0.5;
  double l2_penalty = 1e-3;
  int epochs = 300;
  double noise_sigma = 0.1;  // Gaussian noise in standardized feature space
  std::uint64_t seed = 7;
};

struct TrainReport {
  std::vector<double> loss_history;  // objective at the start of each epoch, then the final one
  double step_size = 0.0;            // learning rate after the 1/L cap
};

// `labels[i]` indexes `emotion_labels`. Throws DegenerateLabels (fewer than two
// classes, or a class without samples) and DimensionMismatch.
ProbeModel train_probe(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                       const std::vector<std::string>& emotion_labels, const TrainConfig& config,
                       TrainReport* report = nullptr);

// Mean cross-entropy + l2/2 |W|^2 on already standardized rows, and its gradient.
double probe_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& biases,
                  const Eigen::MatrixXd& standardized, const std::vector<int>& labels,
                  double l2_penalty);
void probe_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& biases,
                    const Eigen::MatrixXd& standardized, const std::vector<int>& labels,
                    double l2_penalty, Eigen::MatrixXd& grad_weights, Eigen::VectorXd& grad_biases);

// Softmax class probabilities. Throws DimensionMismatch.
std::vector<double> classify(const ProbeModel& model, std::span<const double> x);

// classify() at `steps` evenly spaced points from start to end (inclusive).
std::vector<std::vector<double>> probability_sweep(const ProbeModel& model,
                                                   std::span<const double> start,
                                                   std::span<const double> end, int steps);

}  // namespace emomix
