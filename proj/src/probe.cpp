#include "emomix/probe.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "emomix/error.hpp"

namespace emomix {

void ProbeModel::validate() const {
  const auto k = static_cast<Eigen::Index>(emotion_labels.size());
  if (k < 2) throw Error(ErrorCode::kDegenerateLabels, "probe needs at least two classes");
  if (weights.rows() != k || biases.size() != k ||
      static_cast<std::size_t>(weights.cols()) != standardization.dim() ||
      standardization.scale.size() != standardization.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "probe parameters have inconsistent shapes");
  }
  if (!weights.allFinite() || !biases.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "probe parameters must be finite");
  }
}

namespace {

// Row-wise softmax of logits (n x K), numerically stabilized.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - top).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Eigen::MatrixXd logits_of(const Eigen::MatrixXd& weights, const Eigen::VectorXd& biases,
                          const Eigen::MatrixXd& x) {
  Eigen::MatrixXd logits = x * weights.transpose();
  logits.rowwise() += biases.transpose();
  return logits;
}

}  // namespace

double probe_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& biases,
                  const Eigen::MatrixXd& standardized, const std::vector<int>& labels,
                  double l2_penalty) {
  const Eigen::MatrixXd logits = logits_of(weights, biases, standardized);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
    total += lse - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows()) + 0.5 * l2_penalty * weights.squaredNorm();
}

void probe_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& biases,
                    const Eigen::MatrixXd& standardized, const std::vector<int>& labels,
                    double l2_penalty, Eigen::MatrixXd& grad_weights,
                    Eigen::VectorXd& grad_biases) {
  Eigen::MatrixXd residual = softmax_rows(logits_of(weights, biases, standardized));
  for (Eigen::Index i = 0; i < residual.rows(); ++i) {
    residual(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  const auto n = static_cast<double>(standardized.rows());
  grad_weights = residual.transpose() * standardized / n + l2_penalty * weights;
  grad_biases = residual.colwise().sum().transpose() / n;
}

ProbeModel train_probe(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                       const std::vector<std::string>& emotion_labels, const TrainConfig& config,
                       TrainReport* report) {
  const auto k = static_cast<Eigen::Index>(emotion_labels.size());
  if (k < 2) throw Error(ErrorCode::kDegenerateLabels, "probe needs at least two classes");
  if (static_cast<std::size_t>(features.rows()) != labels.size() || features.rows() == 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("{} feature rows but {} labels", features.rows(), labels.size()));
  }
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int label : labels) {
    if (label < 0 || label >= k) {
      throw Error(ErrorCode::kDegenerateLabels, fmt::format("label index {} out of range", label));
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw Error(ErrorCode::kDegenerateLabels,
                  fmt::format("class '{}' has no samples", emotion_labels[c]));
    }
  }
  if (!(config.learning_rate > 0.0) || config.l2_penalty < 0.0 || config.epochs < 1 ||
      config.noise_sigma < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid probe training configuration");
  }

  ProbeModel model;
  model.emotion_labels = emotion_labels;
  model.standardization = Standardization::fit(features);
  const Eigen::MatrixXd x = model.standardization.apply_rows(features);
  const auto n = static_cast<double>(x.rows());
  model.weights = Eigen::MatrixXd::Zero(k, x.cols());
  model.biases = Eigen::VectorXd::Zero(k);

  // The cross-entropy Hessian is bounded by 0.5 * (X~^T X~ / n) with X~ = [X 1],
  // so a step of at most 1 / L never increases the loss.
  const Eigen::MatrixXd gram = x.transpose() * x / n;
  const double top_eig =
      gram.size() > 0 ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .maxCoeff()
                      : 0.0;
  const double lipschitz = 0.5 * (top_eig + 1.0) + config.l2_penalty;
  const double step = std::min(config.learning_rate, 1.0 / lipschitz);

  TrainReport local;
  TrainReport& rep = report != nullptr ? *report : local;
  rep = TrainReport{};
  rep.step_size = step;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd noisy(x.rows(), x.cols());
  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rep.loss_history.push_back(probe_loss(model.weights, model.biases, x, labels,
                                          config.l2_penalty));
    const Eigen::MatrixXd* input = &x;
    if (config.noise_sigma > 0.0) {
      for (Eigen::Index j = 0; j < noisy.cols(); ++j) {
        for (Eigen::Index i = 0; i < noisy.rows(); ++i) {
          noisy(i, j) = x(i, j) + config.noise_sigma * gauss(rng);
        }
      }
      input = &noisy;
    }
    probe_gradient(model.weights, model.biases, *input, labels, config.l2_penalty, grad_w,
                   grad_b);
    model.weights -= step * grad_w;
    model.biases -= step * grad_b;
  }
  rep.loss_history.push_back(
      probe_loss(model.weights, model.biases, x, labels, config.l2_penalty));
  return model;
}

std::vector<double> classify(const ProbeModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("feature vector has {} entries, probe expects {}", x.size(),
                            model.dim()));
  }
  const Eigen::VectorXd z = model.standardization.apply(x);
  const Eigen::VectorXd logits = model.weights * z + model.biases;
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp();
  e /= e.sum();
  return {e.data(), e.data() + e.size()};
}

std::vector<std::vector<double>> probability_sweep(const ProbeModel& model,
                                                   std::span<const double> start,
                                                   std::span<const double> end, int steps) {
  if (steps < 2) throw Error(ErrorCode::kInvalidArgument, "a sweep needs at least 2 steps");
  if (start.size() != end.size() || start.size() != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "sweep endpoints do not match the probe dimension");
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  std::vector<double> point(start.size());
  for (int s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
    for (std::size_t k = 0; k < start.size(); ++k) point[k] = (1.0 - t) * start[k] + t * end[k];
    rows.push_back(classify(model, point));
  }
  return rows;
}

}  // namespace emomix
