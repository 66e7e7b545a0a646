#pragma once

// Fixed-seed synthetic data shared by the unit tests and the acceptance binary.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace fixture {

// Isotropic unit-variance Gaussian blob around `center`.
inline Eigen::MatrixXd blob(const Eigen::VectorXd& center, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, center.size());
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < center.size(); ++k) x(i, k) = center(k) + g(rng);
  }
  return x;
}

struct TwoClusters {
  Eigen::MatrixXd train_a, train_b, test_a, test_b;
};

// Two classes of `n_total` points in d dimensions whose means differ by
// `separation` standard deviations in every coordinate; half of each class
// is held out.
inline TwoClusters two_clusters(int n_total, int d, double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int per_class = n_total / 2;
  const int train = per_class / 2;
  const Eigen::VectorXd ca = Eigen::VectorXd::Constant(d, separation / 2.0);
  const Eigen::VectorXd cb = -ca;
  const Eigen::MatrixXd a = blob(ca, per_class, rng);
  const Eigen::MatrixXd b = blob(cb, per_class, rng);
  return {a.topRows(train), b.topRows(train), a.bottomRows(per_class - train),
          b.bottomRows(per_class - train)};
}

struct Labeled {
  Eigen::MatrixXd x;
  std::vector<int> y;
  std::vector<Eigen::VectorXd> centers;
};

// k clusters of n points each; centers on the coordinate axes at distance
// `spread`, so every pair of centers is spread * sqrt(2) apart.
inline Labeled axis_clusters(int k, int n, int d, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Labeled out;
  out.x.resize(k * n, d);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(d);
    center(c % d) = spread * (c < d ? 1.0 : -1.0);
    out.centers.push_back(center);
    out.x.middleRows(c * n, n) = blob(center, n, rng);
    for (int i = 0; i < n; ++i) out.y.push_back(c);
  }
  return out;
}

}  // namespace fixture
