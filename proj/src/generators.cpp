#include "feedloop/generators.hpp"

#include <stdexcept>

namespace feedloop {

DiscreteJointDistribution label_imbalance(Index num_labels, Index majority_label,
                                          double majority_prob, double cell_noise,
                                          Index num_cells) {
  if (num_labels < 2) {
    throw std::invalid_argument("label_imbalance requires at least 2 labels");
  }
  if (majority_label < 0 || majority_label >= num_labels) {
    throw std::invalid_argument("majority_label out of range");
  }
  if (majority_prob <= 0.0 || majority_prob >= 1.0) {
    throw std::invalid_argument("majority_prob must lie in (0,1)");
  }
  if (cell_noise < 0.0 || cell_noise > 1.0) {
    throw std::invalid_argument("cell_noise must lie in [0,1]");
  }
  if (num_cells == 0) {
    num_cells = num_labels;
  }
  if (num_cells % num_labels != 0) {
    throw std::invalid_argument("num_cells must be a multiple of num_labels");
  }
  const double minority_prob =
      (1.0 - majority_prob) / static_cast<double>(num_labels - 1);
  const double home_cells = static_cast<double>(num_cells / num_labels);

  Eigen::MatrixXd probs(num_cells, num_labels);
  for (Index c = 0; c < num_cells; ++c) {
    for (Index y = 0; y < num_labels; ++y) {
      const double label_mass = (y == majority_label) ? majority_prob : minority_prob;
      const double home = (c % num_labels == y) ? (1.0 - cell_noise) / home_cells : 0.0;
      probs(c, y) = label_mass * (home + cell_noise / static_cast<double>(num_cells));
    }
  }
  return DiscreteJointDistribution(std::move(probs));
}

BiasMetric class_fraction(Index num_cells, Index num_labels, Index target_label) {
  if (target_label < 0 || target_label >= num_labels) {
    throw std::invalid_argument("target_label out of range");
  }
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(num_cells, num_labels);
  values.col(target_label).setOnes();
  return BiasMetric(std::move(values));
}

DiscreteJointDistribution random_distribution(Index num_cells, Index num_labels,
                                              std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::MatrixXd probs(num_cells, num_labels);
  for (Index x = 0; x < num_cells; ++x) {
    for (Index y = 0; y < num_labels; ++y) {
      probs(x, y) = rng.next_double() + 1e-6;
    }
  }
  probs /= probs.sum();
  return DiscreteJointDistribution(std::move(probs));
}

}  // namespace feedloop
