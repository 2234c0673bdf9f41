#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "feedloop/rng.hpp"

namespace feedloop {

using Eigen::Index;

inline constexpr double kMassTolerance = 1e-12;

// Exact finite joint distribution p(x, y) over cells x and labels y,
// stored as a dense [cell][label] probability matrix. Immutable after
// construction.
class DiscreteJointDistribution {
 public:
  // Validates non-negativity and total mass 1 within kMassTolerance.
  explicit DiscreteJointDistribution(Eigen::MatrixXd probs);

  Index num_cells() const { return probs_.rows(); }
  Index num_labels() const { return probs_.cols(); }
  const Eigen::MatrixXd& probs() const { return probs_; }

  // Covariate marginal p(x).
  const Eigen::VectorXd& marginal() const { return marginal_; }

  // Conditional matrix f(y|x) with rows normalized where marginal(x) > 0.
  // Rows of zero-mass cells are filled uniform; they carry no mass and are
  // ignored by relabel.
  Eigen::MatrixXd conditional() const;

  static DiscreteJointDistribution uniform(Index num_cells, Index num_labels);

 private:
  Eigen::MatrixXd probs_;
  Eigen::VectorXd marginal_;
};

enum class Provenance : std::uint8_t { human, model };

struct Sample {
  Index cell = 0;
  Index label = 0;
  Provenance provenance = Provenance::human;
};

// Ordered multiset of (cell, label) samples with per-sample provenance.
struct Dataset {
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  void append(const Dataset& other) {
    samples.insert(samples.end(), other.samples.begin(), other.samples.end());
  }
};

// Bounded bias statistic phi(x, y), one value per (cell, label).
class BiasMetric {
 public:
  explicit BiasMetric(Eigen::MatrixXd values);

  Index num_cells() const { return values_.rows(); }
  Index num_labels() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  double bound() const { return bound_; }

 private:
  Eigen::MatrixXd values_;
  double bound_;
};

// Stochastic conditional labeler f(y|x). Each row is a probability vector;
// deterministic() is true iff every row is a point mass.
class Predictor {
 public:
  explicit Predictor(Eigen::MatrixXd conditional);

  Index num_cells() const { return conditional_.rows(); }
  Index num_labels() const { return conditional_.cols(); }
  const Eigen::MatrixXd& conditional() const { return conditional_; }
  bool deterministic() const { return deterministic_; }

  // Point-mass label of a deterministic row (argmax in general).
  Index top_label(Index cell) const;

 private:
  Eigen::MatrixXd conditional_;
  bool deterministic_;
};

// E_{(x,y)~p}[phi(x,y)].
double expectation(const DiscreteJointDistribution& dist, const BiasMetric& metric);

// The relabeling of dist by f: p'(x,y) = p(x) * f(y|x). Preserves the
// covariate marginal exactly.
DiscreteJointDistribution relabel(const DiscreteJointDistribution& dist,
                                  const Predictor& f);

// Entrywise convex combination. Weights must be non-negative and sum to 1
// within kMassTolerance.
DiscreteJointDistribution mixture(std::span<const DiscreteJointDistribution> dists,
                                  std::span<const double> weights);

// n i.i.d. draws from dist via inverse-CDF; provenance tagged human.
Dataset draw_samples(const DiscreteJointDistribution& dist, std::size_t n,
                     SeedSpec seed);
Dataset draw_samples(const DiscreteJointDistribution& dist, std::size_t n,
                     std::uint64_t raw_seed);

// Draws x from dist's covariate marginal and labels it y ~ f(y|x);
// provenance tagged model.
Dataset draw_covariates_and_label(const DiscreteJointDistribution& dist,
                                  const Predictor& f, std::size_t n,
                                  std::uint64_t raw_seed);

// Normalized count matrix of a non-empty dataset.
DiscreteJointDistribution empirical_distribution(const Dataset& data,
                                                 Index num_cells,
                                                 Index num_labels);

}  // namespace feedloop
