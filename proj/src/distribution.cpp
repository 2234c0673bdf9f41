#include "feedloop/distribution.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace feedloop {

namespace {

void check_same_shape(Index r1, Index c1, Index r2, Index c2, const char* what) {
  if (r1 != r2 || c1 != c2) {
    throw std::invalid_argument(std::string("dimension mismatch in ") + what);
  }
}

// Inverse-CDF draw over a cumulative vector (last entry ~ total mass).
Index draw_index(const Eigen::VectorXd& cumulative, double u) {
  const double target = u * cumulative[cumulative.size() - 1];
  Index lo = 0, hi = cumulative.size() - 1;
  while (lo < hi) {
    const Index mid = lo + (hi - lo) / 2;
    if (cumulative[mid] <= target) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

Eigen::VectorXd cumulative_of(const Eigen::VectorXd& weights) {
  Eigen::VectorXd cum(weights.size());
  double acc = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cum[i] = acc;
  }
  return cum;
}

}  // namespace

DiscreteJointDistribution::DiscreteJointDistribution(Eigen::MatrixXd probs)
    : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) {
    throw std::invalid_argument("distribution must have at least one cell and label");
  }
  if ((probs_.array() < 0.0).any()) {
    throw std::invalid_argument("distribution entries must be non-negative");
  }
  const double total = probs_.sum();
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("distribution mass must sum to 1");
  }
  marginal_ = probs_.rowwise().sum();
}

Eigen::MatrixXd DiscreteJointDistribution::conditional() const {
  Eigen::MatrixXd cond(probs_.rows(), probs_.cols());
  const double uniform = 1.0 / static_cast<double>(probs_.cols());
  for (Index x = 0; x < probs_.rows(); ++x) {
    if (marginal_[x] > 0.0) {
      cond.row(x) = probs_.row(x) / marginal_[x];
    } else {
      cond.row(x).setConstant(uniform);
    }
  }
  return cond;
}

DiscreteJointDistribution DiscreteJointDistribution::uniform(Index num_cells,
                                                             Index num_labels) {
  Eigen::MatrixXd probs = Eigen::MatrixXd::Constant(
      num_cells, num_labels, 1.0 / static_cast<double>(num_cells * num_labels));
  return DiscreteJointDistribution(std::move(probs));
}

BiasMetric::BiasMetric(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (!values_.allFinite()) {
    throw std::invalid_argument("bias metric entries must be finite");
  }
  bound_ = values_.cwiseAbs().maxCoeff();
}

Predictor::Predictor(Eigen::MatrixXd conditional)
    : conditional_(std::move(conditional)) {
  deterministic_ = true;
  for (Index x = 0; x < conditional_.rows(); ++x) {
    const double row_sum = conditional_.row(x).sum();
    if (std::abs(row_sum - 1.0) > kMassTolerance) {
      throw std::invalid_argument("predictor rows must sum to 1");
    }
    if ((conditional_.row(x).array() < 0.0).any() ||
        (conditional_.row(x).array() > 1.0 + kMassTolerance).any()) {
      throw std::invalid_argument("predictor entries must lie in [0,1]");
    }
    if (conditional_.row(x).maxCoeff() < 1.0 - kMassTolerance) {
      deterministic_ = false;
    }
  }
}

Index Predictor::top_label(Index cell) const {
  Index best = 0;
  conditional_.row(cell).maxCoeff(&best);
  return best;
}

double expectation(const DiscreteJointDistribution& dist, const BiasMetric& metric) {
  check_same_shape(dist.num_cells(), dist.num_labels(), metric.num_cells(),
                   metric.num_labels(), "expectation");
  return (dist.probs().array() * metric.values().array()).sum();
}

DiscreteJointDistribution relabel(const DiscreteJointDistribution& dist,
                                  const Predictor& f) {
  check_same_shape(dist.num_cells(), dist.num_labels(), f.num_cells(),
                   f.num_labels(), "relabel");
  Eigen::MatrixXd probs = dist.marginal().asDiagonal() * f.conditional();
  return DiscreteJointDistribution(std::move(probs));
}

DiscreteJointDistribution mixture(std::span<const DiscreteJointDistribution> dists,
                                  std::span<const double> weights) {
  if (dists.empty() || dists.size() != weights.size()) {
    throw std::invalid_argument("mixture needs matching distribution and weight counts");
  }
  double weight_sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) {
      throw std::invalid_argument("mixture weights must be non-negative");
    }
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > kMassTolerance) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
  Eigen::MatrixXd probs =
      Eigen::MatrixXd::Zero(dists[0].num_cells(), dists[0].num_labels());
  for (std::size_t i = 0; i < dists.size(); ++i) {
    check_same_shape(dists[0].num_cells(), dists[0].num_labels(),
                     dists[i].num_cells(), dists[i].num_labels(), "mixture");
    probs += weights[i] * dists[i].probs();
  }
  // Long recursions (t in the thousands) accumulate rounding drift; renormalize
  // once it exceeds the mass tolerance.
  const double total = probs.sum();
  if (std::abs(total - 1.0) > kMassTolerance) {
    probs /= total;
  }
  return DiscreteJointDistribution(std::move(probs));
}

Dataset draw_samples(const DiscreteJointDistribution& dist, std::size_t n,
                     SeedSpec seed) {
  return draw_samples(dist, n, seed.value());
}

Dataset draw_samples(const DiscreteJointDistribution& dist, std::size_t n,
                     std::uint64_t raw_seed) {
  const Index num_labels = dist.num_labels();
  Eigen::VectorXd flat(dist.num_cells() * num_labels);
  for (Index x = 0; x < dist.num_cells(); ++x) {
    for (Index y = 0; y < num_labels; ++y) {
      flat[x * num_labels + y] = dist.probs()(x, y);
    }
  }
  const Eigen::VectorXd cum = cumulative_of(flat);
  SplitMix64 rng(raw_seed);
  Dataset data;
  data.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Index idx = draw_index(cum, rng.next_double());
    data.samples.push_back({idx / num_labels, idx % num_labels, Provenance::human});
  }
  return data;
}

Dataset draw_covariates_and_label(const DiscreteJointDistribution& dist,
                                  const Predictor& f, std::size_t n,
                                  std::uint64_t raw_seed) {
  check_same_shape(dist.num_cells(), dist.num_labels(), f.num_cells(),
                   f.num_labels(), "draw_covariates_and_label");
  const Eigen::VectorXd marginal_cum = cumulative_of(dist.marginal());
  std::vector<Eigen::VectorXd> row_cum(static_cast<std::size_t>(f.num_cells()));
  for (Index x = 0; x < f.num_cells(); ++x) {
    row_cum[static_cast<std::size_t>(x)] =
        cumulative_of(f.conditional().row(x).transpose());
  }
  SplitMix64 rng(raw_seed);
  Dataset data;
  data.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Index x = draw_index(marginal_cum, rng.next_double());
    const Index y = draw_index(row_cum[static_cast<std::size_t>(x)], rng.next_double());
    data.samples.push_back({x, y, Provenance::model});
  }
  return data;
}

DiscreteJointDistribution empirical_distribution(const Dataset& data,
                                                 Index num_cells,
                                                 Index num_labels) {
  if (data.empty()) {
    throw std::invalid_argument("empirical_distribution requires a non-empty dataset");
  }
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(num_cells, num_labels);
  for (const Sample& s : data.samples) {
    if (s.cell < 0 || s.cell >= num_cells || s.label < 0 || s.label >= num_labels) {
      throw std::invalid_argument("sample index out of range");
    }
    counts(s.cell, s.label) += 1.0;
  }
  counts /= static_cast<double>(data.size());
  return DiscreteJointDistribution(std::move(counts));
}

}  // namespace feedloop
