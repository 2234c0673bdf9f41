#include "feedloop/learners.hpp"

#include <stdexcept>

namespace feedloop {

namespace {

// First maximal entry, scanning left to right (ties to lowest index).
Index argmax_lowest(const Eigen::RowVectorXd& row) {
  Index best = 0;
  for (Index y = 1; y < row.size(); ++y) {
    if (row[y] > row[best]) {
      best = y;
    }
  }
  return best;
}

Eigen::RowVectorXd point_mass(Index num_labels, Index label) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(num_labels);
  row[label] = 1.0;
  return row;
}

}  // namespace

const char* to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::empirical_argmax: return "empirical_argmax";
    case LearnerKind::empirical_sampler: return "empirical_sampler";
    case LearnerKind::smoothed_sampler: return "smoothed_sampler";
    case LearnerKind::interpolating_table: return "interpolating_table";
    case LearnerKind::population_argmax: return "population_argmax";
    case LearnerKind::population_sampler: return "population_sampler";
  }
  return "unknown";
}

const char* to_string(Fallback fallback) {
  return fallback == Fallback::uniform ? "uniform" : "global_mode";
}

LearnerKind learner_kind_from_string(const std::string& s) {
  if (s == "empirical_argmax") return LearnerKind::empirical_argmax;
  if (s == "empirical_sampler") return LearnerKind::empirical_sampler;
  if (s == "smoothed_sampler") return LearnerKind::smoothed_sampler;
  if (s == "interpolating_table") return LearnerKind::interpolating_table;
  if (s == "population_argmax") return LearnerKind::population_argmax;
  if (s == "population_sampler") return LearnerKind::population_sampler;
  throw std::invalid_argument("unknown learner kind: " + s);
}

Fallback fallback_from_string(const std::string& s) {
  if (s == "uniform") return Fallback::uniform;
  if (s == "global_mode") return Fallback::global_mode;
  throw std::invalid_argument("unknown fallback: " + s);
}

Predictor fit(const LearnerSpec& spec, const Dataset& data, Index num_cells,
              Index num_labels, SeedSpec /*seed*/) {
  if (spec.population()) {
    throw std::invalid_argument("population learners fit distributions, not datasets; use fit_population");
  }
  if (data.empty()) {
    throw std::invalid_argument("empirical learners require a non-empty dataset");
  }
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(num_cells, num_labels);
  for (const Sample& s : data.samples) {
    if (s.cell < 0 || s.cell >= num_cells || s.label < 0 || s.label >= num_labels) {
      throw std::invalid_argument("sample index out of range");
    }
    counts(s.cell, s.label) += 1.0;
  }
  return fit_counts(spec, counts);
}

Predictor fit_counts(const LearnerSpec& spec, const Eigen::MatrixXd& counts) {
  if (spec.population()) {
    throw std::invalid_argument("population learners fit distributions, not datasets; use fit_population");
  }
  if (spec.kind == LearnerKind::smoothed_sampler && spec.smoothing <= 0.0) {
    throw std::invalid_argument("smoothed_sampler requires smoothing > 0");
  }
  const Index num_cells = counts.rows();
  const Index num_labels = counts.cols();
  if ((counts.array() < 0.0).any() || counts.sum() < 1.0) {
    throw std::invalid_argument("fit_counts requires non-negative counts with at least one sample");
  }

  Eigen::RowVectorXd fallback_row;
  if (spec.fallback == Fallback::uniform) {
    fallback_row = Eigen::RowVectorXd::Constant(num_labels, 1.0 / static_cast<double>(num_labels));
  } else {
    fallback_row = point_mass(num_labels, argmax_lowest(counts.colwise().sum()));
  }

  Eigen::MatrixXd cond(num_cells, num_labels);
  for (Index x = 0; x < num_cells; ++x) {
    const double total = counts.row(x).sum();
    if (total == 0.0) {
      cond.row(x) = fallback_row;
      continue;
    }
    switch (spec.kind) {
      case LearnerKind::empirical_argmax:
        cond.row(x) = point_mass(num_labels, argmax_lowest(counts.row(x)));
        break;
      case LearnerKind::empirical_sampler:
      case LearnerKind::interpolating_table:
        // In the tabular limit an interpolating memorizer answers with a
        // uniformly drawn stored label, which is exactly the empirical
        // conditional.
        cond.row(x) = counts.row(x) / total;
        break;
      case LearnerKind::smoothed_sampler:
        cond.row(x) = (counts.row(x).array() + spec.smoothing) /
                      (total + spec.smoothing * static_cast<double>(num_labels));
        break;
      default:
        throw std::logic_error("unreachable learner kind");
    }
  }
  return Predictor(std::move(cond));
}

Predictor fit_population(const LearnerSpec& spec,
                         const DiscreteJointDistribution& dist) {
  if (!spec.population()) {
    throw std::invalid_argument("fit_population requires a population learner kind");
  }
  Eigen::MatrixXd cond = dist.conditional();
  if (spec.kind == LearnerKind::population_argmax) {
    for (Index x = 0; x < cond.rows(); ++x) {
      cond.row(x) = point_mass(cond.cols(), argmax_lowest(cond.row(x)));
    }
  }
  return Predictor(std::move(cond));
}

}  // namespace feedloop
