#pragma once

#include <string>

#include "feedloop/distribution.hpp"

namespace feedloop {

enum class LearnerKind {
  empirical_argmax,
  empirical_sampler,
  smoothed_sampler,
  interpolating_table,
  population_argmax,
  population_sampler,
};

enum class Fallback { uniform, global_mode };

// The learning algorithm A: dataset (or, in population mode, a distribution)
// to Predictor. Argmax ties always break toward the lowest label index.
struct LearnerSpec {
  LearnerKind kind = LearnerKind::empirical_argmax;
  double smoothing = 0.0;  // Laplace pseudo-count, smoothed_sampler only.
  Fallback fallback = Fallback::uniform;

  bool population() const {
    return kind == LearnerKind::population_argmax ||
           kind == LearnerKind::population_sampler;
  }
};

const char* to_string(LearnerKind kind);
const char* to_string(Fallback fallback);
LearnerKind learner_kind_from_string(const std::string& s);
Fallback fallback_from_string(const std::string& s);

// Fits an empirical learner. Pure: the seed is reserved for stochastic
// learners and is not consumed by any of the current kinds.
Predictor fit(const LearnerSpec& spec, const Dataset& data, Index num_cells,
              Index num_labels, SeedSpec seed);

// Same fit, from a per-(cell,label) count matrix. Datasets enter fitting only
// through their counts, so this is the shared core (and the entry point for
// the exhaustive enumeration oracle).
Predictor fit_counts(const LearnerSpec& spec, const Eigen::MatrixXd& counts);

// Exact population-mode fit: population_sampler returns the conditional of
// dist, population_argmax its per-cell point-mass argmax.
Predictor fit_population(const LearnerSpec& spec,
                         const DiscreteJointDistribution& dist);

}  // namespace feedloop
