#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "feedloop/distribution.hpp"
#include "feedloop/learners.hpp"

namespace feedloop {

enum class FeedbackMode {
  accumulate,            // grow the dataset, refit each round
  fresh_draw,            // redraw S_t ~ P_t^{n_t} from the exact mixture
  worst_case_subsample,  // accumulate, but fit on an n0-sized subsample
  population,            // exact distribution propagation, no sampling
};

const char* to_string(FeedbackMode mode);
FeedbackMode feedback_mode_from_string(const std::string& s);

struct FeedbackConfig {
  std::int64_t n0 = 1;
  std::int64_t m = 0;
  std::int64_t k = 0;
  std::int64_t rounds = 0;
  FeedbackMode mode = FeedbackMode::accumulate;
  LearnerSpec learner;
  std::int64_t replicates = 1;
  std::uint64_t base_seed = 0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  std::int64_t n_at(std::int64_t t) const { return n0 + t * (m + k); }
};

struct RoundRecord {
  std::int64_t n_t = 0;       // size of the fitted training set
  double model_bias = 0.0;    // E_{x~P0}[phi(x, f_t(x))], computed analytically
  double dataset_bias = 0.0;  // phi-expectation of the round's training data
  double amplification = 0.0; // |P0 phi - model_bias|
  double accuracy = 0.0;      // sum_x p0(x) sum_y f_t(y|x) p0(y|x)
};

struct FeedbackTrajectory {
  std::vector<RoundRecord> rounds;  // length rounds + 1, index = t
};

// One replicate of the data feedback procedure. Deterministic given
// (config.base_seed, replicate_index).
FeedbackTrajectory run_feedback_replicate(const FeedbackConfig& config,
                                          const DiscreteJointDistribution& p0,
                                          const BiasMetric& metric,
                                          std::uint64_t replicate_index);

// All replicates, optionally in parallel. Results are indexed by replicate
// and independent of scheduling order.
std::vector<FeedbackTrajectory> run_feedback(const FeedbackConfig& config,
                                             const DiscreteJointDistribution& p0,
                                             const BiasMetric& metric,
                                             int threads = 1);

struct SummaryRow {
  std::int64_t n_t = 0;
  double model_bias_mean = 0.0, model_bias_std = 0.0;
  double dataset_bias_mean = 0.0, dataset_bias_std = 0.0;
  double amplification_mean = 0.0, amplification_std = 0.0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
};

// Per-round mean and unbiased sample standard deviation across replicates.
std::vector<SummaryRow> summarize(const std::vector<FeedbackTrajectory>& trajectories);

}  // namespace feedloop
