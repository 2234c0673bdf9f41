#pragma once

#include <optional>
#include <vector>

#include "feedloop/distribution.hpp"
#include "feedloop/learners.hpp"

namespace feedloop {

// Exact amplification coefficient 1 + sum_{i=1}^t (k/n_i) prod_{j=i+1}^t
// (n_j - m)/n_j, evaluated by the forward recursion
// c_t = c_{t-1} (n_t - m)/n_t + k/n_t with c_0 = 0. O(t) time.
double exact_bound_coefficient(std::int64_t t, std::int64_t n0, std::int64_t m,
                               std::int64_t k);

// (m + k)/m; nullopt when m = 0 (the simplified bound is vacuous).
std::optional<double> simplified_bound_coefficient(std::int64_t m, std::int64_t k);

// Amplification bound as a function of round t: coefficients times an
// estimated initial calibration error delta0. The empirical delta0 is a
// lower bound on the true consistent calibration error, so the curve is a
// heuristic prediction rather than a certified bound.
struct BoundCurve {
  std::vector<double> exact_coefficient;          // index = t
  std::optional<double> simplified_coefficient;   // nullopt when m = 0
  double delta0 = 0.0;
  std::vector<double> bound_exact;                // exact_coefficient * delta0
  std::optional<double> bound_simplified;         // (m+k)/m * delta0
};

BoundCurve build_bound_curve(std::int64_t t_max, std::int64_t n0, std::int64_t m,
                             std::int64_t k, double delta0);

// Monte Carlo estimate of the calibration gap of a learner on distribution q:
// the signed gap q phi - q_hat(f) phi is averaged over replicates first, and
// the absolute value taken of the mean (not per replicate, which would
// overestimate). Population learners are computed exactly.
struct CalibrationEstimate {
  double signed_mean = 0.0;
  double standard_error = 0.0;
  double absolute = 0.0;
};

CalibrationEstimate estimate_calibration_error(const LearnerSpec& learner,
                                               const DiscreteJointDistribution& q,
                                               const BiasMetric& metric,
                                               std::int64_t n,
                                               std::int64_t replicates,
                                               std::uint64_t seed);

// delta_n on a grid of dataset sizes, for inspecting whether calibration
// error is monotone non-increasing in n (an assumption of the stability
// bound, not something the library verifies automatically).
std::vector<CalibrationEstimate> calibration_error_profile(
    const LearnerSpec& learner, const DiscreteJointDistribution& q,
    const BiasMetric& metric, std::span<const std::int64_t> sizes,
    std::int64_t replicates, std::uint64_t seed);

struct GridPoint {
  std::int64_t n0 = 0;
  std::int64_t m = 0;
  std::int64_t k = 0;
};

// Checks, for every grid point and t <= t_max, that the exact coefficient is
// nondecreasing in t and never exceeds (m+k)/m + 1e-12.
struct CoefficientBoundReport {
  bool passed = true;
  double min_slack = 0.0;       // min over grid of (m+k)/m - coefficient
  double max_coefficient = 0.0;
  GridPoint worst;              // parameters at the minimum slack (or first failure)
  std::int64_t worst_t = 0;
};

CoefficientBoundReport check_lemma2(std::span<const GridPoint> grid,
                                    std::int64_t t_max);

// Coarsening of the cell domain into parts.
struct Partition {
  std::vector<Index> assignment;  // cell index -> part index
  Index num_parts = 1;

  void validate(Index num_cells) const;
};

// Monte Carlo estimate of 1 - P[f(x) = L(x)] when the learner is trained on
// the partition-relabeled distribution: per trial, the exact misclassification
// mass sum_x p(x) (1 - f(L(x)|x)) of a model fit on n samples.
double estimate_distinguishability(const Partition& partition,
                                   const LearnerSpec& learner,
                                   const Eigen::VectorXd& p_marginal,
                                   std::int64_t n, std::int64_t trials,
                                   std::uint64_t seed);

// Feature-calibration discrepancy |E[T(L(x), y) - T(L(x), f(x))]| for a
// bounded test T over (part, label), plus the same quantity routed through
// estimate_calibration_error with the lifted metric phi(x,y) = T(L(x), y).
// The two must agree within combined Monte Carlo error; the estimates use
// independent seed streams so the comparison is informative.
struct FeatureCalibrationResult {
  CalibrationEstimate feature;   // direct estimate over (part, label)
  CalibrationEstimate lifted;    // via phi(x,y) = T(L(x), y)
  double combined_error = 0.0;   // sqrt of summed squared standard errors
};

FeatureCalibrationResult feature_calibration_test(
    const Partition& partition, const BiasMetric& test,
    const LearnerSpec& learner, const DiscreteJointDistribution& q,
    std::int64_t n, std::int64_t replicates, std::uint64_t seed);

// Exact E[relabel(p0, f_t) phi] under the accumulate-mode feedback procedure,
// by exhaustive enumeration of every dataset realization (as count vectors
// with multinomial weights), recursing through rounds. Only feasible for tiny
// instances; enforced limits n_t <= 12 and t <= 2.
double brute_force_expected_bias(const DiscreteJointDistribution& p0,
                                 const LearnerSpec& learner,
                                 const BiasMetric& metric, std::int64_t n0,
                                 std::int64_t m, std::int64_t k, std::int64_t t);

}  // namespace feedloop
