#include "feedloop/verify.hpp"

#include <cmath>
#include <sstream>

#include "feedloop/analysis.hpp"
#include "feedloop/feedback.hpp"
#include "feedloop/generators.hpp"

namespace feedloop {

namespace {

std::string format_params(const GridPoint& g, std::int64_t t) {
  std::ostringstream out;
  out << "n0=" << g.n0 << " m=" << g.m << " k=" << g.k << " t=" << t;
  return out.str();
}

}  // namespace

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results) {
    if (!r.passed) {
      return false;
    }
  }
  return true;
}

std::vector<CheckResult> verify_lemma2() {
  std::vector<GridPoint> grid;
  for (std::int64_t n0 : {5, 50, 500}) {
    for (std::int64_t m = 1; m <= 5; ++m) {
      for (std::int64_t k = 0; k <= 5; ++k) {
        grid.push_back({n0, m, k});
      }
    }
  }
  const CoefficientBoundReport report = check_lemma2(grid, 1000);
  std::ostringstream detail;
  if (report.passed) {
    detail << "max coefficient " << report.max_coefficient << ", min slack "
           << report.min_slack << " at " << format_params(report.worst, report.worst_t);
  } else {
    detail << "violated at " << format_params(report.worst, report.worst_t);
  }
  return {{"lemma2: 1 + c_t <= (m+k)/m and nondecreasing, grid x t<=1000",
           report.passed, detail.str()}};
}

std::vector<CheckResult> verify_oracle(std::int64_t replicates) {
  // Single cell, two labels, p(nurse) = 2/3.
  Eigen::MatrixXd probs(1, 2);
  probs << 2.0 / 3.0, 1.0 / 3.0;
  const DiscreteJointDistribution p0{probs};
  const BiasMetric nurse_fraction = class_fraction(1, 2, 0);

  std::vector<CheckResult> results;
  for (LearnerKind kind :
       {LearnerKind::empirical_argmax, LearnerKind::empirical_sampler}) {
    for (std::int64_t n0 : {1, 3}) {
      for (std::int64_t m : {0, 1}) {
        for (std::int64_t k : {0, 1}) {
          if (m + k < 1) {
            continue;
          }
          FeedbackConfig config;
          config.n0 = n0;
          config.m = m;
          config.k = k;
          config.rounds = 2;
          config.mode = FeedbackMode::accumulate;
          config.learner.kind = kind;
          config.replicates = replicates;
          config.base_seed = 0xFEEDF00Du + static_cast<std::uint64_t>(n0);
          const auto summary =
              summarize(run_feedback(config, p0, nurse_fraction));
          for (std::int64_t t = 0; t <= 2; ++t) {
            const double exact = brute_force_expected_bias(
                p0, config.learner, nurse_fraction, n0, m, k, t);
            const SummaryRow& row = summary[static_cast<std::size_t>(t)];
            const double se =
                row.model_bias_std / std::sqrt(static_cast<double>(replicates));
            const double diff = std::abs(row.model_bias_mean - exact);
            const bool ok = se > 0.0 ? diff <= 3.0 * se : diff <= 1e-12;
            std::ostringstream name;
            name << "oracle: " << to_string(kind) << " n0=" << n0 << " m=" << m
                 << " k=" << k << " t=" << t;
            std::ostringstream detail;
            detail << "enumerated " << exact << ", monte carlo "
                   << row.model_bias_mean << " (se " << se << ")";
            results.push_back({name.str(), ok, detail.str()});
          }
        }
      }
    }
  }
  return results;
}

std::vector<CheckResult> verify_fixed_points() {
  std::vector<CheckResult> results;
  for (int i = 0; i < 10; ++i) {
    const Index num_cells = 1 + i % 5;
    const Index num_labels = 2 + i % 3;
    const DiscreteJointDistribution p0 = random_distribution(
        num_cells, num_labels, 0xABCD0000u + static_cast<std::uint64_t>(i));
    Eigen::MatrixXd values(num_cells, num_labels);
    SplitMix64 rng(0x5EED0000u + static_cast<std::uint64_t>(i));
    for (Index x = 0; x < num_cells; ++x) {
      for (Index y = 0; y < num_labels; ++y) {
        values(x, y) = rng.next_double();
      }
    }
    const BiasMetric metric{std::move(values)};

    FeedbackConfig config;
    config.n0 = 10;
    config.m = 2;
    config.k = 3;
    config.rounds = 200;
    config.mode = FeedbackMode::population;
    config.learner.kind = LearnerKind::population_sampler;
    config.replicates = 1;
    const FeedbackTrajectory traj = run_feedback_replicate(config, p0, metric, 0);
    double max_amp = 0.0;
    for (const RoundRecord& rec : traj.rounds) {
      max_amp = std::max(max_amp, rec.amplification);
    }
    std::ostringstream name;
    name << "fixed_points: population_sampler dist " << i << " (" << num_cells
         << "x" << num_labels << "), t<=200";
    std::ostringstream detail;
    detail << "max |amplification| = " << max_amp;
    results.push_back({name.str(), max_amp < 1e-12, detail.str()});
  }
  return results;
}

}  // namespace feedloop
