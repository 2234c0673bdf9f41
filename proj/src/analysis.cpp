#include "feedloop/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace feedloop {

namespace {

constexpr double kCoefficientTolerance = 1e-12;

double signed_calibration_gap(const DiscreteJointDistribution& q,
                              const Predictor& f, const BiasMetric& metric,
                              double q_phi) {
  return q_phi - expectation(relabel(q, f), metric);
}

CalibrationEstimate from_replicates(const std::vector<double>& gaps) {
  CalibrationEstimate est;
  double sum = 0.0;
  for (double g : gaps) {
    sum += g;
  }
  est.signed_mean = sum / static_cast<double>(gaps.size());
  if (gaps.size() > 1) {
    double ss = 0.0;
    for (double g : gaps) {
      const double d = g - est.signed_mean;
      ss += d * d;
    }
    est.standard_error = std::sqrt(ss / (static_cast<double>(gaps.size()) - 1.0) /
                                   static_cast<double>(gaps.size()));
  }
  est.absolute = std::abs(est.signed_mean);
  return est;
}

// Relabels q's cells by the partition: mass p(x) lands on (x, L(x)).
DiscreteJointDistribution partition_relabeling(const Partition& partition,
                                               const Eigen::VectorXd& marginal) {
  Eigen::MatrixXd probs =
      Eigen::MatrixXd::Zero(marginal.size(), partition.num_parts);
  for (Index x = 0; x < marginal.size(); ++x) {
    probs(x, partition.assignment[static_cast<std::size_t>(x)]) = marginal[x];
  }
  return DiscreteJointDistribution(std::move(probs));
}

// Lifts a test T over (part, label) to a cell-level metric T(L(x), y).
BiasMetric lift_test(const Partition& partition, const BiasMetric& test,
                     Index num_cells) {
  Eigen::MatrixXd values(num_cells, test.num_labels());
  for (Index x = 0; x < num_cells; ++x) {
    values.row(x) =
        test.values().row(partition.assignment[static_cast<std::size_t>(x)]);
  }
  return BiasMetric(std::move(values));
}

// Enumerates multinomial count vectors over the outcome probabilities p,
// invoking visit(counts, probability) for each. Probability includes the
// multinomial coefficient.
void enumerate_multinomial(
    const Eigen::VectorXd& p, std::int64_t n,
    const std::function<void(const Eigen::VectorXi&, double)>& visit) {
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(p.size());
  std::function<void(Index, std::int64_t, double)> rec =
      [&](Index i, std::int64_t remaining, double weight) {
        if (i == p.size() - 1) {
          counts[i] = static_cast<int>(remaining);
          visit(counts, weight * std::pow(p[i], static_cast<double>(remaining)));
          return;
        }
        double choose = 1.0;  // running binomial(remaining, c)
        double p_pow = 1.0;
        for (std::int64_t c = 0; c <= remaining; ++c) {
          counts[i] = static_cast<int>(c);
          rec(i + 1, remaining - c, weight * choose * p_pow);
          choose *= static_cast<double>(remaining - c) / static_cast<double>(c + 1);
          p_pow *= p[i];
        }
        counts[i] = 0;
      };
  rec(0, n, 1.0);
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& probs) {
  Eigen::VectorXd flat(probs.size());
  for (Index x = 0; x < probs.rows(); ++x) {
    for (Index y = 0; y < probs.cols(); ++y) {
      flat[x * probs.cols() + y] = probs(x, y);
    }
  }
  return flat;
}

Eigen::MatrixXd unflatten_counts(const Eigen::VectorXi& counts, Index num_cells,
                                 Index num_labels) {
  Eigen::MatrixXd m(num_cells, num_labels);
  for (Index x = 0; x < num_cells; ++x) {
    for (Index y = 0; y < num_labels; ++y) {
      m(x, y) = static_cast<double>(counts[x * num_labels + y]);
    }
  }
  return m;
}

}  // namespace

double exact_bound_coefficient(std::int64_t t, std::int64_t n0, std::int64_t m,
                               std::int64_t k) {
  if (n0 < 1 || m < 0 || k < 0 || t < 0) {
    throw std::invalid_argument("exact_bound_coefficient: invalid parameters");
  }
  double c = 0.0;
  for (std::int64_t i = 1; i <= t; ++i) {
    const double n_i = static_cast<double>(n0 + i * (m + k));
    c = c * (n_i - static_cast<double>(m)) / n_i + static_cast<double>(k) / n_i;
  }
  return 1.0 + c;
}

std::optional<double> simplified_bound_coefficient(std::int64_t m, std::int64_t k) {
  if (m < 0 || k < 0) {
    throw std::invalid_argument("simplified_bound_coefficient: invalid parameters");
  }
  if (m == 0) {
    return std::nullopt;
  }
  return static_cast<double>(m + k) / static_cast<double>(m);
}

BoundCurve build_bound_curve(std::int64_t t_max, std::int64_t n0, std::int64_t m,
                             std::int64_t k, double delta0) {
  if (delta0 < 0.0) {
    throw std::invalid_argument("build_bound_curve: delta0 must be >= 0");
  }
  BoundCurve curve;
  curve.delta0 = delta0;
  curve.simplified_coefficient = simplified_bound_coefficient(m, k);
  curve.exact_coefficient.reserve(static_cast<std::size_t>(t_max + 1));
  double c = 0.0;
  for (std::int64_t t = 0; t <= t_max; ++t) {
    if (t > 0) {
      const double n_t = static_cast<double>(n0 + t * (m + k));
      c = c * (n_t - static_cast<double>(m)) / n_t + static_cast<double>(k) / n_t;
    }
    curve.exact_coefficient.push_back(1.0 + c);
    curve.bound_exact.push_back((1.0 + c) * delta0);
  }
  if (curve.simplified_coefficient) {
    curve.bound_simplified = *curve.simplified_coefficient * delta0;
  }
  return curve;
}

CalibrationEstimate estimate_calibration_error(const LearnerSpec& learner,
                                               const DiscreteJointDistribution& q,
                                               const BiasMetric& metric,
                                               std::int64_t n,
                                               std::int64_t replicates,
                                               std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("estimate_calibration_error: n must be >= 1");
  }
  const double q_phi = expectation(q, metric);
  if (learner.population()) {
    // Exact: no sampling anywhere.
    CalibrationEstimate est;
    est.signed_mean = signed_calibration_gap(q, fit_population(learner, q), metric, q_phi);
    est.absolute = std::abs(est.signed_mean);
    return est;
  }
  if (replicates < 1) {
    throw std::invalid_argument("estimate_calibration_error: replicates must be >= 1");
  }
  std::vector<double> gaps;
  gaps.reserve(static_cast<std::size_t>(replicates));
  for (std::int64_t r = 0; r < replicates; ++r) {
    const SeedSpec rep_seed{seed, static_cast<std::uint64_t>(r)};
    const Dataset data = draw_samples(q, static_cast<std::size_t>(n), rep_seed);
    const Predictor f = fit(learner, data, q.num_cells(), q.num_labels(), rep_seed);
    gaps.push_back(signed_calibration_gap(q, f, metric, q_phi));
  }
  return from_replicates(gaps);
}

std::vector<CalibrationEstimate> calibration_error_profile(
    const LearnerSpec& learner, const DiscreteJointDistribution& q,
    const BiasMetric& metric, std::span<const std::int64_t> sizes,
    std::int64_t replicates, std::uint64_t seed) {
  std::vector<CalibrationEstimate> out;
  out.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    out.push_back(estimate_calibration_error(
        learner, q, metric, sizes[i], replicates,
        derive_seed(seed, static_cast<std::uint64_t>(i))));
  }
  return out;
}

CoefficientBoundReport check_lemma2(std::span<const GridPoint> grid,
                                    std::int64_t t_max) {
  CoefficientBoundReport report;
  report.min_slack = std::numeric_limits<double>::infinity();
  for (const GridPoint& g : grid) {
    if (g.m < 1) {
      throw std::invalid_argument("check_lemma2 requires m >= 1 in every grid entry");
    }
    // 1 + c_t must stay at or below (m+k)/m = 1 + k/m.
    const double limit =
        static_cast<double>(g.m + g.k) / static_cast<double>(g.m);
    double c = 0.0;
    double prev_coeff = 1.0;
    for (std::int64_t t = 0; t <= t_max; ++t) {
      if (t > 0) {
        const double n_t = static_cast<double>(g.n0 + t * (g.m + g.k));
        c = c * (n_t - static_cast<double>(g.m)) / n_t +
            static_cast<double>(g.k) / n_t;
      }
      const double coeff = 1.0 + c;
      const double slack = limit - coeff;
      report.max_coefficient = std::max(report.max_coefficient, coeff);
      if (slack < report.min_slack) {
        report.min_slack = slack;
        report.worst = g;
        report.worst_t = t;
      }
      if (slack < -kCoefficientTolerance ||
          coeff < prev_coeff - kCoefficientTolerance) {
        report.passed = false;
        report.worst = g;
        report.worst_t = t;
        return report;
      }
      prev_coeff = coeff;
    }
  }
  return report;
}

void Partition::validate(Index num_cells) const {
  if (num_parts < 1) {
    throw std::invalid_argument("partition must have at least one part");
  }
  if (static_cast<Index>(assignment.size()) != num_cells) {
    throw std::invalid_argument("partition must assign every cell");
  }
  for (Index part : assignment) {
    if (part < 0 || part >= num_parts) {
      throw std::invalid_argument("partition part index out of range");
    }
  }
}

double estimate_distinguishability(const Partition& partition,
                                   const LearnerSpec& learner,
                                   const Eigen::VectorXd& p_marginal,
                                   std::int64_t n, std::int64_t trials,
                                   std::uint64_t seed) {
  partition.validate(p_marginal.size());
  if (trials < 1) {
    throw std::invalid_argument("estimate_distinguishability: trials must be >= 1");
  }
  const DiscreteJointDistribution coarse =
      partition_relabeling(partition, p_marginal);
  auto misclassification = [&](const Predictor& f) {
    double err = 0.0;
    for (Index x = 0; x < p_marginal.size(); ++x) {
      err += p_marginal[x] *
             (1.0 - f.conditional()(x, partition.assignment[static_cast<std::size_t>(x)]));
    }
    return err;
  };
  if (learner.population()) {
    return misclassification(fit_population(learner, coarse));
  }
  double total = 0.0;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    const SeedSpec trial_seed{seed, static_cast<std::uint64_t>(trial)};
    const Dataset data = draw_samples(coarse, static_cast<std::size_t>(n), trial_seed);
    const Predictor f =
        fit(learner, data, coarse.num_cells(), coarse.num_labels(), trial_seed);
    total += misclassification(f);
  }
  return total / static_cast<double>(trials);
}

FeatureCalibrationResult feature_calibration_test(
    const Partition& partition, const BiasMetric& test,
    const LearnerSpec& learner, const DiscreteJointDistribution& q,
    std::int64_t n, std::int64_t replicates, std::uint64_t seed) {
  partition.validate(q.num_cells());
  if (test.num_cells() != partition.num_parts || test.num_labels() != q.num_labels()) {
    throw std::invalid_argument("feature test must be indexed [part][label]");
  }
  const BiasMetric lifted_metric = lift_test(partition, test, q.num_cells());

  FeatureCalibrationResult result;
  // Direct estimate of |E[T(L(x), y) - T(L(x), f(x))]|, signed-then-absolute.
  if (learner.population()) {
    result.feature = estimate_calibration_error(learner, q, lifted_metric, n,
                                                replicates, seed);
  } else {
    const double q_t = expectation(q, lifted_metric);
    std::vector<double> gaps;
    gaps.reserve(static_cast<std::size_t>(replicates));
    for (std::int64_t r = 0; r < replicates; ++r) {
      const SeedSpec rep_seed{seed, static_cast<std::uint64_t>(r)};
      const Dataset data = draw_samples(q, static_cast<std::size_t>(n), rep_seed);
      const Predictor f = fit(learner, data, q.num_cells(), q.num_labels(), rep_seed);
      gaps.push_back(signed_calibration_gap(q, f, lifted_metric, q_t));
    }
    result.feature = from_replicates(gaps);
  }
  // Same quantity through the calibration-error path, on an independent seed
  // stream.
  result.lifted = estimate_calibration_error(learner, q, lifted_metric, n,
                                             replicates, derive_seed(seed, 0x10FEu));
  result.combined_error =
      std::sqrt(result.feature.standard_error * result.feature.standard_error +
                result.lifted.standard_error * result.lifted.standard_error);
  return result;
}

double brute_force_expected_bias(const DiscreteJointDistribution& p0,
                                 const LearnerSpec& learner,
                                 const BiasMetric& metric, std::int64_t n0,
                                 std::int64_t m, std::int64_t k, std::int64_t t) {
  if (t < 0 || t > 2) {
    throw std::invalid_argument("brute_force_expected_bias: t must be in [0, 2]");
  }
  const std::int64_t n_final = n0 + t * (m + k);
  if (n0 < 1 || n_final > 12) {
    throw std::invalid_argument("brute_force_expected_bias: n_t must be in [1, 12]");
  }
  if (learner.population()) {
    throw std::invalid_argument("brute_force_expected_bias: empirical learners only");
  }
  const Eigen::VectorXd p0_flat = flatten(p0.probs());

  double total = 0.0;
  std::function<void(const Eigen::MatrixXd&, double, std::int64_t)> rounds_rec =
      [&](const Eigen::MatrixXd& counts, double weight, std::int64_t round) {
        const Predictor f = fit_counts(learner, counts);
        if (round == t) {
          total += weight * expectation(relabel(p0, f), metric);
          return;
        }
        const Eigen::VectorXd model_flat = flatten(relabel(p0, f).probs());
        enumerate_multinomial(
            p0_flat, m, [&](const Eigen::VectorXi& human, double w_h) {
              const Eigen::MatrixXd with_human =
                  counts +
                  unflatten_counts(human, p0.num_cells(), p0.num_labels());
              enumerate_multinomial(
                  model_flat, k, [&](const Eigen::VectorXi& model, double w_g) {
                    rounds_rec(with_human + unflatten_counts(
                                                model, p0.num_cells(),
                                                p0.num_labels()),
                               weight * w_h * w_g, round + 1);
                  });
            });
      };
  enumerate_multinomial(p0_flat, n0, [&](const Eigen::VectorXi& initial, double w) {
    rounds_rec(unflatten_counts(initial, p0.num_cells(), p0.num_labels()), w, 0);
  });
  return total;
}

}  // namespace feedloop
