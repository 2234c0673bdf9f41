#include "feedloop/feedback.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace feedloop {

namespace {

// Per-round stream tags, so human draws, model draws, subsampling, and
// refitting never share an RNG stream.
enum StreamTag : std::uint64_t { kHuman = 0, kModel = 1, kSubsample = 2, kFit = 3 };

std::uint64_t round_seed(std::uint64_t rep_seed, std::int64_t t, StreamTag tag) {
  return derive_seed(rep_seed, 4 * static_cast<std::uint64_t>(t) + tag);
}

double analytic_model_bias(const DiscreteJointDistribution& p0,
                           const Predictor& f, const BiasMetric& metric) {
  return expectation(relabel(p0, f), metric);
}

double analytic_accuracy(const DiscreteJointDistribution& p0, const Predictor& f) {
  // sum_x p0(x) sum_y f(y|x) p0(y|x) = sum_{x,y} f(y|x) p0(x,y)
  return (f.conditional().array() * p0.probs().array()).sum();
}

RoundRecord make_record(std::int64_t n_t, const DiscreteJointDistribution& p0,
                        const Predictor& f, const BiasMetric& metric,
                        double p0_phi, double dataset_bias) {
  RoundRecord rec;
  rec.n_t = n_t;
  rec.model_bias = analytic_model_bias(p0, f, metric);
  rec.dataset_bias = dataset_bias;
  rec.amplification = std::abs(p0_phi - rec.model_bias);
  rec.accuracy = analytic_accuracy(p0, f);
  return rec;
}

// Uniform without-replacement subsample via partial Fisher-Yates.
Dataset subsample_without_replacement(const Dataset& data, std::size_t n,
                                      std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  SplitMix64 rng(seed);
  Dataset out;
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.next_double() * static_cast<double>(order.size() - i));
    std::swap(order[i], order[j]);
    out.samples.push_back(data.samples[order[i]]);
  }
  return out;
}

FeedbackTrajectory run_population(const FeedbackConfig& config,
                                  const DiscreteJointDistribution& p0,
                                  const BiasMetric& metric) {
  const double p0_phi = expectation(p0, metric);
  FeedbackTrajectory traj;
  traj.rounds.reserve(static_cast<std::size_t>(config.rounds + 1));
  DiscreteJointDistribution current = p0;
  for (std::int64_t t = 0; t <= config.rounds; ++t) {
    const Predictor f = fit_population(config.learner, current);
    traj.rounds.push_back(make_record(config.n_at(t), p0, f, metric, p0_phi,
                                      expectation(current, metric)));
    if (t == config.rounds) {
      break;
    }
    const double n_t = static_cast<double>(config.n_at(t));
    const double n_next = static_cast<double>(config.n_at(t + 1));
    const std::array<DiscreteJointDistribution, 3> parts = {current, p0,
                                                            relabel(p0, f)};
    const std::array<double, 3> weights = {n_t / n_next,
                                           static_cast<double>(config.m) / n_next,
                                           static_cast<double>(config.k) / n_next};
    current = mixture(parts, weights);
  }
  return traj;
}

FeedbackTrajectory run_fresh_draw(const FeedbackConfig& config,
                                  const DiscreteJointDistribution& p0,
                                  const BiasMetric& metric,
                                  std::uint64_t rep_seed) {
  const double p0_phi = expectation(p0, metric);
  FeedbackTrajectory traj;
  DiscreteJointDistribution current = p0;
  Dataset data = draw_samples(current, static_cast<std::size_t>(config.n0),
                              round_seed(rep_seed, 0, kHuman));
  Predictor f = fit(config.learner, data, p0.num_cells(), p0.num_labels(),
                    SeedSpec{round_seed(rep_seed, 0, kFit), 0});
  traj.rounds.push_back(
      make_record(config.n0, p0, f, metric, p0_phi,
                  expectation(empirical_distribution(data, p0.num_cells(),
                                                     p0.num_labels()),
                              metric)));
  for (std::int64_t t = 1; t <= config.rounds; ++t) {
    // P_t as an exact matrix; equal in law to flattening the mixture over all
    // past relabelings.
    const double n_prev = static_cast<double>(config.n_at(t - 1));
    const double n_t = static_cast<double>(config.n_at(t));
    const std::array<DiscreteJointDistribution, 3> parts = {current, p0,
                                                            relabel(p0, f)};
    const std::array<double, 3> weights = {n_prev / n_t,
                                           static_cast<double>(config.m) / n_t,
                                           static_cast<double>(config.k) / n_t};
    current = mixture(parts, weights);
    data = draw_samples(current, static_cast<std::size_t>(config.n_at(t)),
                        round_seed(rep_seed, t, kHuman));
    f = fit(config.learner, data, p0.num_cells(), p0.num_labels(),
            SeedSpec{round_seed(rep_seed, t, kFit), 0});
    traj.rounds.push_back(
        make_record(config.n_at(t), p0, f, metric, p0_phi,
                    expectation(empirical_distribution(data, p0.num_cells(),
                                                       p0.num_labels()),
                                metric)));
  }
  return traj;
}

FeedbackTrajectory run_accumulate(const FeedbackConfig& config,
                                  const DiscreteJointDistribution& p0,
                                  const BiasMetric& metric,
                                  std::uint64_t rep_seed) {
  const bool subsampled = config.mode == FeedbackMode::worst_case_subsample;
  const double p0_phi = expectation(p0, metric);
  FeedbackTrajectory traj;
  Dataset data = draw_samples(p0, static_cast<std::size_t>(config.n0),
                              round_seed(rep_seed, 0, kHuman));
  Predictor f = fit(config.learner, data, p0.num_cells(), p0.num_labels(),
                    SeedSpec{round_seed(rep_seed, 0, kFit), 0});
  traj.rounds.push_back(
      make_record(config.n0, p0, f, metric, p0_phi,
                  expectation(empirical_distribution(data, p0.num_cells(),
                                                     p0.num_labels()),
                              metric)));
  for (std::int64_t t = 1; t <= config.rounds; ++t) {
    if (config.m > 0) {
      data.append(draw_samples(p0, static_cast<std::size_t>(config.m),
                               round_seed(rep_seed, t, kHuman)));
    }
    if (config.k > 0) {
      data.append(draw_covariates_and_label(p0, f,
                                            static_cast<std::size_t>(config.k),
                                            round_seed(rep_seed, t, kModel)));
    }
    Dataset subsample_storage;
    const Dataset* fitted_ptr = &data;
    if (subsampled) {
      subsample_storage = subsample_without_replacement(
          data, static_cast<std::size_t>(config.n0),
          round_seed(rep_seed, t, kSubsample));
      fitted_ptr = &subsample_storage;
    }
    const Dataset& fitted = *fitted_ptr;
    f = fit(config.learner, fitted, p0.num_cells(), p0.num_labels(),
            SeedSpec{round_seed(rep_seed, t, kFit), 0});
    traj.rounds.push_back(make_record(
        static_cast<std::int64_t>(fitted.size()), p0, f, metric, p0_phi,
        expectation(
            empirical_distribution(fitted, p0.num_cells(), p0.num_labels()),
            metric)));
  }
  return traj;
}

}  // namespace

const char* to_string(FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::accumulate: return "accumulate";
    case FeedbackMode::fresh_draw: return "fresh_draw";
    case FeedbackMode::worst_case_subsample: return "worst_case_subsample";
    case FeedbackMode::population: return "population";
  }
  return "unknown";
}

FeedbackMode feedback_mode_from_string(const std::string& s) {
  if (s == "accumulate") return FeedbackMode::accumulate;
  if (s == "fresh_draw") return FeedbackMode::fresh_draw;
  if (s == "worst_case_subsample") return FeedbackMode::worst_case_subsample;
  if (s == "population") return FeedbackMode::population;
  throw std::invalid_argument("unknown feedback mode: " + s);
}

void FeedbackConfig::validate() const {
  if (n0 < 1) throw std::invalid_argument("feedback.n0 must be >= 1");
  if (m < 0) throw std::invalid_argument("feedback.m must be >= 0");
  if (k < 0) throw std::invalid_argument("feedback.k must be >= 0");
  if (m + k < 1) throw std::invalid_argument("feedback.m + feedback.k must be >= 1");
  if (rounds < 0) throw std::invalid_argument("feedback.rounds must be >= 0");
  if (replicates < 1) throw std::invalid_argument("feedback.replicates must be >= 1");
  if ((mode == FeedbackMode::population) != learner.population()) {
    throw std::invalid_argument(
        mode == FeedbackMode::population
            ? "feedback.learner: population mode requires a population learner kind"
            : "feedback.learner: empirical modes require an empirical learner kind");
  }
}

FeedbackTrajectory run_feedback_replicate(const FeedbackConfig& config,
                                          const DiscreteJointDistribution& p0,
                                          const BiasMetric& metric,
                                          std::uint64_t replicate_index) {
  config.validate();
  if (p0.num_cells() != metric.num_cells() ||
      p0.num_labels() != metric.num_labels()) {
    throw std::invalid_argument("distribution and metric dimensions must match");
  }
  const std::uint64_t rep_seed =
      SeedSpec{config.base_seed, replicate_index}.value();
  switch (config.mode) {
    case FeedbackMode::population:
      return run_population(config, p0, metric);
    case FeedbackMode::fresh_draw:
      return run_fresh_draw(config, p0, metric, rep_seed);
    case FeedbackMode::accumulate:
    case FeedbackMode::worst_case_subsample:
      return run_accumulate(config, p0, metric, rep_seed);
  }
  throw std::logic_error("unreachable feedback mode");
}

std::vector<FeedbackTrajectory> run_feedback(const FeedbackConfig& config,
                                             const DiscreteJointDistribution& p0,
                                             const BiasMetric& metric,
                                             int threads) {
  config.validate();
  const std::size_t replicates = static_cast<std::size_t>(config.replicates);
  std::vector<FeedbackTrajectory> out(replicates);
  if (threads <= 1 || replicates <= 1) {
    for (std::size_t r = 0; r < replicates; ++r) {
      out[r] = run_feedback_replicate(config, p0, metric, r);
    }
    return out;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), replicates);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < replicates; r += workers) {
        out[r] = run_feedback_replicate(config, p0, metric, r);
      }
    });
  }
  for (std::thread& th : pool) {
    th.join();
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<FeedbackTrajectory>& trajectories) {
  if (trajectories.empty()) {
    throw std::invalid_argument("summarize requires at least one trajectory");
  }
  const std::size_t num_rounds = trajectories[0].rounds.size();
  for (const FeedbackTrajectory& traj : trajectories) {
    if (traj.rounds.size() != num_rounds) {
      throw std::invalid_argument("summarize requires equal-length trajectories");
    }
  }
  const double n = static_cast<double>(trajectories.size());
  std::vector<SummaryRow> rows(num_rounds);
  for (std::size_t t = 0; t < num_rounds; ++t) {
    SummaryRow& row = rows[t];
    row.n_t = trajectories[0].rounds[t].n_t;
    auto mean_std = [&](auto field, double& mean, double& std_dev) {
      double sum = 0.0;
      for (const FeedbackTrajectory& traj : trajectories) {
        sum += traj.rounds[t].*field;
      }
      mean = sum / n;
      double ss = 0.0;
      for (const FeedbackTrajectory& traj : trajectories) {
        const double d = traj.rounds[t].*field - mean;
        ss += d * d;
      }
      std_dev = trajectories.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    };
    mean_std(&RoundRecord::model_bias, row.model_bias_mean, row.model_bias_std);
    mean_std(&RoundRecord::dataset_bias, row.dataset_bias_mean, row.dataset_bias_std);
    mean_std(&RoundRecord::amplification, row.amplification_mean, row.amplification_std);
    mean_std(&RoundRecord::accuracy, row.accuracy_mean, row.accuracy_std);
  }
  return rows;
}

}  // namespace feedloop
