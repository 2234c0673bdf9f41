// Acceptance gate: one pass/fail line per criterion, exit 0 only if all pass.
// argv[1] must be the path to the feedloop CLI binary (used by criterion 10).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "feedloop/analysis.hpp"
#include "feedloop/feedback.hpp"
#include "feedloop/generators.hpp"
#include "feedloop/io.hpp"
#include "feedloop/verify.hpp"

using namespace feedloop;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool passed, const std::string& detail) {
  std::printf("%s  criterion %2d  %-28s %s\n", passed ? "PASS" : "FAIL", criterion,
              name, detail.c_str());
  if (!passed) {
    ++g_failures;
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

DiscreteJointDistribution nurse_toy() {
  Eigen::MatrixXd probs(1, 2);
  probs << 2.0 / 3.0, 1.0 / 3.0;
  return DiscreteJointDistribution(probs);
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

// Shared setting for criteria 5-8: many weakly informative cells so the
// round-0 argmax flips a fraction of cells to the majority label, human data
// slowly corrects the flips, and model-labeled data makes them sticky.
struct OrderingSetting {
  DiscreteJointDistribution p0 = label_imbalance(10, 0, 0.5, 0.5, 500);
  BiasMetric metric = class_fraction(500, 10, 0);
  double p0_phi = expectation(p0, metric);

  std::vector<FeedbackTrajectory> run(std::int64_t m, std::int64_t k,
                                      FeedbackMode mode, LearnerKind kind) const {
    FeedbackConfig config;
    config.n0 = 5000;
    config.m = m;
    config.k = k;
    config.rounds = 30;
    config.mode = mode;
    config.learner.kind = kind;
    config.replicates = 100;
    config.base_seed = 12345;
    return run_feedback(config, p0, metric, 8);
  }
};

double final_amplification_mean(const std::vector<FeedbackTrajectory>& trajectories) {
  double sum = 0.0;
  for (const FeedbackTrajectory& traj : trajectories) {
    sum += traj.rounds.back().amplification;
  }
  return sum / static_cast<double>(trajectories.size());
}

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  const auto results = verify_lemma2();
  const double elapsed = seconds_since(start);
  report(1, "coefficient bound grid", all_passed(results) && elapsed < 1.0,
         results.empty() ? "no checks ran"
                         : results[0].detail + fmt(" (%.3fs)", elapsed));
}

void criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  const auto results = verify_oracle();
  const double elapsed = seconds_since(start);
  const double anchor = brute_force_expected_bias(
      nurse_toy(), {LearnerKind::empirical_argmax}, class_fraction(1, 2, 0), 3, 0, 1, 0);
  const bool anchor_ok = std::abs(anchor - 20.0 / 27.0) < 1e-12;
  report(2, "enumeration oracle", all_passed(results) && anchor_ok && elapsed < 60.0,
         fmt("%.0f configs within 3 standard errors, anchor %.12f (%.1fs)",
             static_cast<double>(results.size()), anchor, elapsed));
}

void criterion_3() {
  const auto start = std::chrono::steady_clock::now();
  const auto results = verify_fixed_points();
  const double elapsed = seconds_since(start);
  report(3, "sampler stability", all_passed(results) && elapsed < 1.0,
         fmt("%.0f distributions, amplification < 1e-12 everywhere (%.3fs)",
             static_cast<double>(results.size()), elapsed));
}

void criterion_4() {
  FeedbackConfig config;
  config.n0 = 6;
  config.m = 0;
  config.k = 3;
  config.rounds = 50;
  config.mode = FeedbackMode::population;
  config.learner.kind = LearnerKind::population_argmax;
  const auto traj = run_feedback_replicate(config, nurse_toy(),
                                           class_fraction(1, 2, 0), 0);
  bool ok = std::abs(traj.rounds[1].dataset_bias - 7.0 / 9.0) < 1e-12 &&
            std::abs(traj.rounds[2].dataset_bias - 5.0 / 6.0) < 1e-12;
  for (std::size_t t = 1; t < traj.rounds.size() && ok; ++t) {
    ok = traj.rounds[t].dataset_bias >= traj.rounds[t - 1].dataset_bias;
  }
  ok = ok && traj.rounds.back().dataset_bias > 0.98;
  report(4, "toy amplification", ok,
         fmt("dataset bias 2/3 -> %.9f -> %.9f -> ... -> %.4f",
             traj.rounds[1].dataset_bias, traj.rounds[2].dataset_bias,
             traj.rounds.back().dataset_bias));
}

void criteria_5_to_8(const OrderingSetting& setting) {
  const auto start = std::chrono::steady_clock::now();
  const auto high = setting.run(100, 400, FeedbackMode::accumulate,
                                LearnerKind::empirical_argmax);
  const auto low = setting.run(250, 250, FeedbackMode::accumulate,
                               LearnerKind::empirical_argmax);
  const auto worst = setting.run(100, 400, FeedbackMode::worst_case_subsample,
                                 LearnerKind::empirical_argmax);
  const auto interp = setting.run(100, 400, FeedbackMode::accumulate,
                                  LearnerKind::interpolating_table);
  const double elapsed = seconds_since(start);

  // 5a: more model-labeled data (k/(m+k) = 0.8 vs 0.5) amplifies more.
  const double amp_high = final_amplification_mean(high);
  const double amp_low = final_amplification_mean(low);

  // 5b: the per-round mean amplification respects the predicted bound. At
  // t = 0 the two sides are equal in expectation, so the comparison uses a
  // 3 sigma Monte Carlo allowance on both the trajectory and delta0.
  const auto summary = summarize(high);
  const auto delta0 = estimate_calibration_error(
      {LearnerKind::empirical_argmax}, setting.p0, setting.metric, 5000, 200, 777);
  const auto curve = build_bound_curve(30, 5000, 100, 400, delta0.absolute);
  const double sqrt_reps = std::sqrt(static_cast<double>(high.size()));
  bool bound_ok = true;
  double worst_margin = 1e300;
  for (std::size_t t = 0; t < summary.size(); ++t) {
    const double amp_t = std::abs(setting.p0_phi - summary[t].model_bias_mean);
    const double allowance =
        3.0 * (summary[t].model_bias_std / sqrt_reps +
               curve.exact_coefficient[t] * delta0.standard_error);
    const double margin = curve.bound_exact[t] + allowance - amp_t;
    worst_margin = std::min(worst_margin, margin);
    bound_ok = bound_ok && margin >= 0.0;
  }
  report(5, "model-fraction ordering",
         amp_high > amp_low && bound_ok && elapsed < 300.0,
         fmt("final amplification 0.8: %.5f > 0.5: %.5f; ", amp_high, amp_low) +
             fmt("bound margin >= %.5f (delta0 %.5f)", worst_margin,
                 delta0.absolute));

  // 6: refitting on an n0-sized subsample amplifies at least as much.
  const double amp_worst = final_amplification_mean(worst);
  report(6, "worst-case ordering", amp_worst >= amp_high,
         fmt("final amplification subsample %.5f >= accumulate %.5f", amp_worst,
             amp_high));

  // 7: the interpolating learner stabilizes the same setting.
  const double amp_interp = final_amplification_mean(interp);
  report(7, "interpolation intervention", amp_interp < amp_high,
         fmt("final amplification interpolating %.5f < argmax %.5f", amp_interp,
             amp_high));

  // 8: accuracy improves over rounds even while bias is amplified.
  double acc0 = 0.0, acc_final = 0.0;
  for (const FeedbackTrajectory& traj : high) {
    acc0 += traj.rounds.front().accuracy;
    acc_final += traj.rounds.back().accuracy;
  }
  acc0 /= static_cast<double>(high.size());
  acc_final /= static_cast<double>(high.size());
  report(8, "accuracy/bias tradeoff", acc_final >= acc0 && amp_high > 0.0,
         fmt("accuracy %.5f -> %.5f while amplification %.5f > 0", acc0,
             acc_final, amp_high));
}

void criterion_9() {
  const auto q = random_distribution(4, 3, 2718);
  SplitMix64 rng(derive_seed(2718, 99));
  bool ok = true;
  double worst = -1e300;
  for (int pair = 0; pair < 5; ++pair) {
    Partition partition;
    partition.num_parts = 2;
    partition.assignment = {0, 0, 0, 0};
    // random non-trivial assignment
    do {
      for (auto& part : partition.assignment) {
        part = static_cast<Index>(rng.next() % 2);
      }
    } while (partition.assignment == std::vector<Index>(4, partition.assignment[0]));
    Eigen::MatrixXd t_values(2, 3);
    for (Index i = 0; i < t_values.size(); ++i) {
      t_values(i / 3, i % 3) = rng.next_double();
    }
    const auto result = feature_calibration_test(
        partition, BiasMetric{t_values}, {LearnerKind::empirical_argmax}, q, 12,
        20000, derive_seed(2718, static_cast<std::uint64_t>(pair)));
    const double gap = std::abs(result.feature.signed_mean - result.lifted.signed_mean);
    worst = std::max(worst, gap - 3.0 * result.combined_error);
    ok = ok && gap <= 3.0 * result.combined_error + 1e-12;
  }
  report(9, "feature test reduction", ok,
         fmt("5 partition/test pairs, worst gap minus 3 sigma = %.2e", worst));
}

void criterion_10(const std::string& cli) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "feedloop_acceptance";
  fs::create_directories(dir);
  const fs::path config_path = dir / "config.json";
  const fs::path csv_a = dir / "a.csv";
  const fs::path csv_b = dir / "b.csv";
  const std::string config = std::string(R"({
    "distribution": {"generator": "label_imbalance", "num_labels": 10,
                     "majority_label": 0, "majority_prob": 0.5,
                     "cell_noise": 0.5, "num_cells": 50},
    "metric": {"generator": "class_fraction", "target_label": 0},
    "feedback": {"n0": 500, "m": 10, "k": 40, "rounds": 5,
                 "mode": "accumulate",
                 "learner": {"kind": "empirical_argmax"},
                 "replicates": 10, "base_seed": 31337},
    "analysis": {"delta0_replicates": 50},
    "output": {"csv_path": ")");
  auto run_cli = [&](const std::string& args) {
    return std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
  };
  write_file_atomic(config_path.string(),
                    config + csv_a.string() + "\"}\n}");
  const int rc_a = run_cli("run " + config_path.string());
  write_file_atomic(config_path.string(),
                    config + csv_b.string() + "\"}\n}");
  const int rc_b = run_cli("--threads 4 run " + config_path.string());

  bool ok = rc_a == 0 && rc_b == 0;
  std::string detail;
  if (ok) {
    const std::string text_a = read_file(csv_a.string());
    const bool identical = text_a == read_file(csv_b.string());
    const bool header_ok =
        text_a.rfind(std::string(kCsvHeader) + "\n", 0) == 0;
    const int rc_lemma2 = run_cli("verify lemma2");
    const int rc_oracle = run_cli("verify oracle");
    const int rc_fixed = run_cli("verify fixed_points");
    ok = identical && header_ok && rc_lemma2 == 0 && rc_oracle == 0 && rc_fixed == 0;
    detail = std::string("reruns byte-identical: ") + (identical ? "yes" : "NO") +
             ", header exact: " + (header_ok ? "yes" : "NO") +
             fmt(", verify exits %.0f/%.0f/%.0f", rc_lemma2, rc_oracle, rc_fixed);
  } else {
    detail = fmt("cli run exits %.0f and %.0f", rc_a, rc_b);
  }
  report(10, "determinism and interfaces", ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-feedloop-cli>\n", argv[0]);
    return 2;
  }
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criteria_5_to_8(OrderingSetting{});
  criterion_9();
  criterion_10(argv[1]);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
