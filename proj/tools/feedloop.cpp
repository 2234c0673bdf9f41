#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "feedloop/analysis.hpp"
#include "feedloop/feedback.hpp"
#include "feedloop/io.hpp"
#include "feedloop/svg.hpp"
#include "feedloop/verify.hpp"

namespace {

constexpr int kExitVerifyFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;

int resolve_threads(int flag_value) {
  if (flag_value > 0) {
    return flag_value;
  }
  if (const char* env = std::getenv("FEEDLOOP_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) {
      return parsed;
    }
  }
  return 1;
}

int run_command(const std::string& config_path, int threads,
                std::optional<std::uint64_t> seed_override) {
  feedloop::ExperimentConfig config = feedloop::load_experiment_config(config_path);
  if (seed_override) {
    config.feedback.base_seed = *seed_override;
  }

  const auto trajectories = feedloop::run_feedback(
      config.feedback, config.distribution, config.metric, threads);
  const auto summary = feedloop::summarize(trajectories);

  feedloop::CalibrationEstimate delta0;
  std::optional<feedloop::BoundCurve> bounds;
  if (config.analysis.delta0) {
    delta0.signed_mean = *config.analysis.delta0;
    delta0.absolute = *config.analysis.delta0;
  } else if (config.analysis.estimate_delta0) {
    delta0 = feedloop::estimate_calibration_error(
        config.feedback.learner, config.distribution, config.metric,
        config.feedback.n0, config.analysis.delta0_replicates,
        feedloop::derive_seed(config.feedback.base_seed, 0xD317A0ULL));
  }
  if (config.analysis.emit_bounds) {
    bounds = feedloop::build_bound_curve(config.feedback.rounds,
                                         config.feedback.n0, config.feedback.m,
                                         config.feedback.k, delta0.absolute);
  }

  const std::string csv =
      feedloop::render_trajectory_csv(summary, bounds ? &*bounds : nullptr);
  feedloop::write_file_atomic(config.output.csv_path, csv);

  if (!config.output.report_path.empty() && bounds) {
    feedloop::write_file_atomic(config.output.report_path,
                                feedloop::render_bound_report(delta0, *bounds));
  }
  if (!config.output.svg_path.empty()) {
    feedloop::write_file_atomic(
        config.output.svg_path,
        feedloop::render_trajectory_svg(feedloop::parse_trajectory_csv(csv)));
  }
  return 0;
}

int verify_command(const std::string& suite) {
  std::vector<feedloop::CheckResult> results;
  if (suite == "lemma2") {
    results = feedloop::verify_lemma2();
  } else if (suite == "oracle") {
    results = feedloop::verify_oracle();
  } else if (suite == "fixed_points") {
    results = feedloop::verify_fixed_points();
  } else {
    std::cerr << "unknown verify suite: " << suite
              << " (expected lemma2, oracle, or fixed_points)\n";
    return kExitConfigError;
  }
  for (const feedloop::CheckResult& r : results) {
    std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  ["
              << r.detail << "]\n";
  }
  return feedloop::all_passed(results) ? 0 : kExitVerifyFailure;
}

int plot_command(const std::string& csv_path, const std::string& svg_path) {
  const auto rows = feedloop::parse_trajectory_csv(feedloop::read_file(csv_path));
  feedloop::write_file_atomic(svg_path, feedloop::render_trajectory_svg(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feedloop: data feedback loop simulator and stability analysis"};
  app.require_subcommand(1);

  int threads_flag = 0;
  app.add_option("--threads", threads_flag,
                 "worker threads for replicates (default 1; env FEEDLOOP_THREADS)");
  std::optional<std::uint64_t> seed_override;
  app.add_option("--seed-override", seed_override,
                 "replace the config's base_seed");

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment JSON")->required();

  std::string suite;
  CLI::App* verify = app.add_subcommand("verify", "run a property suite");
  verify->add_option("suite", suite, "lemma2 | oracle | fixed_points")->required();

  std::string csv_path, svg_path;
  CLI::App* plot = app.add_subcommand("plot", "render a trajectory CSV as SVG");
  plot->add_option("csv", csv_path, "input trajectory CSV")->required();
  plot->add_option("svg", svg_path, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(config_path, resolve_threads(threads_flag), seed_override);
    }
    if (verify->parsed()) {
      return verify_command(suite);
    }
    return plot_command(csv_path, svg_path);
  } catch (const feedloop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const feedloop::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIoError;
  }
}
