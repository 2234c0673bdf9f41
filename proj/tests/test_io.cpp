#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "feedloop/io.hpp"
#include "feedloop/svg.hpp"

using namespace feedloop;

namespace {

std::filesystem::path temp_path(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string write_temp_config(const char* name, const std::string& text) {
  const auto path = temp_path(name);
  write_file_atomic(path.string(), text);
  return path.string();
}

const char* kValidConfig = R"({
  "distribution": {"num_cells": 1, "num_labels": 2,
                   "probs": [[0.6666666666666666, 0.3333333333333333]]},
  "metric": {"values": [[1.0, 0.0]]},
  "feedback": {"n0": 6, "m": 1, "k": 3, "rounds": 4, "mode": "accumulate",
               "learner": {"kind": "empirical_argmax"},
               "replicates": 8, "base_seed": 7},
  "output": {"csv_path": "out.csv"}
})";

std::string patched_config(const std::string& find, const std::string& replace) {
  std::string text = kValidConfig;
  const auto pos = text.find(find);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, find.size(), replace);
  return text;
}

bool throws_config_error_mentioning(const std::string& config_text,
                                    const std::string& needle) {
  const auto path = write_temp_config("feedloop_cfg_err.json", config_text);
  try {
    load_experiment_config(path);
  } catch (const ConfigError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

std::vector<SummaryRow> sample_summary() {
  std::vector<SummaryRow> rows(3);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    rows[t].n_t = 6 + static_cast<std::int64_t>(t) * 4;
    rows[t].model_bias_mean = 0.1 * static_cast<double>(t) + 1.0 / 3.0;
    rows[t].model_bias_std = 0.01;
    rows[t].dataset_bias_mean = 0.2 + 0.05 * static_cast<double>(t);
    rows[t].dataset_bias_std = 0.02;
    rows[t].accuracy_mean = 0.9;
    rows[t].accuracy_std = 0.001;
  }
  return rows;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double v : {1.0 / 3.0, 0.1, 2.0 / 27.0, 1e-300, 123456.789, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("distribution_from_json") {
  SUBCASE("explicit table") {
    const auto dist = distribution_from_json(
        R"({"num_cells": 1, "num_labels": 2, "probs": [[0.5, 0.5]]})");
    CHECK(dist.num_cells() == 1);
    CHECK(dist.num_labels() == 2);
    CHECK(dist.probs()(0, 1) == 0.5);
  }
  SUBCASE("label_imbalance generator") {
    const auto dist = distribution_from_json(
        R"({"generator": "label_imbalance", "num_labels": 4,
            "majority_label": 0, "majority_prob": 0.4, "cell_noise": 0.3,
            "num_cells": 8})");
    CHECK(dist.num_cells() == 8);
    CHECK(dist.num_labels() == 4);
  }
  SUBCASE("shape mismatch names the field") {
    CHECK_THROWS_AS(distribution_from_json(
                        R"({"num_cells": 2, "num_labels": 2, "probs": [[1.0, 0.0]]})"),
                    ConfigError);
  }
  SUBCASE("malformed JSON") {
    CHECK_THROWS_AS(distribution_from_json("{not json"), ConfigError);
  }
}

TEST_CASE("metric_from_json") {
  const auto metric = metric_from_json(R"({"values": [[1.0, 0.0]]})", 1, 2);
  CHECK(metric.values()(0, 0) == 1.0);
  CHECK_THROWS_AS(metric_from_json(R"({"values": [[1.0, 0.0]]})", 2, 2), ConfigError);
  CHECK_THROWS_AS(metric_from_json(R"({})", 1, 2), ConfigError);
}

TEST_CASE("learner_spec JSON round trip") {
  const LearnerSpec spec{LearnerKind::smoothed_sampler, 0.5, Fallback::global_mode};
  const auto parsed = learner_spec_from_json(learner_spec_to_json(spec));
  CHECK(parsed.kind == spec.kind);
  CHECK(parsed.smoothing == spec.smoothing);
  CHECK(parsed.fallback == spec.fallback);

  CHECK_THROWS_AS(learner_spec_from_json(R"({"kind": "nonsense"})"), ConfigError);
  CHECK_THROWS_AS(learner_spec_from_json(R"({})"), ConfigError);
}

TEST_CASE("load_experiment_config") {
  SUBCASE("valid config parses") {
    const auto path = write_temp_config("feedloop_cfg_ok.json", kValidConfig);
    const auto config = load_experiment_config(path);
    CHECK(config.feedback.n0 == 6);
    CHECK(config.feedback.mode == FeedbackMode::accumulate);
    CHECK(config.feedback.learner.kind == LearnerKind::empirical_argmax);
    CHECK(config.output.csv_path == "out.csv");
    CHECK(config.analysis.estimate_delta0);
    CHECK(config.analysis.emit_bounds);
  }
  SUBCASE("errors name the offending field") {
    CHECK(throws_config_error_mentioning(patched_config("\"n0\": 6,", ""), "n0"));
    CHECK(throws_config_error_mentioning(
        patched_config("\"mode\": \"accumulate\"", "\"mode\": \"sideways\""), "mode"));
    CHECK(throws_config_error_mentioning(
        patched_config("\"kind\": \"empirical_argmax\"", "\"kind\": \"oracle\""),
        "kind"));
    CHECK(throws_config_error_mentioning(
        patched_config("\"csv_path\": \"out.csv\"", "\"csv_path\": \"\""), "csv_path"));
  }
  SUBCASE("invalid feedback values become ConfigError") {
    CHECK(throws_config_error_mentioning(patched_config("\"m\": 1, \"k\": 3",
                                                        "\"m\": 0, \"k\": 0"),
                                         "m"));
  }
  SUBCASE("bounds without a delta0 source is rejected") {
    const auto text = patched_config(
        "\"output\"",
        "\"analysis\": {\"estimate_delta0\": false, \"emit_bounds\": true},\n  \"output\"");
    CHECK(throws_config_error_mentioning(text, "delta0"));
  }
  SUBCASE("explicit delta0 override accepted") {
    const auto text = patched_config(
        "\"output\"",
        "\"analysis\": {\"estimate_delta0\": false, \"delta0\": 0.07},\n  \"output\"");
    const auto path = write_temp_config("feedloop_cfg_d0.json", text);
    const auto config = load_experiment_config(path);
    CHECK_FALSE(config.analysis.estimate_delta0);
    CHECK(*config.analysis.delta0 == 0.07);
  }
  SUBCASE("missing file is an IoError") {
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/feedloop.json"), IoError);
  }
}

TEST_CASE("trajectory CSV render and parse") {
  const auto summary = sample_summary();
  SUBCASE("header matches the schema constant") {
    const auto text = render_trajectory_csv(summary, nullptr);
    CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  }
  SUBCASE("round trip without bounds leaves bound fields empty") {
    const auto rows = parse_trajectory_csv(render_trajectory_csv(summary, nullptr));
    REQUIRE(rows.size() == 3);
    for (std::size_t t = 0; t < rows.size(); ++t) {
      CHECK(rows[t].round == static_cast<std::int64_t>(t));
      CHECK(rows[t].n_t == summary[t].n_t);
      CHECK(rows[t].bias_model_mean == summary[t].model_bias_mean);
      CHECK(rows[t].accuracy_std == summary[t].accuracy_std);
      CHECK_FALSE(rows[t].bound_exact.has_value());
      CHECK_FALSE(rows[t].bound_simplified.has_value());
      CHECK_FALSE(rows[t].delta0.has_value());
    }
  }
  SUBCASE("round trip with bounds is exact") {
    const auto bounds = build_bound_curve(2, 6, 1, 3, 1.0 / 7.0);
    const auto rows = parse_trajectory_csv(render_trajectory_csv(summary, &bounds));
    REQUIRE(rows.size() == 3);
    for (std::size_t t = 0; t < rows.size(); ++t) {
      CHECK(*rows[t].bound_exact == bounds.bound_exact[t]);
      CHECK(*rows[t].bound_simplified == *bounds.bound_simplified);
      CHECK(*rows[t].delta0 == 1.0 / 7.0);
    }
  }
  SUBCASE("m=0 leaves the simplified column empty") {
    const auto bounds = build_bound_curve(2, 6, 0, 3, 0.25);
    const auto rows = parse_trajectory_csv(render_trajectory_csv(summary, &bounds));
    for (const CsvRow& row : rows) {
      CHECK(row.bound_exact.has_value());
      CHECK_FALSE(row.bound_simplified.has_value());
    }
  }
  SUBCASE("short bound curve is rejected") {
    const auto bounds = build_bound_curve(1, 6, 1, 3, 0.1);
    CHECK_THROWS_AS(render_trajectory_csv(summary, &bounds), std::invalid_argument);
  }
  SUBCASE("rendering is deterministic") {
    const auto bounds = build_bound_curve(2, 6, 1, 3, 0.1);
    CHECK(render_trajectory_csv(summary, &bounds) ==
          render_trajectory_csv(summary, &bounds));
  }
  SUBCASE("parser rejects bad input") {
    CHECK_THROWS_AS(parse_trajectory_csv(""), ConfigError);
    CHECK_THROWS_AS(parse_trajectory_csv("wrong,header\n1,2\n"), ConfigError);
    CHECK_THROWS_AS(parse_trajectory_csv(std::string(kCsvHeader) + "\n"), ConfigError);
    CHECK_THROWS_AS(
        parse_trajectory_csv(std::string(kCsvHeader) + "\n0,6,a,0,0,0,0,0,,,\n"),
        ConfigError);
    CHECK_THROWS_AS(parse_trajectory_csv(std::string(kCsvHeader) + "\n0,6,0\n"),
                    ConfigError);
  }
}

TEST_CASE("render_bound_report") {
  CalibrationEstimate delta0;
  delta0.signed_mean = -0.03;
  delta0.standard_error = 0.004;
  delta0.absolute = 0.03;
  const auto bounds = build_bound_curve(3, 10, 2, 3, 0.03);
  const auto report = render_bound_report(delta0, bounds);
  CHECK(report.find("\"delta0\": 0.03") != std::string::npos);
  CHECK(report.find("delta0_stderr") != std::string::npos);
  CHECK(report.find("lower") != std::string::npos);
  CHECK(report.find("coefficients") != std::string::npos);
  CHECK(report.find("\"simplified_coefficient\": 2.5") != std::string::npos);

  const auto no_simplified = render_bound_report(delta0, build_bound_curve(3, 10, 0, 3, 0.03));
  CHECK(no_simplified.find("\"simplified_coefficient\": null") != std::string::npos);
}

TEST_CASE("render_trajectory_svg") {
  const auto summary = sample_summary();
  SUBCASE("with bounds") {
    const auto bounds = build_bound_curve(2, 6, 1, 3, 0.1);
    const auto rows = parse_trajectory_csv(render_trajectory_csv(summary, &bounds));
    const auto svg = render_trajectory_svg(rows);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
  }
  SUBCASE("without bounds") {
    const auto rows = parse_trajectory_csv(render_trajectory_csv(summary, nullptr));
    const auto svg = render_trajectory_svg(rows);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
}

TEST_CASE("write_file_atomic") {
  const auto path = temp_path("feedloop_atomic.txt");
  write_file_atomic(path.string(), "first");
  write_file_atomic(path.string(), "second");
  CHECK(read_file(path.string()) == "second");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(write_file_atomic("/nonexistent_dir/feedloop.txt", "x"), IoError);
  CHECK_THROWS_AS(read_file("/nonexistent_dir/feedloop.txt"), IoError);
}
