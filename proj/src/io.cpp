#include "feedloop/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "feedloop/generators.hpp"

namespace feedloop {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw ConfigError(std::string("invalid JSON in ") + what);
  }
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* field) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
    throw ConfigError(std::string(field) + " must be a non-empty array of rows");
  }
  const Index num_rows = static_cast<Index>(rows.size());
  const Index num_cols = static_cast<Index>(rows[0].size());
  Eigen::MatrixXd m(num_rows, num_cols);
  for (Index r = 0; r < num_rows; ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != num_cols) {
      throw ConfigError(std::string(field) + " rows must have equal length");
    }
    for (Index c = 0; c < num_cols; ++c) {
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

template <typename T>
T require(const json& j, const char* field) {
  if (!j.contains(field)) {
    throw ConfigError(std::string("missing field: ") + field);
  }
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("invalid value for field: ") + field);
  }
}

template <typename T>
T get_or(const json& j, const char* field, T fallback) {
  if (!j.contains(field)) {
    return fallback;
  }
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("invalid value for field: ") + field);
  }
}

DiscreteJointDistribution distribution_from_node(const json& j) {
  if (j.contains("generator")) {
    const std::string gen = require<std::string>(j, "generator");
    if (gen != "label_imbalance") {
      throw ConfigError("distribution.generator: unknown generator " + gen);
    }
    return label_imbalance(require<std::int64_t>(j, "num_labels"),
                           require<std::int64_t>(j, "majority_label"),
                           require<double>(j, "majority_prob"),
                           require<double>(j, "cell_noise"),
                           get_or<std::int64_t>(j, "num_cells", 0));
  }
  const Index num_cells = require<std::int64_t>(j, "num_cells");
  const Index num_labels = require<std::int64_t>(j, "num_labels");
  if (!j.contains("probs")) {
    throw ConfigError("missing field: distribution.probs");
  }
  Eigen::MatrixXd probs = matrix_from_json(j.at("probs"), "distribution.probs");
  if (probs.rows() != num_cells || probs.cols() != num_labels) {
    throw ConfigError("distribution.probs shape does not match num_cells/num_labels");
  }
  return DiscreteJointDistribution(std::move(probs));
}

BiasMetric metric_from_node(const json& j, Index num_cells, Index num_labels) {
  if (j.contains("generator")) {
    const std::string gen = require<std::string>(j, "generator");
    if (gen != "class_fraction") {
      throw ConfigError("metric.generator: unknown generator " + gen);
    }
    return class_fraction(num_cells, num_labels,
                          require<std::int64_t>(j, "target_label"));
  }
  if (!j.contains("values")) {
    throw ConfigError("missing field: metric.values");
  }
  Eigen::MatrixXd values = matrix_from_json(j.at("values"), "metric.values");
  if (values.rows() != num_cells || values.cols() != num_labels) {
    throw ConfigError("metric.values shape does not match the distribution");
  }
  return BiasMetric(std::move(values));
}

LearnerSpec learner_spec_from_node(const json& j) {
  LearnerSpec spec;
  try {
    spec.kind = learner_kind_from_string(require<std::string>(j, "kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("learner.kind: ") + e.what());
  }
  spec.smoothing = get_or<double>(j, "smoothing", 0.0);
  if (j.contains("fallback")) {
    try {
      spec.fallback = fallback_from_string(j.at("fallback").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("learner.fallback: ") + e.what());
    }
  }
  return spec;
}

std::string csv_field(std::optional<double> v) {
  return v ? format_double(*v) : std::string();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

std::optional<double> parse_optional(const std::string& s, const char* field) {
  if (s.empty()) {
    return std::nullopt;
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("malformed CSV value in column ") + field);
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

DiscreteJointDistribution distribution_from_json(const std::string& json_text) {
  return distribution_from_node(parse_json(json_text, "distribution"));
}

BiasMetric metric_from_json(const std::string& json_text, Index num_cells,
                            Index num_labels) {
  return metric_from_node(parse_json(json_text, "metric"), num_cells, num_labels);
}

LearnerSpec learner_spec_from_json(const std::string& json_text) {
  return learner_spec_from_node(parse_json(json_text, "learner"));
}

std::string learner_spec_to_json(const LearnerSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  if (spec.kind == LearnerKind::smoothed_sampler) {
    j["smoothing"] = spec.smoothing;
  }
  j["fallback"] = to_string(spec.fallback);
  return j.dump();
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const json j = parse_json(read_file(path), "experiment config");
  if (!j.contains("distribution")) throw ConfigError("missing field: distribution");
  if (!j.contains("metric")) throw ConfigError("missing field: metric");
  if (!j.contains("feedback")) throw ConfigError("missing field: feedback");
  if (!j.contains("output")) throw ConfigError("missing field: output");

  DiscreteJointDistribution dist = distribution_from_node(j.at("distribution"));
  BiasMetric metric =
      metric_from_node(j.at("metric"), dist.num_cells(), dist.num_labels());

  const json& fb = j.at("feedback");
  FeedbackConfig feedback;
  feedback.n0 = require<std::int64_t>(fb, "n0");
  feedback.m = require<std::int64_t>(fb, "m");
  feedback.k = require<std::int64_t>(fb, "k");
  feedback.rounds = require<std::int64_t>(fb, "rounds");
  try {
    feedback.mode = feedback_mode_from_string(require<std::string>(fb, "mode"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("feedback.mode: ") + e.what());
  }
  if (!fb.contains("learner")) throw ConfigError("missing field: feedback.learner");
  feedback.learner = learner_spec_from_node(fb.at("learner"));
  feedback.replicates = require<std::int64_t>(fb, "replicates");
  feedback.base_seed = get_or<std::uint64_t>(fb, "base_seed", 0);
  try {
    feedback.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  AnalysisConfig analysis;
  if (j.contains("analysis")) {
    const json& an = j.at("analysis");
    analysis.estimate_delta0 = get_or<bool>(an, "estimate_delta0", true);
    analysis.delta0_replicates = get_or<std::int64_t>(an, "delta0_replicates", 200);
    analysis.emit_bounds = get_or<bool>(an, "emit_bounds", true);
    if (analysis.delta0_replicates < 1) {
      throw ConfigError("analysis.delta0_replicates must be >= 1");
    }
    if (an.contains("delta0")) {
      analysis.delta0 = require<double>(an, "delta0");
      if (*analysis.delta0 < 0.0) {
        throw ConfigError("analysis.delta0 must be >= 0");
      }
    }
  }
  if (analysis.emit_bounds && !analysis.estimate_delta0 && !analysis.delta0) {
    throw ConfigError("analysis.emit_bounds requires estimate_delta0 or an explicit analysis.delta0");
  }

  const json& out = j.at("output");
  OutputConfig output;
  output.csv_path = require<std::string>(out, "csv_path");
  output.report_path = get_or<std::string>(out, "report_path", std::string());
  output.svg_path = get_or<std::string>(out, "svg_path", std::string());
  if (output.csv_path.empty()) {
    throw ConfigError("output.csv_path must not be empty");
  }

  return ExperimentConfig{std::move(dist), std::move(metric), feedback, analysis,
                          std::move(output)};
}

std::string render_trajectory_csv(const std::vector<SummaryRow>& summary,
                                  const BoundCurve* bounds) {
  if (bounds && bounds->bound_exact.size() < summary.size()) {
    throw std::invalid_argument("bound curve does not cover every round");
  }
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (std::size_t t = 0; t < summary.size(); ++t) {
    const SummaryRow& row = summary[t];
    out << t << ',' << row.n_t << ',' << format_double(row.model_bias_mean)
        << ',' << format_double(row.model_bias_std) << ','
        << format_double(row.dataset_bias_mean) << ','
        << format_double(row.dataset_bias_std) << ','
        << format_double(row.accuracy_mean) << ','
        << format_double(row.accuracy_std) << ',';
    if (bounds) {
      out << format_double(bounds->bound_exact[t]) << ','
          << csv_field(bounds->bound_simplified) << ','
          << format_double(bounds->delta0);
    } else {
      out << ",,";
    }
    out << '\n';
  }
  return out.str();
}

std::vector<CsvRow> parse_trajectory_csv(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("empty CSV");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != kCsvHeader) {
    throw ConfigError("CSV header does not match the trajectory schema");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 11) {
      throw ConfigError("CSV row must have 11 columns");
    }
    CsvRow row;
    row.round = static_cast<std::int64_t>(*parse_optional(fields[0], "round"));
    row.n_t = static_cast<std::int64_t>(*parse_optional(fields[1], "n_t"));
    row.bias_model_mean = *parse_optional(fields[2], "bias_model_mean");
    row.bias_model_std = *parse_optional(fields[3], "bias_model_std");
    row.bias_dataset_mean = *parse_optional(fields[4], "bias_dataset_mean");
    row.bias_dataset_std = *parse_optional(fields[5], "bias_dataset_std");
    row.accuracy_mean = *parse_optional(fields[6], "accuracy_mean");
    row.accuracy_std = *parse_optional(fields[7], "accuracy_std");
    row.bound_exact = parse_optional(fields[8], "bound_exact");
    row.bound_simplified = parse_optional(fields[9], "bound_simplified");
    row.delta0 = parse_optional(fields[10], "delta0");
    rows.push_back(row);
  }
  if (rows.empty()) {
    throw ConfigError("CSV has no data rows");
  }
  return rows;
}

std::string render_bound_report(const CalibrationEstimate& delta0,
                                const BoundCurve& bounds) {
  json j;
  j["delta0"] = bounds.delta0;
  j["delta0_stderr"] = delta0.standard_error;
  j["delta0_signed_mean"] = delta0.signed_mean;
  j["delta0_note"] =
      "empirical estimate of the initial model's calibration error; a lower "
      "bound on the consistent calibration error, so bound curves are "
      "heuristic predictions";
  j["coefficients"] = bounds.exact_coefficient;
  if (bounds.simplified_coefficient) {
    j["simplified_coefficient"] = *bounds.simplified_coefficient;
  } else {
    j["simplified_coefficient"] = nullptr;
  }
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open for writing: " + tmp);
    }
    out << content;
    if (!out.flush()) {
      std::remove(tmp.c_str());
      throw IoError("write failed: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("rename failed: " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace feedloop
