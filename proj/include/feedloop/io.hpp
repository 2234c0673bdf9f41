#pragma once

#include <optional>
#include <string>
#include <vector>

#include "feedloop/analysis.hpp"
#include "feedloop/feedback.hpp"

namespace feedloop {

// Configuration or schema problem; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnalysisConfig {
  bool estimate_delta0 = true;
  std::int64_t delta0_replicates = 200;
  bool emit_bounds = true;
  std::optional<double> delta0;  // fixed value instead of estimating
};

struct OutputConfig {
  std::string csv_path;
  std::string report_path;
  std::string svg_path;  // optional; empty means no chart
};

struct ExperimentConfig {
  DiscreteJointDistribution distribution;
  BiasMetric metric;
  FeedbackConfig feedback;
  AnalysisConfig analysis;
  OutputConfig output;
};

DiscreteJointDistribution distribution_from_json(const std::string& json_text);
BiasMetric metric_from_json(const std::string& json_text, Index num_cells,
                            Index num_labels);
LearnerSpec learner_spec_from_json(const std::string& json_text);
std::string learner_spec_to_json(const LearnerSpec& spec);

ExperimentConfig load_experiment_config(const std::string& path);

inline constexpr const char* kCsvHeader =
    "round,n_t,bias_model_mean,bias_model_std,bias_dataset_mean,"
    "bias_dataset_std,accuracy_mean,accuracy_std,bound_exact,"
    "bound_simplified,delta0";

// One parsed trajectory CSV row; bound fields are absent when the column was
// empty (bounds disabled, or m = 0 for the simplified bound).
struct CsvRow {
  std::int64_t round = 0;
  std::int64_t n_t = 0;
  double bias_model_mean = 0.0, bias_model_std = 0.0;
  double bias_dataset_mean = 0.0, bias_dataset_std = 0.0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  std::optional<double> bound_exact;
  std::optional<double> bound_simplified;
  std::optional<double> delta0;
};

// Renders the trajectory CSV. The bound curve is optional; when present it
// must cover every round.
std::string render_trajectory_csv(const std::vector<SummaryRow>& summary,
                                  const BoundCurve* bounds);

std::vector<CsvRow> parse_trajectory_csv(const std::string& csv_text);

// JSON report: {delta0, delta0_stderr, coefficients: [...]} plus the caveat
// that the empirical delta0 underestimates the consistent calibration error.
std::string render_bound_report(const CalibrationEstimate& delta0,
                                const BoundCurve& bounds);

// Writes via a temp file and atomic rename, so failures leave no partial
// output.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// "%.17g" — enough digits to round-trip a double exactly.
std::string format_double(double value);

}  // namespace feedloop
