#include "feedloop/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace feedloop {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 24.0;
constexpr double kMarginBottom = 48.0;

struct Scale {
  double x_min, x_max, y_min, y_max;

  double x(double v) const {
    const double span = std::max(x_max - x_min, 1e-30);
    return kMarginLeft + (v - x_min) / span * (kWidth - kMarginLeft - kMarginRight);
  }
  double y(double v) const {
    const double span = std::max(y_max - y_min, 1e-30);
    return kHeight - kMarginBottom -
           (v - y_min) / span * (kHeight - kMarginTop - kMarginBottom);
  }
};

std::string polyline(const std::vector<std::pair<double, double>>& pts,
                     const Scale& s, const char* color, bool dashed = false) {
  std::ostringstream out;
  out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
  if (dashed) {
    out << " stroke-dasharray=\"6,4\"";
  }
  out << " points=\"";
  for (const auto& [x, y] : pts) {
    out << s.x(x) << ',' << s.y(y) << ' ';
  }
  out << "\"/>\n";
  return out.str();
}

}  // namespace

std::string render_trajectory_svg(const std::vector<CsvRow>& rows) {
  std::vector<std::pair<double, double>> bias, bias_lo, bias_hi, dataset, exact,
      simplified;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  auto track = [&](double v) {
    y_min = std::min(y_min, v);
    y_max = std::max(y_max, v);
  };
  for (const CsvRow& row : rows) {
    const double t = static_cast<double>(row.round);
    bias.emplace_back(t, row.bias_model_mean);
    bias_lo.emplace_back(t, row.bias_model_mean - row.bias_model_std);
    bias_hi.emplace_back(t, row.bias_model_mean + row.bias_model_std);
    dataset.emplace_back(t, row.bias_dataset_mean);
    track(row.bias_model_mean - row.bias_model_std);
    track(row.bias_model_mean + row.bias_model_std);
    track(row.bias_dataset_mean);
    if (row.bound_exact) {
      exact.emplace_back(t, *row.bound_exact);
      track(*row.bound_exact);
    }
    if (row.bound_simplified) {
      simplified.emplace_back(t, *row.bound_simplified);
      track(*row.bound_simplified);
    }
  }
  if (y_max <= y_min) {
    y_max = y_min + 1.0;  // flat series still gets a visible axis range
  }
  const double pad = 0.05 * (y_max - y_min);
  Scale s{0.0, static_cast<double>(rows.back().round), y_min - pad, y_max + pad};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Axes.
  out << "  <line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\""
      << kMarginLeft << "\" y2=\"" << kHeight - kMarginBottom
      << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom
      << "\" x2=\"" << kWidth - kMarginRight << "\" y2=\""
      << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";
  out << "  <text x=\"" << (kWidth / 2) << "\" y=\"" << (kHeight - 12)
      << "\" text-anchor=\"middle\" font-size=\"14\">round</text>\n";

  // +/- std band around the model bias.
  out << "  <polygon fill=\"#4477aa\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
  for (const auto& [x, y] : bias_hi) {
    out << s.x(x) << ',' << s.y(y) << ' ';
  }
  for (auto it = bias_lo.rbegin(); it != bias_lo.rend(); ++it) {
    out << s.x(it->first) << ',' << s.y(it->second) << ' ';
  }
  out << "\"/>\n";

  out << polyline(bias, s, "#4477aa");
  out << polyline(dataset, s, "#228833");
  if (!exact.empty()) {
    out << polyline(exact, s, "#ee6677");
  }
  if (!simplified.empty()) {
    out << polyline(simplified, s, "#ee6677", /*dashed=*/true);
  }

  // Legend.
  double ly = kMarginTop + 8.0;
  auto legend = [&](const char* color, const char* label, bool present) {
    if (!present) {
      return;
    }
    out << "  <rect x=\"" << kWidth - 220 << "\" y=\"" << ly - 9
        << "\" width=\"14\" height=\"4\" fill=\"" << color << "\"/>\n";
    out << "  <text x=\"" << kWidth - 200 << "\" y=\"" << ly
        << "\" font-size=\"12\">" << label << "</text>\n";
    ly += 18.0;
  };
  legend("#4477aa", "model bias (mean +/- std)", true);
  legend("#228833", "dataset bias (mean)", true);
  legend("#ee6677", "bound (exact)", !exact.empty());
  legend("#ee6677", "bound (simplified)", !simplified.empty());

  out << "</svg>\n";
  return out.str();
}

}  // namespace feedloop
