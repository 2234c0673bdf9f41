#pragma once

#include <string>
#include <vector>

#include "feedloop/io.hpp"

namespace feedloop {

// Static trajectory-vs-bound chart: empirical model-bias mean with a +/- std
// band, the dataset bias, and bound curves when the CSV carries them.
std::string render_trajectory_svg(const std::vector<CsvRow>& rows);

}  // namespace feedloop
