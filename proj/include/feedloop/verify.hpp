#pragma once

#include <string>
#include <vector>

namespace feedloop {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Coefficient recursion stays below (m+k)/m and nondecreasing across a
// parameter grid up to t = 1000.
std::vector<CheckResult> verify_lemma2();

// Monte Carlo model-bias means match exhaustive enumeration within 3 standard
// errors on every enumerable single-cell configuration.
std::vector<CheckResult> verify_oracle(std::int64_t replicates = 100000);

// population_sampler runs have amplification below 1e-12 at every round, on a
// grid of random distributions.
std::vector<CheckResult> verify_fixed_points();

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace feedloop
