#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace memgrad::cli {

struct GradcheckOptions {
  std::string rule = "all";     // sff | cf | bp | all
  std::string variant = "all";  // temperature | offset | all (cf only)
  int configs = 100;
  std::uint64_t seed = 0;
  double rtol = 1e-5;
  double margin = 1e-3;          // minimum |pre-activation| of sampled points
  bool negative_control = false; // flips the analytic gradient sign; every suite must then fail
};

struct SuiteResult {
  std::string name;
  int configs = 0;
  int failures = 0;
  double worst_error = 0.0;  // max over configs of ||analytic - fd||_inf / ||fd||_inf
  bool passed() const { return failures == 0; }
};

std::vector<SuiteResult> run_gradcheck(const GradcheckOptions& options);

}  // namespace memgrad::cli
