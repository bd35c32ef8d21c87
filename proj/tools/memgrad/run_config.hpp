#pragma once

#include "memgrad/data_io.hpp"
#include "memgrad/device_model.hpp"
#include "memgrad/trainer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace memgrad::cli {

struct TaskConfig {
  std::string kind = "synthetic";  // synthetic | csv | idx
  ClusterTaskParams synthetic{4, 32, 1000, 1.0, 1.6, 0.5, 7};
  std::string features;  // csv
  std::string images;    // idx
  std::string labels;    // idx
  int classes = 0;       // csv: 0 infers max(label) + 1
};

struct BankConfig {
  std::string file;  // long-format trajectory CSV; empty = synthetic
  std::size_t count = 256;
  std::uint64_t seed = 11;
  SyntheticTrajectoryParams synthetic;
};

/// Everything a `train` invocation needs.
struct RunConfig {
  TaskConfig task;
  SplitSpec split{0.6, 0.3, 0.1, true, 7};
  BankConfig bank;
  TrainingConfig training;
  std::string output = "runs/run";
};

/// Builds the effective configuration: per-algorithm defaults, then the JSON
/// file (merge-patch), then `key.path=value` overrides. Unknown keys are rejected.
/// `env_seed` (MEMGRAD_SEED) applies when neither the file nor the overrides set `seed`.
RunConfig load_run_config(const std::optional<std::string>& path,
                          const std::vector<std::string>& overrides,
                          const std::optional<std::string>& env_seed = std::nullopt);

/// Strict parse of a complete configuration document.
RunConfig parse_run_config(const std::string& json_text);

/// Canonical JSON of the effective configuration.
std::string dump_run_config(const RunConfig& config, int indent = 2);

/// Default configuration for an algorithm/architecture pair.
RunConfig default_run_config(Algorithm algorithm, Architecture architecture);

std::string to_string(CFVariant variant);
CFVariant parse_cf_variant(const std::string& name);

}  // namespace memgrad::cli
