#pragma once

#include "run_config.hpp"

#include "memgrad/trainer.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace memgrad::cli {

/// SHA-1 of "blob <size>\0<content>", as printed by `git hash-object`.
std::string git_blob_sha1(std::string_view content);
std::string git_blob_sha1_file(const std::string& path);

FeatureDataset load_task(const TaskConfig& task);
std::shared_ptr<const TrajectoryBank> load_bank(const BankConfig& bank);

struct PreparedData {
  FeatureDataset full;
  SplitIndices indices;
  DatasetSplits splits;
  std::string inputs_hash;  // git-style hash of the dataset (and bank file, if any)
};

PreparedData prepare_data(const RunConfig& config);

/// The energy-relevant content of a run ledger. Pulse energy is linear in the
/// pre-pulse conductance, so the sum re-costs the whole event list exactly.
struct LedgerSummary {
  DeviceTechParams tech;
  std::uint64_t pulse_count = 0;
  double sum_pre_pulse_conductance = 0.0;  // S
  std::uint64_t read_count = 0;
  std::uint64_t row_sweeps = 0;
  double sum_read_weighted_conductance = 0.0;  // S
  std::uint64_t mac_count = 0;
  std::uint64_t reinit_count = 0;
  double reinit_energy = 0.0;  // J
};

LedgerSummary summarize_ledger(const EnergyLedger& ledger, const DeviceTechParams& tech);
void save_ledger_json(const LedgerSummary& ledger, const std::string& path);
LedgerSummary load_ledger_json(const std::string& path);

/// Writes manifest.json, curve.csv, steps.csv, pulses.csv, split.json,
/// ledger.json and one weight file per layer.
void write_run_dir(const std::string& dir, const RunConfig& config, const TrainingRun& run,
                   const PreparedData& data, const std::string& command_line);

struct LoadedRun {
  std::string dir;
  RunConfig config;
  std::size_t n_in = 0;
  int classes = 0;
  Network network;
  std::optional<DeviceNetwork> device;  // device-mode runs
  std::optional<double> final_test_accuracy;
};

/// Reads back a run directory written by write_run_dir. Throws ParseError on
/// missing or malformed artifacts.
LoadedRun load_run_dir(const std::string& dir);

/// The test split of a loaded run, rebuilt from its task and split.json.
FeatureDataset load_run_test_split(const LoadedRun& run);

}  // namespace memgrad::cli
