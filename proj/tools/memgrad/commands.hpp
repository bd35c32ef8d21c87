#pragma once

#include "gradcheck.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace memgrad::cli {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitRuntime = 4,
};

struct TrainOptions {
  std::optional<std::string> config;
  std::vector<std::string> overrides;  // key.path=value, applied in order
  int repeat = 1;
  int jobs = 0;  // 0 = hardware concurrency
  std::optional<std::string> env_seed;
  std::string command_line;
};

struct CharacterizeOptions {
  std::optional<std::string> config;
  std::vector<std::string> overrides;
  std::string bank_file;  // load instead of generating
  std::size_t count = 1268;
  std::uint64_t seed = 7;
  std::size_t p_max = 0;  // 0 = every trajectory's full length
  int bins = 40;
  int cycles = 300;
  std::size_t pulses_per_cycle = 5000;
  std::size_t stride = 100;  // endurance.csv keeps every stride-th pulse
  std::string out_dir = "characterize";
  std::string save_bank;  // optional path for the trajectory bank CSV
};

struct AgeOptions {
  std::string run_dir;
  std::vector<double> days{0.0, 8.0, 90.0};
  int repeats = 5;
  std::uint64_t seed = 0;
  std::string drift = "calibrated";  // calibrated | none
  std::string out;                   // default <run_dir>/aging.csv
};

struct EnergyOptions {
  std::string run_dir;
  std::string ledger;  // explicit ledger.json instead of <run_dir>/ledger.json
  std::vector<std::string> techs{"large-array", "mac-array", "mac-array-fast"};
  double tops_per_watt = 57.5e12;
  double pv_energy = 387e-12;
  std::string out;  // default <run_dir>/energy.json
};

struct StatsOptions {
  std::vector<std::string> inputs;  // [name=]path
  double alpha = 0.05;
  std::string out = "stats.json";
};

int cmd_train(const TrainOptions& options, std::ostream& out);
int cmd_characterize(const CharacterizeOptions& options, std::ostream& out);
int cmd_age(const AgeOptions& options, std::ostream& out);
int cmd_energy(const EnergyOptions& options, std::ostream& out);
int cmd_stats(const StatsOptions& options, std::ostream& out);
int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out);
int cmd_report(const std::vector<std::string>& run_dirs, std::ostream& out);

/// Numbers in a text file (separated by whitespace or commas), or the
/// `test_accuracies` array of a summary.json.
std::vector<double> read_accuracy_file(const std::string& path);

/// Maps an exception escaping a command to its exit code.
int exit_code_for(const std::exception& error);

}  // namespace memgrad::cli
