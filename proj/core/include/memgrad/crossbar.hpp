#pragma once

#include "memgrad/device_model.hpp"
#include "memgrad/energy_stats.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace memgrad {

/// Which device of a differential pair receives the reset pulse.
/// PulsePlus resets G+ (weight decreases); PulseMinus resets G- (weight increases).
enum class Polarity : std::uint8_t { PulsePlus, PulseMinus };

struct DifferentialPair {
  DeviceState plus;
  DeviceState minus;

  double difference() const { return plus.conductance() - minus.conductance(); }
  DeviceState& device(Polarity p) { return p == Polarity::PulsePlus ? plus : minus; }
  const DeviceState& device(Polarity p) const {
    return p == Polarity::PulsePlus ? plus : minus;
  }
};

/// Read non-idealities applied per column current.
struct ReadModelParams {
  bool enabled = false;
  double multiplicative_sigma = 0.01;  // relative
  double additive_sigma = 0.0;         // A
  void validate() const;
};

struct ArrayInitParams {
  // Each device receives a uniform random number of pre-pulses in
  // [0, max_pre_pulses] after drawing its trajectory, to break G+/G- symmetry.
  std::size_t max_pre_pulses = 50;
};

/// Grid of differential pairs. Rows are inputs, columns are outputs, so the
/// current of column i is sum_j (G+_ji - G-_ji) x_j V_read.
class CrossbarArray {
 public:
  CrossbarArray(std::size_t rows, std::size_t cols, std::vector<DifferentialPair> pairs,
                double scale_s, DeviceTechParams tech);

  static CrossbarArray initialize(std::size_t rows, std::size_t cols, const TrajectoryBank& bank,
                                  const DeviceTechParams& tech, double scale_s,
                                  const ArrayInitParams& init, Rng& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t device_count() const { return 2 * rows_ * cols_; }
  double scale_s() const { return scale_s_; }
  // Read gain kappa such that scale_s = kappa * V_read.
  double gain_kappa() const { return scale_s_ / tech_.v_read; }
  const DeviceTechParams& tech() const { return tech_; }

  DifferentialPair& pair(std::size_t row, std::size_t col) { return pairs_[row * cols_ + col]; }
  const DifferentialPair& pair(std::size_t row, std::size_t col) const {
    return pairs_[row * cols_ + col];
  }

  // rows x cols conductance matrices (S).
  Matrix conductance_plus() const;
  Matrix conductance_minus() const;

  // Exchanges G+ and G- in every pair.
  void swap_polarities();

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<DifferentialPair> pairs_;
  double scale_s_;
  DeviceTechParams tech_;
};

/// W = s (G+ - G-), rows x cols (input-major, the physical layout).
Matrix map_weights(const CrossbarArray& array);
Matrix map_weights(const Matrix& g_plus, const Matrix& g_minus, double scale_s);

/// The same weights as an (outputs x inputs) layer matrix, as used by the learning rules.
Matrix layer_weights(const CrossbarArray& array);

/// Analog MAC: y_i = kappa * sum_j (G+_ji - G-_ji) x_j V_read. Noise, when
/// enabled, perturbs each column current. Logs one read event when a ledger
/// is supplied.
Vector mac(const CrossbarArray& array, const Vector& x, const ReadModelParams& read_model,
           Rng& rng, EnergyLedger* ledger = nullptr);

/// Logs the reads and MAC operations of a software-emulated forward pass of
/// `inputs` (one sample per row) through `array`.
void record_forward_reads(const CrossbarArray& array, const Matrix& inputs, EnergyLedger& ledger);

/// sign(x_j) where |x_j| > dead_zone, else 0.
Vector ternarize(const Vector& x, double dead_zone);
Matrix ternarize(const Matrix& x, double dead_zone);

/// One single-pulse programming action, addressed in weight coordinates
/// (output i, input j) which correspond to array column i, row j.
struct UpdateAction {
  std::size_t output = 0;
  std::size_t input = 0;
  Polarity polarity = Polarity::PulsePlus;

  friend bool operator==(const UpdateAction&, const UpdateAction&) = default;
};

/// At most one action per weight.
class UpdatePlan {
 public:
  // Throws ParameterError when the weight already has an action.
  void add(const UpdateAction& action);
  const std::vector<UpdateAction>& actions() const { return actions_; }
  std::size_t size() const { return actions_.size(); }
  bool empty() const { return actions_.empty(); }
  const UpdateAction* find(std::size_t output, std::size_t input) const;

 private:
  std::vector<UpdateAction> actions_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

enum class ExhaustionPolicy { Skip, AutoReinit };

enum class ActionOutcome { Applied, Skipped, ReinitThenApplied };

struct ActionReport {
  UpdateAction action;
  ActionOutcome outcome = ActionOutcome::Applied;
  double pre_pulse_conductance = 0.0;  // S, read just before the pulse (0 when skipped)
};

struct PulseReport {
  std::vector<ActionReport> entries;
  std::size_t applied() const;  // includes reinit-then-applied
  std::size_t skipped() const;
  std::size_t reinitialized() const;
};

/// Applies every action as exactly one reset pulse on the designated device.
/// Devices that cannot be pulsed are skipped, or with AutoReinit first
/// reinitialized from `bank` (worn-out devices are always skipped).
PulseReport apply_update_plan(CrossbarArray& array, const UpdatePlan& plan,
                              ExhaustionPolicy policy, const TrajectoryBank* bank = nullptr,
                              Rng* rng = nullptr, EnergyLedger* ledger = nullptr);

/// Conductances and pulse indices of an array, as persisted in run directories.
struct ArraySnapshot {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Matrix g_plus;
  Matrix g_minus;
  std::vector<std::size_t> pulse_index_plus;   // row-major
  std::vector<std::size_t> pulse_index_minus;  // row-major
};

ArraySnapshot snapshot(const CrossbarArray& array);

/// CSV `row,col,g_plus_uS,g_minus_uS,pulse_index_plus,pulse_index_minus`.
void save_array_snapshot_csv(const CrossbarArray& array, const std::string& path);
ArraySnapshot load_array_snapshot_csv(const std::string& path);

}  // namespace memgrad
