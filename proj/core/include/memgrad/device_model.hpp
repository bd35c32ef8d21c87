#pragma once

#include "memgrad/common.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace memgrad {

class EnergyLedger;

/// Where a reset trajectory came from.
struct TrajectorySource {
  enum class Kind { Measured, Synthetic };
  Kind kind = Kind::Synthetic;
  std::string file_id;     // Measured: bank file the trace was loaded from
  std::uint64_t seed = 0;  // Synthetic: per-device generator seed
};

/// Conductance (siemens) versus cumulative reset-pulse count.
///
/// Index 0 is the post-initialization low-resistance state; index i is the
/// conductance read after the i-th pulse. A trajectory of length L therefore
/// supports exactly L - 1 pulses before the device must be reinitialized.
class ResetTrajectory {
 public:
  ResetTrajectory(std::vector<double> conductances, TrajectorySource source = {});

  std::size_t size() const { return conductances_.size(); }
  std::size_t max_pulses() const { return conductances_.size() - 1; }
  double operator[](std::size_t i) const { return conductances_[i]; }
  std::span<const double> conductances() const { return conductances_; }
  const TrajectorySource& source() const { return source_; }

  // True when no pulse ever increases the conductance.
  bool monotone() const;

 private:
  std::vector<double> conductances_;
  TrajectorySource source_;
};

using TrajectoryPtr = std::shared_ptr<const ResetTrajectory>;

/// Pool of trajectories that devices draw from at initialization and at every
/// reinitialization. Traces are shared, never copied.
class TrajectoryBank {
 public:
  TrajectoryBank() = default;
  explicit TrajectoryBank(std::vector<TrajectoryPtr> trajectories);

  std::size_t size() const { return trajectories_.size(); }
  bool empty() const { return trajectories_.empty(); }
  const TrajectoryPtr& operator[](std::size_t i) const { return trajectories_[i]; }
  auto begin() const { return trajectories_.begin(); }
  auto end() const { return trajectories_.end(); }

  // Uniform draw; throws ConfigError on an empty bank.
  const TrajectoryPtr& draw(Rng& rng) const;

  // Shortest trajectory length in the bank (0 when empty).
  std::size_t min_length() const;

 private:
  std::vector<TrajectoryPtr> trajectories_;
};

/// Long-format CSV: `device_id,pulse_index,conductance_uS`, pulse_index dense from 0.
TrajectoryBank load_trajectory_bank_csv(const std::string& path);
void save_trajectory_bank_csv(const TrajectoryBank& bank, const std::string& path);

/// Pulse and read conditions of one memristor platform.
struct DeviceTechParams {
  std::string name = "large-array";
  double v_reset = 0.9;     // V across the device during a reset pulse
  double t_reset = 600e-9;  // s
  double v_read = 0.2;      // effective input voltage magnitude at the device
  double t_read = 15e-6;    // s, integration time of one read
  std::uint64_t max_pulses_between_reinit = 5000;
  std::uint64_t endurance_budget = 1'500'000;
  double reinit_energy = 0.0;  // J per full reset/set reinitialization (unknown; reported separately)

  // Bias bookkeeping for the ternary-input MAC interface. Energy-only metadata.
  double v_source_offset = 0.7;
  double v_bitline_minus = 0.5;
  double v_bitline_plus = 0.9;

  void validate() const;

  static DeviceTechParams large_array();
  static DeviceTechParams mac_array();
  // mac_array() with a short read integration, for integrated-system projections.
  static DeviceTechParams mac_array_fast();
  // Looks up one of the named presets above; throws ConfigError otherwise.
  static DeviceTechParams preset(const std::string& name);
};

/// One physical memristor replaying its trajectory.
struct DeviceState {
  TrajectoryPtr trajectory;
  std::size_t pulse_index = 0;
  std::uint64_t reinit_count = 0;
  std::uint64_t lifetime_pulses = 0;

  double conductance() const { return (*trajectory)[pulse_index]; }
  // No recorded conductance left, or the platform's reinit interval is reached.
  bool exhausted(const DeviceTechParams& tech) const;
  bool worn_out(const DeviceTechParams& tech) const {
    return lifetime_pulses >= tech.endurance_budget;
  }
  bool can_pulse(const DeviceTechParams& tech) const {
    return !exhausted(tech) && !worn_out(tech);
  }
};

/// Advances the device one step along its trajectory and returns the new
/// conductance. Throws NeedsReinit or EnduranceExceeded instead of clamping.
double apply_reset_pulse(DeviceState& device, const DeviceTechParams& tech);

/// Full reset/set cycle back to low resistance: draws a fresh trajectory from
/// the bank (cycle-to-cycle variation) and rewinds the pulse index. The
/// reinit energy is logged when a ledger is supplied.
void reinitialize(DeviceState& device, const TrajectoryBank& bank, Rng& rng,
                  EnergyLedger* ledger = nullptr);

enum class DecrementFamily { TruncatedNormal, LogNormal };

/// Parameters of the synthetic trajectory generator (all conductances in siemens).
struct SyntheticTrajectoryParams {
  double initial_mean = 90e-6;
  double initial_sigma = 6e-6;
  DecrementFamily family = DecrementFamily::TruncatedNormal;
  double decrement_mean = 0.015e-6;
  double decrement_sigma = 0.02e-6;
  // Final fraction of the trajectory where pulse-to-pulse variability grows.
  double late_onset_fraction = 0.8;
  double late_amplification = 4.0;
  // Probability that a device's decrements have a random sign on every pulse.
  double anomalous_probability = 0.06;
  std::size_t pulses = 5000;  // P_max; trajectories hold pulses + 1 samples

  void validate() const;
};

/// Deterministic for fixed (params, count, seed); device k uses stream k.
TrajectoryBank generate_trajectory_bank(const SyntheticTrajectoryParams& params,
                                        std::size_t count, std::uint64_t seed);

/// Pearson coefficient between conductance and pulse number over the first
/// `p_max` pulses (samples 1..p_max of the trajectory). Requires
/// 2 <= p_max <= trajectory.max_pulses(). Constant traces give 0.
double pearson_coefficient(const ResetTrajectory& trajectory, std::size_t p_max);

/// Same statistic for a bare sequence, pulse numbers 1..n.
double pearson_coefficient(std::span<const double> conductances);

/// Per-horizon parameters of the zero-mean drift mixture
/// `(1 - w) N(0, core^2) + w N(0, tail^2)` (siemens).
struct DriftAnchor {
  double days = 0.0;
  double core_sigma = 0.0;
  double tail_sigma = 0.0;
  double tail_weight = 0.0;
};

struct DriftTarget {
  double days = 0.0;
  double bound = 3e-6;     // |dG| bound, siemens
  double fraction = 0.0;   // population fraction expected inside the bound
};

struct DriftModelParams {
  // Sorted by days. Parameters are interpolated linearly in days between
  // anchors, from an implicit zero-drift anchor at day 0, and held constant
  // beyond the last anchor.
  std::vector<DriftAnchor> anchors;
  std::vector<DriftTarget> targets;

  void validate() const;
  DriftAnchor at(double days) const;

  // Calibrated to the retention anchors: 94.1 % within 3 uS at 8 days,
  // 90.7 % within 3 uS at 90 days.
  static DriftModelParams calibrated();
  static DriftModelParams none() { return {}; }
};

/// Solves the tail weight of each target so that the mixture puts exactly
/// `fraction` of its mass inside `bound` at that horizon.
DriftModelParams calibrate_drift(std::vector<DriftTarget> targets, double core_sigma,
                                 double tail_sigma);

/// Analytic population fraction with |dG| < bound at the given horizon.
double drift_fraction_within(const DriftModelParams& params, double days, double bound);

/// Draws one drift realization for a device read at `days` after programming.
/// Output is clamped at zero; days == 0 returns the input unchanged.
double apply_retention_drift(double conductance, double days, const DriftModelParams& params,
                             Rng& rng);

/// Energy of one reset pulse: G * V_reset^2 * t_reset.
double pulse_energy(double conductance, const DeviceTechParams& tech);

}  // namespace memgrad
