#pragma once

#include "memgrad/device_model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace memgrad {

/// Event log of everything that costs energy during a run.
///
/// Pulse events keep the conductance measured immediately before the pulse,
/// which is all that is needed to re-cost the same pulse sequence under a
/// different device technology. Read events keep the input-weighted
/// conductance sum of one MAC (sum over driven rows of x_j^2 * sum of the row's
/// device conductances), so that E_read = sum * V_read^2 * t_read.
class EnergyLedger {
 public:
  struct ReadEvent {
    double weighted_conductance = 0.0;  // S
    std::uint32_t row_sweeps = 0;
    std::uint16_t tech = 0;
  };

  EnergyLedger() = default;
  explicit EnergyLedger(const DeviceTechParams& tech) { use_tech(tech); }

  // Selects the technology that subsequent events are attributed to.
  void use_tech(const DeviceTechParams& tech);

  void log_pulse(double pre_pulse_conductance);
  void log_read(double weighted_conductance, std::uint32_t row_sweeps);
  void log_reinit();
  void add_macs(std::uint64_t count) { mac_count_ += count; }

  // Appends another ledger's events (technologies are merged by name).
  void append(const EnergyLedger& other);

  std::size_t pulse_count() const { return pulse_conductance_.size(); }
  std::size_t read_count() const { return reads_.size(); }
  std::uint64_t row_sweeps() const { return row_sweeps_; }
  std::uint64_t reinit_count() const { return reinit_count_; }
  std::uint64_t mac_count() const { return mac_count_; }
  std::span<const double> pulse_conductances() const { return pulse_conductance_; }
  std::span<const ReadEvent> reads() const { return reads_; }
  const std::vector<DeviceTechParams>& techs() const { return techs_; }

  // Cached running totals, in the recorded technologies.
  double sum_pre_pulse_conductance() const { return sum_pulse_conductance_; }
  double programming_energy() const { return programming_energy_; }
  double read_energy() const { return read_energy_; }
  double reinit_energy() const { return reinit_energy_; }

  // The same totals rebuilt from the raw events.
  double recompute_programming_energy() const;
  double recompute_read_energy() const;

 private:
  std::uint16_t tech_index(const DeviceTechParams& tech);

  std::vector<DeviceTechParams> techs_;
  std::uint16_t current_ = 0;
  std::vector<double> pulse_conductance_;
  std::vector<std::uint16_t> pulse_tech_;
  std::vector<ReadEvent> reads_;
  std::uint64_t row_sweeps_ = 0;
  std::uint64_t reinit_count_ = 0;
  std::uint64_t mac_count_ = 0;
  double sum_pulse_conductance_ = 0.0;
  double programming_energy_ = 0.0;
  double read_energy_ = 0.0;
  double reinit_energy_ = 0.0;
};

/// Re-costs every pulse event of the ledger under `tech`:
/// sum of G_pre * V_reset^2 * t_reset.
double programming_energy(const EnergyLedger& ledger, const DeviceTechParams& tech);

/// Same, from the summed pre-pulse conductance (energy is linear in G).
double programming_energy(double sum_pre_pulse_conductance, const DeviceTechParams& tech);

constexpr double kProgramVerifyEnergyPerUpdate = 387e-12;  // J
constexpr double kReferenceTopsPerWatt = 57.5e12;         // ops/J

/// Energy a program-and-verify scheme would spend on the same number of updates.
double pv_baseline_energy(std::uint64_t update_count,
                          double per_update_energy = kProgramVerifyEnergyPerUpdate);

/// MAC energy at a quoted system efficiency; one MAC counts as two operations.
double mac_energy_projection(std::uint64_t mac_count,
                             double ops_per_joule = kReferenceTopsPerWatt);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
/// (modified Lentz) with relative tolerance 1e-12.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-tailed p-value of Student's t distribution with `dof` degrees of freedom.
double student_t_two_tailed_p(double t, double dof);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
};

/// Two-tailed Welch's t-test (unequal variances, Welch-Satterthwaite dof).
/// Each sample needs at least two values. When both variances are zero the
/// p-value is 1 for equal means and 0 otherwise.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

inline double welch_p_value(std::span<const double> a, std::span<const double> b) {
  return welch_t_test(a, b).p;
}

/// Holm step-down procedure; true means the null hypothesis is rejected.
std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha);

struct GroupSummary {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
};

struct PairwiseComparison {
  std::string a;
  std::string b;
  WelchResult welch;
  bool reject = false;  // after Holm correction
};

struct StatReport {
  double alpha = 0.05;
  std::vector<GroupSummary> groups;
  std::vector<PairwiseComparison> pairs;  // all unordered pairs in input order
};

GroupSummary summarize(const std::string& name, std::span<const double> values);

/// All pairwise Welch tests plus Holm decisions. Requires >= 2 groups of >= 2 values.
StatReport compare_groups(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                          double alpha);

}  // namespace memgrad
