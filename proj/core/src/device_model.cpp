#include "memgrad/device_model.hpp"

#include "memgrad/energy_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace memgrad {

ResetTrajectory::ResetTrajectory(std::vector<double> conductances, TrajectorySource source)
    : conductances_(std::move(conductances)), source_(std::move(source)) {
  if (conductances_.size() < 2) {
    throw ParameterError("reset trajectory needs at least 2 samples");
  }
  for (double g : conductances_) {
    if (!std::isfinite(g) || g < 0.0) {
      throw ParameterError("reset trajectory conductances must be finite and non-negative");
    }
  }
}

bool ResetTrajectory::monotone() const {
  return std::adjacent_find(conductances_.begin(), conductances_.end(),
                            [](double a, double b) { return b > a; }) == conductances_.end();
}

TrajectoryBank::TrajectoryBank(std::vector<TrajectoryPtr> trajectories)
    : trajectories_(std::move(trajectories)) {
  for (const auto& t : trajectories_) {
    if (!t) throw ParameterError("trajectory bank contains a null trajectory");
  }
}

const TrajectoryPtr& TrajectoryBank::draw(Rng& rng) const {
  if (trajectories_.empty()) throw ConfigError("trajectory bank is empty");
  std::uniform_int_distribution<std::size_t> pick(0, trajectories_.size() - 1);
  return trajectories_[pick(rng)];
}

std::size_t TrajectoryBank::min_length() const {
  std::size_t n = 0;
  for (const auto& t : trajectories_) n = n == 0 ? t->size() : std::min(n, t->size());
  return n;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    // Tolerate CRLF files.
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("invalid ") + what + " '" + text + "'", line);
  }
}

long long parse_integer(const std::string& text, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("invalid ") + what + " '" + text + "'", line);
  }
}

}  // namespace

TrajectoryBank load_trajectory_bank_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trajectory bank '" + path + "'", 0);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trajectory bank file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "device_id,pulse_index,conductance_uS") {
    throw ParseError("expected header 'device_id,pulse_index,conductance_uS'", 1);
  }

  // Devices keep their first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::map<long long, double>> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
    const auto& id = fields[0];
    if (id.empty()) throw ParseError("empty device_id", line_no);
    long long index = parse_integer(fields[1], line_no, "pulse_index");
    double g_us = parse_double(fields[2], line_no, "conductance_uS");
    if (index < 0) throw ParseError("negative pulse_index", line_no);
    if (!std::isfinite(g_us) || g_us < 0.0) {
      throw ParseError("conductance must be finite and non-negative", line_no);
    }
    auto [it, inserted] = samples.try_emplace(id);
    if (inserted) order.push_back(id);
    if (!it->second.emplace(index, g_us).second) {
      throw ParseError("duplicate pulse_index " + std::to_string(index) + " for device " + id,
                       line_no);
    }
  }
  if (order.empty()) throw ParseError("trajectory bank has no rows", line_no);

  std::vector<TrajectoryPtr> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    const auto& by_index = samples[id];
    std::vector<double> g;
    g.reserve(by_index.size());
    long long expected = 0;
    for (const auto& [index, value] : by_index) {
      if (index != expected) {
        throw ParseError("device " + id + ": pulse_index not dense (missing " +
                             std::to_string(expected) + ")",
                         0);
      }
      g.push_back(from_microsiemens(value));
      ++expected;
    }
    if (g.size() < 2) throw ParseError("device " + id + ": fewer than 2 samples", 0);
    TrajectorySource source{TrajectorySource::Kind::Measured, path + "#" + id, 0};
    out.push_back(std::make_shared<const ResetTrajectory>(std::move(g), std::move(source)));
  }
  return TrajectoryBank(std::move(out));
}

void save_trajectory_bank_csv(const TrajectoryBank& bank, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "device_id,pulse_index,conductance_uS\n";
  out.precision(17);
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const auto g = bank[k]->conductances();
    for (std::size_t i = 0; i < g.size(); ++i) {
      out << k << ',' << i << ',' << to_microsiemens(g[i]) << '\n';
    }
  }
}

void DeviceTechParams::validate() const {
  if (!(v_reset > 0.0 && v_reset < 1.0)) {
    throw ParameterError("tech '" + name + "': reset voltage must lie in (0, 1) V");
  }
  if (!(t_reset > 0.0) || !(t_read > 0.0)) {
    throw ParameterError("tech '" + name + "': pulse and read durations must be positive");
  }
  if (!(v_read > 0.0)) throw ParameterError("tech '" + name + "': read voltage must be positive");
  if (max_pulses_between_reinit == 0 || endurance_budget == 0) {
    throw ParameterError("tech '" + name + "': pulse budgets must be positive");
  }
  if (!(reinit_energy >= 0.0)) throw ParameterError("tech '" + name + "': negative reinit energy");
}

DeviceTechParams DeviceTechParams::large_array() { return {}; }

DeviceTechParams DeviceTechParams::mac_array() {
  DeviceTechParams t;
  t.name = "mac-array";
  t.v_reset = 0.62;
  t.t_reset = 30e-9;
  return t;
}

DeviceTechParams DeviceTechParams::mac_array_fast() {
  DeviceTechParams t = mac_array();
  t.name = "mac-array-fast";
  t.t_read = 10e-9;
  return t;
}

DeviceTechParams DeviceTechParams::preset(const std::string& name) {
  if (name == "large-array") return large_array();
  if (name == "mac-array") return mac_array();
  if (name == "mac-array-fast") return mac_array_fast();
  throw ConfigError("unknown tech profile '" + name +
                    "' (expected large-array, mac-array or mac-array-fast)");
}

bool DeviceState::exhausted(const DeviceTechParams& tech) const {
  return pulse_index + 1 >= trajectory->size() || pulse_index >= tech.max_pulses_between_reinit;
}

double apply_reset_pulse(DeviceState& device, const DeviceTechParams& tech) {
  if (device.worn_out(tech)) {
    throw EnduranceExceeded("device reached its endurance budget of " +
                            std::to_string(tech.endurance_budget) + " pulses");
  }
  if (device.exhausted(tech)) {
    throw NeedsReinit("device trajectory exhausted at pulse " +
                      std::to_string(device.pulse_index));
  }
  ++device.pulse_index;
  ++device.lifetime_pulses;
  return device.conductance();
}

void reinitialize(DeviceState& device, const TrajectoryBank& bank, Rng& rng,
                  EnergyLedger* ledger) {
  device.trajectory = bank.draw(rng);
  device.pulse_index = 0;
  ++device.reinit_count;
  if (ledger) ledger->log_reinit();
}

void SyntheticTrajectoryParams::validate() const {
  if (pulses < 2) throw ParameterError("synthetic trajectories need at least 2 pulses");
  if (!(initial_sigma >= 0.0) || !(decrement_sigma >= 0.0)) {
    throw ParameterError("synthetic trajectory sigmas must be non-negative");
  }
  if (!(decrement_mean > 0.0)) throw ParameterError("decrement mean must be positive");
  if (!(initial_mean > 0.0)) throw ParameterError("initial conductance mean must be positive");
  if (!(late_onset_fraction >= 0.0 && late_onset_fraction <= 1.0)) {
    throw ParameterError("late onset fraction must lie in [0, 1]");
  }
  if (!(late_amplification >= 0.0)) throw ParameterError("late amplification must be >= 0");
  if (!(anomalous_probability >= 0.0 && anomalous_probability <= 1.0)) {
    throw ParameterError("anomalous probability must lie in [0, 1]");
  }
}

namespace {

double draw_decrement(DecrementFamily family, double mean, double sigma, Rng& rng) {
  if (sigma == 0.0) return mean;
  if (family == DecrementFamily::LogNormal) {
    const double s2 = std::log1p((sigma * sigma) / (mean * mean));
    std::lognormal_distribution<double> d(std::log(mean) - 0.5 * s2, std::sqrt(s2));
    return d(rng);
  }
  std::normal_distribution<double> d(mean, sigma);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double v = d(rng);
    if (v > 0.0) return v;
  }
  return mean;
}

}  // namespace

TrajectoryBank generate_trajectory_bank(const SyntheticTrajectoryParams& params,
                                        std::size_t count, std::uint64_t seed) {
  params.validate();
  if (count == 0) throw ParameterError("trajectory bank count must be >= 1");

  const auto late_start =
      static_cast<std::size_t>(std::floor(params.late_onset_fraction * double(params.pulses)));
  std::vector<TrajectoryPtr> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng = make_rng(seed, k);
    std::normal_distribution<double> initial(params.initial_mean, params.initial_sigma);
    std::bernoulli_distribution anomalous_draw(params.anomalous_probability);
    std::bernoulli_distribution coin(0.5);

    const double g0 = params.initial_sigma > 0.0 ? std::max(0.0, initial(rng)) : params.initial_mean;
    const bool anomalous = anomalous_draw(rng);

    std::vector<double> g(params.pulses + 1);
    g[0] = g0;
    for (std::size_t i = 1; i <= params.pulses; ++i) {
      const double sigma =
          i > late_start ? params.decrement_sigma * params.late_amplification : params.decrement_sigma;
      double step = draw_decrement(params.family, params.decrement_mean, sigma, rng);
      if (anomalous && coin(rng)) step = -step;
      g[i] = std::max(0.0, g[i - 1] - step);
    }
    TrajectorySource source{TrajectorySource::Kind::Synthetic, {}, seed};
    out.push_back(std::make_shared<const ResetTrajectory>(std::move(g), std::move(source)));
  }
  return TrajectoryBank(std::move(out));
}

double pearson_coefficient(std::span<const double> g) {
  const std::size_t n = g.size();
  if (n < 2) throw ParameterError("pearson coefficient needs at least 2 samples");
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  if (*lo == *hi) return 0.0;

  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= nd;
  const double centre = (nd + 1.0) / 2.0;

  double var_g = 0.0, var_p = 0.0, cov = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dg = g[k] - mean;
    const double dp = static_cast<double>(k + 1) - centre;
    var_g += dg * dg;
    var_p += dp * dp;
    cov += dg * dp;
  }
  const double sigma_g = std::sqrt(var_g / nd);
  const double sigma_p = std::sqrt(var_p / nd);
  const double rho = cov / nd / (sigma_g * sigma_p);
  return std::clamp(rho, -1.0, 1.0);
}

double pearson_coefficient(const ResetTrajectory& trajectory, std::size_t p_max) {
  if (p_max < 2 || p_max > trajectory.max_pulses()) {
    throw ParameterError("p_max must lie in [2, " + std::to_string(trajectory.max_pulses()) + "]");
  }
  return pearson_coefficient(trajectory.conductances().subspan(1, p_max));
}

void DriftModelParams::validate() const {
  double last = 0.0;
  for (const auto& a : anchors) {
    if (!(a.days > last)) throw ParameterError("drift anchors must have increasing positive days");
    last = a.days;
    if (!std::isfinite(a.core_sigma) || !std::isfinite(a.tail_sigma) || a.core_sigma < 0.0 ||
        a.tail_sigma < 0.0) {
      throw ParameterError("drift sigmas must be finite and non-negative");
    }
    if (!(a.tail_weight >= 0.0 && a.tail_weight <= 1.0)) {
      throw ParameterError("drift tail weight must lie in [0, 1]");
    }
  }
  for (const auto& t : targets) {
    if (!(t.fraction >= 0.0 && t.fraction <= 1.0)) {
      throw ParameterError("drift CDF targets must lie in [0, 1]");
    }
  }
}

DriftAnchor DriftModelParams::at(double days) const {
  if (anchors.empty() || days <= 0.0) return {days, 0.0, 0.0, 0.0};
  DriftAnchor prev{0.0, 0.0, 0.0, 0.0};
  for (const auto& a : anchors) {
    if (days <= a.days) {
      const double f = (days - prev.days) / (a.days - prev.days);
      auto lerp = [f](double x, double y) { return x + f * (y - x); };
      return {days, lerp(prev.core_sigma, a.core_sigma), lerp(prev.tail_sigma, a.tail_sigma),
              lerp(prev.tail_weight, a.tail_weight)};
    }
    prev = a;
  }
  DriftAnchor last = anchors.back();
  last.days = days;
  return last;
}

namespace {

// P(|X| < bound) for X ~ N(0, sigma^2).
double normal_within(double bound, double sigma) {
  if (sigma == 0.0) return bound > 0.0 ? 1.0 : 0.0;
  return std::erf(bound / (sigma * std::sqrt(2.0)));
}

}  // namespace

DriftModelParams calibrate_drift(std::vector<DriftTarget> targets, double core_sigma,
                                 double tail_sigma) {
  if (!(core_sigma >= 0.0) || !(tail_sigma > core_sigma)) {
    throw ParameterError("drift calibration needs 0 <= core_sigma < tail_sigma");
  }
  std::sort(targets.begin(), targets.end(),
            [](const DriftTarget& a, const DriftTarget& b) { return a.days < b.days; });
  DriftModelParams params;
  for (const auto& t : targets) {
    const double core = normal_within(t.bound, core_sigma);
    const double tail = normal_within(t.bound, tail_sigma);
    const double weight = (core - t.fraction) / (core - tail);
    if (!(weight >= 0.0 && weight <= 1.0)) {
      throw ParameterError("drift target at " + std::to_string(t.days) +
                           " days is unreachable with the given sigmas");
    }
    params.anchors.push_back({t.days, core_sigma, tail_sigma, weight});
  }
  params.targets = std::move(targets);
  params.validate();
  return params;
}

DriftModelParams DriftModelParams::calibrated() {
  return calibrate_drift({{8.0, 3e-6, 0.941}, {90.0, 3e-6, 0.907}}, 0.8e-6, 8e-6);
}

double drift_fraction_within(const DriftModelParams& params, double days, double bound) {
  const DriftAnchor a = params.at(days);
  return (1.0 - a.tail_weight) * normal_within(bound, a.core_sigma) +
         a.tail_weight * normal_within(bound, a.tail_sigma);
}

double apply_retention_drift(double conductance, double days, const DriftModelParams& params,
                             Rng& rng) {
  if (days < 0.0) throw ParameterError("retention horizon must be non-negative");
  if (days == 0.0) return conductance;
  const DriftAnchor a = params.at(days);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  const bool tail = u(rng) < a.tail_weight;
  const double dz = z(rng);
  const double sigma = tail ? a.tail_sigma : a.core_sigma;
  if (sigma == 0.0) return conductance;
  return std::max(0.0, conductance + sigma * dz);
}

double pulse_energy(double conductance, const DeviceTechParams& tech) {
  return conductance * tech.v_reset * tech.v_reset * tech.t_reset;
}

}  // namespace memgrad
