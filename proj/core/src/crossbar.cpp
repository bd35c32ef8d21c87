#include "memgrad/crossbar.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace memgrad {

void ReadModelParams::validate() const {
  if (!(multiplicative_sigma >= 0.0) || !(additive_sigma >= 0.0)) {
    throw ParameterError("read noise sigmas must be non-negative");
  }
}

CrossbarArray::CrossbarArray(std::size_t rows, std::size_t cols,
                             std::vector<DifferentialPair> pairs, double scale_s,
                             DeviceTechParams tech)
    : rows_(rows), cols_(cols), pairs_(std::move(pairs)), scale_s_(scale_s), tech_(std::move(tech)) {
  if (rows_ == 0 || cols_ == 0) throw ShapeError("crossbar needs at least one row and column");
  if (pairs_.size() != rows_ * cols_) throw ShapeError("crossbar pair count != rows * cols");
  if (!(scale_s_ > 0.0) || !std::isfinite(scale_s_)) {
    throw ParameterError("weight scale s must be positive");
  }
  tech_.validate();
  for (const auto& p : pairs_) {
    if (!p.plus.trajectory || !p.minus.trajectory) {
      throw ParameterError("every device needs a trajectory");
    }
  }
}

CrossbarArray CrossbarArray::initialize(std::size_t rows, std::size_t cols,
                                        const TrajectoryBank& bank, const DeviceTechParams& tech,
                                        double scale_s, const ArrayInitParams& init, Rng& rng) {
  if (bank.empty()) throw ConfigError("trajectory bank is empty");
  tech.validate();
  std::uniform_int_distribution<std::size_t> pre(0, init.max_pre_pulses);
  auto make_device = [&] {
    DeviceState d;
    d.trajectory = bank.draw(rng);
    const std::size_t n = pre(rng);
    for (std::size_t k = 0; k < n && d.can_pulse(tech); ++k) apply_reset_pulse(d, tech);
    return d;
  };
  std::vector<DifferentialPair> pairs;
  pairs.reserve(rows * cols);
  for (std::size_t k = 0; k < rows * cols; ++k) {
    DifferentialPair p;
    p.plus = make_device();
    p.minus = make_device();
    pairs.push_back(std::move(p));
  }
  return CrossbarArray(rows, cols, std::move(pairs), scale_s, tech);
}

Matrix CrossbarArray::conductance_plus() const {
  Matrix g(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) g(r, c) = pair(r, c).plus.conductance();
  return g;
}

Matrix CrossbarArray::conductance_minus() const {
  Matrix g(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) g(r, c) = pair(r, c).minus.conductance();
  return g;
}

void CrossbarArray::swap_polarities() {
  for (auto& p : pairs_) std::swap(p.plus, p.minus);
}

Matrix map_weights(const Matrix& g_plus, const Matrix& g_minus, double scale_s) {
  if (g_plus.rows() != g_minus.rows() || g_plus.cols() != g_minus.cols()) {
    throw ShapeError("G+ and G- shapes differ");
  }
  return scale_s * (g_plus - g_minus);
}

Matrix map_weights(const CrossbarArray& array) {
  Matrix w(array.rows(), array.cols());
  for (std::size_t r = 0; r < array.rows(); ++r)
    for (std::size_t c = 0; c < array.cols(); ++c)
      w(r, c) = array.scale_s() * array.pair(r, c).difference();
  return w;
}

Matrix layer_weights(const CrossbarArray& array) { return map_weights(array).transpose(); }

namespace {

// sum over the row's devices of G+ + G-, per row.
Vector row_conductance_sums(const CrossbarArray& array) {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(array.rows()));
  for (std::size_t r = 0; r < array.rows(); ++r)
    for (std::size_t c = 0; c < array.cols(); ++c) {
      const auto& p = array.pair(r, c);
      s(r) += p.plus.conductance() + p.minus.conductance();
    }
  return s;
}

}  // namespace

Vector mac(const CrossbarArray& array, const Vector& x, const ReadModelParams& read_model,
           Rng& rng, EnergyLedger* ledger) {
  if (static_cast<std::size_t>(x.size()) != array.rows()) {
    throw ShapeError("mac input has " + std::to_string(x.size()) + " entries, array has " +
                     std::to_string(array.rows()) + " rows");
  }
  const double v_read = array.tech().v_read;
  Vector current = Vector::Zero(static_cast<Eigen::Index>(array.cols()));
  for (std::size_t j = 0; j < array.rows(); ++j) {
    if (x(j) == 0.0) continue;
    const double drive = x(j) * v_read;
    for (std::size_t i = 0; i < array.cols(); ++i) {
      const auto& p = array.pair(j, i);
      current(i) += p.plus.conductance() * drive - p.minus.conductance() * drive;
    }
  }
  if (read_model.enabled) {
    read_model.validate();
    std::normal_distribution<double> z(0.0, 1.0);
    for (Eigen::Index i = 0; i < current.size(); ++i) {
      current(i) = current(i) * (1.0 + read_model.multiplicative_sigma * z(rng)) +
                   read_model.additive_sigma * z(rng);
    }
  }
  if (ledger) {
    ledger->use_tech(array.tech());
    const Vector rows = row_conductance_sums(array);
    double weighted = 0.0;
    std::uint32_t sweeps = 0;
    for (std::size_t j = 0; j < array.rows(); ++j) {
      if (x(j) == 0.0) continue;
      weighted += x(j) * x(j) * rows(j);
      ++sweeps;
    }
    ledger->log_read(weighted, sweeps);
    ledger->add_macs(array.rows() * array.cols());
  }
  return array.gain_kappa() * current;
}

void record_forward_reads(const CrossbarArray& array, const Matrix& inputs, EnergyLedger& ledger) {
  if (static_cast<std::size_t>(inputs.cols()) != array.rows()) {
    throw ShapeError("forward inputs do not match the array rows");
  }
  ledger.use_tech(array.tech());
  const Vector rows = row_conductance_sums(array);
  for (Eigen::Index n = 0; n < inputs.rows(); ++n) {
    double weighted = 0.0;
    std::uint32_t sweeps = 0;
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
      const double x = inputs(n, j);
      if (x == 0.0) continue;
      weighted += x * x * rows(j);
      ++sweeps;
    }
    ledger.log_read(weighted, sweeps);
    ledger.add_macs(array.rows() * array.cols());
  }
}

Vector ternarize(const Vector& x, double dead_zone) {
  if (!(dead_zone >= 0.0)) throw ParameterError("dead zone must be non-negative");
  Vector t(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    t(k) = std::fabs(x(k)) > dead_zone ? (x(k) > 0.0 ? 1.0 : -1.0) : 0.0;
  }
  return t;
}

Matrix ternarize(const Matrix& x, double dead_zone) {
  if (!(dead_zone >= 0.0)) throw ParameterError("dead zone must be non-negative");
  return x.unaryExpr([dead_zone](double v) {
    return std::fabs(v) > dead_zone ? (v > 0.0 ? 1.0 : -1.0) : 0.0;
  });
}

void UpdatePlan::add(const UpdateAction& action) {
  if (find(action.output, action.input)) {
    throw ParameterError("update plan already has an action for weight (" +
                         std::to_string(action.output) + ", " + std::to_string(action.input) +
                         ")");
  }
  index_.emplace((std::uint64_t(action.output) << 32) | std::uint64_t(action.input),
                 actions_.size());
  actions_.push_back(action);
}

const UpdateAction* UpdatePlan::find(std::size_t output, std::size_t input) const {
  const auto it = index_.find((std::uint64_t(output) << 32) | std::uint64_t(input));
  return it == index_.end() ? nullptr : &actions_[it->second];
}

std::size_t PulseReport::applied() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.outcome != ActionOutcome::Skipped;
  return n;
}

std::size_t PulseReport::skipped() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.outcome == ActionOutcome::Skipped;
  return n;
}

std::size_t PulseReport::reinitialized() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.outcome == ActionOutcome::ReinitThenApplied;
  return n;
}

PulseReport apply_update_plan(CrossbarArray& array, const UpdatePlan& plan,
                              ExhaustionPolicy policy, const TrajectoryBank* bank, Rng* rng,
                              EnergyLedger* ledger) {
  for (const auto& a : plan.actions()) {
    if (a.output >= array.cols() || a.input >= array.rows()) {
      throw ShapeError("update action (" + std::to_string(a.output) + ", " +
                       std::to_string(a.input) + ") outside a " + std::to_string(array.cols()) +
                       "x" + std::to_string(array.rows()) + " weight matrix");
    }
  }
  if (policy == ExhaustionPolicy::AutoReinit && (!bank || !rng)) {
    throw ConfigError("auto-reinit needs a trajectory bank and an rng");
  }
  if (ledger) ledger->use_tech(array.tech());

  const auto& tech = array.tech();
  PulseReport report;
  report.entries.reserve(plan.size());
  for (const auto& a : plan.actions()) {
    DeviceState& device = array.pair(a.input, a.output).device(a.polarity);
    ActionReport entry{a, ActionOutcome::Applied, 0.0};
    if (!device.can_pulse(tech)) {
      if (policy == ExhaustionPolicy::AutoReinit && !device.worn_out(tech)) {
        reinitialize(device, *bank, *rng, ledger);
        entry.outcome = ActionOutcome::ReinitThenApplied;
      } else {
        entry.outcome = ActionOutcome::Skipped;
        report.entries.push_back(entry);
        continue;
      }
    }
    entry.pre_pulse_conductance = device.conductance();
    apply_reset_pulse(device, tech);
    if (ledger) ledger->log_pulse(entry.pre_pulse_conductance);
    report.entries.push_back(entry);
  }
  return report;
}

ArraySnapshot snapshot(const CrossbarArray& array) {
  ArraySnapshot s;
  s.rows = array.rows();
  s.cols = array.cols();
  s.g_plus = array.conductance_plus();
  s.g_minus = array.conductance_minus();
  for (std::size_t r = 0; r < array.rows(); ++r)
    for (std::size_t c = 0; c < array.cols(); ++c) {
      s.pulse_index_plus.push_back(array.pair(r, c).plus.pulse_index);
      s.pulse_index_minus.push_back(array.pair(r, c).minus.pulse_index);
    }
  return s;
}

void save_array_snapshot_csv(const CrossbarArray& array, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out.precision(17);
  out << "row,col,g_plus_uS,g_minus_uS,pulse_index_plus,pulse_index_minus\n";
  for (std::size_t r = 0; r < array.rows(); ++r)
    for (std::size_t c = 0; c < array.cols(); ++c) {
      const auto& p = array.pair(r, c);
      out << r << ',' << c << ',' << to_microsiemens(p.plus.conductance()) << ','
          << to_microsiemens(p.minus.conductance()) << ',' << p.plus.pulse_index << ','
          << p.minus.pulse_index << '\n';
    }
}

ArraySnapshot load_array_snapshot_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open array snapshot '" + path + "'", 0);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "row,col,g_plus_uS,g_minus_uS,pulse_index_plus,pulse_index_minus") {
    throw ParseError("unexpected array snapshot header", 1);
  }
  struct Row {
    std::size_t r, c, ip, im;
    double gp, gm;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1, max_r = 0, max_c = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    Row row{};
    char c1, c2, c3, c4, c5;
    if (!(ss >> row.r >> c1 >> row.c >> c2 >> row.gp >> c3 >> row.gm >> c4 >> row.ip >> c5 >>
          row.im) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',') {
      throw ParseError("malformed array snapshot row", line_no);
    }
    if (!std::isfinite(row.gp) || !std::isfinite(row.gm) || row.gp < 0.0 || row.gm < 0.0) {
      throw ParseError("conductance must be finite and non-negative", line_no);
    }
    max_r = std::max(max_r, row.r);
    max_c = std::max(max_c, row.c);
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError("array snapshot has no rows", line_no);
  ArraySnapshot s;
  s.rows = max_r + 1;
  s.cols = max_c + 1;
  if (rows.size() != s.rows * s.cols) throw ParseError("array snapshot is not a full grid", 0);
  s.g_plus = Matrix::Constant(s.rows, s.cols, -1.0);
  s.g_minus = Matrix::Zero(s.rows, s.cols);
  s.pulse_index_plus.assign(s.rows * s.cols, 0);
  s.pulse_index_minus.assign(s.rows * s.cols, 0);
  for (const auto& row : rows) {
    if (s.g_plus(row.r, row.c) >= 0.0) throw ParseError("duplicate array snapshot cell", 0);
    s.g_plus(row.r, row.c) = from_microsiemens(row.gp);
    s.g_minus(row.r, row.c) = from_microsiemens(row.gm);
    s.pulse_index_plus[row.r * s.cols + row.c] = row.ip;
    s.pulse_index_minus[row.r * s.cols + row.c] = row.im;
  }
  return s;
}

}  // namespace memgrad
