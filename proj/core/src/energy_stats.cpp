#include "memgrad/energy_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace memgrad {

std::uint16_t EnergyLedger::tech_index(const DeviceTechParams& tech) {
  for (std::size_t i = 0; i < techs_.size(); ++i) {
    if (techs_[i].name == tech.name) return static_cast<std::uint16_t>(i);
  }
  techs_.push_back(tech);
  return static_cast<std::uint16_t>(techs_.size() - 1);
}

void EnergyLedger::use_tech(const DeviceTechParams& tech) {
  tech.validate();
  current_ = tech_index(tech);
}

void EnergyLedger::log_pulse(double pre_pulse_conductance) {
  if (techs_.empty()) use_tech(DeviceTechParams::large_array());
  pulse_conductance_.push_back(pre_pulse_conductance);
  pulse_tech_.push_back(current_);
  sum_pulse_conductance_ += pre_pulse_conductance;
  programming_energy_ += pulse_energy(pre_pulse_conductance, techs_[current_]);
}

void EnergyLedger::log_read(double weighted_conductance, std::uint32_t row_sweeps) {
  if (techs_.empty()) use_tech(DeviceTechParams::large_array());
  reads_.push_back({weighted_conductance, row_sweeps, current_});
  row_sweeps_ += row_sweeps;
  const auto& t = techs_[current_];
  read_energy_ += weighted_conductance * t.v_read * t.v_read * t.t_read;
}

void EnergyLedger::log_reinit() {
  if (techs_.empty()) use_tech(DeviceTechParams::large_array());
  ++reinit_count_;
  reinit_energy_ += techs_[current_].reinit_energy;
}

void EnergyLedger::append(const EnergyLedger& other) {
  const auto saved = current_;
  std::vector<std::uint16_t> remap;
  for (const auto& t : other.techs_) remap.push_back(tech_index(t));
  for (std::size_t k = 0; k < other.pulse_conductance_.size(); ++k) {
    current_ = remap[other.pulse_tech_[k]];
    log_pulse(other.pulse_conductance_[k]);
  }
  for (const auto& r : other.reads_) {
    current_ = remap[r.tech];
    log_read(r.weighted_conductance, r.row_sweeps);
  }
  reinit_count_ += other.reinit_count_;
  reinit_energy_ += other.reinit_energy_;
  mac_count_ += other.mac_count_;
  current_ = techs_.empty() ? 0 : saved;
}

double EnergyLedger::recompute_programming_energy() const {
  double e = 0.0;
  for (std::size_t k = 0; k < pulse_conductance_.size(); ++k) {
    e += pulse_energy(pulse_conductance_[k], techs_[pulse_tech_[k]]);
  }
  return e;
}

double EnergyLedger::recompute_read_energy() const {
  double e = 0.0;
  for (const auto& r : reads_) {
    const auto& t = techs_[r.tech];
    e += r.weighted_conductance * t.v_read * t.v_read * t.t_read;
  }
  return e;
}

double programming_energy(const EnergyLedger& ledger, const DeviceTechParams& tech) {
  double e = 0.0;
  for (double g : ledger.pulse_conductances()) e += pulse_energy(g, tech);
  return e;
}

double programming_energy(double sum_pre_pulse_conductance, const DeviceTechParams& tech) {
  return pulse_energy(sum_pre_pulse_conductance, tech);
}

double pv_baseline_energy(std::uint64_t update_count, double per_update_energy) {
  return static_cast<double>(update_count) * per_update_energy;
}

double mac_energy_projection(std::uint64_t mac_count, double ops_per_joule) {
  if (!(ops_per_joule > 0.0)) throw ParameterError("efficiency must be positive");
  return 2.0 * static_cast<double>(mac_count) / ops_per_joule;
}

namespace {

// Continued fraction of I_x(a, b), valid for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-12;
  constexpr int kMaxIter = 10000;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double dof) {
  if (!(dof > 0.0)) throw ParameterError("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return std::clamp(regularized_incomplete_beta(0.5 * dof, 0.5, x), 0.0, 1.0);
}

namespace {

struct Moments {
  double n;
  double mean;
  double var;  // sample variance
};

Moments moments(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {n, mean, ss / (n - 1.0)};
}

}  // namespace

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ParameterError("Welch's t-test needs at least two values per sample");
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double va = ma.var / ma.n;
  const double vb = mb.var / mb.n;
  const double se2 = va + vb;
  WelchResult r;
  if (se2 == 0.0) {
    r.p = ma.mean == mb.mean ? 1.0 : 0.0;
    r.t = ma.mean == mb.mean ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(),
                                                   ma.mean - mb.mean);
    r.dof = ma.n + mb.n - 2.0;
    return r;
  }
  r.t = (ma.mean - mb.mean) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
  r.p = student_t_two_tailed_p(r.t, r.dof);
  return r;
}

std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });
  std::vector<bool> reject(m, false);
  for (std::size_t k = 0; k < m; ++k) {
    if (p_values[order[k]] > alpha / static_cast<double>(m - k)) break;
    reject[order[k]] = true;
  }
  return reject;
}

GroupSummary summarize(const std::string& name, std::span<const double> values) {
  GroupSummary g;
  g.name = name;
  g.n = values.size();
  if (values.empty()) return g;
  const Moments m = moments(values);
  g.mean = m.mean;
  g.sd = values.size() > 1 ? std::sqrt(m.var) : 0.0;
  return g;
}

StatReport compare_groups(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                          double alpha) {
  if (groups.size() < 2) throw ParameterError("need >= 2 groups");
  for (const auto& [name, values] : groups) {
    if (values.size() < 2) throw ParameterError("group '" + name + "' needs >= 2 values");
  }
  StatReport report;
  report.alpha = alpha;
  for (const auto& [name, values] : groups) report.groups.push_back(summarize(name, values));
  std::vector<double> p;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      PairwiseComparison c;
      c.a = groups[i].first;
      c.b = groups[j].first;
      c.welch = welch_t_test(groups[i].second, groups[j].second);
      p.push_back(c.welch.p);
      report.pairs.push_back(std::move(c));
    }
  }
  const auto reject = holm_bonferroni(p, alpha);
  for (std::size_t k = 0; k < reject.size(); ++k) report.pairs[k].reject = reject[k];
  return report;
}

}  // namespace memgrad
