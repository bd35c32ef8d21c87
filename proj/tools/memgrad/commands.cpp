#include "commands.hpp"

#include "run_config.hpp"
#include "run_io.hpp"

#include "memgrad/energy_stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace memgrad::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.precision(10);
  return out;
}

json nullable(double numerator, double denominator) {
  if (denominator == 0.0 || !std::isfinite(numerator / denominator)) return nullptr;
  return numerator / denominator;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct RunOutcome {
  std::uint64_t seed = 0;
  double test_accuracy = 0.0;
  double mean_pulses_per_device = 0.0;
  std::vector<double> layer_mean_per_device;
  std::string dir;
};

RunOutcome train_one(RunConfig config, const PreparedData& data,
                     const std::shared_ptr<const TrajectoryBank>& bank, const std::string& dir,
                     const std::string& command_line) {
  const std::size_t n_in = data.full.dim();
  TrainingRun run(config.training, n_in, data.full.classes, bank);
  train(run, data.splits);
  write_run_dir(dir, config, run, data, command_line);
  const PulseStatistics ps = pulse_statistics(run);
  return {config.training.seed, run.final_test_accuracy.value_or(0.0), ps.mean_per_device,
          ps.layer_mean_per_device, dir};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e)) {
    return kExitData;
  }
  return kExitRuntime;
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
  if (o.repeat < 1) throw ConfigError("--repeat must be at least 1");
  const RunConfig base = load_run_config(o.config, o.overrides, o.env_seed);
  const PreparedData data = prepare_data(base);
  const bool device = !is_float(base.training.algorithm);
  const auto bank = device ? load_bank(base.bank) : nullptr;
  base.training.validate(data.full.dim(), data.full.classes);

  const std::size_t n = static_cast<std::size_t>(o.repeat);
  std::vector<RunOutcome> outcomes(n);
  std::vector<std::exception_ptr> errors(n);
  std::mutex print_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      RunConfig cfg = base;
      cfg.training.seed = base.training.seed + k;
      const std::string dir =
          n == 1 ? base.output
                 : (fs::path(base.output) / ("seed-" + std::to_string(cfg.training.seed))).string();
      cfg.output = dir;
      try {
        outcomes[k] = train_one(cfg, data, bank, dir, o.command_line);
        std::lock_guard lock(print_mutex);
        out << "seed " << outcomes[k].seed << ": test accuracy " << std::fixed
            << std::setprecision(4) << outcomes[k].test_accuracy;
        if (device) {
          out << ", mean pulses/device " << std::setprecision(1)
              << outcomes[k].mean_pulses_per_device;
        }
        out << " -> " << dir << '\n';
        out.unsetf(std::ios::floatfield);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned jobs = o.jobs > 0 ? static_cast<unsigned>(o.jobs) : std::thread::hardware_concurrency();
  jobs = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(n));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> acc;
  json seeds = json::array(), dirs = json::array(), pulses = json::array(),
       layer_means = json::array();
  for (const auto& r : outcomes) {
    acc.push_back(r.test_accuracy);
    seeds.push_back(r.seed);
    dirs.push_back(r.dir);
    pulses.push_back(r.mean_pulses_per_device);
    layer_means.push_back(r.layer_mean_per_device);
  }
  const json summary = {{"algorithm", to_string(base.training.algorithm)},
                        {"architecture", to_string(base.training.architecture)},
                        {"device_mode", device},
                        {"seeds", seeds},
                        {"run_dirs", dirs},
                        {"test_accuracies", acc},
                        {"mean", mean_of(acc)},
                        {"sd", sd_of(acc)},
                        {"mean_pulses_per_device", pulses},
                        {"layer_mean_pulses_per_device", layer_means}};
  write_json(fs::path(base.output) / "summary.json", summary);
  if (n > 1) {
    out << "mean test accuracy " << std::fixed << std::setprecision(4) << mean_of(acc)
        << " (sd " << sd_of(acc) << ") over " << n << " seeds\n";
    out.unsetf(std::ios::floatfield);
  }
  return kExitOk;
}

int cmd_characterize(const CharacterizeOptions& o, std::ostream& out) {
  if (o.bins < 1) throw ConfigError("--bins must be positive");
  if (o.cycles < 0) throw ConfigError("--cycles must not be negative");
  if (o.stride < 1) throw ConfigError("--stride must be positive");
  const RunConfig cfg = load_run_config(o.config, o.overrides);

  BankConfig bc = cfg.bank;
  bc.file = o.bank_file;
  bc.count = o.count;
  bc.seed = o.seed;
  const auto bank = load_bank(bc);
  if (bank->empty()) throw ConfigError("trajectory bank is empty");
  if (!o.save_bank.empty()) {
    const fs::path bank_path(o.save_bank);
    if (bank_path.has_parent_path()) fs::create_directories(bank_path.parent_path());
    save_trajectory_bank_csv(*bank, o.save_bank);
  }

  const fs::path root(o.out_dir);
  fs::create_directories(root);

  std::vector<double> pearson;
  {
    auto csv = open_csv(root / "pearson.csv");
    csv << "device_id,pearson\n";
    for (std::size_t d = 0; d < bank->size(); ++d) {
      const auto& t = *(*bank)[d];
      const std::size_t p = o.p_max == 0 ? t.max_pulses() : o.p_max;
      if (p > t.max_pulses()) {
        throw ConfigError("--p-max " + std::to_string(p) + " exceeds trajectory " +
                          std::to_string(d) + " (" + std::to_string(t.max_pulses()) + " pulses)");
      }
      pearson.push_back(pearson_coefficient(t, p));
      csv << d << ',' << pearson.back() << '\n';
    }
  }
  {
    std::vector<std::size_t> counts(static_cast<std::size_t>(o.bins), 0);
    for (double r : pearson) {
      auto b = static_cast<long>(std::floor((r + 1.0) / 2.0 * o.bins));
      b = std::clamp<long>(b, 0, o.bins - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
    auto csv = open_csv(root / "pearson_hist.csv");
    csv << "bin_lo,bin_hi,count\n";
    for (int b = 0; b < o.bins; ++b) {
      csv << -1.0 + 2.0 * b / o.bins << ',' << -1.0 + 2.0 * (b + 1) / o.bins << ','
          << counts[static_cast<std::size_t>(b)] << '\n';
    }
  }

  // One device cycled through reset/set: every cycle draws a fresh trajectory
  // and receives pulses_per_cycle reset pulses.
  const DeviceTechParams& tech = cfg.training.tech;
  Rng rng = make_rng(o.seed, 0xe4d);
  EnergyLedger ledger(tech);
  DeviceState dev;
  int completed = 0;
  std::string stop_reason;
  std::vector<double> window;  // first minus last conductance per completed cycle
  {
    auto csv = open_csv(root / "endurance.csv");
    csv << "cycle,pulse,conductance_uS\n";
    for (int c = 0; c < o.cycles && stop_reason.empty(); ++c) {
      reinitialize(dev, *bank, rng, &ledger);
      const double g0 = dev.conductance();
      csv << c << ",0," << g0 * 1e6 << '\n';
      try {
        for (std::size_t p = 1; p <= o.pulses_per_cycle; ++p) {
          const double pre = dev.conductance();
          const double g = apply_reset_pulse(dev, tech);
          ledger.log_pulse(pre);
          if (p % o.stride == 0 || p == o.pulses_per_cycle) {
            csv << c << ',' << p << ',' << g * 1e6 << '\n';
          }
        }
        window.push_back(g0 - dev.conductance());
        ++completed;
      } catch (const NeedsReinit&) {
        stop_reason = "trajectory shorter than --pulses-per-cycle in cycle " + std::to_string(c);
      } catch (const EnduranceExceeded&) {
        stop_reason = "endurance budget reached in cycle " + std::to_string(c);
      }
    }
  }
  const std::size_t head = std::min<std::size_t>(20, window.size());
  const std::vector<double> first(window.begin(), window.begin() + static_cast<long>(head));
  const std::vector<double> last(window.end() - static_cast<long>(head), window.end());
  const auto below = std::count_if(pearson.begin(), pearson.end(), [](double r) { return r < -0.9; });
  const json summary = {
      {"devices", bank->size()},
      {"pearson",
       {{"median", median_of(pearson)},
        {"mean", mean_of(pearson)},
        {"fraction_below_minus_0_9",
         static_cast<double>(below) / static_cast<double>(pearson.size())},
        {"bins", o.bins}}},
      {"endurance",
       {{"tech", tech.name},
        {"cycles_requested", o.cycles},
        {"cycles_completed", completed},
        {"pulses_per_cycle", o.pulses_per_cycle},
        {"lifetime_pulses", dev.lifetime_pulses},
        {"endurance_budget", tech.endurance_budget},
        {"within_budget", stop_reason.empty() && dev.lifetime_pulses <= tech.endurance_budget},
        {"stop_reason", stop_reason.empty() ? json(nullptr) : json(stop_reason)},
        {"reinit_count", ledger.reinit_count()},
        {"mean_window_first_cycles_uS", mean_of(first) * 1e6},
        {"mean_window_last_cycles_uS", mean_of(last) * 1e6},
        {"programming_energy_J", ledger.programming_energy()}}},
  };
  write_json(root / "characterize.json", summary);

  out << "devices: " << bank->size() << ", Pearson median " << std::setprecision(4)
      << median_of(pearson) << '\n'
      << "endurance: " << completed << " cycles, " << dev.lifetime_pulses << " pulses (budget "
      << tech.endurance_budget << ")\n";
  if (!stop_reason.empty()) out << "stopped: " << stop_reason << '\n';
  out << "wrote " << root.string() << '\n';
  return kExitOk;
}

int cmd_age(const AgeOptions& o, std::ostream& out) {
  if (o.repeats < 1) throw ConfigError("--repeats must be at least 1");
  if (o.days.empty()) throw ConfigError("--days needs at least one value");
  DriftModelParams drift;
  if (o.drift == "calibrated") {
    drift = DriftModelParams::calibrated();
  } else if (o.drift != "none") {
    throw ConfigError("unknown drift model '" + o.drift + "' (expected calibrated or none)");
  }
  const LoadedRun run = load_run_dir(o.run_dir);
  if (!run.device) throw ConfigError("aging needs a device-mode run");
  const FeatureDataset test = load_run_test_split(run);
  const auto points = simulate_aging(*run.device, test, o.days, drift, o.seed, o.repeats);

  const fs::path csv_path = o.out.empty() ? fs::path(o.run_dir) / "aging.csv" : fs::path(o.out);
  {
    auto csv = open_csv(csv_path);
    csv << "day,repeat,accuracy\n";
    for (const auto& p : points)
      for (std::size_t r = 0; r < p.accuracies.size(); ++r)
        csv << p.days << ',' << r << ',' << p.accuracies[r] << '\n';
  }
  json summary = json::array();
  for (const auto& p : points) {
    summary.push_back({{"day", p.days}, {"mean", p.mean}, {"sd", p.sd}});
    out << "day " << p.days << ": accuracy " << std::fixed << std::setprecision(4) << p.mean
        << " (sd " << p.sd << ")\n";
    out.unsetf(std::ios::floatfield);
  }
  fs::path json_path = csv_path;
  json_path.replace_extension(".json");
  write_json(json_path, {{"run_dir", o.run_dir},
                         {"drift", o.drift},
                         {"seed", o.seed},
                         {"repeats", o.repeats},
                         {"trained_test_accuracy", run.final_test_accuracy.value_or(0.0)},
                         {"checkpoints", summary}});
  return kExitOk;
}

int cmd_energy(const EnergyOptions& o, std::ostream& out) {
  if (o.run_dir.empty() && o.ledger.empty()) throw ConfigError("energy needs a run dir or --ledger");
  if (!(o.tops_per_watt > 0.0)) throw ConfigError("--tops-per-watt must be positive");
  if (!(o.pv_energy >= 0.0)) throw ConfigError("--pv-energy must not be negative");
  const std::string ledger_path =
      o.ledger.empty() ? (fs::path(o.run_dir) / "ledger.json").string() : o.ledger;
  if (!fs::exists(ledger_path)) throw ParseError("missing ledger '" + ledger_path + "'", 0);
  const LedgerSummary l = load_ledger_json(ledger_path);

  std::vector<DeviceTechParams> techs;
  for (const auto& name : o.techs) techs.push_back(DeviceTechParams::preset(name));

  auto read_energy = [&](const DeviceTechParams& t) {
    return l.sum_read_weighted_conductance * t.v_read * t.v_read * t.t_read;
  };
  const double recorded_programming = programming_energy(l.sum_pre_pulse_conductance, l.tech);
  const double mac_j = mac_energy_projection(l.mac_count, o.tops_per_watt);
  const double pv_j = pv_baseline_energy(l.pulse_count, o.pv_energy);

  json recost = json::array();
  std::vector<double> prog;
  for (const auto& t : techs) {
    const double e = programming_energy(l.sum_pre_pulse_conductance, t);
    prog.push_back(e);
    recost.push_back({{"tech", t.name},
                      {"programming_J", e},
                      {"read_J", read_energy(t)},
                      {"mean_pulse_energy_J", nullable(e, static_cast<double>(l.pulse_count))}});
  }
  json prog_ratios = json::array(), pv_ratios = json::array(), mac_ratios = json::array();
  for (std::size_t a = 0; a < techs.size(); ++a) {
    for (std::size_t b = a + 1; b < techs.size(); ++b) {
      prog_ratios.push_back({{"numerator", techs[a].name},
                             {"denominator", techs[b].name},
                             {"value", nullable(prog[a], prog[b])}});
    }
    pv_ratios.push_back({{"tech", techs[a].name}, {"value", nullable(pv_j, prog[a])}});
    mac_ratios.push_back({{"tech", techs[a].name}, {"value", nullable(mac_j, prog[a])}});
  }
  const json report = {
      {"ledger", ledger_path},
      {"recorded_tech", l.tech.name},
      {"counts",
       {{"pulses", l.pulse_count},
        {"reads", l.read_count},
        {"row_sweeps", l.row_sweeps},
        {"macs", l.mac_count},
        {"reinits", l.reinit_count}}},
      {"mean_pre_pulse_conductance_S",
       l.pulse_count ? l.sum_pre_pulse_conductance / static_cast<double>(l.pulse_count) : 0.0},
      {"totals",
       {{"programming_J", recorded_programming},
        {"read_J", read_energy(l.tech)},
        {"reinit_J", l.reinit_energy},
        {"mac_projection_J", mac_j},
        {"pv_baseline_J", pv_j}}},
      {"pv_energy_per_update_J", o.pv_energy},
      {"tops_per_watt", o.tops_per_watt},
      {"recosting", recost},
      {"ratios",
       {{"programming", prog_ratios},
        {"pv_over_programming", pv_ratios},
        {"mac_projection_over_programming", mac_ratios}}},
  };
  const fs::path dest = !o.out.empty() ? fs::path(o.out)
                        : !o.run_dir.empty() ? fs::path(o.run_dir) / "energy.json"
                                             : fs::path("energy.json");
  write_json(dest, report);

  out << std::setprecision(4) << "pulses " << l.pulse_count << ", MACs " << l.mac_count << '\n'
      << "programming (" << l.tech.name << "): " << recorded_programming << " J\n";
  for (std::size_t k = 0; k < techs.size(); ++k) {
    out << "  re-costed on " << techs[k].name << ": " << prog[k] << " J\n";
  }
  out << "read: " << read_energy(l.tech) << " J, MAC projection: " << mac_j
      << " J, program-and-verify baseline: " << pv_j << " J\n"
      << "wrote " << dest.string() << '\n';
  return kExitOk;
}

std::vector<double> read_accuracy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<double> values;
  if (first != std::string::npos && text[first] == '{') {
    try {
      const json j = json::parse(text);
      values = j.at("test_accuracies").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ParseError("'" + path + "' has no test_accuracies array: " + e.what(), 0);
    }
    return values;
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v)) {
        throw ParseError("'" + path + "': '" + tok + "' is not a number", line_no);
      }
      values.push_back(v);
    }
  }
  return values;
}

int cmd_stats(const StatsOptions& o, std::ostream& out) {
  if (o.inputs.size() < 2) throw ConfigError("need >= 2 groups");
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  std::vector<std::pair<std::string, std::vector<double>>> groups;
  for (const auto& in : o.inputs) {
    std::string name, path = in;
    if (const auto eq = in.find('='); eq != std::string::npos) {
      name = in.substr(0, eq);
      path = in.substr(eq + 1);
    } else {
      name = fs::path(in).stem().string();
      if (name == "summary") name = fs::path(in).parent_path().filename().string();
    }
    auto values = read_accuracy_file(path);
    if (values.size() < 2) {
      throw ParseError("group '" + name + "' needs at least two values", 0);
    }
    groups.emplace_back(name, std::move(values));
  }
  const StatReport r = compare_groups(groups, o.alpha);

  json jg = json::array(), jp = json::array();
  for (const auto& g : r.groups) {
    jg.push_back({{"name", g.name}, {"n", g.n}, {"mean", g.mean}, {"sd", g.sd}});
  }
  for (const auto& p : r.pairs) {
    jp.push_back({{"a", p.a},
                  {"b", p.b},
                  {"t", p.welch.t},
                  {"dof", p.welch.dof},
                  {"p", p.welch.p},
                  {"reject", p.reject}});
  }
  write_json(o.out, {{"alpha", r.alpha}, {"correction", "holm-bonferroni"}, {"groups", jg},
                     {"pairs", jp}});

  out << std::fixed;
  for (const auto& g : r.groups) {
    out << std::setw(12) << g.name << "  n=" << g.n << "  mean=" << std::setprecision(4) << g.mean
        << "  sd=" << g.sd << '\n';
  }
  for (const auto& p : r.pairs) {
    out << p.a << " vs " << p.b << ": p=" << std::setprecision(4) << p.welch.p << " -> "
        << (p.reject ? "reject" : "retain") << '\n';
  }
  out.unsetf(std::ios::floatfield);
  return kExitOk;
}

int cmd_gradcheck(const GradcheckOptions& o, std::ostream& out) {
  const auto results = run_gradcheck(o);
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed();
    out << (r.passed() ? "PASS " : "FAIL ") << r.name << ": " << r.configs - r.failures << '/'
        << r.configs << " within rtol " << o.rtol << ", worst " << std::scientific
        << std::setprecision(2) << r.worst_error << '\n';
    out.unsetf(std::ios::floatfield);
  }
  if (o.negative_control) out << "(negative control: analytic gradients sign-flipped)\n";
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_report(const std::vector<std::string>& run_dirs, std::ostream& out) {
  if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
  for (const auto& dir : run_dirs) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw ParseError("run directory '" + dir + "' does not exist", 0);
    out << "== " << dir << '\n';
    const fs::path summary_path = root / "summary.json";
    if (fs::exists(summary_path) && !fs::exists(root / "manifest.json")) {
      std::ifstream in(summary_path);
      const json s = json::parse(in, nullptr, false);
      if (s.is_discarded()) throw ParseError("malformed '" + summary_path.string() + "'", 0);
      out << "algorithm " << s.value("algorithm", "?") << ", " << s["seeds"].size() << " seeds\n"
          << std::fixed << std::setprecision(4) << "test accuracy mean " << s.value("mean", 0.0)
          << " sd " << s.value("sd", 0.0) << '\n';
      out.unsetf(std::ios::floatfield);
      continue;
    }
    const LoadedRun run = load_run_dir(dir);
    const auto& tc = run.config.training;
    std::ifstream in(root / "manifest.json");
    const json m = json::parse(in);
    out << "algorithm " << to_string(tc.algorithm);
    if (base_rule(tc.algorithm) == Algorithm::BP) out << " (" << to_string(tc.architecture) << ')';
    out << ", seed " << tc.seed << ", " << (run.device ? "device" : "float") << " mode\n";
    out << "dataset " << m["dataset"].value("provenance", "") << ", n=" << m["dataset"]["n"]
        << ", dim=" << run.n_in << ", classes=" << run.classes << '\n';
    out << std::fixed << std::setprecision(4) << "final test accuracy "
        << m["final"].value("test_accuracy", 0.0) << ", train accuracy "
        << m["final"].value("train_accuracy", 0.0) << '\n';
    if (run.device) {
      const auto& p = m["pulses"];
      out << std::setprecision(1) << "pulses total " << p["total"] << ", mean per device "
          << p.value("mean_per_device", 0.0) << ", per layer";
      for (const auto& v : p["layer_mean_per_device"]) out << ' ' << v.get<double>();
      out << '\n';
    }
    out.unsetf(std::ios::floatfield);
    std::ifstream curve(root / "curve.csv");
    std::string line;
    std::getline(curve, line);
    out << "validation accuracy by epoch:";
    while (std::getline(curve, line)) {
      std::istringstream cells(line);
      std::string epoch, split, acc;
      std::getline(cells, epoch, ',');
      std::getline(cells, split, ',');
      std::getline(cells, acc, ',');
      if (split == "val") out << ' ' << epoch << ':' << acc.substr(0, 6);
    }
    out << '\n';
    for (const char* extra : {"aging.json", "energy.json"}) {
      if (fs::exists(root / extra)) out << "has " << extra << '\n';
    }
  }
  return kExitOk;
}

}  // namespace memgrad::cli
