#include "commands.hpp"

#include "memgrad/common.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace memgrad::cli;

std::optional<std::string> env_seed() {
  if (const char* s = std::getenv("MEMGRAD_SEED"); s && *s) return std::string(s);
  return std::nullopt;
}

std::uint64_t seed_or_env(const CLI::Option* flag, std::uint64_t value) {
  if (flag->count() > 0) return value;
  if (const auto s = env_seed()) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(*s, &used);
      if (used == s->size()) return v;
    } catch (const std::exception&) {
    }
    throw memgrad::ConfigError("MEMGRAD_SEED='" + *s + "' is not an unsigned integer");
  }
  return value;
}

std::string json_string(const std::string& value) { return nlohmann::json(value).dump(); }

std::string joined_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memristor crossbar training simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "memgrad 0.1.0");

  // train
  TrainOptions train;
  std::string algo, arch, task, features, images, labels, out_dir, tech;
  std::uint64_t train_seed = 0;
  std::vector<std::string> sets;
  auto* t = app.add_subcommand("train", "Train a network and write a run directory");
  t->add_option("--config", train.config, "JSON run configuration");
  t->add_option("--algo", algo, "bp | sff | cf | float-bp | float-sff | float-cf");
  t->add_option("--arch", arch, "perceptron | mlp (bp only)");
  t->add_option("--task", task, "synthetic | csv | idx");
  t->add_option("--features", features, "feature CSV (task csv)");
  t->add_option("--images", images, "IDX image file (task idx)");
  t->add_option("--labels", labels, "IDX label file (task idx)");
  auto* train_seed_flag = t->add_option("--seed", train_seed, "run seed");
  t->add_option("--tech", tech, "device technology preset");
  t->add_option("--out", out_dir, "output directory");
  t->add_option("--set", sets, "override a config key, e.g. schedule.batch_size=32");
  t->add_option("--repeat", train.repeat, "number of seeds (seed, seed+1, ...)")
      ->check(CLI::PositiveNumber);
  t->add_option("--jobs", train.jobs, "worker threads for --repeat (default: all cores)");

  // characterize
  CharacterizeOptions ch;
  auto* c = app.add_subcommand("characterize", "Pearson statistics and endurance of a trajectory bank");
  c->add_option("--config", ch.config, "JSON run configuration (bank.synthetic, device.tech)");
  c->add_option("--set", ch.overrides, "override a config key");
  c->add_option("--bank", ch.bank_file, "trajectory bank CSV (default: synthetic)");
  c->add_option("--count", ch.count, "synthetic bank size");
  c->add_option("--seed", ch.seed, "synthetic bank seed");
  c->add_option("--p-max", ch.p_max, "pulses used for the Pearson coefficient (0: all)");
  c->add_option("--bins", ch.bins, "histogram bins over [-1, 1]");
  c->add_option("--cycles", ch.cycles, "reset/set cycles of the endurance run");
  c->add_option("--pulses-per-cycle", ch.pulses_per_cycle, "reset pulses per cycle");
  c->add_option("--stride", ch.stride, "keep every n-th pulse in endurance.csv");
  c->add_option("--out", ch.out_dir, "output directory");
  c->add_option("--save-bank", ch.save_bank, "also write the bank as CSV");

  // age
  AgeOptions age;
  auto* a = app.add_subcommand("age", "Re-evaluate a device run under retention drift");
  a->add_option("run_dir", age.run_dir, "run directory")->required();
  a->add_option("--days", age.days, "checkpoints in days")->delimiter(',');
  a->add_option("--repeats", age.repeats, "drift draws per checkpoint");
  auto* age_seed_flag = a->add_option("--seed", age.seed, "drift seed");
  a->add_option("--drift", age.drift, "calibrated | none");
  a->add_option("--out", age.out, "aging CSV path (default: <run_dir>/aging.csv)");

  // energy
  EnergyOptions en;
  auto* e = app.add_subcommand("energy", "Energy totals and cross-technology re-costing of a run");
  e->add_option("run_dir", en.run_dir, "run directory");
  e->add_option("--ledger", en.ledger, "ledger.json to read instead of <run_dir>/ledger.json");
  e->add_option("--tech", en.techs, "technology presets to re-cost on")->delimiter(',');
  e->add_option("--tops-per-watt", en.tops_per_watt, "MAC efficiency for the projection");
  e->add_option("--pv-energy", en.pv_energy, "program-and-verify energy per update (J)");
  e->add_option("--out", en.out, "report path (default: <run_dir>/energy.json)");

  // stats
  StatsOptions st;
  auto* s = app.add_subcommand("stats", "Welch t-tests with Holm-Bonferroni correction");
  s->add_option("inputs", st.inputs, "[name=]file with accuracies, or a summary.json")->required();
  s->add_option("--alpha", st.alpha, "family-wise significance level");
  s->add_option("--out", st.out, "report path");

  // gradcheck
  GradcheckOptions gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference checks of the learning-rule gradients");
  g->add_option("--rule", gc.rule, "sff | cf | bp | all");
  g->add_option("--variant", gc.variant, "temperature | offset | all");
  g->add_option("--configs", gc.configs, "random configurations per suite");
  auto* gc_seed_flag = g->add_option("--seed", gc.seed, "sampling seed");
  g->add_option("--rtol", gc.rtol, "relative tolerance");
  g->add_option("--margin", gc.margin, "minimum distance of pre-activations from zero");
  g->add_flag("--negative-control", gc.negative_control, "flip the analytic gradient sign");

  // report
  std::vector<std::string> report_dirs;
  auto* r = app.add_subcommand("report", "Plain-text summary of run directories");
  r->add_option("run_dirs", report_dirs, "run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (t->parsed()) {
      auto& ov = train.overrides;
      if (!algo.empty()) ov.push_back("algorithm=" + json_string(algo));
      if (!arch.empty()) ov.push_back("architecture=" + json_string(arch));
      if (!task.empty()) ov.push_back("task.kind=" + json_string(task));
      if (!features.empty()) ov.push_back("task.features=" + json_string(features));
      if (!images.empty()) ov.push_back("task.images=" + json_string(images));
      if (!labels.empty()) ov.push_back("task.labels=" + json_string(labels));
      if (train_seed_flag->count() > 0) ov.push_back("seed=" + std::to_string(train_seed));
      if (!tech.empty()) ov.push_back("device.tech.name=" + json_string(tech));
      if (!out_dir.empty()) ov.push_back("output=" + json_string(out_dir));
      ov.insert(ov.end(), sets.begin(), sets.end());
      train.env_seed = env_seed();
      train.command_line = joined_args(argc, argv);
      return cmd_train(train, std::cout);
    }
    if (c->parsed()) return cmd_characterize(ch, std::cout);
    if (a->parsed()) {
      age.seed = seed_or_env(age_seed_flag, age.seed);
      return cmd_age(age, std::cout);
    }
    if (e->parsed()) return cmd_energy(en, std::cout);
    if (s->parsed()) return cmd_stats(st, std::cout);
    if (g->parsed()) {
      gc.seed = seed_or_env(gc_seed_flag, gc.seed);
      return cmd_gradcheck(gc, std::cout);
    }
    if (r->parsed()) return cmd_report(report_dirs, std::cout);
  } catch (const std::exception& err) {
    std::cerr << "memgrad: error: " << err.what() << '\n';
    return exit_code_for(err);
  }
  return kExitConfig;
}
