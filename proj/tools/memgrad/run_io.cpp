#include "run_io.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace memgrad::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("cannot allocate a digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", md[k]);
    hex += buf;
  }
  return hex;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what(), 0);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

json tech_json(const DeviceTechParams& t) {
  return {{"name", t.name},
          {"v_reset", t.v_reset},
          {"t_reset", t.t_reset},
          {"v_read", t.v_read},
          {"t_read", t.t_read},
          {"max_pulses_between_reinit", t.max_pulses_between_reinit},
          {"endurance_budget", t.endurance_budget},
          {"reinit_energy", t.reinit_energy}};
}

DeviceTechParams tech_from_json(const json& j) {
  DeviceTechParams t;
  t.name = j.at("name").get<std::string>();
  t.v_reset = j.at("v_reset").get<double>();
  t.t_reset = j.at("t_reset").get<double>();
  t.v_read = j.at("v_read").get<double>();
  t.t_read = j.at("t_read").get<double>();
  t.max_pulses_between_reinit = j.at("max_pulses_between_reinit").get<std::uint64_t>();
  t.endurance_budget = j.at("endurance_budget").get<std::uint64_t>();
  t.reinit_energy = j.at("reinit_energy").get<double>();
  return t;
}

std::string weights_file(std::size_t layer, bool device) {
  return "layer" + std::to_string(layer) + (device ? "_array.csv" : "_weights.csv");
}

void save_weights_csv(const Matrix& w, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.precision(17);
  out << "output,input,weight\n";
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) out << i << ',' << j << ',' << w(i, j) << '\n';
}

Matrix load_weights_csv(const std::string& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open weight file '" + path + "'", 0);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "output,input,weight") throw ParseError("unexpected weight file header", 1);
  Matrix w = Matrix::Constant(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols),
                              std::numeric_limits<double>::quiet_NaN());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    std::size_t i = 0, j = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0;
    if (!(ss >> i >> c1 >> j >> c2 >> v) || c1 != ',' || c2 != ',' || i >= rows || j >= cols) {
      throw ParseError("malformed weight row", line_no);
    }
    w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
  }
  if (!w.allFinite()) throw ParseError("weight file '" + path + "' is incomplete", 0);
  return w;
}

}  // namespace

std::string git_blob_sha1_file(const std::string& path) { return git_blob_sha1(read_file(path)); }

FeatureDataset load_task(const TaskConfig& task) {
  if (task.kind == "synthetic") return make_cluster_task(task.synthetic);
  if (task.kind == "csv") {
    if (task.features.empty()) throw ConfigError("task.features is required for csv tasks");
    return load_feature_csv(task.features, task.classes);
  }
  if (task.kind == "idx") {
    if (task.images.empty() || task.labels.empty()) {
      throw ConfigError("task.images and task.labels are required for idx tasks");
    }
    return load_idx(task.images, task.labels);
  }
  throw ConfigError("unknown task kind '" + task.kind + "'");
}

std::shared_ptr<const TrajectoryBank> load_bank(const BankConfig& bank) {
  if (!bank.file.empty()) {
    return std::make_shared<const TrajectoryBank>(load_trajectory_bank_csv(bank.file));
  }
  return std::make_shared<const TrajectoryBank>(
      generate_trajectory_bank(bank.synthetic, bank.count, bank.seed));
}

PreparedData prepare_data(const RunConfig& config) {
  PreparedData d;
  d.full = load_task(config.task);
  d.full.validate();
  d.indices = split_indices(d.full, config.split);
  d.splits = {d.full.subset(d.indices.train), d.full.subset(d.indices.val),
              d.full.subset(d.indices.test)};
  std::ostringstream csv;
  write_feature_csv(d.full, csv);
  std::string material = git_blob_sha1(csv.str());
  if (!config.bank.file.empty() && !is_float(config.training.algorithm)) {
    material += git_blob_sha1_file(config.bank.file);
  }
  d.inputs_hash = git_blob_sha1(material);
  return d;
}

LedgerSummary summarize_ledger(const EnergyLedger& ledger, const DeviceTechParams& tech) {
  LedgerSummary s;
  s.tech = tech;
  s.pulse_count = ledger.pulse_count();
  s.sum_pre_pulse_conductance = ledger.sum_pre_pulse_conductance();
  s.read_count = ledger.read_count();
  s.row_sweeps = ledger.row_sweeps();
  for (const auto& r : ledger.reads()) s.sum_read_weighted_conductance += r.weighted_conductance;
  s.mac_count = ledger.mac_count();
  s.reinit_count = ledger.reinit_count();
  s.reinit_energy = ledger.reinit_energy();
  return s;
}

void save_ledger_json(const LedgerSummary& l, const std::string& path) {
  const json j = {{"tech", tech_json(l.tech)},
                  {"pulse_count", l.pulse_count},
                  {"sum_pre_pulse_conductance_S", l.sum_pre_pulse_conductance},
                  {"read_count", l.read_count},
                  {"row_sweeps", l.row_sweeps},
                  {"sum_read_weighted_conductance_S", l.sum_read_weighted_conductance},
                  {"mac_count", l.mac_count},
                  {"reinit_count", l.reinit_count},
                  {"reinit_energy_J", l.reinit_energy}};
  write_text(path, j.dump(2) + "\n");
}

LedgerSummary load_ledger_json(const std::string& path) {
  const json j = read_json(path);
  try {
    LedgerSummary l;
    l.tech = tech_from_json(j.at("tech"));
    l.pulse_count = j.at("pulse_count").get<std::uint64_t>();
    l.sum_pre_pulse_conductance = j.at("sum_pre_pulse_conductance_S").get<double>();
    l.read_count = j.at("read_count").get<std::uint64_t>();
    l.row_sweeps = j.at("row_sweeps").get<std::uint64_t>();
    l.sum_read_weighted_conductance = j.at("sum_read_weighted_conductance_S").get<double>();
    l.mac_count = j.at("mac_count").get<std::uint64_t>();
    l.reinit_count = j.at("reinit_count").get<std::uint64_t>();
    l.reinit_energy = j.at("reinit_energy_J").get<double>();
    return l;
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "' is not a ledger: " + e.what(), 0);
  }
}

void write_run_dir(const std::string& dir, const RunConfig& config, const TrainingRun& run,
                   const PreparedData& data, const std::string& command_line) {
  const fs::path root(dir);
  fs::create_directories(root);
  const bool device = run.device_mode();

  {
    std::ofstream out(root / "curve.csv");
    out.precision(10);
    out << "epoch,split,accuracy,loss\n";
    for (const auto& e : run.epochs()) {
      out << e.epoch << ",val," << e.val_accuracy << ',';
      if (e.epoch > 0) out << e.train_loss;
      out << '\n';
    }
    const int last = run.epochs().empty() ? 0 : run.epochs().back().epoch;
    if (run.final_train_accuracy) out << last << ",train," << *run.final_train_accuracy << ",\n";
    if (run.final_test_accuracy) out << last << ",test," << *run.final_test_accuracy << ",\n";
  }
  {
    std::ofstream out(root / "steps.csv");
    out.precision(10);
    out << "phase,epoch,batch,loss";
    for (std::size_t l = 0; l < run.layers().size(); ++l) out << ",pulses_l" << l << ",skipped_l" << l;
    out << '\n';
    for (const auto& s : run.steps()) {
      out << s.phase << ',' << s.epoch << ',' << s.batch << ',' << s.loss;
      for (std::size_t l = 0; l < s.pulses.size(); ++l) out << ',' << s.pulses[l] << ',' << s.skipped[l];
      out << '\n';
    }
  }
  {
    std::ofstream out(root / "pulses.csv");
    out << "layer,row,col,count\n";
    const auto& counts = run.pulse_counts();
    for (std::size_t l = 0; l < counts.size(); ++l) {
      const auto& arr = *run.layers()[l].array;
      for (std::size_t r = 0; r < arr.rows(); ++r)
        for (std::size_t c = 0; c < arr.cols(); ++c) {
          const std::size_t k = (r * arr.cols() + c) * 2;
          out << l << ',' << r << ',' << c << ',' << counts[l][k] + counts[l][k + 1] << '\n';
        }
    }
  }
  save_split_json(data.indices, (root / "split.json").string());
  save_ledger_json(summarize_ledger(run.ledger(), config.training.tech),
                   (root / "ledger.json").string());
  for (std::size_t l = 0; l < run.layers().size(); ++l) {
    const auto& st = run.layers()[l];
    const fs::path p = root / weights_file(l, device);
    if (st.array) {
      save_array_snapshot_csv(*st.array, p.string());
    } else {
      save_weights_csv(st.weights, p);
    }
  }

  const PulseStatistics ps = pulse_statistics(run);
  json manifest = {
      {"tool", "memgrad"},
      {"version", "0.1.0"},
      {"command", command_line},
      {"config", json::parse(dump_run_config(config))},
      {"seeds",
       {{"run", config.training.seed},
        {"task", config.task.synthetic.seed},
        {"split", config.split.seed},
        {"bank", config.bank.seed}}},
      {"inputs_hash", data.inputs_hash},
      {"dataset", {{"provenance", data.full.provenance}, {"n", data.full.size()},
                   {"dim", data.full.dim()}, {"classes", data.full.classes}}},
      {"device_mode", device},
      {"final",
       {{"test_accuracy", run.final_test_accuracy.value_or(0.0)},
        {"train_accuracy", run.final_train_accuracy.value_or(0.0)}}},
      {"pulses",
       {{"total", ps.total},
        {"mean_per_device", ps.mean_per_device},
        {"layer_totals", ps.layer_totals},
        {"layer_mean_per_device", ps.layer_mean_per_device}}},
      {"peak_buffered_scalars", run.peak_buffered_scalars()},
  };
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
}

LoadedRun load_run_dir(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw ParseError("run directory '" + dir + "' does not exist", 0);
  const fs::path mpath = root / "manifest.json";
  if (!fs::exists(mpath)) throw ParseError("'" + dir + "' has no manifest.json", 0);
  const json m = read_json(mpath.string());
  LoadedRun out;
  out.dir = dir;
  try {
    out.config = parse_run_config(m.at("config").dump());
    out.n_in = m.at("dataset").at("dim").get<std::size_t>();
    out.classes = m.at("dataset").at("classes").get<int>();
    out.final_test_accuracy = m.at("final").at("test_accuracy").get<double>();
  } catch (const json::exception& e) {
    throw ParseError("malformed manifest in '" + dir + "': " + e.what(), 0);
  }
  const auto& tc = out.config.training;
  const auto specs = tc.layer_specs(out.n_in, out.classes);
  const bool device = !is_float(tc.algorithm);
  std::vector<Matrix> weights;
  DeviceNetwork dn;
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const std::string p = (root / weights_file(l, device)).string();
    if (!fs::exists(p)) throw ParseError("missing artifact '" + p + "'", 0);
    if (device) {
      ArraySnapshot snap = load_array_snapshot_csv(p);
      if (snap.rows != specs[l].n_in || snap.cols != specs[l].n_out) {
        throw ParseError("array '" + p + "' does not match the configured layer shape", 0);
      }
      weights.push_back(map_weights(snap.g_plus, snap.g_minus, tc.scale_s[l]).transpose());
      dn.arrays.push_back(std::move(snap));
      dn.scale_s.push_back(tc.scale_s[l]);
    } else {
      weights.push_back(load_weights_csv(p, specs[l].n_out, specs[l].n_in));
    }
  }
  out.network = make_network(tc, out.n_in, out.classes, std::move(weights));
  if (device) {
    dn.network = out.network;
    out.device = std::move(dn);
  }
  return out;
}

FeatureDataset load_run_test_split(const LoadedRun& run) {
  const FeatureDataset full = load_task(run.config.task);
  const SplitIndices idx = load_split_json((fs::path(run.dir) / "split.json").string());
  return full.subset(idx.test);
}

}  // namespace memgrad::cli
