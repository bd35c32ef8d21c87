#include "run_config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace memgrad::cli {

using nlohmann::json;

std::string to_string(CFVariant v) { return v == CFVariant::Offset ? "offset" : "temperature"; }

CFVariant parse_cf_variant(const std::string& name) {
  if (name == "offset") return CFVariant::Offset;
  if (name == "temperature") return CFVariant::Temperature;
  throw ConfigError("unknown CF variant '" + name + "' (expected offset or temperature)");
}

namespace {

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<PlanMode> kPlanModes[] = {{PlanMode::Descent, "descent"},
                                             {PlanMode::Literal, "literal"}};
constexpr EnumName<SffInference> kSffInference[] = {
    {SffInference::NeutralToken, "neutral-token"}, {SffInference::GoodnessMax, "goodness-max"}};
constexpr EnumName<SffHeadInput> kSffHeadInput[] = {
    {SffHeadInput::NeutralToken, "neutral-token"}, {SffHeadInput::PositiveToken, "positive-token"}};
constexpr EnumName<ExhaustionPolicy> kExhaustion[] = {{ExhaustionPolicy::Skip, "skip"},
                                                      {ExhaustionPolicy::AutoReinit, "auto-reinit"}};
constexpr EnumName<FloatOptimizer> kOptimizers[] = {{FloatOptimizer::Adam, "adam"},
                                                    {FloatOptimizer::Sign, "sign"}};
constexpr EnumName<DecrementFamily> kFamilies[] = {
    {DecrementFamily::TruncatedNormal, "truncated-normal"}, {DecrementFamily::LogNormal, "lognormal"}};

template <typename E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <typename E, std::size_t N>
E value_of(const EnumName<E> (&table)[N], const std::string& name, const std::string& key) {
  std::string options;
  for (const auto& e : table) {
    if (name == e.name) return e.value;
    options += options.empty() ? e.name : std::string(", ") + e.name;
  }
  throw ConfigError(key + ": unknown value '" + name + "' (expected " + options + ")");
}

// Reads the keys of one JSON object and rejects whatever was not consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      j_.at(key).get_to(out);
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  template <typename E, std::size_t N>
  void get_enum(const std::string& key, const EnumName<E> (&table)[N], E& out) {
    std::string s;
    get(key, s);
    if (j_.contains(key)) out = value_of(table, s, where(key));
  }

  // Microsiemens in the file, siemens in memory.
  void get_us(const std::string& key, double& siemens) {
    double us = to_microsiemens(siemens);
    get(key, us);
    siemens = from_microsiemens(us);
  }

  ObjectReader child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return ObjectReader(j_.contains(key) ? j_.at(key) : empty, where(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + where(key) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json tech_to_json(const DeviceTechParams& t) {
  return {{"name", t.name},
          {"v_reset", t.v_reset},
          {"t_reset", t.t_reset},
          {"v_read", t.v_read},
          {"t_read", t.t_read},
          {"max_pulses_between_reinit", t.max_pulses_between_reinit},
          {"endurance_budget", t.endurance_budget},
          {"reinit_energy", t.reinit_energy}};
}

json cf_to_json(const CFParams& p) {
  return {{"variant", to_string(p.variant)},
          {"theta_plus", p.theta_plus},
          {"theta_minus", p.theta_minus},
          {"eta", p.eta}};
}

json to_json(const RunConfig& c) {
  const TrainingConfig& t = c.training;
  json phases = json::array();
  for (const auto& p : t.schedule.phases) phases.push_back({{"layers", p.layers}, {"epochs", p.epochs}});
  json cf = json::array();
  for (const auto& p : t.cf) cf.push_back(cf_to_json(p));
  const auto& s = c.bank.synthetic;
  return {
      {"algorithm", to_string(t.algorithm)},
      {"architecture", to_string(t.architecture)},
      {"seed", t.seed},
      {"output", c.output},
      {"task",
       {{"kind", c.task.kind},
        {"classes", c.task.classes},
        {"features", c.task.features},
        {"images", c.task.images},
        {"labels", c.task.labels},
        {"synthetic",
         {{"classes", c.task.synthetic.classes},
          {"dim", c.task.synthetic.dim},
          {"n_per_class", c.task.synthetic.n_per_class},
          {"center_scale", c.task.synthetic.center_scale},
          {"noise_sigma", c.task.synthetic.noise_sigma},
          {"shift", c.task.synthetic.shift},
          {"seed", c.task.synthetic.seed}}}}},
      {"split",
       {{"train", c.split.train},
        {"val", c.split.val},
        {"test", c.split.test},
        {"stratified", c.split.stratified},
        {"seed", c.split.seed}}},
      {"bank",
       {{"file", c.bank.file},
        {"count", c.bank.count},
        {"seed", c.bank.seed},
        {"synthetic",
         {{"initial_mean_uS", to_microsiemens(s.initial_mean)},
          {"initial_sigma_uS", to_microsiemens(s.initial_sigma)},
          {"family", name_of(kFamilies, s.family)},
          {"decrement_mean_uS", to_microsiemens(s.decrement_mean)},
          {"decrement_sigma_uS", to_microsiemens(s.decrement_sigma)},
          {"late_onset_fraction", s.late_onset_fraction},
          {"late_amplification", s.late_amplification},
          {"anomalous_probability", s.anomalous_probability},
          {"pulses", s.pulses}}}}},
      {"network", {{"hidden_units", t.hidden_units}, {"cluster_size", t.cluster_size}}},
      {"schedule", {{"batch_size", t.schedule.batch_size}, {"phases", phases}}},
      {"rules",
       {{"tau", t.tau},
        {"sff",
         {{"theta_plus", t.sff.theta_plus}, {"theta_minus", t.sff.theta_minus}, {"eta", t.sff.eta}}},
        {"cf", cf},
        {"token_amplitude", t.token_amplitude},
        {"plan_mode", name_of(kPlanModes, t.plan_mode)},
        {"sff_inference", name_of(kSffInference, t.sff_inference)},
        {"sff_head_input", name_of(kSffHeadInput, t.sff_head_input)},
        {"ternarize_inputs", t.ternarize_inputs},
        {"dead_zone", t.dead_zone}}},
      {"device",
       {{"tech", tech_to_json(t.tech)},
        {"scale_s", t.scale_s},
        {"max_pre_pulses", t.init.max_pre_pulses},
        {"exhaustion", name_of(kExhaustion, t.exhaustion)},
        {"read_noise",
         {{"enabled", t.read_model.enabled},
          {"multiplicative_sigma", t.read_model.multiplicative_sigma},
          {"additive_sigma", t.read_model.additive_sigma}}}}},
      {"float",
       {{"optimizer", name_of(kOptimizers, t.optimizer)},
        {"learning_rate", t.learning_rate},
        {"init_scale", t.init_scale}}},
  };
}

void read_tech(ObjectReader r, DeviceTechParams& t) {
  std::string name = t.name;
  r.get("name", name);
  if (name != t.name) {
    // Switching profile: start from the preset, then apply explicit fields.
    t = DeviceTechParams::preset(name);
  }
  r.get("v_reset", t.v_reset);
  r.get("t_reset", t.t_reset);
  r.get("v_read", t.v_read);
  r.get("t_read", t.t_read);
  r.get("max_pulses_between_reinit", t.max_pulses_between_reinit);
  r.get("endurance_budget", t.endurance_budget);
  r.get("reinit_energy", t.reinit_energy);
  r.finish();
}

RunConfig from_json(const json& j) {
  ObjectReader root(j, "");
  std::string algo = "cf", arch = "mlp";
  root.get("algorithm", algo);
  root.get("architecture", arch);
  RunConfig c = default_run_config(parse_algorithm(algo), parse_architecture(arch));
  TrainingConfig& t = c.training;
  root.get("seed", t.seed);
  root.get("output", c.output);

  {
    auto r = root.child("task");
    r.get("kind", c.task.kind);
    if (c.task.kind != "synthetic" && c.task.kind != "csv" && c.task.kind != "idx") {
      throw ConfigError("task.kind: unknown value '" + c.task.kind +
                        "' (expected synthetic, csv or idx)");
    }
    r.get("classes", c.task.classes);
    r.get("features", c.task.features);
    r.get("images", c.task.images);
    r.get("labels", c.task.labels);
    auto s = r.child("synthetic");
    s.get("classes", c.task.synthetic.classes);
    s.get("dim", c.task.synthetic.dim);
    s.get("n_per_class", c.task.synthetic.n_per_class);
    s.get("center_scale", c.task.synthetic.center_scale);
    s.get("noise_sigma", c.task.synthetic.noise_sigma);
    s.get("shift", c.task.synthetic.shift);
    s.get("seed", c.task.synthetic.seed);
    s.finish();
    r.finish();
  }
  {
    auto r = root.child("split");
    r.get("train", c.split.train);
    r.get("val", c.split.val);
    r.get("test", c.split.test);
    r.get("stratified", c.split.stratified);
    r.get("seed", c.split.seed);
    r.finish();
  }
  {
    auto r = root.child("bank");
    r.get("file", c.bank.file);
    r.get("count", c.bank.count);
    r.get("seed", c.bank.seed);
    auto s = r.child("synthetic");
    auto& p = c.bank.synthetic;
    s.get_us("initial_mean_uS", p.initial_mean);
    s.get_us("initial_sigma_uS", p.initial_sigma);
    s.get_enum("family", kFamilies, p.family);
    s.get_us("decrement_mean_uS", p.decrement_mean);
    s.get_us("decrement_sigma_uS", p.decrement_sigma);
    s.get("late_onset_fraction", p.late_onset_fraction);
    s.get("late_amplification", p.late_amplification);
    s.get("anomalous_probability", p.anomalous_probability);
    s.get("pulses", p.pulses);
    s.finish();
    r.finish();
  }
  {
    auto r = root.child("network");
    r.get("hidden_units", t.hidden_units);
    r.get("cluster_size", t.cluster_size);
    r.finish();
  }
  {
    auto r = root.child("schedule");
    r.get("batch_size", t.schedule.batch_size);
    if (r.has("phases")) {
      const json& phases = r.raw("phases");
      if (!phases.is_array()) throw ConfigError("schedule.phases must be an array");
      t.schedule.phases.clear();
      for (std::size_t k = 0; k < phases.size(); ++k) {
        ObjectReader pr(phases[k], "schedule.phases[" + std::to_string(k) + "]");
        Phase ph;
        pr.get("layers", ph.layers);
        pr.get("epochs", ph.epochs);
        pr.finish();
        t.schedule.phases.push_back(ph);
      }
    }
    r.finish();
  }
  {
    auto r = root.child("rules");
    r.get("tau", t.tau);
    auto s = r.child("sff");
    s.get("theta_plus", t.sff.theta_plus);
    s.get("theta_minus", t.sff.theta_minus);
    s.get("eta", t.sff.eta);
    s.finish();
    if (r.has("cf")) {
      const json& cf = r.raw("cf");
      if (!cf.is_array()) throw ConfigError("rules.cf must be an array");
      std::vector<CFParams> parsed;
      for (std::size_t k = 0; k < cf.size(); ++k) {
        ObjectReader cr(cf[k], "rules.cf[" + std::to_string(k) + "]");
        CFParams p = k < t.cf.size() ? t.cf[k] : CFParams{};
        std::string variant = to_string(p.variant);
        cr.get("variant", variant);
        p.variant = parse_cf_variant(variant);
        cr.get("theta_plus", p.theta_plus);
        cr.get("theta_minus", p.theta_minus);
        cr.get("eta", p.eta);
        cr.finish();
        parsed.push_back(p);
      }
      t.cf = parsed;
    }
    r.get("token_amplitude", t.token_amplitude);
    r.get_enum("plan_mode", kPlanModes, t.plan_mode);
    r.get_enum("sff_inference", kSffInference, t.sff_inference);
    r.get_enum("sff_head_input", kSffHeadInput, t.sff_head_input);
    r.get("ternarize_inputs", t.ternarize_inputs);
    r.get("dead_zone", t.dead_zone);
    r.finish();
  }
  {
    auto r = root.child("device");
    read_tech(r.child("tech"), t.tech);
    r.get("scale_s", t.scale_s);
    r.get("max_pre_pulses", t.init.max_pre_pulses);
    r.get_enum("exhaustion", kExhaustion, t.exhaustion);
    auto n = r.child("read_noise");
    n.get("enabled", t.read_model.enabled);
    n.get("multiplicative_sigma", t.read_model.multiplicative_sigma);
    n.get("additive_sigma", t.read_model.additive_sigma);
    n.finish();
    r.finish();
  }
  {
    auto r = root.child("float");
    r.get_enum("optimizer", kOptimizers, t.optimizer);
    r.get("learning_rate", t.learning_rate);
    r.get("init_scale", t.init_scale);
    r.finish();
  }
  root.finish();
  c.split.validate();
  c.bank.synthetic.validate();
  if (c.bank.count == 0) throw ConfigError("bank.count must be positive");
  return c;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
}

// "a.b.0.c=value": value is parsed as JSON, falling back to a plain string.
void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const bool last = k + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(parts[k]);
      } catch (const std::exception&) {
        throw ConfigError("override '" + key + "': '" + parts[k] + "' is not an array index");
      }
      if (idx >= node->size()) throw ConfigError("override '" + key + "': index out of range");
      node = &(*node)[idx];
    } else {
      if (!node->is_object()) throw ConfigError("override '" + key + "' descends into a value");
      node = &(*node)[parts[k]];
    }
    if (last) *node = value;
  }
}

std::optional<std::string> peek_override(const std::vector<std::string>& overrides,
                                         const std::string& key) {
  std::optional<std::string> v;
  for (const auto& o : overrides) {
    if (o.rfind(key + "=", 0) == 0) v = o.substr(key.size() + 1);
  }
  if (v) {
    const json parsed = json::parse(*v, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_string()) v = parsed.get<std::string>();
  }
  return v;
}

}  // namespace

RunConfig default_run_config(Algorithm algorithm, Architecture architecture) {
  RunConfig c;
  c.training = TrainingConfig::defaults(algorithm, architecture,
                                        static_cast<std::size_t>(c.task.synthetic.dim),
                                        c.task.synthetic.classes);
  c.training.seed = 0;
  c.output = "runs/" + to_string(algorithm);
  return c;
}

RunConfig parse_run_config(const std::string& json_text) {
  return from_json(parse_json_text(json_text, "config"));
}

std::string dump_run_config(const RunConfig& config, int indent) {
  return to_json(config).dump(indent);
}

RunConfig load_run_config(const std::optional<std::string>& path,
                          const std::vector<std::string>& overrides,
                          const std::optional<std::string>& env_seed) {
  json file = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file '" + *path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    file = parse_json_text(buf.str(), *path);
    if (!file.is_object()) throw ConfigError(*path + ": top level must be an object");
  }
  auto pick = [&](const std::string& key, const std::string& fallback) {
    if (auto v = peek_override(overrides, key)) return *v;
    if (file.contains(key) && file.at(key).is_string()) return file.at(key).get<std::string>();
    return fallback;
  };
  const Algorithm algo = parse_algorithm(pick("algorithm", "cf"));
  const Architecture arch = parse_architecture(pick("architecture", "mlp"));

  json doc = to_json(default_run_config(algo, arch));
  // The device profile name in a file replaces the whole default profile.
  if (file.contains("device") && file["device"].is_object() && file["device"].contains("tech") &&
      file["device"]["tech"].is_object() && file["device"]["tech"].contains("name")) {
    doc["device"]["tech"] = json::object();
  }
  doc.merge_patch(file);
  for (const auto& o : overrides) {
    if (o.rfind("device.tech.name=", 0) == 0) {
      doc["device"]["tech"] = json::object();
    }
    apply_override(doc, o);
  }
  const bool seed_given = file.contains("seed") || peek_override(overrides, "seed").has_value();
  if (!seed_given && env_seed && !env_seed->empty()) {
    try {
      std::size_t used = 0;
      const unsigned long long s = std::stoull(*env_seed, &used);
      if (used != env_seed->size()) throw std::invalid_argument("trailing characters");
      doc["seed"] = s;
    } catch (const std::exception&) {
      throw ConfigError("MEMGRAD_SEED='" + *env_seed + "' is not a non-negative integer");
    }
  }
  return from_json(doc);
}

}  // namespace memgrad::cli
