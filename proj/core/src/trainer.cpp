#include "memgrad/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace memgrad {

bool is_float(Algorithm a) {
  return a == Algorithm::FloatBP || a == Algorithm::FloatSFF || a == Algorithm::FloatCF;
}

Algorithm base_rule(Algorithm a) {
  switch (a) {
    case Algorithm::FloatBP: return Algorithm::BP;
    case Algorithm::FloatSFF: return Algorithm::SFF;
    case Algorithm::FloatCF: return Algorithm::CF;
    default: return a;
  }
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::BP: return "bp";
    case Algorithm::SFF: return "sff";
    case Algorithm::CF: return "cf";
    case Algorithm::FloatBP: return "float-bp";
    case Algorithm::FloatSFF: return "float-sff";
    case Algorithm::FloatCF: return "float-cf";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::BP, Algorithm::SFF, Algorithm::CF, Algorithm::FloatBP,
                      Algorithm::FloatSFF, Algorithm::FloatCF}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected bp, sff, cf, float-bp, float-sff or float-cf)");
}

std::string to_string(Architecture a) { return a == Architecture::Perceptron ? "perceptron" : "mlp"; }

Architecture parse_architecture(const std::string& name) {
  if (name == "perceptron") return Architecture::Perceptron;
  if (name == "mlp") return Architecture::Mlp;
  throw ConfigError("unknown architecture '" + name + "' (expected perceptron or mlp)");
}

TrainingConfig TrainingConfig::defaults(Algorithm algorithm, Architecture architecture,
                                        std::size_t n_in, int classes) {
  (void)n_in;
  (void)classes;
  TrainingConfig c;
  c.algorithm = algorithm;
  c.architecture = base_rule(algorithm) == Algorithm::BP ? architecture : Architecture::Mlp;
  const bool perceptron = c.architecture == Architecture::Perceptron;
  const std::size_t n_layers = perceptron ? 1 : 2;

  c.cf.assign(n_layers, CFParams{CFVariant::Temperature, 0.2, 0.05, 1});
  switch (base_rule(algorithm)) {
    case Algorithm::BP:
      if (perceptron) {
        c.schedule.phases = {{{0}, 20}};
        c.tau = {0.01};
      } else {
        c.schedule.phases = is_float(algorithm) ? std::vector<Phase>{{{0, 1}, 30}}
                                                : std::vector<Phase>{{{1}, 10}, {{0}, 20}};
        c.tau = {0.02, 0.01};
      }
      break;
    case Algorithm::SFF:
      c.schedule.phases = {{{0}, 15}, {{1}, 15}};
      c.sff = SFFParams{2.0, 1.0, 1};
      c.tau = {0.01, 0.003};
      break;
    default:
      c.schedule.phases = {{{0}, 15}, {{1}, 15}};
      c.tau = {0.003, 0.003};
      break;
  }
  c.scale_s.assign(n_layers, 1e4);
  c.learning_rate = 0.01;
  return c;
}

std::vector<LayerSpec> TrainingConfig::layer_specs(std::size_t n_in, int classes) const {
  const auto C = static_cast<std::size_t>(classes);
  std::vector<LayerSpec> specs;
  switch (base_rule(algorithm)) {
    case Algorithm::BP:
      if (architecture == Architecture::Perceptron) {
        specs.push_back({n_in, C, Activation::Identity, 1, std::nullopt});
      } else {
        specs.push_back({n_in, hidden_units, Activation::ReLU, 1, std::nullopt});
        specs.push_back({hidden_units, C, Activation::Identity, 1, std::nullopt});
      }
      break;
    case Algorithm::SFF:
      specs.push_back({n_in + C, hidden_units, Activation::ReLU, sff.eta, std::nullopt});
      specs.push_back({hidden_units, C * cluster_size, Activation::ReLU,
                       cf.size() > 1 ? cf[1].eta : 1, ClusterLayout{C, cluster_size}});
      break;
    default:
      specs.push_back({n_in, C * cluster_size, Activation::ReLU, cf.empty() ? 1 : cf[0].eta,
                       ClusterLayout{C, cluster_size}});
      specs.push_back({C * cluster_size, C * cluster_size, Activation::ReLU,
                       cf.size() > 1 ? cf[1].eta : 1, ClusterLayout{C, cluster_size}});
      break;
  }
  return specs;
}

void TrainingConfig::validate(std::size_t n_in, int classes) const {
  if (n_in == 0) throw ConfigError("input width must be positive");
  if (classes < 2) throw ConfigError("training needs at least 2 classes");
  if (hidden_units == 0 || cluster_size == 0) throw ConfigError("layer widths must be positive");
  const auto specs = layer_specs(n_in, classes);
  for (const auto& s : specs) s.validate();
  const std::size_t L = specs.size();
  if (schedule.batch_size == 0) throw ConfigError("batch size must be positive");
  for (const auto& phase : schedule.phases) {
    if (phase.layers.empty()) throw ConfigError("schedule phase trains no layer");
    if (phase.epochs < 1) throw ConfigError("schedule phase needs at least one epoch");
    for (std::size_t l : phase.layers) {
      if (l >= L) {
        throw ConfigError("schedule names layer " + std::to_string(l) + " but the network has " +
                          std::to_string(L));
      }
    }
  }
  if (tau.size() != L) throw ConfigError("one tau per layer expected");
  for (double t : tau) {
    if (!(t >= 0.0)) throw ConfigError("tau must be non-negative");
  }
  if (base_rule(algorithm) != Algorithm::BP && cf.size() != L) {
    throw ConfigError("one cluster rule parameter set per layer expected");
  }
  for (const auto& p : cf) p.validate();
  if (sff.eta != 1 && sff.eta != -1) throw ConfigError("SFF eta must be +1 or -1");
  if (!std::isfinite(sff.theta_plus) || !std::isfinite(sff.theta_minus)) {
    throw ConfigError("SFF theta must be finite");
  }
  if (!std::isfinite(token_amplitude)) throw ConfigError("token amplitude must be finite");
  if (!(dead_zone >= 0.0)) throw ConfigError("dead zone must be non-negative");
  if (is_float(algorithm)) {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(init_scale >= 0.0)) throw ConfigError("init scale must be non-negative");
  } else {
    tech.validate();
    read_model.validate();
    if (scale_s.size() != L) throw ConfigError("one weight scale per layer expected");
    for (double s : scale_s) {
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("weight scale must be positive");
    }
  }
}

Matrix Network::prepare(const Matrix& features) const {
  return ternarize_inputs ? ternarize(features, dead_zone) : features;
}

std::vector<Matrix> Network::forward(const Matrix& first_layer_inputs) const {
  std::vector<Matrix> out;
  out.reserve(weights.size());
  const Matrix* in = &first_layer_inputs;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(layer_forward(weights[l], *in, layers[l].activation));
    in = &out.back();
  }
  return out;
}

Matrix head_scores(const Network& network, const Matrix& head) {
  if (network.head == HeadKind::Logits) return head;
  const auto& spec = network.layers.back();
  const auto& c = *spec.clusters;
  const auto size = static_cast<Eigen::Index>(c.cluster_size);
  Matrix scores(head.rows(), static_cast<Eigen::Index>(c.classes));
  for (Eigen::Index k = 0; k < scores.cols(); ++k) {
    scores.col(k) = spec.eta * head.middleCols(k * size, size).rowwise().squaredNorm();
  }
  return scores;
}

namespace {

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index n = 0; n < scores.rows(); ++n) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.cols(); ++k) {
      if (scores(n, k) > scores(n, best)) best = k;
    }
    out[static_cast<std::size_t>(n)] = static_cast<int>(best);
  }
  return out;
}

Matrix append_neutral_tokens(const Matrix& x, int classes, double amplitude) {
  Matrix out(x.rows(), x.cols() + classes);
  out.leftCols(x.cols()) = x;
  out.rightCols(classes).setConstant(amplitude / classes);
  return out;
}

Matrix append_label_tokens(const Matrix& x, std::span<const int> labels, int classes,
                           double amplitude) {
  Matrix out = Matrix::Zero(x.rows(), x.cols() + classes);
  out.leftCols(x.cols()) = x;
  for (Eigen::Index n = 0; n < x.rows(); ++n) out(n, x.cols() + labels[n]) = amplitude;
  return out;
}

}  // namespace

std::vector<int> predict(const Network& network, const Matrix& features) {
  const Matrix x = network.prepare(features);
  if (!network.label_token) return argmax_rows(head_scores(network, network.forward(x).back()));
  if (network.sff_inference == SffInference::NeutralToken) {
    const Matrix t = append_neutral_tokens(x, network.classes, network.token_amplitude);
    return argmax_rows(head_scores(network, network.forward(t).back()));
  }
  Matrix scores(x.rows(), network.classes);
  const int eta = network.layers.front().eta;
  for (int c = 0; c < network.classes; ++c) {
    const std::vector<int> labels(static_cast<std::size_t>(x.rows()), c);
    const Matrix t = append_label_tokens(x, labels, network.classes, network.token_amplitude);
    const Matrix h = layer_forward(network.weights.front(), t, network.layers.front().activation);
    scores.col(c) = eta * h.rowwise().squaredNorm();
  }
  return argmax_rows(scores);
}

int sff_predict(const Network& network, const Vector& x) {
  Network n = network;
  n.sff_inference = SffInference::NeutralToken;
  return predict(n, x.transpose())[0];
}

int sff_predict_goodness_max(const Network& network, const Vector& x) {
  Network n = network;
  n.sff_inference = SffInference::GoodnessMax;
  return predict(n, x.transpose())[0];
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw ShapeError("prediction and label counts differ");
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) hits += predicted[k] == labels[k];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double evaluate(const Network& network, const FeatureDataset& dataset) {
  if (dataset.size() == 0) return 0.0;
  const std::vector<int> p = predict(network, dataset.features);
  return accuracy(p, dataset.labels);
}

TrainingRun::TrainingRun(TrainingConfig config, std::size_t n_in, int classes,
                         std::shared_ptr<const TrajectoryBank> bank)
    : config_(std::move(config)), n_in_(n_in), classes_(classes), bank_(std::move(bank)),
      rng_(make_rng(config_.seed, 0)) {
  config_.validate(n_in_, classes_);
  const auto specs = config_.layer_specs(n_in_, classes_);
  if (device_mode()) {
    if (!bank_ || bank_->empty()) throw ConfigError("device-mode training needs a trajectory bank");
    ledger_.use_tech(config_.tech);
  }
  for (std::size_t l = 0; l < specs.size(); ++l) {
    LayerState st;
    st.spec = specs[l];
    if (device_mode()) {
      st.array = CrossbarArray::initialize(specs[l].n_in, specs[l].n_out, *bank_, config_.tech,
                                           config_.scale_s[l], config_.init, rng_);
      st.weights = layer_weights(*st.array);
      pulse_counts_.emplace_back(st.array->device_count(), 0u);
    } else {
      const double a = config_.init_scale * std::sqrt(3.0);
      std::uniform_real_distribution<double> u(-a, a);
      st.weights = Matrix::NullaryExpr(static_cast<Eigen::Index>(specs[l].n_out),
                                       static_cast<Eigen::Index>(specs[l].n_in),
                                       [&] { return u(rng_); });
      st.adam_m = Matrix::Zero(st.weights.rows(), st.weights.cols());
      st.adam_v = st.adam_m;
    }
    layers_.push_back(std::move(st));
  }
}

Network make_network(const TrainingConfig& config, std::size_t n_in, int classes,
                     std::vector<Matrix> weights) {
  Network n;
  n.layers = config.layer_specs(n_in, classes);
  if (weights.size() != n.layers.size()) throw ShapeError("one weight matrix per layer expected");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (static_cast<std::size_t>(weights[l].rows()) != n.layers[l].n_out ||
        static_cast<std::size_t>(weights[l].cols()) != n.layers[l].n_in) {
      throw ShapeError("weights of layer " + std::to_string(l) + " do not match the configuration");
    }
  }
  n.weights = std::move(weights);
  n.classes = classes;
  n.token_amplitude = config.token_amplitude;
  n.sff_inference = config.sff_inference;
  n.ternarize_inputs = config.ternarize_inputs;
  n.dead_zone = config.dead_zone;
  n.label_token = base_rule(config.algorithm) == Algorithm::SFF;
  n.head = base_rule(config.algorithm) == Algorithm::BP ? HeadKind::Logits : HeadKind::Clusters;
  return n;
}

Network TrainingRun::network() const {
  std::vector<Matrix> w;
  for (const auto& st : layers_) w.push_back(st.array ? layer_weights(*st.array) : st.weights);
  return make_network(config_, n_in_, classes_, std::move(w));
}

class RunTrainer {
 public:
  RunTrainer(TrainingRun& run, const DatasetSplits& data)
      : run_(run), cfg_(run.config_), data_(data),
        shuffle_rng_(make_rng(cfg_.seed, 1)), token_rng_(make_rng(cfg_.seed, 2)),
        noise_rng_(make_rng(cfg_.seed, 3)), reinit_rng_(make_rng(cfg_.seed, 4)) {}

  void run() {
    check_data();
    const Network net0 = run_.network();
    run_.epochs_.push_back({-1, 0, 0.0, evaluate(net0, data_.val)});
    int epoch = 0;
    for (std::size_t p = 0; p < cfg_.schedule.phases.size(); ++p) {
      const Phase& phase = cfg_.schedule.phases[p];
      trainable_.assign(run_.layers_.size(), false);
      for (std::size_t l : phase.layers) trainable_[l] = true;
      for (int e = 0; e < phase.epochs; ++e) {
        ++epoch;
        const double loss = run_epoch(static_cast<int>(p), epoch);
        run_.epochs_.push_back(
            {static_cast<int>(p), epoch, loss, evaluate(run_.network(), data_.val)});
      }
    }
    const Network final_net = run_.network();
    run_.final_test_accuracy = evaluate(final_net, data_.test);
    run_.final_train_accuracy = evaluate(final_net, data_.train);
  }

 private:
  void check_data() const {
    for (const auto* ds : {&data_.train, &data_.val, &data_.test}) {
      if (ds->dim() != run_.n_in_) {
        throw ShapeError("dataset has " + std::to_string(ds->dim()) +
                         " features, the network expects " + std::to_string(run_.n_in_));
      }
      if (ds->classes > run_.classes_) throw ShapeError("dataset has more classes than the network");
    }
    if (data_.train.size() == 0) throw ShapeError("empty training split");
  }

  double run_epoch(int phase, int epoch) {
    const Network net = run_.network();
    const Matrix x_all = net.prepare(data_.train.features);
    std::vector<std::size_t> order(data_.train.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng_);

    double loss_sum = 0.0;
    int batches = 0;
    const std::size_t B = cfg_.schedule.batch_size;
    for (std::size_t start = 0; start < order.size(); start += B) {
      const std::size_t nb = std::min(B, order.size() - start);
      Matrix x(static_cast<Eigen::Index>(nb), x_all.cols());
      std::vector<int> y(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        x.row(static_cast<Eigen::Index>(k)) = x_all.row(static_cast<Eigen::Index>(order[start + k]));
        y[k] = data_.train.labels[order[start + k]];
      }
      StepRecord rec;
      rec.phase = phase;
      rec.epoch = epoch;
      rec.batch = batches;
      rec.pulses.assign(run_.layers_.size(), 0);
      rec.skipped.assign(run_.layers_.size(), 0);
      rec.loss = step(x, y, rec);
      loss_sum += rec.loss;
      ++batches;
      run_.steps_.push_back(std::move(rec));
    }
    return batches ? loss_sum / batches : 0.0;
  }

  // Forward through one layer, emulating an array read in device mode.
  Matrix forward_layer(std::size_t l, const Matrix& in) {
    LayerState& st = run_.layers_[l];
    if (!st.array) return layer_forward(st.weights, in, st.spec.activation);
    record_forward_reads(*st.array, in, run_.ledger_);
    Matrix z = in * st.weights.transpose();
    if (cfg_.read_model.enabled) {
      std::normal_distribution<double> n01(0.0, 1.0);
      const double additive = st.array->gain_kappa() * cfg_.read_model.additive_sigma;
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        z(i) = z(i) * (1.0 + cfg_.read_model.multiplicative_sigma * n01(noise_rng_)) +
               additive * n01(noise_rng_);
      }
    }
    if (st.spec.activation == Activation::ReLU) z = z.cwiseMax(0.0);
    return z;
  }

  double step(const Matrix& x, const std::vector<int>& y, StepRecord& rec) {
    switch (base_rule(cfg_.algorithm)) {
      case Algorithm::BP: return bp_step(x, y, rec);
      case Algorithm::SFF: return sff_step(x, y, rec);
      default: return cf_step(x, y, rec);
    }
  }

  double bp_step(const Matrix& x, const std::vector<int>& y, StepRecord& rec) {
    std::vector<Matrix> weights;
    std::vector<Activation> acts;
    for (const auto& st : run_.layers_) {
      weights.push_back(st.weights);
      acts.push_back(st.spec.activation);
    }
    // Reads of the arrays for the forward pass.
    Matrix a = x;
    for (std::size_t l = 0; l < run_.layers_.size(); ++l) a = forward_layer(l, a);
    const double loss = cross_entropy_loss(weights, acts, x, y);
    const auto grads = bp_gradients(weights, acts, x, y, trainable_);
    for (std::size_t l = 0; l < grads.size(); ++l) {
      if (trainable_[l]) update(l, grads[l], rec);
    }
    return loss;
  }

  double sff_step(const Matrix& x, const std::vector<int>& y, StepRecord& rec) {
    const int C = run_.classes_;
    const auto nb = x.rows();
    double loss = 0.0;
    if (trainable_[0]) {
      Matrix xp(nb, x.cols() + C), xn(nb, x.cols() + C);
      for (Eigen::Index n = 0; n < nb; ++n) {
        const PosNegPair pn = build_pos_neg(x.row(n).transpose(), y[static_cast<std::size_t>(n)],
                                            C, cfg_.token_amplitude, token_rng_);
        xp.row(n) = pn.positive.transpose();
        xn.row(n) = pn.negative.transpose();
      }
      const Matrix hp = forward_layer(0, xp);
      const Matrix hn = forward_layer(0, xn);
      const SffBatchBuffer buf = sff_buffer(xp, hp, xn, hn, cfg_.sff);
      note_buffer(buf.buffered_scalars());
      const std::size_t nh = static_cast<std::size_t>(hp.cols());
      double l0 = 0.0;
      for (Eigen::Index n = 0; n < nb; ++n) {
        l0 += sff_loss(hp.row(n).transpose(), hn.row(n).transpose(), cfg_.sff, nh);
      }
      loss += l0 / static_cast<double>(nb);
      update(0, sff_gradient(buf, cfg_.sff.eta), rec);
    }
    if (trainable_[1]) {
      const Matrix tokens = cfg_.sff_head_input == SffHeadInput::NeutralToken
                                ? append_neutral_tokens(x, C, cfg_.token_amplitude)
                                : append_label_tokens(x, y, C, cfg_.token_amplitude);
      const Matrix h0 = forward_layer(0, tokens);
      loss += cluster_layer_step(1, h0, y, rec);
    }
    return loss;
  }

  double cf_step(const Matrix& x, const std::vector<int>& y, StepRecord& rec) {
    const std::size_t last = static_cast<std::size_t>(
        std::find(trainable_.rbegin(), trainable_.rend(), true) - trainable_.rbegin());
    const std::size_t top = trainable_.size() - 1 - last;
    double loss = 0.0;
    Matrix in = x;
    for (std::size_t l = 0; l <= top; ++l) {
      if (trainable_[l]) loss += cluster_layer_step(l, in, y, rec);
      if (l < top) in = forward_layer(l, in);
    }
    return loss;
  }

  double cluster_layer_step(std::size_t l, const Matrix& in, const std::vector<int>& y,
                            StepRecord& rec) {
    const LayerSpec& spec = run_.layers_[l].spec;
    const CFParams& p = cfg_.cf[l];
    const Matrix h = forward_layer(l, in);
    const CfBatchBuffer buf = cf_buffer(in, h, y, p, spec);
    note_buffer(buf.buffered_scalars());
    double loss = 0.0;
    for (Eigen::Index n = 0; n < h.rows(); ++n) {
      loss += cf_loss(h.row(n).transpose(), cluster_mask(spec, y[static_cast<std::size_t>(n)]), p);
    }
    update(l, cf_gradient(buf, spec, p.eta), rec);
    return loss / static_cast<double>(h.rows());
  }

  void note_buffer(std::size_t scalars) {
    run_.last_buffered_ = scalars;
    run_.peak_buffered_ = std::max(run_.peak_buffered_, scalars);
  }

  void update(std::size_t l, const Matrix& grad, StepRecord& rec) {
    LayerState& st = run_.layers_[l];
    if (st.array) {
      const UpdatePlan plan = threshold_sign_plan(grad, cfg_.tau[l], cfg_.plan_mode);
      const PulseReport report =
          apply_update_plan(*st.array, plan, cfg_.exhaustion, run_.bank_.get(), &reinit_rng_,
                            &run_.ledger_);
      auto& counts = run_.pulse_counts_[l];
      const std::size_t cols = st.array->cols();
      for (const auto& e : report.entries) {
        if (e.outcome == ActionOutcome::Skipped) continue;
        const std::size_t idx = (e.action.input * cols + e.action.output) * 2 +
                                (e.action.polarity == Polarity::PulsePlus ? 0 : 1);
        ++counts[idx];
      }
      rec.pulses[l] = static_cast<std::uint32_t>(report.applied());
      rec.skipped[l] = static_cast<std::uint32_t>(report.skipped());
      st.weights = layer_weights(*st.array);
      return;
    }
    if (cfg_.optimizer == FloatOptimizer::Sign) {
      st.weights = sign_descent_step_float(st.weights, grad, cfg_.learning_rate, cfg_.tau[l]);
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++st.adam_t;
    st.adam_m = b1 * st.adam_m + (1.0 - b1) * grad;
    st.adam_v = b2 * st.adam_v + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.adam_t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.adam_t));
    st.weights.array() -= cfg_.learning_rate * (st.adam_m.array() / c1) /
                          ((st.adam_v.array() / c2).sqrt() + eps);
  }

  TrainingRun& run_;
  const TrainingConfig& cfg_;
  const DatasetSplits& data_;
  Rng shuffle_rng_, token_rng_, noise_rng_, reinit_rng_;
  std::vector<bool> trainable_;
};

void train(TrainingRun& run, const DatasetSplits& data) { RunTrainer(run, data).run(); }

DeviceNetwork device_network(const TrainingRun& run) {
  if (!run.device_mode()) throw ConfigError("aging needs a device-mode run");
  DeviceNetwork d;
  d.network = run.network();
  for (const auto& st : run.layers()) {
    d.arrays.push_back(snapshot(*st.array));
    d.scale_s.push_back(st.array->scale_s());
  }
  return d;
}

std::vector<AgingPoint> simulate_aging(const DeviceNetwork& trained, const FeatureDataset& test,
                                       const std::vector<double>& days,
                                       const DriftModelParams& drift, std::uint64_t seed,
                                       int repeats) {
  if (repeats < 1) throw ParameterError("aging needs at least one repeat");
  if (!std::is_sorted(days.begin(), days.end())) {
    throw ParameterError("aging checkpoints must be sorted ascending");
  }
  drift.validate();
  std::vector<AgingPoint> out;
  for (std::size_t d = 0; d < days.size(); ++d) {
    AgingPoint pt;
    pt.days = days[d];
    for (int r = 0; r < repeats; ++r) {
      Rng rng = make_rng(seed, d * static_cast<std::uint64_t>(repeats) + r);
      Network net = trained.network;
      for (std::size_t l = 0; l < trained.arrays.size(); ++l) {
        const ArraySnapshot& a = trained.arrays[l];
        auto age = [&](double g) { return apply_retention_drift(g, days[d], drift, rng); };
        Matrix gp(a.g_plus.rows(), a.g_plus.cols()), gm(gp.rows(), gp.cols());
        for (Eigen::Index i = 0; i < gp.rows(); ++i)
          for (Eigen::Index j = 0; j < gp.cols(); ++j) {
            gp(i, j) = age(a.g_plus(i, j));
            gm(i, j) = age(a.g_minus(i, j));
          }
        net.weights[l] = map_weights(gp, gm, trained.scale_s[l]).transpose();
      }
      pt.accuracies.push_back(evaluate(net, test));
    }
    const GroupSummary s = summarize("aging", pt.accuracies);
    pt.mean = s.mean;
    pt.sd = s.sd;
    out.push_back(std::move(pt));
  }
  return out;
}

PulseStatistics pulse_statistics(const TrainingRun& run) {
  PulseStatistics s;
  std::uint64_t devices = 0;
  const auto& counts = run.pulse_counts();
  for (std::size_t l = 0; l < run.layers().size(); ++l) {
    const auto& spec = run.layers()[l].spec;
    const std::uint64_t n_dev = 2ull * spec.n_in * spec.n_out;
    std::uint64_t total = 0;
    if (l < counts.size()) total = std::accumulate(counts[l].begin(), counts[l].end(), std::uint64_t{0});
    s.layer_totals.push_back(total);
    s.layer_mean_per_device.push_back(static_cast<double>(total) / static_cast<double>(n_dev));
    s.total += total;
    devices += n_dev;
  }
  s.mean_per_device = devices ? static_cast<double>(s.total) / static_cast<double>(devices) : 0.0;
  return s;
}

}  // namespace memgrad
