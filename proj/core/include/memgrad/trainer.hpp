#pragma once

#include "memgrad/crossbar.hpp"
#include "memgrad/data_io.hpp"
#include "memgrad/device_model.hpp"
#include "memgrad/energy_stats.hpp"
#include "memgrad/learning_rules.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace memgrad {

enum class Algorithm { BP, SFF, CF, FloatBP, FloatSFF, FloatCF };

bool is_float(Algorithm algorithm);
// The device-mode counterpart of a float algorithm (identity otherwise).
Algorithm base_rule(Algorithm algorithm);
std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

/// BP only: single layer or 32-48-C multilayer perceptron.
enum class Architecture { Perceptron, Mlp };
std::string to_string(Architecture architecture);
Architecture parse_architecture(const std::string& name);

enum class FloatOptimizer { Adam, Sign };

/// How SFF networks are read out at test time.
enum class SffInference {
  NeutralToken,  // one pass with every token slot at amplitude / C, cluster head decides
  GoodnessMax,   // C passes, one per label token; the label with the largest first-layer goodness
};

/// Which first-layer activations train the SFF cluster head.
enum class SffHeadInput { NeutralToken, PositiveToken };

struct Phase {
  std::vector<std::size_t> layers;  // trainable layers; the rest are frozen
  int epochs = 1;
};

struct Schedule {
  std::vector<Phase> phases;
  std::size_t batch_size = 16;
};

/// Everything that defines a training run apart from the data.
struct TrainingConfig {
  Algorithm algorithm = Algorithm::CF;
  Architecture architecture = Architecture::Mlp;
  std::size_t hidden_units = 48;
  std::size_t cluster_size = 12;
  Schedule schedule;

  // Per-layer rule parameters (index = layer).
  std::vector<double> tau;
  SFFParams sff;                 // first layer of SFF networks
  std::vector<CFParams> cf;      // cluster layers (CF: both layers; SFF: index 1 = head)
  double token_amplitude = 1.0;
  PlanMode plan_mode = PlanMode::Descent;
  SffInference sff_inference = SffInference::NeutralToken;
  SffHeadInput sff_head_input = SffHeadInput::NeutralToken;
  bool ternarize_inputs = false;
  double dead_zone = 0.0;

  // Device mode.
  DeviceTechParams tech = DeviceTechParams::large_array();
  std::vector<double> scale_s;  // per layer, W = s (G+ - G-)
  ArrayInitParams init;
  ExhaustionPolicy exhaustion = ExhaustionPolicy::Skip;
  ReadModelParams read_model;

  // Float mode.
  FloatOptimizer optimizer = FloatOptimizer::Adam;
  double learning_rate = 0.01;
  double init_scale = 0.1;  // float weights ~ U(-init_scale, init_scale) * sqrt(3)

  std::uint64_t seed = 0;

  // Defaults for one algorithm on a problem of input width `n_in` and `classes` classes.
  static TrainingConfig defaults(Algorithm algorithm, Architecture architecture, std::size_t n_in,
                                 int classes);

  // Layer shapes implied by the configuration.
  std::vector<LayerSpec> layer_specs(std::size_t n_in, int classes) const;
  void validate(std::size_t n_in, int classes) const;
};

enum class HeadKind { Logits, Clusters };

/// Weights plus everything needed to run inference.
struct Network {
  std::vector<LayerSpec> layers;
  std::vector<Matrix> weights;  // n_out x n_in
  HeadKind head = HeadKind::Logits;
  int classes = 0;
  bool label_token = false;  // SFF: inputs carry a label token
  double token_amplitude = 1.0;
  SffInference sff_inference = SffInference::NeutralToken;
  bool ternarize_inputs = false;
  double dead_zone = 0.0;

  // Inputs as seen by the first layer (ternarized if configured, no token).
  Matrix prepare(const Matrix& features) const;
  // Activations of every layer for a batch of prepared first-layer inputs.
  std::vector<Matrix> forward(const Matrix& first_layer_inputs) const;
};

/// Inference description of a configuration with the given layer weights.
Network make_network(const TrainingConfig& config, std::size_t n_in, int classes,
                     std::vector<Matrix> weights);

/// Per-class scores of the head: logits, or per-cluster sums of squared activations.
Matrix head_scores(const Network& network, const Matrix& head_activations);

/// argmax over head scores, ties to the lowest class index.
std::vector<int> predict(const Network& network, const Matrix& features);

/// Single neutral-token pass through an SFF network, argmax cluster goodness.
int sff_predict(const Network& network, const Vector& x);
/// C passes with each label token; the label whose first-layer goodness is largest.
int sff_predict_goodness_max(const Network& network, const Vector& x);

double evaluate(const Network& network, const FeatureDataset& dataset);
double accuracy(std::span<const int> predicted, std::span<const int> labels);

struct StepRecord {
  int phase = 0;
  int epoch = 0;  // global epoch index, 1-based
  int batch = 0;
  std::vector<std::uint32_t> pulses;  // per layer, applied this step
  std::vector<std::uint32_t> skipped;
  double loss = 0.0;                  // mean local loss of the trained layers
};

struct EpochRecord {
  int phase = 0;
  int epoch = 0;  // 0 = before training
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct LayerState {
  LayerSpec spec;
  std::optional<CrossbarArray> array;  // device mode
  Matrix weights;                      // float mode, or the latest read of the array
  // Float optimizer state.
  Matrix adam_m, adam_v;
  std::uint64_t adam_t = 0;
};

class TrainingRun {
 public:
  TrainingRun(TrainingConfig config, std::size_t n_in, int classes,
              std::shared_ptr<const TrajectoryBank> bank = nullptr);

  const TrainingConfig& config() const { return config_; }
  std::size_t n_in() const { return n_in_; }
  int classes() const { return classes_; }
  const std::vector<LayerState>& layers() const { return layers_; }
  std::vector<LayerState>& layers() { return layers_; }
  bool device_mode() const { return !is_float(config_.algorithm); }

  // Current weights (re-read from the arrays in device mode).
  Network network() const;

  const std::vector<StepRecord>& steps() const { return steps_; }
  const std::vector<EpochRecord>& epochs() const { return epochs_; }
  const EnergyLedger& ledger() const { return ledger_; }

  // Pulses per device: index (row * cols + col) * 2 + (0 for G+, 1 for G-).
  const std::vector<std::vector<std::uint32_t>>& pulse_counts() const { return pulse_counts_; }
  // Largest per-batch working-memory buffer observed for the local rules.
  std::size_t peak_buffered_scalars() const { return peak_buffered_; }
  std::size_t last_buffered_scalars() const { return last_buffered_; }

  std::optional<double> final_test_accuracy;
  std::optional<double> final_train_accuracy;

 private:
  friend void train(TrainingRun& run, const DatasetSplits& data);
  friend class RunTrainer;

  TrainingConfig config_;
  std::size_t n_in_;
  int classes_;
  std::shared_ptr<const TrajectoryBank> bank_;
  std::vector<LayerState> layers_;
  std::vector<StepRecord> steps_;
  std::vector<EpochRecord> epochs_;
  std::vector<std::vector<std::uint32_t>> pulse_counts_;
  EnergyLedger ledger_;
  Rng rng_;
  std::size_t peak_buffered_ = 0;
  std::size_t last_buffered_ = 0;
};

/// Runs every phase of the schedule on data.train, records validation accuracy
/// once per epoch and test/train accuracy at the end. Deterministic per seed.
void train(TrainingRun& run, const DatasetSplits& data);

/// A trained device network reduced to what aging needs: the inference
/// description plus per-layer conductances and weight scales.
struct DeviceNetwork {
  Network network;
  std::vector<ArraySnapshot> arrays;
  std::vector<double> scale_s;
};

DeviceNetwork device_network(const TrainingRun& run);

struct AgingPoint {
  double days = 0.0;
  std::vector<double> accuracies;  // one per repeat
  double mean = 0.0;
  double sd = 0.0;
};

/// Re-evaluates the network after independent drift draws on every device
/// conductance (pulse indices stay frozen).
std::vector<AgingPoint> simulate_aging(const DeviceNetwork& trained, const FeatureDataset& test,
                                       const std::vector<double>& days,
                                       const DriftModelParams& drift, std::uint64_t seed,
                                       int repeats);

struct PulseStatistics {
  std::vector<std::uint64_t> layer_totals;
  std::vector<double> layer_mean_per_device;
  std::uint64_t total = 0;
  double mean_per_device = 0.0;  // over all devices of all layers
};

PulseStatistics pulse_statistics(const TrainingRun& run);

}  // namespace memgrad
