#pragma once

#include "memgrad/common.hpp"
#include "memgrad/crossbar.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace memgrad {

enum class Activation { ReLU, Identity };

struct ClusterLayout {
  std::size_t classes = 0;
  std::size_t cluster_size = 0;
};

/// One fully connected, bias-free layer. Output k belongs to cluster
/// k / cluster_size when clusters are present.
struct LayerSpec {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  Activation activation = Activation::ReLU;
  int eta = 1;  // goodness sign
  std::optional<ClusterLayout> clusters;

  void validate() const;
};

struct SFFParams {
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  int eta = 1;
};

enum class CFVariant { Offset, Temperature };

struct CFParams {
  CFVariant variant = CFVariant::Temperature;
  double theta_plus = 1.0;
  double theta_minus = 1.0;
  int eta = 1;

  void validate() const;
};

/// Batch-mean loss gradient for one layer plus the per-sample diagnostics
/// the local rules need.
struct GradientBatch {
  Matrix grad;  // n_out x n_in
  std::size_t batch_size = 0;
  Vector d_plus;
  Vector d_minus;
  Vector goodness_plus;
  Vector goodness_minus;
};

/// eta * ||h||^2
double goodness(const Vector& h, int eta);

/// Forward pass of one layer for a batch (one sample per row): act(X W^T).
Matrix layer_forward(const Matrix& weights, const Matrix& inputs, Activation activation);

struct PosNegPair {
  Vector positive;
  Vector negative;
  int wrong_label = 0;
};

/// Appends a one-hot label token of the true label (positive) and of a
/// uniformly drawn wrong label (negative) to the feature vector.
PosNegPair build_pos_neg(const Vector& x, int label, int classes, double token_amplitude,
                         Rng& rng);

/// Appends the neutral token (every slot at amplitude / classes).
Vector with_neutral_token(const Vector& x, int classes, double token_amplitude);
/// Appends the one-hot token of `label`.
Vector with_label_token(const Vector& x, int label, int classes, double token_amplitude);

/// -1/2 [log sig(g(h+) - eta th+ N_h) + log(1 - sig(g(h-) - eta th- N_h))]
double sff_loss(const Vector& h_pos, const Vector& h_neg, const SFFParams& params,
                std::size_t n_h);

/// Working memory a hardware implementation buffers for one SFF batch:
/// N_B (2 + 2 N_x + 2 N_h) scalars.
struct SffBatchBuffer {
  Matrix x_pos, x_neg;  // N_B x N_x
  Matrix h_pos, h_neg;  // N_B x N_h
  Vector d_plus, d_minus;

  std::size_t buffered_scalars() const;
};

SffBatchBuffer sff_buffer(const Matrix& x_pos, const Matrix& h_pos, const Matrix& x_neg,
                          const Matrix& h_neg, const SFFParams& params);

/// grad_ij = -eta sum_n [h+_ni x+_nj / D+_n - h-_ni x-_nj / D-_n], with
/// D+_n = N_B (1 + exp(g(h+_n) - eta th+ N_h)) and
/// D-_n = N_B (1 + exp(eta th- N_h - g(h-_n))).
/// Exact gradient of the batch-mean loss for ReLU layers (off the kink set).
Matrix sff_gradient(const SffBatchBuffer& buffer, int eta);

GradientBatch sff_gradient(const Matrix& x_pos, const Matrix& h_pos, const Matrix& x_neg,
                           const Matrix& h_neg, const SFFParams& params);

/// Binary mask selecting the cluster of `label`.
Vector cluster_mask(const LayerSpec& spec, int label);

/// Offset: -1/2 [log sig(g(hZ) - eta th+) + log(1 - sig(g(h(1-Z)) - eta th-))]
/// Temperature: -1/2 [log sig(th+ g(hZ)) + log(1 - sig(th- g(h(1-Z))))]
double cf_loss(const Vector& h, const Vector& mask, const CFParams& params);

/// Working memory of one CF batch: N_B (3 + N_x + N_h) scalars.
struct CfBatchBuffer {
  Matrix x;  // N_B x N_x
  Matrix h;  // N_B x N_h
  Vector d_plus, d_minus;
  std::vector<int> labels;

  std::size_t buffered_scalars() const;
};

CfBatchBuffer cf_buffer(const Matrix& x, const Matrix& h, std::span<const int> labels,
                        const CFParams& params, const LayerSpec& spec);

/// grad_ij = -eta sum_n h_ni x_nj [delta(C(i)=Y_n) / D+_n - delta(C(i)!=Y_n) / D-_n].
/// Temperature: D+ = N_B (1 + exp(th+ g(hZ))) / th+, D- = N_B (1 + exp(-th- g(h(1-Z)))) / th-.
/// Offset:      D+ = N_B (1 + exp(g(hZ) - eta th+)),  D- = N_B (1 + exp(eta th- - g(h(1-Z)))).
Matrix cf_gradient(const CfBatchBuffer& buffer, const LayerSpec& spec, int eta);

GradientBatch cf_gradient(const Matrix& x, const Matrix& h, std::span<const int> labels,
                          const CFParams& params, const LayerSpec& spec);

/// Mean softmax cross-entropy of the network output (last layer = logits).
double cross_entropy_loss(std::span<const Matrix> weights, std::span<const Activation> activations,
                          const Matrix& inputs, std::span<const int> labels);

/// Analytic backpropagation of the batch-mean softmax cross-entropy through a
/// bias-free network. Layers whose mask entry is false get a zero gradient.
std::vector<Matrix> bp_gradients(std::span<const Matrix> weights,
                                 std::span<const Activation> activations, const Matrix& inputs,
                                 std::span<const int> labels, const std::vector<bool>& trainable);

/// How a gradient sign maps to the device that gets pulsed.
enum class PlanMode {
  // Move the weight against the gradient: grad > tau resets G+, grad < -tau resets G-.
  Descent,
  // The opposite mapping (positive value resets G-), for signals that are already
  // update directions.
  Literal,
};

/// One pulse per weight whose |grad| strictly exceeds tau.
UpdatePlan threshold_sign_plan(const Matrix& grad, double tau, PlanMode mode = PlanMode::Descent);

/// Floating-point twin of the pulse rule: W - lr * sign(grad) * [|grad| > tau].
Matrix sign_descent_step_float(const Matrix& weights, const Matrix& grad, double lr, double tau);

/// Element-wise m / sqrt(v) of a momentum-free Adam step (m = g, v = g^2);
/// zero where g == 0.
Matrix adam_direction_without_momentum(const Matrix& grad);

}  // namespace memgrad
