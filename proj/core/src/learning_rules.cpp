#include "memgrad/learning_rules.hpp"

#include <atomic>
#include <cmath>

namespace memgrad {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

void check_eta(int eta) {
  if (eta != 1 && eta != -1) throw ParameterError("goodness sign eta must be +1 or -1");
}

}  // namespace

void LayerSpec::validate() const {
  if (n_in == 0 || n_out == 0) throw ShapeError("layer needs non-zero input and output widths");
  check_eta(eta);
  if (clusters) {
    if (clusters->classes == 0 || clusters->cluster_size == 0 ||
        clusters->classes * clusters->cluster_size != n_out) {
      throw ShapeError("cluster layout " + std::to_string(clusters->classes) + "x" +
                       std::to_string(clusters->cluster_size) + " does not cover " +
                       std::to_string(n_out) + " outputs");
    }
  }
}

void CFParams::validate() const {
  check_eta(eta);
  if (variant == CFVariant::Temperature && (theta_plus == 0.0 || theta_minus == 0.0)) {
    throw ParameterError("temperature variant needs non-zero theta+ and theta-");
  }
  if (!std::isfinite(theta_plus) || !std::isfinite(theta_minus)) {
    throw ParameterError("theta must be finite");
  }
}

double goodness(const Vector& h, int eta) { return static_cast<double>(eta) * h.squaredNorm(); }

Matrix layer_forward(const Matrix& weights, const Matrix& inputs, Activation activation) {
  if (inputs.cols() != weights.cols()) {
    throw ShapeError("layer expects " + std::to_string(weights.cols()) + " inputs, got " +
                     std::to_string(inputs.cols()));
  }
  Matrix z = inputs * weights.transpose();
  if (activation == Activation::ReLU) z = z.cwiseMax(0.0);
  return z;
}

Vector with_label_token(const Vector& x, int label, int classes, double token_amplitude) {
  if (label < 0 || label >= classes) throw ParameterError("label outside [0, classes)");
  Vector out = Vector::Zero(x.size() + classes);
  out.head(x.size()) = x;
  out(x.size() + label) = token_amplitude;
  return out;
}

Vector with_neutral_token(const Vector& x, int classes, double token_amplitude) {
  Vector out(x.size() + classes);
  out.head(x.size()) = x;
  out.tail(classes).setConstant(token_amplitude / classes);
  return out;
}

PosNegPair build_pos_neg(const Vector& x, int label, int classes, double token_amplitude,
                         Rng& rng) {
  if (classes < 2) throw ParameterError("positive/negative construction needs >= 2 classes");
  if (label < 0 || label >= classes) throw ParameterError("label outside [0, classes)");
  if (token_amplitude == 0.0) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      warn("label token amplitude is 0: positive and negative examples are identical");
    }
  }
  std::uniform_int_distribution<int> pick(0, classes - 2);
  const int k = pick(rng);
  const int wrong = k < label ? k : k + 1;
  return {with_label_token(x, label, classes, token_amplitude),
          with_label_token(x, wrong, classes, token_amplitude), wrong};
}

double sff_loss(const Vector& h_pos, const Vector& h_neg, const SFFParams& params,
                std::size_t n_h) {
  check_eta(params.eta);
  if (static_cast<std::size_t>(h_pos.size()) != n_h || static_cast<std::size_t>(h_neg.size()) != n_h) {
    throw ShapeError("SFF activations do not have N_h entries");
  }
  const double nh = static_cast<double>(n_h);
  const double a = goodness(h_pos, params.eta) - params.eta * params.theta_plus * nh;
  const double b = goodness(h_neg, params.eta) - params.eta * params.theta_minus * nh;
  // -log sig(a) = softplus(-a); -log(1 - sig(b)) = softplus(b)
  return 0.5 * (softplus(-a) + softplus(b));
}

std::size_t SffBatchBuffer::buffered_scalars() const {
  return static_cast<std::size_t>(x_pos.size() + x_neg.size() + h_pos.size() + h_neg.size() +
                                  d_plus.size() + d_minus.size());
}

SffBatchBuffer sff_buffer(const Matrix& x_pos, const Matrix& h_pos, const Matrix& x_neg,
                          const Matrix& h_neg, const SFFParams& params) {
  check_eta(params.eta);
  const Eigen::Index nb = x_pos.rows();
  if (nb == 0) throw ShapeError("empty SFF batch");
  if (h_pos.rows() != nb || x_neg.rows() != nb || h_neg.rows() != nb ||
      x_pos.cols() != x_neg.cols() || h_pos.cols() != h_neg.cols()) {
    throw ShapeError("SFF batch matrices disagree in shape");
  }
  SffBatchBuffer buf{x_pos, x_neg, h_pos, h_neg, Vector(nb), Vector(nb)};
  const double nh = static_cast<double>(h_pos.cols());
  const double eta = params.eta;
  for (Eigen::Index n = 0; n < nb; ++n) {
    const double gp = eta * h_pos.row(n).squaredNorm();
    const double gn = eta * h_neg.row(n).squaredNorm();
    buf.d_plus(n) = double(nb) * (1.0 + std::exp(gp - eta * params.theta_plus * nh));
    buf.d_minus(n) = double(nb) * (1.0 + std::exp(eta * params.theta_minus * nh - gn));
  }
  return buf;
}

Matrix sff_gradient(const SffBatchBuffer& b, int eta) {
  check_eta(eta);
  const Vector inv_p = b.d_plus.cwiseInverse();
  const Vector inv_n = b.d_minus.cwiseInverse();
  Matrix grad = b.h_pos.transpose() * inv_p.asDiagonal() * b.x_pos;
  grad.noalias() -= b.h_neg.transpose() * inv_n.asDiagonal() * b.x_neg;
  return -static_cast<double>(eta) * grad;
}

GradientBatch sff_gradient(const Matrix& x_pos, const Matrix& h_pos, const Matrix& x_neg,
                           const Matrix& h_neg, const SFFParams& params) {
  const SffBatchBuffer buf = sff_buffer(x_pos, h_pos, x_neg, h_neg, params);
  GradientBatch out;
  out.grad = sff_gradient(buf, params.eta);
  out.batch_size = static_cast<std::size_t>(x_pos.rows());
  out.d_plus = buf.d_plus;
  out.d_minus = buf.d_minus;
  out.goodness_plus = params.eta * h_pos.rowwise().squaredNorm();
  out.goodness_minus = params.eta * h_neg.rowwise().squaredNorm();
  return out;
}

Vector cluster_mask(const LayerSpec& spec, int label) {
  if (!spec.clusters) throw ParameterError("layer has no cluster layout");
  const auto& c = *spec.clusters;
  if (label < 0 || static_cast<std::size_t>(label) >= c.classes) {
    throw ParameterError("label outside the cluster range");
  }
  Vector z = Vector::Zero(static_cast<Eigen::Index>(spec.n_out));
  z.segment(static_cast<Eigen::Index>(label * c.cluster_size),
            static_cast<Eigen::Index>(c.cluster_size))
      .setOnes();
  return z;
}

namespace {

struct CfTerms {
  double a;  // argument of the positive (target-cluster) sigmoid
  double b;  // argument of the negative (other clusters) sigmoid
};

CfTerms cf_terms(double g_target, double g_rest, const CFParams& p) {
  if (p.variant == CFVariant::Temperature) return {p.theta_plus * g_target, p.theta_minus * g_rest};
  return {g_target - p.eta * p.theta_plus, g_rest - p.eta * p.theta_minus};
}

}  // namespace

double cf_loss(const Vector& h, const Vector& mask, const CFParams& params) {
  params.validate();
  if (h.size() != mask.size()) throw ShapeError("cluster mask and activations differ in size");
  const double g_target = goodness(h.cwiseProduct(mask), params.eta);
  const double g_rest = goodness(h.cwiseProduct(Vector::Ones(mask.size()) - mask), params.eta);
  const CfTerms t = cf_terms(g_target, g_rest, params);
  return 0.5 * (softplus(-t.a) + softplus(t.b));
}

std::size_t CfBatchBuffer::buffered_scalars() const {
  return static_cast<std::size_t>(x.size() + h.size() + d_plus.size() + d_minus.size()) +
         labels.size();
}

CfBatchBuffer cf_buffer(const Matrix& x, const Matrix& h, std::span<const int> labels,
                        const CFParams& params, const LayerSpec& spec) {
  params.validate();
  spec.validate();
  if (!spec.clusters) throw ParameterError("competitive rule needs a cluster layer");
  const Eigen::Index nb = x.rows();
  if (nb == 0) throw ShapeError("empty CF batch");
  if (h.rows() != nb || static_cast<Eigen::Index>(labels.size()) != nb ||
      static_cast<std::size_t>(h.cols()) != spec.n_out ||
      static_cast<std::size_t>(x.cols()) != spec.n_in) {
    throw ShapeError("CF batch matrices disagree with the layer shape");
  }
  CfBatchBuffer buf{x, h, Vector(nb), Vector(nb), {labels.begin(), labels.end()}};
  const auto size = static_cast<Eigen::Index>(spec.clusters->cluster_size);
  const double scale_p = params.variant == CFVariant::Temperature ? params.theta_plus : 1.0;
  const double scale_n = params.variant == CFVariant::Temperature ? params.theta_minus : 1.0;
  for (Eigen::Index n = 0; n < nb; ++n) {
    const double total = h.row(n).squaredNorm();
    const double target = h.row(n).segment(labels[n] * size, size).squaredNorm();
    const double g_target = params.eta * target;
    const double g_rest = params.eta * (total - target);
    const CfTerms t = cf_terms(g_target, g_rest, params);
    buf.d_plus(n) = double(nb) * (1.0 + std::exp(t.a)) / scale_p;
    buf.d_minus(n) = double(nb) * (1.0 + std::exp(-t.b)) / scale_n;
  }
  return buf;
}

Matrix cf_gradient(const CfBatchBuffer& b, const LayerSpec& spec, int eta) {
  check_eta(eta);
  if (!spec.clusters) throw ParameterError("competitive rule needs a cluster layer");
  const auto size = static_cast<Eigen::Index>(spec.clusters->cluster_size);
  Matrix coeff = b.h;  // becomes h_ni [delta(C(i)=Y_n)/D+_n - delta(C(i)!=Y_n)/D-_n]
  for (Eigen::Index n = 0; n < coeff.rows(); ++n) {
    const Eigen::Index lo = b.labels[n] * size;
    for (Eigen::Index i = 0; i < coeff.cols(); ++i) {
      const bool target = i >= lo && i < lo + size;
      coeff(n, i) *= target ? 1.0 / b.d_plus(n) : -1.0 / b.d_minus(n);
    }
  }
  return -static_cast<double>(eta) * (coeff.transpose() * b.x);
}

GradientBatch cf_gradient(const Matrix& x, const Matrix& h, std::span<const int> labels,
                          const CFParams& params, const LayerSpec& spec) {
  const CfBatchBuffer buf = cf_buffer(x, h, labels, params, spec);
  GradientBatch out;
  out.grad = cf_gradient(buf, spec, params.eta);
  out.batch_size = static_cast<std::size_t>(x.rows());
  out.d_plus = buf.d_plus;
  out.d_minus = buf.d_minus;
  const auto size = static_cast<Eigen::Index>(spec.clusters->cluster_size);
  out.goodness_plus.resize(x.rows());
  out.goodness_minus.resize(x.rows());
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    const double target = h.row(n).segment(labels[n] * size, size).squaredNorm();
    out.goodness_plus(n) = params.eta * target;
    out.goodness_minus(n) = params.eta * (h.row(n).squaredNorm() - target);
  }
  return out;
}

namespace {

void check_network(std::span<const Matrix> weights, std::span<const Activation> activations,
                   const Matrix& inputs, std::span<const int> labels) {
  if (weights.empty() || weights.size() != activations.size()) {
    throw ShapeError("network needs one activation per layer");
  }
  if (inputs.cols() != weights.front().cols()) throw ShapeError("input width mismatch");
  for (std::size_t l = 1; l < weights.size(); ++l) {
    if (weights[l].cols() != weights[l - 1].rows()) throw ShapeError("layer widths do not chain");
  }
  if (static_cast<Eigen::Index>(labels.size()) != inputs.rows()) {
    throw ShapeError("one label per input row expected");
  }
  for (int y : labels) {
    if (y < 0 || y >= weights.back().rows()) throw ParameterError("label outside the logit range");
  }
}

// Row-wise softmax probabilities and the mean cross-entropy.
double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* probs) {
  double loss = 0.0;
  if (probs) probs->resize(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    const double m = logits.row(n).maxCoeff();
    const double lse = m + std::log((logits.row(n).array() - m).exp().sum());
    loss += lse - logits(n, labels[n]);
    if (probs) probs->row(n) = (logits.row(n).array() - lse).exp();
  }
  return loss / static_cast<double>(logits.rows());
}

}  // namespace

double cross_entropy_loss(std::span<const Matrix> weights, std::span<const Activation> activations,
                          const Matrix& inputs, std::span<const int> labels) {
  check_network(weights, activations, inputs, labels);
  Matrix a = inputs;
  for (std::size_t l = 0; l < weights.size(); ++l) a = layer_forward(weights[l], a, activations[l]);
  return softmax_cross_entropy(a, labels, nullptr);
}

std::vector<Matrix> bp_gradients(std::span<const Matrix> weights,
                                 std::span<const Activation> activations, const Matrix& inputs,
                                 std::span<const int> labels, const std::vector<bool>& trainable) {
  check_network(weights, activations, inputs, labels);
  if (trainable.size() != weights.size()) throw ShapeError("one trainable flag per layer expected");
  const std::size_t L = weights.size();

  std::vector<Matrix> pre(L), post(L + 1);
  post[0] = inputs;
  for (std::size_t l = 0; l < L; ++l) {
    pre[l] = post[l] * weights[l].transpose();
    post[l + 1] = activations[l] == Activation::ReLU ? Matrix(pre[l].cwiseMax(0.0)) : pre[l];
  }
  Matrix probs;
  softmax_cross_entropy(post[L], labels, &probs);

  Matrix delta = probs;  // dLoss/dlogits of the batch mean
  for (Eigen::Index n = 0; n < delta.rows(); ++n) delta(n, labels[n]) -= 1.0;
  delta /= static_cast<double>(inputs.rows());
  if (activations[L - 1] == Activation::ReLU) {
    delta = delta.cwiseProduct((pre[L - 1].array() > 0.0).cast<double>().matrix());
  }

  std::vector<Matrix> grads(L);
  for (std::size_t l = L; l-- > 0;) {
    grads[l] = trainable[l] ? Matrix(delta.transpose() * post[l])
                            : Matrix::Zero(weights[l].rows(), weights[l].cols());
    if (l == 0) break;
    delta = delta * weights[l];
    if (activations[l - 1] == Activation::ReLU) {
      delta = delta.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

UpdatePlan threshold_sign_plan(const Matrix& grad, double tau, PlanMode mode) {
  if (!(tau >= 0.0)) throw ParameterError("threshold tau must be non-negative");
  UpdatePlan plan;
  for (Eigen::Index i = 0; i < grad.rows(); ++i) {
    for (Eigen::Index j = 0; j < grad.cols(); ++j) {
      const double g = grad(i, j);
      if (!(std::fabs(g) > tau)) continue;
      const bool positive = g > 0.0;
      const bool reset_plus = mode == PlanMode::Descent ? positive : !positive;
      plan.add({static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                reset_plus ? Polarity::PulsePlus : Polarity::PulseMinus});
    }
  }
  return plan;
}

Matrix sign_descent_step_float(const Matrix& weights, const Matrix& grad, double lr, double tau) {
  if (!(lr > 0.0)) throw ParameterError("learning rate must be positive");
  if (weights.rows() != grad.rows() || weights.cols() != grad.cols()) {
    throw ShapeError("weights and gradient differ in shape");
  }
  const Matrix step = grad.unaryExpr([tau](double g) {
    return std::fabs(g) > tau ? (g > 0.0 ? 1.0 : -1.0) : 0.0;
  });
  return weights - lr * step;
}

Matrix adam_direction_without_momentum(const Matrix& grad) {
  // m_t = g_t and v_t = g_t^2 without momentum.
  return grad.unaryExpr([](double g) { return g == 0.0 ? 0.0 : g / std::sqrt(g * g); });
}

}  // namespace memgrad
