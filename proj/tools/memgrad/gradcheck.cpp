#include "gradcheck.hpp"

#include "memgrad/learning_rules.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace memgrad::cli {

namespace {

constexpr double kStep = 1e-6;

Matrix central_difference(const Matrix& w, const std::function<double(const Matrix&)>& loss) {
  Matrix g(w.rows(), w.cols());
  Matrix p = w;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double orig = p(k);
    p(k) = orig + kStep;
    const double up = loss(p);
    p(k) = orig - kStep;
    const double down = loss(p);
    p(k) = orig;
    g(k) = (up - down) / (2.0 * kStep);
  }
  return g;
}

double relative_error(const Matrix& analytic, const Matrix& fd) {
  const double scale = fd.cwiseAbs().maxCoeff();
  const double diff = (analytic - fd).cwiseAbs().maxCoeff();
  if (scale == 0.0) return diff;
  return diff / scale;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Matrix::NullaryExpr(r, c, [&] { return u(rng); });
}

// Pre-activations X W^T must stay at least `margin` away from zero, and far
// enough that the finite-difference step cannot cross the ReLU kink.
bool off_kinks(const Matrix& w, const Matrix& x, double margin) {
  const Matrix z = x * w.transpose();
  const double reach = kStep * x.cwiseAbs().rowwise().sum().maxCoeff();
  return z.cwiseAbs().minCoeff() > std::max(margin, 10.0 * reach);
}

struct Tally {
  SuiteResult r;
  void add(double err, double rtol) {
    ++r.configs;
    r.worst_error = std::max(r.worst_error, err);
    if (!(err <= rtol)) ++r.failures;
  }
};

SuiteResult sff_suite(const GradcheckOptions& o) {
  Rng rng = make_rng(o.seed, 1);
  std::uniform_int_distribution<int> dim(2, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tally t{{"sff", 0, 0, 0.0}};
  for (int k = 0; k < o.configs; ++k) {
    const Eigen::Index nb = (k % 2 == 0) ? 1 : 16;
    const Eigen::Index nx = dim(rng), nh = dim(rng);
    Matrix w, xp, xn;
    do {
      w = random_matrix(nh, nx, -1.0, 1.0, rng);
      xp = random_matrix(nb, nx, -1.0, 1.0, rng);
      xn = random_matrix(nb, nx, -1.0, 1.0, rng);
    } while (!off_kinks(w, xp, o.margin) || !off_kinks(w, xn, o.margin));
    SFFParams p;
    p.eta = (k / 2) % 2 == 0 ? 1 : -1;
    const double typical = layer_forward(w, xp, Activation::ReLU).cwiseAbs2().mean();
    p.theta_plus = 2.0 * typical * unit(rng);
    p.theta_minus = 2.0 * typical * unit(rng);
    auto loss = [&](const Matrix& wm) {
      const Matrix hp = layer_forward(wm, xp, Activation::ReLU);
      const Matrix hn = layer_forward(wm, xn, Activation::ReLU);
      double s = 0.0;
      for (Eigen::Index n = 0; n < nb; ++n) {
        s += sff_loss(hp.row(n).transpose(), hn.row(n).transpose(), p,
                      static_cast<std::size_t>(nh));
      }
      return s / static_cast<double>(nb);
    };
    const Matrix hp = layer_forward(w, xp, Activation::ReLU);
    const Matrix hn = layer_forward(w, xn, Activation::ReLU);
    Matrix analytic = sff_gradient(xp, hp, xn, hn, p).grad;
    if (o.negative_control) analytic = -analytic;
    t.add(relative_error(analytic, central_difference(w, loss)), o.rtol);
  }
  return t.r;
}

SuiteResult cf_suite(const GradcheckOptions& o, CFVariant variant) {
  Rng rng = make_rng(o.seed, variant == CFVariant::Temperature ? 2 : 3);
  std::uniform_int_distribution<int> classes_d(2, 4), size_d(1, 4), nx_d(2, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tally t{{variant == CFVariant::Temperature ? "cf-temperature" : "cf-offset", 0, 0, 0.0}};
  for (int k = 0; k < o.configs; ++k) {
    const Eigen::Index nb = (k % 2 == 0) ? 1 : 16;
    const int C = classes_d(rng);
    const int size = size_d(rng);
    LayerSpec spec;
    spec.n_in = static_cast<std::size_t>(nx_d(rng));
    spec.n_out = static_cast<std::size_t>(C * size);
    spec.clusters = ClusterLayout{static_cast<std::size_t>(C), static_cast<std::size_t>(size)};
    Matrix w, x;
    do {
      w = random_matrix(static_cast<Eigen::Index>(spec.n_out), static_cast<Eigen::Index>(spec.n_in),
                        -1.0, 1.0, rng);
      x = random_matrix(nb, static_cast<Eigen::Index>(spec.n_in), -1.0, 1.0, rng);
    } while (!off_kinks(w, x, o.margin));
    std::uniform_int_distribution<int> label_d(0, C - 1);
    std::vector<int> labels(static_cast<std::size_t>(nb));
    for (int& y : labels) y = label_d(rng);
    CFParams p;
    p.variant = variant;
    p.eta = (k / 2) % 2 == 0 ? 1 : -1;
    spec.eta = p.eta;
    const double typical = layer_forward(w, x, Activation::ReLU).cwiseAbs2().sum() /
                           static_cast<double>(nb);
    if (variant == CFVariant::Temperature) {
      p.theta_plus = (0.1 + unit(rng)) / std::max(typical, 1e-3);
      p.theta_minus = (0.1 + unit(rng)) / std::max(typical, 1e-3);
    } else {
      p.theta_plus = typical * unit(rng);
      p.theta_minus = typical * unit(rng);
    }
    auto loss = [&](const Matrix& wm) {
      const Matrix h = layer_forward(wm, x, Activation::ReLU);
      double s = 0.0;
      for (Eigen::Index n = 0; n < nb; ++n) {
        s += cf_loss(h.row(n).transpose(), cluster_mask(spec, labels[static_cast<std::size_t>(n)]), p);
      }
      return s / static_cast<double>(nb);
    };
    const Matrix h = layer_forward(w, x, Activation::ReLU);
    Matrix analytic = cf_gradient(x, h, labels, p, spec).grad;
    if (o.negative_control) analytic = -analytic;
    t.add(relative_error(analytic, central_difference(w, loss)), o.rtol);
  }
  return t.r;
}

SuiteResult bp_suite(const GradcheckOptions& o) {
  Rng rng = make_rng(o.seed, 4);
  std::uniform_int_distribution<int> dim(2, 8), classes_d(2, 5);
  Tally t{{"bp", 0, 0, 0.0}};
  for (int k = 0; k < o.configs; ++k) {
    const Eigen::Index nb = (k % 2 == 0) ? 1 : 16;
    const bool two_layer = (k / 2) % 2 == 1;
    const Eigen::Index nx = dim(rng), nh = dim(rng), C = classes_d(rng);
    std::vector<Matrix> w;
    std::vector<Activation> acts;
    Matrix x;
    if (two_layer) {
      do {
        w = {random_matrix(nh, nx, -1.0, 1.0, rng), random_matrix(C, nh, -1.0, 1.0, rng)};
        x = random_matrix(nb, nx, -1.0, 1.0, rng);
      } while (!off_kinks(w[0], x, o.margin));
      acts = {Activation::ReLU, Activation::Identity};
    } else {
      w = {random_matrix(C, nx, -1.0, 1.0, rng)};
      x = random_matrix(nb, nx, -1.0, 1.0, rng);
      acts = {Activation::Identity};
    }
    std::uniform_int_distribution<int> label_d(0, static_cast<int>(C) - 1);
    std::vector<int> labels(static_cast<std::size_t>(nb));
    for (int& y : labels) y = label_d(rng);
    const auto grads = bp_gradients(w, acts, x, labels, std::vector<bool>(w.size(), true));
    double worst = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) {
      auto loss = [&](const Matrix& wl) {
        std::vector<Matrix> ws = w;
        ws[l] = wl;
        return cross_entropy_loss(ws, acts, x, labels);
      };
      Matrix analytic = grads[l];
      if (o.negative_control) analytic = -analytic;
      worst = std::max(worst, relative_error(analytic, central_difference(w[l], loss)));
    }
    t.add(worst, o.rtol);
  }
  return t.r;
}

}  // namespace

std::vector<SuiteResult> run_gradcheck(const GradcheckOptions& o) {
  if (o.configs < 1) throw ConfigError("gradcheck needs at least one configuration");
  if (o.rule != "all" && o.rule != "sff" && o.rule != "cf" && o.rule != "bp") {
    throw ConfigError("unknown rule '" + o.rule + "' (expected sff, cf, bp or all)");
  }
  if (o.variant != "all" && o.variant != "temperature" && o.variant != "offset") {
    throw ConfigError("unknown variant '" + o.variant + "' (expected temperature, offset or all)");
  }
  std::vector<SuiteResult> out;
  const bool all = o.rule == "all";
  if (all || o.rule == "sff") out.push_back(sff_suite(o));
  if (all || o.rule == "cf") {
    if (o.variant != "offset") out.push_back(cf_suite(o, CFVariant::Temperature));
    if (o.variant != "temperature") out.push_back(cf_suite(o, CFVariant::Offset));
  }
  if (all || o.rule == "bp") out.push_back(bp_suite(o));
  return out;
}

}  // namespace memgrad::cli
