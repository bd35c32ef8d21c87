#include "memgrad/learning_rules.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

using namespace memgrad;

namespace {

Matrix uniform(Eigen::Index r, Eigen::Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Matrix::NullaryExpr(r, c, [&] { return u(rng); });
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Direct transcriptions of the loss definitions, no stabilization.
double sff_loss_oracle(const Vector& hp, const Vector& hn, const SFFParams& p, double n_h) {
  const double gp = p.eta * hp.squaredNorm(), gn = p.eta * hn.squaredNorm();
  return -0.5 * (std::log(sigmoid(gp - p.eta * p.theta_plus * n_h)) +
                 std::log(1.0 - sigmoid(gn - p.eta * p.theta_minus * n_h)));
}

double cf_loss_oracle(const Vector& h, const Vector& z, const CFParams& p) {
  const double gz = p.eta * h.cwiseProduct(z).squaredNorm();
  const double gc = p.eta * h.cwiseProduct(Vector::Ones(z.size()) - z).squaredNorm();
  if (p.variant == CFVariant::Temperature) {
    return -0.5 * (std::log(sigmoid(p.theta_plus * gz)) + std::log(1.0 - sigmoid(p.theta_minus * gc)));
  }
  return -0.5 * (std::log(sigmoid(gz - p.eta * p.theta_plus)) +
                 std::log(1.0 - sigmoid(gc - p.eta * p.theta_minus)));
}

Matrix finite_difference(const Matrix& w, const std::function<double(const Matrix&)>& f,
                         double step) {
  Matrix g(w.rows(), w.cols());
  Matrix p = w;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double v = p(k);
    p(k) = v + step;
    const double up = f(p);
    p(k) = v - step;
    const double down = f(p);
    p(k) = v;
    g(k) = (up - down) / (2.0 * step);
  }
  return g;
}

double rel_inf(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

bool kink_free(const Matrix& w, const Matrix& x, double margin) {
  return (x * w.transpose()).cwiseAbs().minCoeff() > margin;
}

LayerSpec cluster_spec(std::size_t n_in, std::size_t classes, std::size_t size, int eta = 1) {
  LayerSpec s;
  s.n_in = n_in;
  s.n_out = classes * size;
  s.eta = eta;
  s.clusters = ClusterLayout{classes, size};
  return s;
}

}  // namespace

TEST(Goodness, Values) {
  EXPECT_EQ(goodness(Vector::Zero(5), 1), 0.0);
  Vector h(2);
  h << 3, 4;
  EXPECT_EQ(goodness(h, 1), 25.0);
  Rng rng = make_rng(1);
  for (int k = 0; k < 20; ++k) {
    const Vector r = uniform(6, 1, rng);
    EXPECT_EQ(goodness(r, -1), -goodness(r, 1));
  }
}

TEST(LabelTokens, PositiveAndNegativeConstruction) {
  Rng rng = make_rng(2);
  const Vector x = uniform(32, 1, rng);
  const auto pn = build_pos_neg(x, 2, 4, 1.5, rng);
  ASSERT_EQ(pn.positive.size(), 36);
  ASSERT_EQ(pn.negative.size(), 36);
  EXPECT_EQ(pn.positive.head(32), x);
  EXPECT_EQ(pn.positive(34), 1.5);
  EXPECT_EQ(pn.positive(32), 0.0);
  EXPECT_EQ(pn.positive(33), 0.0);
  EXPECT_EQ(pn.positive(35), 0.0);
  EXPECT_NE(pn.wrong_label, 2);
  EXPECT_EQ(pn.negative(32 + pn.wrong_label), 1.5);
  EXPECT_THROW(build_pos_neg(x, 0, 1, 1.0, rng), ParameterError);
}

TEST(LabelTokens, WrongLabelIsUniform) {
  Rng rng = make_rng(3);
  const Vector x = Vector::Zero(4);
  std::array<int, 4> counts{};
  const int n = 10000;
  for (int k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(build_pos_neg(x, 2, 4, 1.0, rng).wrong_label)];
  EXPECT_EQ(counts[2], 0);
  for (int c : {0, 1, 3}) EXPECT_NEAR(counts[static_cast<std::size_t>(c)] / double(n), 1.0 / 3.0, 0.02);
}

TEST(LabelTokens, ZeroAmplitudeWarns) {
  std::string seen;
  set_warning_sink([&](std::string_view m) { seen = m; });
  Rng rng = make_rng(4);
  const auto pn = build_pos_neg(Vector::Ones(3), 1, 3, 0.0, rng);
  set_warning_sink(nullptr);
  EXPECT_EQ(pn.positive.tail(3), pn.negative.tail(3));
  EXPECT_FALSE(seen.empty());
}

TEST(LabelTokens, NeutralToken) {
  const Vector v = with_neutral_token(Vector::Ones(2), 4, 2.0);
  ASSERT_EQ(v.size(), 6);
  for (int k = 2; k < 6; ++k) EXPECT_DOUBLE_EQ(v(k), 0.5);
  const Vector l = with_label_token(Vector::Zero(2), 3, 4, 1.0);
  EXPECT_EQ(l(5), 1.0);
  EXPECT_EQ(l.sum(), 1.0);
}

TEST(SffLoss, ZeroMarginIsLogTwo) {
  SFFParams p{0.5, 0.25, 1};
  Vector hp(2), hn(2);
  hp << 1.0, 0.0;  // g = 1 = theta+ * N_h
  hn << std::sqrt(0.5), 0.0;
  EXPECT_NEAR(sff_loss(hp, hn, p, 2), std::log(2.0), 1e-12);
}

TEST(SffLoss, SaturationLimit) {
  SFFParams p{0.0, 0.0, 1};
  EXPECT_NEAR(sff_loss(Vector::Constant(3, 30.0), Vector::Zero(3), p, 3), 0.5 * std::log(2.0), 1e-12);
  SFFParams q{-100.0, 100.0, 1};
  EXPECT_LT(sff_loss(Vector::Constant(3, 30.0), Vector::Zero(3), q, 3), 1e-12);
}

TEST(SffLoss, MatchesTranscription) {
  Rng rng = make_rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vector hp = uniform(6, 1, rng, 0.0, 1.0), hn = uniform(6, 1, rng, 0.0, 1.0);
    const SFFParams p{u(rng), u(rng), k % 2 ? 1 : -1};
    EXPECT_NEAR(sff_loss(hp, hn, p, 6), sff_loss_oracle(hp, hn, p, 6.0), 1e-12);
  }
}

TEST(SffGradient, DeadUnitsGiveZero) {
  Rng rng = make_rng(6);
  const Matrix xp = uniform(4, 5, rng), xn = uniform(4, 5, rng);
  const auto g = sff_gradient(xp, Matrix::Zero(4, 3), xn, Matrix::Zero(4, 3), {0.1, 0.1, 1});
  EXPECT_TRUE(g.grad.isZero(0.0));
  EXPECT_EQ(g.grad.rows(), 3);
  EXPECT_EQ(g.grad.cols(), 5);
}

TEST(SffGradient, MatchesFiniteDifferences) {
  Rng rng = make_rng(7);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index nb = k % 2 ? 1 : 5;
    Matrix w, xp, xn;
    do {
      w = uniform(4, 6, rng);
      xp = uniform(nb, 6, rng);
      xn = uniform(nb, 6, rng);
    } while (!kink_free(w, xp, 1e-3) || !kink_free(w, xn, 1e-3));
    const SFFParams p{u(rng), u(rng), k % 4 < 2 ? 1 : -1};
    auto loss = [&](const Matrix& wm) {
      const Matrix hp = layer_forward(wm, xp, Activation::ReLU);
      const Matrix hn = layer_forward(wm, xn, Activation::ReLU);
      double s = 0.0;
      for (Eigen::Index n = 0; n < nb; ++n) s += sff_loss_oracle(hp.row(n).transpose(), hn.row(n).transpose(), p, 4.0);
      return s / double(nb);
    };
    const auto g = sff_gradient(xp, layer_forward(w, xp, Activation::ReLU), xn,
                                layer_forward(w, xn, Activation::ReLU), p);
    EXPECT_LT(rel_inf(g.grad, finite_difference(w, loss, 1e-5)), 1e-5);
    EXPECT_EQ(g.batch_size, static_cast<std::size_t>(nb));
    EXPECT_EQ(g.d_plus.size(), nb);
  }
}

TEST(SffGradient, DuplicatedBatchIsUnchanged) {
  Rng rng = make_rng(8);
  const Matrix w = uniform(3, 4, rng), xp = uniform(5, 4, rng), xn = uniform(5, 4, rng);
  const SFFParams p{0.2, 0.1, 1};
  const Matrix hp = layer_forward(w, xp, Activation::ReLU), hn = layer_forward(w, xn, Activation::ReLU);
  Matrix xp2(10, 4), xn2(10, 4), hp2(10, 3), hn2(10, 3);
  xp2 << xp, xp;
  xn2 << xn, xn;
  hp2 << hp, hp;
  hn2 << hn, hn;
  const Matrix g1 = sff_gradient(xp, hp, xn, hn, p).grad;
  const Matrix g2 = sff_gradient(xp2, hp2, xn2, hn2, p).grad;
  EXPECT_LT((g1 - g2).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SffGradient, EntriesAreLocal) {
  Rng rng = make_rng(9);
  const Matrix w = uniform(4, 5, rng), xp = uniform(3, 5, rng), xn = uniform(3, 5, rng);
  const SFFParams p{0.2, 0.1, 1};
  const auto buf = sff_buffer(xp, layer_forward(w, xp, Activation::ReLU), xn,
                              layer_forward(w, xn, Activation::ReLU), p);
  const Matrix g = sff_gradient(buf, 1);
  const Eigen::Index i = 1, j = 2;
  auto perturbed = buf;
  for (Eigen::Index k = 0; k < 4; ++k)
    if (k != i) {
      perturbed.h_pos.col(k).array() += 0.37;
      perturbed.h_neg.col(k).array() -= 0.11;
    }
  for (Eigen::Index l = 0; l < 5; ++l)
    if (l != j) {
      perturbed.x_pos.col(l).array() *= 3.0;
      perturbed.x_neg.col(l).array() += 1.0;
    }
  EXPECT_EQ(sff_gradient(perturbed, 1)(i, j), g(i, j));
}

TEST(SffGradient, WorkingMemoryFormula) {
  Rng rng = make_rng(10);
  for (auto [nb, nx, nh] : {std::array<Eigen::Index, 3>{16, 36, 48}, {1, 3, 2}, {7, 5, 9}}) {
    const Matrix w = uniform(nh, nx, rng), xp = uniform(nb, nx, rng), xn = uniform(nb, nx, rng);
    const auto buf = sff_buffer(xp, layer_forward(w, xp, Activation::ReLU), xn,
                                layer_forward(w, xn, Activation::ReLU), {0.1, 0.1, 1});
    EXPECT_EQ(buf.buffered_scalars(), static_cast<std::size_t>(nb * (2 + 2 * nx + 2 * nh)));
  }
}

TEST(ClusterMask, Layout) {
  const auto spec = cluster_spec(8, 4, 12);
  const Vector z0 = cluster_mask(spec, 0), z3 = cluster_mask(spec, 3);
  EXPECT_EQ(z0.head(12), Vector::Ones(12));
  EXPECT_EQ(z0.tail(36).sum(), 0.0);
  EXPECT_EQ(z3.tail(12), Vector::Ones(12));
  EXPECT_EQ(z3.head(36).sum(), 0.0);
  Vector all = Vector::Zero(48);
  for (int y = 0; y < 4; ++y) {
    all += cluster_mask(spec, y);
    EXPECT_EQ(cluster_mask(spec, y).sum(), 12.0);
  }
  EXPECT_EQ(all, Vector::Ones(48));
  LayerSpec plain;
  plain.n_in = 2;
  plain.n_out = 4;
  EXPECT_THROW(cluster_mask(plain, 0), ParameterError);
  EXPECT_THROW(cluster_mask(spec, 4), ParameterError);
}

TEST(CfLoss, ZeroMarginAndSaturation) {
  const auto spec = cluster_spec(2, 3, 2);
  CFParams t{CFVariant::Temperature, 2.0, 3.0, 1};
  EXPECT_NEAR(cf_loss(Vector::Zero(6), cluster_mask(spec, 1), t), std::log(2.0), 1e-12);
  Vector h = Vector::Zero(6);
  h(2) = h(3) = 10.0;  // target cluster 1 only
  EXPECT_NEAR(cf_loss(h, cluster_mask(spec, 1), t), 0.5 * std::log(2.0), 1e-12);
}

TEST(CfLoss, MatchesTranscription) {
  Rng rng = make_rng(11);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_int_distribution<int> label(0, 3);
  const auto spec = cluster_spec(3, 4, 3);
  for (int k = 0; k < 200; ++k) {
    const Vector h = uniform(12, 1, rng, 0.0, 1.0);
    const Vector z = cluster_mask(spec, label(rng));
    const CFParams p{k % 2 ? CFVariant::Temperature : CFVariant::Offset, u(rng), u(rng),
                     k % 4 < 2 ? 1 : -1};
    EXPECT_NEAR(cf_loss(h, z, p), cf_loss_oracle(h, z, p), 1e-12);
  }
}

TEST(CfParams, TemperatureNeedsNonZeroTheta) {
  CFParams p{CFVariant::Temperature, 0.0, 1.0, 1};
  EXPECT_THROW(p.validate(), ParameterError);
  p.variant = CFVariant::Offset;
  EXPECT_NO_THROW(p.validate());
}

TEST(CfGradient, DeadUnitsGiveZero) {
  const auto spec = cluster_spec(5, 2, 3);
  Rng rng = make_rng(12);
  const std::vector<int> y{0, 1, 1};
  const auto g = cf_gradient(uniform(3, 5, rng), Matrix::Zero(3, 6), y,
                             CFParams{CFVariant::Temperature, 1.0, 1.0, 1}, spec);
  EXPECT_TRUE(g.grad.isZero(0.0));
}

TEST(CfGradient, MatchesFiniteDifferences) {
  Rng rng = make_rng(13);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (auto variant : {CFVariant::Temperature, CFVariant::Offset}) {
    for (int k = 0; k < 40; ++k) {
      const Eigen::Index nb = k % 2 ? 1 : 6;
      const int eta = k % 4 < 2 ? 1 : -1;
      auto spec = cluster_spec(5, 3, 2, eta);
      Matrix w, x;
      do {
        w = uniform(6, 5, rng);
        x = uniform(nb, 5, rng);
      } while (!kink_free(w, x, 1e-3));
      std::vector<int> y(static_cast<std::size_t>(nb));
      for (std::size_t n = 0; n < y.size(); ++n) y[n] = static_cast<int>((n + k) % 3);
      const CFParams p{variant, u(rng), u(rng), eta};
      auto loss = [&](const Matrix& wm) {
        const Matrix h = layer_forward(wm, x, Activation::ReLU);
        double s = 0.0;
        for (Eigen::Index n = 0; n < nb; ++n)
          s += cf_loss_oracle(h.row(n).transpose(), cluster_mask(spec, y[static_cast<std::size_t>(n)]), p);
        return s / double(nb);
      };
      const auto g = cf_gradient(x, layer_forward(w, x, Activation::ReLU), y, p, spec);
      EXPECT_LT(rel_inf(g.grad, finite_difference(w, loss, 1e-5)), 1e-5);
    }
  }
}

TEST(CfGradient, EtaFlipsEachContributionAtFixedD) {
  Rng rng = make_rng(14);
  const auto spec = cluster_spec(4, 2, 3);
  const Matrix w = uniform(6, 4, rng), x = uniform(5, 4, rng);
  const std::vector<int> y{0, 1, 0, 1, 1};
  const auto buf = cf_buffer(x, layer_forward(w, x, Activation::ReLU), y,
                             CFParams{CFVariant::Temperature, 0.5, 0.5, 1}, spec);
  EXPECT_EQ(cf_gradient(buf, spec, -1), (-cf_gradient(buf, spec, 1)).eval());
}

TEST(CfGradient, EntriesAreLocalAndMemoryFormula) {
  Rng rng = make_rng(15);
  const auto spec = cluster_spec(5, 2, 2);
  const Matrix w = uniform(4, 5, rng), x = uniform(3, 5, rng);
  const std::vector<int> y{1, 0, 1};
  const auto buf = cf_buffer(x, layer_forward(w, x, Activation::ReLU), y,
                             CFParams{CFVariant::Offset, 0.2, 0.3, 1}, spec);
  EXPECT_EQ(buf.buffered_scalars(), 3u * (3 + 5 + 4));
  const Matrix g = cf_gradient(buf, spec, 1);
  auto perturbed = buf;
  perturbed.h.col(0).array() += 1.0;
  perturbed.x.col(4).array() -= 2.0;
  EXPECT_EQ(cf_gradient(perturbed, spec, 1)(2, 1), g(2, 1));
}

TEST(BpGradients, UniformLogitsIdentity) {
  Rng rng = make_rng(16);
  const Matrix x = uniform(1, 3, rng);
  const std::vector<Matrix> w{Matrix::Zero(4, 3)};
  const std::vector<Activation> act{Activation::Identity};
  const std::vector<int> y{2};
  const Matrix g = bp_gradients(w, act, x, y, {true})[0];
  Vector coeff = Vector::Constant(4, 0.25);
  coeff(2) -= 1.0;
  EXPECT_LT((g - coeff * x).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BpGradients, MatchFiniteDifferencesAndMaskFrozenLayers) {
  Rng rng = make_rng(17);
  const std::vector<Activation> act{Activation::ReLU, Activation::Identity};
  for (int k = 0; k < 20; ++k) {
    std::vector<Matrix> w;
    Matrix x;
    do {
      w = {uniform(5, 4, rng), uniform(3, 5, rng)};
      x = uniform(6, 4, rng);
    } while (!kink_free(w[0], x, 1e-3));
    const std::vector<int> y{0, 1, 2, 2, 1, 0};
    const auto g = bp_gradients(w, act, x, y, {true, true});
    for (std::size_t l = 0; l < 2; ++l) {
      auto loss = [&](const Matrix& wl) {
        auto ws = w;
        ws[l] = wl;
        return cross_entropy_loss(ws, act, x, y);
      };
      EXPECT_LT(rel_inf(g[l], finite_difference(w[l], loss, 1e-5)), 1e-5);
    }
    const auto frozen = bp_gradients(w, act, x, y, {false, true});
    EXPECT_TRUE(frozen[0].isZero(0.0));
    EXPECT_EQ(frozen[1], g[1]);
  }
}

TEST(BpGradients, PerceptronFitsSeparableToySet) {
  Matrix x(2, 2);
  x << 1.0, 0.2, -0.3, 1.0;
  const std::vector<int> y{0, 1};
  std::vector<Matrix> w{Matrix::Zero(2, 2)};
  const std::vector<Activation> act{Activation::Identity};
  for (int step = 0; step < 2000; ++step) w[0] -= 1.0 * bp_gradients(w, act, x, y, {true})[0];
  EXPECT_LT(cross_entropy_loss(w, act, x, y), 1e-2);
}

TEST(ThresholdPlan, RuleDefinition) {
  Matrix g(1, 3);
  g << 0.5, -0.5, 0.01;
  const auto plan = threshold_sign_plan(g, 0.1);
  ASSERT_EQ(plan.size(), 2u);
  EXPECT_EQ(plan.find(0, 0)->polarity, Polarity::PulsePlus);
  EXPECT_EQ(plan.find(0, 1)->polarity, Polarity::PulseMinus);
  EXPECT_EQ(plan.find(0, 2), nullptr);
  const auto literal = threshold_sign_plan(g, 0.1, PlanMode::Literal);
  EXPECT_EQ(literal.find(0, 0)->polarity, Polarity::PulseMinus);
  EXPECT_EQ(literal.find(0, 1)->polarity, Polarity::PulsePlus);
}

TEST(ThresholdPlan, StrictThreshold) {
  Matrix g(2, 2);
  g << 0.1, -0.1, 0.0, 0.05;
  EXPECT_TRUE(threshold_sign_plan(g, 0.1).empty());
  EXPECT_TRUE(threshold_sign_plan(g * 1e6, std::numeric_limits<double>::infinity()).empty());
  const auto zero_tau = threshold_sign_plan(g, 0.0);
  EXPECT_EQ(zero_tau.size(), 3u);
  EXPECT_EQ(zero_tau.find(1, 0), nullptr);
  EXPECT_THROW(threshold_sign_plan(g, -1.0), ParameterError);
}

TEST(ThresholdPlan, SignOnlyInvarianceAndDeterminism) {
  Rng rng = make_rng(18);
  for (int k = 0; k < 50; ++k) {
    const Matrix g = uniform(4, 7, rng);
    const auto a = threshold_sign_plan(g, 0.3);
    const auto b = threshold_sign_plan(g * 17.0, 0.3 * 17.0);
    EXPECT_EQ(a.actions(), b.actions());
    EXPECT_EQ(a.actions(), threshold_sign_plan(g, 0.3).actions());
  }
}

TEST(SignDescent, ZeroGradientAndAdamIdentity) {
  Rng rng = make_rng(19);
  const Matrix w = uniform(3, 3, rng);
  EXPECT_EQ(sign_descent_step_float(w, Matrix::Zero(3, 3), 0.1, 0.0), w);
  const Matrix g = uniform(3, 3, rng);
  const Matrix step = (w - sign_descent_step_float(w, g, 1.0, 0.2));
  const Matrix adam = adam_direction_without_momentum(g);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (std::abs(g(k)) > 0.2) EXPECT_DOUBLE_EQ(step(k), adam(k));
    else EXPECT_EQ(step(k), 0.0);
  }
  EXPECT_EQ(adam_direction_without_momentum(Matrix::Zero(2, 2)), Matrix::Zero(2, 2));
}

TEST(SignDescent, ConvexQuadraticDecreasesMonotonically) {
  Matrix target(2, 3);
  target << 1.0, -2.0, 0.5, 3.0, 0.0, -1.0;
  Matrix w = Matrix::Zero(2, 3);
  auto loss = [&](const Matrix& m) { return 0.5 * (m - target).squaredNorm(); };
  double prev = loss(w);
  for (int step = 0; step < 400; ++step) {
    const bool far = ((w - target).array().abs() >= 0.01 || target.array() == 0.0).all();
    w = sign_descent_step_float(w, w - target, 0.01, 0.0);
    const double now = loss(w);
    // Once within one step of the target the iterate may oscillate.
    if (far) {
      EXPECT_LE(now, prev + 1e-12);
    }
    prev = now;
  }
  EXPECT_LT(prev, 6 * 0.5 * 0.01 * 0.01);
}
