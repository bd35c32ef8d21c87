#include "memgrad/crossbar.hpp"
#include "memgrad/device_model.hpp"
#include "memgrad/learning_rules.hpp"
#include "memgrad/trainer.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace memgrad;

namespace {

const TrajectoryBank& bank() {
  static const TrajectoryBank b = generate_trajectory_bank({}, 256, 11);
  return b;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return Matrix::NullaryExpr(r, c, [&] { return u(rng); });
}

void BM_Mac(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto cols = static_cast<std::size_t>(state.range(1));
  Rng rng = make_rng(1);
  const auto array = CrossbarArray::initialize(rows, cols, bank(), DeviceTechParams::large_array(),
                                               1e4, {}, rng);
  const Vector x = random_matrix(static_cast<Eigen::Index>(rows), 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mac(array, x, {}, rng));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * cols));
}
BENCHMARK(BM_Mac)->Args({32, 4})->Args({128, 64});

void BM_ApplyUpdatePlan(benchmark::State& state) {
  Rng rng = make_rng(2);
  auto array = CrossbarArray::initialize(128, 64, bank(), DeviceTechParams::large_array(), 1e4, {}, rng);
  std::normal_distribution<double> z(0.0, 1.0);
  const Matrix grad = Matrix::NullaryExpr(64, 128, [&] { return z(rng); });
  const auto plan = threshold_sign_plan(grad, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_update_plan(array, plan, ExhaustionPolicy::AutoReinit, &bank(), &rng));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(plan.size()));
}
BENCHMARK(BM_ApplyUpdatePlan);

void BM_SffGradient(benchmark::State& state) {
  Rng rng = make_rng(3);
  const Matrix w = random_matrix(48, 36, rng).array() - 0.5;
  const Matrix xp = random_matrix(16, 36, rng), xn = random_matrix(16, 36, rng);
  const Matrix hp = layer_forward(w, xp, Activation::ReLU), hn = layer_forward(w, xn, Activation::ReLU);
  for (auto _ : state) benchmark::DoNotOptimize(sff_gradient(xp, hp, xn, hn, {2.0, 1.0, 1}));
}
BENCHMARK(BM_SffGradient);

void BM_CfGradient(benchmark::State& state) {
  Rng rng = make_rng(4);
  const LayerSpec spec{32, 48, Activation::ReLU, 1, ClusterLayout{4, 12}};
  const Matrix w = random_matrix(48, 32, rng).array() - 0.5;
  const Matrix x = random_matrix(16, 32, rng);
  const Matrix h = layer_forward(w, x, Activation::ReLU);
  std::vector<int> labels(16);
  for (int n = 0; n < 16; ++n) labels[static_cast<std::size_t>(n)] = n % 4;
  const CFParams p{CFVariant::Temperature, 0.2, 0.05, 1};
  for (auto _ : state) benchmark::DoNotOptimize(cf_gradient(x, h, labels, p, spec));
}
BENCHMARK(BM_CfGradient);

void BM_Pearson(benchmark::State& state) {
  const auto& t = *bank()[0];
  for (auto _ : state) benchmark::DoNotOptimize(pearson_coefficient(t, t.max_pulses()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.max_pulses()));
}
BENCHMARK(BM_Pearson);

void BM_TrainEpoch(benchmark::State& state) {
  const auto algorithm = static_cast<Algorithm>(state.range(0));
  const auto ds = make_cluster_task({4, 32, 1000, 1.0, 1.6, 0.5, 7});
  const auto splits = split(ds, {0.6, 0.3, 0.1, true, 7});
  auto config = TrainingConfig::defaults(algorithm, Architecture::Mlp, 32, 4);
  config.schedule.phases = {{config.schedule.phases.front().layers, 1}};
  const auto shared = std::make_shared<const TrajectoryBank>(bank());
  for (auto _ : state) {
    TrainingRun run(config, 32, 4, is_float(algorithm) ? nullptr : shared);
    train(run, splits);
    benchmark::DoNotOptimize(run.final_test_accuracy);
  }
  state.SetLabel(to_string(algorithm));
}
BENCHMARK(BM_TrainEpoch)
    ->Arg(static_cast<int>(Algorithm::BP))
    ->Arg(static_cast<int>(Algorithm::SFF))
    ->Arg(static_cast<int>(Algorithm::CF))
    ->Arg(static_cast<int>(Algorithm::FloatBP))
    ->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
