#include <benchmark/benchmark.h>

#include <vector>

#include "scorelab/nn.hpp"
#include "scorelab/reverse.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/score.hpp"

using namespace scorelab;

namespace {

Dataset gaussian2d(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) pts.push_back(rng.normal_vec(2));
  return Dataset(std::move(pts));
}

void bm_empirical_score(benchmark::State& state) {
  const Schedule ve10 = Schedule::ve_exponential();
  const Dataset data = gaussian2d(static_cast<int>(state.range(0)), 7);
  Eigen::VectorXd x(2);
  x << 0.3, -0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_score(data, ve10, x, 0.2));
  }
}

void bm_mixture_weights_small_t(benchmark::State& state) {
  const Schedule ve10 = Schedule::ve_exponential();
  const Dataset data = gaussian2d(20, 7);
  Eigen::VectorXd x(2);
  x << 0.3, -0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixture_weights(data, ve10, x, 1e-4));
  }
}

void bm_reverse_ode_trajectory(benchmark::State& state) {
  const Schedule ve10 = Schedule::ve_exponential();
  const Dataset data = gaussian2d(20, 7);
  const ScoreModel model = ScoreModel::exact(data, ve10);
  const TimeGrid grid = TimeGrid::geometric(1.0, 1e-4, static_cast<int>(state.range(0)));
  Rng rng(1);
  const Eigen::VectorXd xT = sample_terminal_prior(ve10, 2, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_reverse_ode(model, ve10, xT, grid));
  }
}

void bm_train_epochs(benchmark::State& state) {
  const Schedule vp = Schedule::vp_linear();
  const Dataset data = gaussian2d(20, 7);
  for (auto _ : state) {
    ScoreNet net = ScoreNet::init(2, static_cast<int>(state.range(0)), NetMode::Score, 1);
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.seed = 2;
    benchmark::DoNotOptimize(train(net, data, vp, cfg));
  }
}

void bm_net_forward_batch(benchmark::State& state) {
  const ScoreNet net = ScoreNet::init(2, static_cast<int>(state.range(0)), NetMode::Score, 1);
  Rng rng(3);
  Eigen::MatrixXd x(2, 1000);
  std::vector<double> ts(1000, 0.5);
  for (int j = 0; j < 1000; ++j) x.col(j) = rng.normal_vec(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward_batch(x, ts));
  }
}

}  // namespace

BENCHMARK(bm_empirical_score)->Arg(20)->Arg(200)->Arg(2000);
BENCHMARK(bm_mixture_weights_small_t);
BENCHMARK(bm_reverse_ode_trajectory)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_train_epochs)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_net_forward_batch)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
