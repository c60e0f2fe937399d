#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "elicit/cross_validation.hpp"
#include "elicit/elicitation.hpp"
#include "elicit/experiment.hpp"
#include "elicit/lasso.hpp"
#include "elicit/rng.hpp"
#include "elicit/synthetic.hpp"

namespace {

using namespace elicit;

Dataset make_dataset(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  RandomStream rng(seed);
  Dataset data;
  data.features.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) data.features(i, j) = rng.normal();
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(5, p); ++j)
    truth(j) = rng.normal() + 1.0;
  data.responses = data.features * truth;
  for (Eigen::Index i = 0; i < n; ++i) data.responses(i) += rng.normal();
  return data;
}

void bm_fit_lasso(benchmark::State& state) {
  const Dataset data =
      make_dataset(state.range(0), state.range(1), 3);
  LassoConfig config;
  config.standardize = true;
  config.lambda = 0.1 * lambda_max(data, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_lasso(data, config));
  }
}
BENCHMARK(bm_fit_lasso)->Args({10, 150})->Args({30, 150})->Args({100, 500});

void bm_cv_select_lambda(benchmark::State& state) {
  const Dataset data = make_dataset(state.range(0), 150, 4);
  const int folds = std::min<int>(10, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cv_select_lambda(data, 1.0, folds, 100, 7, true));
  }
}
BENCHMARK(bm_cv_select_lambda)->Arg(10)->Arg(30);

void bm_run_elicitation(benchmark::State& state) {
  SyntheticConfig config;
  config.seed = 11;
  const SyntheticInstance instance = make_instance(config);
  const Dataset data = training_slice(instance, config.n_train);
  LassoConfig fit_config;
  fit_config.standardize = true;
  fit_config.lambda = 0.1 * lambda_max(data, true);
  const Eigen::VectorXd theta_init = fit_lasso(data, fit_config).weights.weights;
  ExpertModel expert;
  expert.truth = instance.target.theta_star;
  const StrategySpec spec{StrategyKind::LargestProductFeature};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_elicitation(theta_init, instance.target, expert, spec, 10));
  }
}
BENCHMARK(bm_run_elicitation);

void bm_aggregate(benchmark::State& state) {
  RandomStream rng(5);
  std::vector<std::vector<double>> trajectories(
      100, std::vector<double>(11, 0.0));
  for (auto& t : trajectories)
    for (double& v : t) v = rng.uniform01();
  const CurveKey key{"shared", "largest-product", 10, 0.0, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(aggregate(key, trajectories));
  }
}
BENCHMARK(bm_aggregate);

}  // namespace

BENCHMARK_MAIN();
