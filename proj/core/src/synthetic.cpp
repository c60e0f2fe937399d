#include "elicit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "elicit/errors.hpp"
#include "elicit/rng.hpp"

namespace elicit {

void SyntheticConfig::validate() const {
  if (pool_size < 1) throw ValidationError("pool_size must be positive");
  if (p < 1) throw ValidationError("p must be positive");
  if (s < 1 || s > p) throw ValidationError("s must lie in [1, p]");
  if (n_train < 1 || n_train > pool_size)
    throw ValidationError("n_train must lie in [1, pool_size]");
  if (!(obs_noise_variance >= 0.0) || !std::isfinite(obs_noise_variance))
    throw ValidationError("obs_noise_variance must be finite and nonnegative");
  if (scenario == Scenario::PerPatientTheta &&
      !(max_pairwise_theta_distance > 0.0))
    throw ValidationError("max_pairwise_theta_distance must be positive");
  if (target_from_pool) {
    if (pool_size < 2)
      throw ValidationError("pool target needs pool_size >= 2");
    if (n_train >= pool_size)
      throw ValidationError("pool target needs n_train < pool_size");
  }
}

namespace {

double draw_feature(RandomStream& stream, FeatureDist dist) {
  return dist == FeatureDist::StandardNormal ? stream.normal()
                                             : stream.uniform01();
}

/// Uniform draw from the ball of the given radius in the support coordinates.
Eigen::VectorXd ball_perturbation(RandomStream& stream,
                                  const std::vector<Eigen::Index>& support,
                                  Eigen::Index p, double radius) {
  Eigen::VectorXd direction = Eigen::VectorXd::Zero(p);
  for (const Eigen::Index idx : support) direction(idx) = stream.normal();
  const double u = stream.uniform01();
  const double norm = direction.norm();
  if (norm == 0.0) return Eigen::VectorXd::Zero(p);
  const double r =
      radius * std::pow(u, 1.0 / static_cast<double>(support.size()));
  return direction * (r / norm);
}

} // namespace

Eigen::MatrixXd generate_pool(const SyntheticConfig& config) {
  config.validate();
  RandomStream stream(derive_seed(config.seed, {hash_string("pool")}));
  Eigen::MatrixXd pool(config.pool_size, config.p);
  for (Eigen::Index i = 0; i < config.pool_size; ++i)
    for (Eigen::Index j = 0; j < config.p; ++j)
      pool(i, j) = draw_feature(stream, config.feature_dist);
  return pool;
}

namespace {

struct ThetaDraw {
  Eigen::VectorXd base;
  std::vector<Eigen::Index> support;
  std::vector<Eigen::VectorXd> thetas;
};

ThetaDraw draw_thetas(const SyntheticConfig& config) {
  RandomStream stream(derive_seed(config.seed, {hash_string("theta")}));
  ThetaDraw draw;
  draw.support = stream.sample_without_replacement(config.p, config.s);
  std::sort(draw.support.begin(), draw.support.end());

  draw.base = Eigen::VectorXd::Zero(config.p);
  for (const Eigen::Index idx : draw.support) draw.base(idx) = stream.normal();

  if (config.scenario == Scenario::SharedTheta) {
    draw.thetas = {draw.base};
    return draw;
  }

  const double radius = config.max_pairwise_theta_distance / 2.0;
  draw.thetas.reserve(static_cast<std::size_t>(config.pool_size) + 1);
  for (Eigen::Index i = 0; i <= config.pool_size; ++i)
    draw.thetas.push_back(
        draw.base + ball_perturbation(stream, draw.support, config.p, radius));
  return draw;
}

} // namespace

std::vector<Eigen::VectorXd> generate_thetas(const SyntheticConfig& config) {
  config.validate();
  return draw_thetas(config).thetas;
}

Eigen::VectorXd generate_observations(const Eigen::MatrixXd& pool,
                                      const std::vector<Eigen::VectorXd>& thetas,
                                      const SyntheticConfig& config) {
  config.validate();
  if (pool.rows() != config.pool_size || pool.cols() != config.p)
    throw ValidationError("pool shape does not match the config");
  const std::size_t expected =
      config.scenario == Scenario::SharedTheta
          ? 1
          : static_cast<std::size_t>(config.pool_size) + 1;
  if (thetas.size() != expected)
    throw ValidationError("theta count does not match the scenario");

  RandomStream noise(derive_seed(config.seed, {hash_string("obs-noise")}));
  const double sd = std::sqrt(config.obs_noise_variance);
  Eigen::VectorXd y(config.pool_size);
  for (Eigen::Index i = 0; i < config.pool_size; ++i) {
    const Eigen::VectorXd& theta =
        config.scenario == Scenario::SharedTheta
            ? thetas[0]
            : thetas[static_cast<std::size_t>(i)];
    y(i) = pool.row(i).dot(theta) + sd * noise.normal();
  }
  return y;
}

SyntheticInstance make_instance(const SyntheticConfig& config) {
  config.validate();
  SyntheticInstance instance;
  instance.config = config;
  instance.pool = generate_pool(config);
  ThetaDraw draw = draw_thetas(config);
  instance.thetas = std::move(draw.thetas);
  instance.base_theta = std::move(draw.base);
  instance.support = std::move(draw.support);
  instance.observations =
      generate_observations(instance.pool, instance.thetas, config);
  instance.row_order =
      RandomStream(derive_seed(config.seed, {hash_string("rows")}))
          .permutation(config.pool_size);

  if (config.target_from_pool) {
    const Eigen::Index row =
        instance.row_order[static_cast<std::size_t>(config.pool_size) - 1];
    instance.target.x_star = instance.pool.row(row);
    instance.target.theta_star =
        config.scenario == Scenario::SharedTheta
            ? instance.thetas[0]
            : instance.thetas[static_cast<std::size_t>(row)];
  } else {
    RandomStream stream(derive_seed(config.seed, {hash_string("target")}));
    instance.target.x_star.resize(config.p);
    for (Eigen::Index j = 0; j < config.p; ++j)
      instance.target.x_star(j) = draw_feature(stream, config.feature_dist);
    instance.target.theta_star =
        config.scenario == Scenario::SharedTheta
            ? instance.thetas[0]
            : instance.thetas[static_cast<std::size_t>(config.pool_size)];
  }
  instance.target.validate();
  return instance;
}

Dataset draw_training_resample(const SyntheticInstance& instance,
                               Eigen::Index n, std::uint64_t seed) {
  const SyntheticConfig& config = instance.config;
  if (n < 1) throw ValidationError("resample size must be positive");

  RandomStream features(derive_seed(seed, {hash_string("pool")}));
  RandomStream thetas(derive_seed(seed, {hash_string("theta")}));
  RandomStream noise(derive_seed(seed, {hash_string("obs-noise")}));
  const double sd = std::sqrt(config.obs_noise_variance);
  const double radius = config.max_pairwise_theta_distance / 2.0;

  Dataset data;
  data.features.resize(n, config.p);
  data.responses.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < config.p; ++j)
      data.features(i, j) = draw_feature(features, config.feature_dist);
    Eigen::VectorXd theta = instance.base_theta;
    if (config.scenario == Scenario::PerPatientTheta)
      theta += ball_perturbation(thetas, instance.support, config.p, radius);
    data.responses(i) = data.features.row(i).dot(theta) + sd * noise.normal();
  }
  return data;
}

Dataset training_slice(const SyntheticInstance& instance, Eigen::Index n) {
  const Eigen::Index pool_size = instance.config.pool_size;
  if (n < 1 || n > pool_size)
    throw ValidationError("training size must lie in [1, pool_size]");
  if (instance.config.target_from_pool && n >= pool_size)
    throw ValidationError("training slice would include the pool target");

  Dataset data;
  data.features.resize(n, instance.config.p);
  data.responses.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index row = instance.row_order[static_cast<std::size_t>(i)];
    data.features.row(i) = instance.pool.row(row);
    data.responses(i) = instance.observations(row);
  }
  return data;
}

} // namespace elicit
