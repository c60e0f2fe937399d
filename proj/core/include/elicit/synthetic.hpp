#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "elicit/elicitation.hpp"
#include "elicit/types.hpp"

namespace elicit {

enum class Scenario {
  /// Every pool row and the target share one coefficient vector.
  SharedTheta,
  /// Each pool row, and the target, gets its own coefficient vector; all of
  /// them sit within max_pairwise_theta_distance of one another on a common
  /// sparse support.
  PerPatientTheta,
};

enum class FeatureDist {
  StandardNormal,
  Uniform01,
};

struct SyntheticConfig {
  Eigen::Index pool_size = 1000;
  Eigen::Index p = 150;
  /// Support size of the coefficient vectors.
  Eigen::Index s = 5;
  /// Default training-set size used by the single-argument training_slice.
  Eigen::Index n_train = 10;
  double obs_noise_variance = 1.0;
  Scenario scenario = Scenario::SharedTheta;
  /// Diameter bound for the PerPatientTheta coefficient cloud.
  double max_pairwise_theta_distance = 0.5;
  std::uint64_t seed = 0;
  FeatureDist feature_dist = FeatureDist::StandardNormal;
  /// When set, the target is the last pool row under the row permutation
  /// (so no training prefix shorter than the pool ever contains it) instead
  /// of a freshly drawn feature vector.
  bool target_from_pool = false;

  void validate() const;
};

/// One fully drawn synthetic world. Training sets of different sizes are
/// prefixes of the same permuted observation list, so growing n only adds
/// rows and never redraws the ones already used.
struct SyntheticInstance {
  SyntheticConfig config;
  /// pool_size x p feature matrix.
  Eigen::MatrixXd pool;
  /// Response for every pool row.
  Eigen::VectorXd observations;
  /// One entry under SharedTheta; pool_size + 1 under PerPatientTheta,
  /// where entry i generates pool row i and the final entry belongs to a
  /// fresh target.
  std::vector<Eigen::VectorXd> thetas;
  /// Center of the coefficient cloud, and its support.
  Eigen::VectorXd base_theta;
  std::vector<Eigen::Index> support;
  /// Seeded permutation of the pool rows; training sets take its prefix.
  std::vector<Eigen::Index> row_order;
  TargetCase target;
};

/// pool_size x p matrix of i.i.d. draws from config.feature_dist.
Eigen::MatrixXd generate_pool(const SyntheticConfig& config);

/// Coefficient vectors per the scenario: support chosen uniformly among the
/// s-subsets, nonzeros standard normal; PerPatientTheta adds to each copy a
/// perturbation drawn uniformly from the support-restricted ball of radius
/// max_pairwise_theta_distance / 2.
std::vector<Eigen::VectorXd> generate_thetas(const SyntheticConfig& config);

/// Responses x_i . theta_(i) + noise for every pool row, with observation
/// noise from its own seeded stream.
Eigen::VectorXd generate_observations(const Eigen::MatrixXd& pool,
                                      const std::vector<Eigen::VectorXd>& thetas,
                                      const SyntheticConfig& config);

SyntheticInstance make_instance(const SyntheticConfig& config);

/// Training set of the first n permuted rows. Requires 1 <= n <= pool_size,
/// and n < pool_size when the target is a pool row.
Dataset training_slice(const SyntheticInstance& instance, Eigen::Index n);

inline Dataset training_slice(const SyntheticInstance& instance) {
  return training_slice(instance, instance.config.n_train);
}

/// A fresh n-row training set around a fixed instance: new feature rows and
/// observation noise, and (per-patient) new row coefficients around the same
/// base and support. The instance's target stays untouched, which makes this
/// the resampling distribution the optimal-query analysis integrates over.
Dataset draw_training_resample(const SyntheticInstance& instance,
                               Eigen::Index n, std::uint64_t seed);

} // namespace elicit
