#pragma once

#include <vector>

#include <Eigen/Core>

#include "elicit/types.hpp"

namespace elicit {

/// sign(z) * max(|z| - gamma, 0)
double soft_threshold(double z, double gamma);

struct LassoConfig {
  /// Mixing between the l1 and squared-l2 penalties: 1.0 is the pure lasso,
  /// 0.0 is ridge.
  double alpha = 1.0;
  double lambda = 0.0;
  int max_sweeps = 100000;
  /// Convergence threshold on the largest coordinate update in a sweep.
  double tolerance = 1e-7;
  /// When set, columns are centered and scaled to unit variance internally
  /// and the returned weights are mapped back to the original scale.
  /// No intercept is fitted; center responses beforehand when they are not
  /// already mean-zero.
  bool standardize = false;

  void validate() const;
};

struct LassoFit {
  WeightVector weights;
  bool converged = false;
  int sweeps = 0;
  /// Penalized objective after each sweep.
  std::vector<double> objective_trace;
  /// Largest stationarity-condition violation at the returned weights,
  /// measured on the scale the solver optimized (standardized when
  /// config.standardize is set).
  double kkt_violation = 0.0;
  /// Columns with zero variance that were excluded from standardization;
  /// their weights are fixed at zero.
  std::vector<Eigen::Index> skipped_columns;
};

/// (1/2n) * sum_i (y_i - x_i . w)^2
///   + lambda * (alpha * |w|_1 + (1 - alpha) / 2 * |w|_2^2)
double elastic_net_objective(const Dataset& data, const Eigen::VectorXd& weights,
                             double lambda, double alpha);

/// Largest violation of the subgradient stationarity conditions of the
/// elastic-net objective at `weights`, evaluated on the data as given.
double max_kkt_violation(const Dataset& data, const Eigen::VectorXd& weights,
                         double lambda, double alpha);

/// Smallest penalty that forces the all-zero solution: max_j |(1/n) X_j . y|.
/// When standardize is set this is computed on the standardized columns, the
/// scale the solver actually penalizes.
double lambda_max(const Dataset& data, bool standardize);

/// Cyclic coordinate descent on the elastic-net objective.
LassoFit fit_lasso(const Dataset& data, const LassoConfig& config);

} // namespace elicit
