#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "elicit/types.hpp"

namespace elicit {

struct CvResult {
  /// Penalty grid, log-spaced, largest first.
  Eigen::VectorXd lambda_grid;
  /// Held-out MSE averaged over folds, aligned with lambda_grid.
  Eigen::VectorXd mean_cv_error;
  double lambda_min = 0.0;
  Eigen::Index lambda_min_index = 0;
};

/// K-fold cross-validation over a log-spaced lambda grid.
///
/// Rows are shuffled once with the given seed and dealt round-robin into
/// folds, so the split depends only on (n, folds, seed). The grid runs from
/// lambda_max(data) down to 1e-3 times that value. Ties in mean error go to
/// the larger lambda. Requires n >= folds >= 2 and grid_size >= 2.
CvResult cv_select_lambda(const Dataset& data, double alpha, int folds,
                          int grid_size, std::uint64_t seed,
                          bool standardize = false);

} // namespace elicit
