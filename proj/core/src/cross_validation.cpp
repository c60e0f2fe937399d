#include "elicit/cross_validation.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "cd_solver.hpp"
#include "elicit/errors.hpp"
#include "elicit/lasso.hpp"
#include "elicit/rng.hpp"

namespace elicit {

CvResult cv_select_lambda(const Dataset& data, double alpha, int folds,
                          int grid_size, std::uint64_t seed,
                          bool standardize) {
  data.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("alpha must lie in [0, 1]");
  if (folds < 2) throw ValidationError("folds must be at least 2");
  if (data.n() < folds)
    throw ValidationError("need at least as many rows as folds: n=" +
                          std::to_string(data.n()) + ", folds=" +
                          std::to_string(folds));
  if (grid_size < 2) throw ValidationError("grid_size must be at least 2");

  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();

  CvResult result;
  result.lambda_grid.resize(grid_size);
  const double lmax = lambda_max(data, standardize);
  if (lmax > 0.0) {
    const double ratio = 1e-3;
    for (int i = 0; i < grid_size; ++i)
      result.lambda_grid(i) =
          lmax * std::pow(ratio, static_cast<double>(i) / (grid_size - 1));
  } else {
    result.lambda_grid.setZero();
  }

  // Shuffle once, deal round-robin: row perm[i] lands in fold i % folds.
  const std::vector<Eigen::Index> perm = RandomStream(seed).permutation(n);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    fold_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % folds);

  result.mean_cv_error = Eigen::VectorXd::Zero(grid_size);
  constexpr double tolerance = 1e-7;
  constexpr int max_sweeps = 100000;

  for (int f = 0; f < folds; ++f) {
    Eigen::Index n_test = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (fold_of[static_cast<std::size_t>(i)] == f) ++n_test;
    const Eigen::Index n_train = n - n_test;

    Eigen::MatrixXd x_train(n_train, p);
    Eigen::VectorXd y_train(n_train);
    Eigen::MatrixXd x_test(n_test, p);
    Eigen::VectorXd y_test(n_test);
    Eigen::Index it = 0;
    Eigen::Index ie = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (fold_of[static_cast<std::size_t>(i)] == f) {
        x_test.row(ie) = data.features.row(i);
        y_test(ie) = data.responses(i);
        ++ie;
      } else {
        x_train.row(it) = data.features.row(i);
        y_train(it) = data.responses(i);
        ++it;
      }
    }

    if (standardize) {
      const detail::ColumnTransform t = detail::standardize_columns(x_train);
      for (Eigen::Index j = 0; j < p; ++j) {
        if (t.scale(j) > 0.0)
          x_test.col(j) = (x_test.col(j).array() - t.mean(j)) / t.scale(j);
        else
          x_test.col(j).setZero();
      }
    }

    detail::CdSolver solver(std::move(x_train), std::move(y_train));
    for (int i = 0; i < grid_size; ++i) {
      solver.solve(result.lambda_grid(i), alpha, tolerance, max_sweeps);
      const Eigen::VectorXd pred = x_test * solver.weights();
      result.mean_cv_error(i) +=
          (y_test - pred).squaredNorm() / static_cast<double>(n_test);
    }
  }
  result.mean_cv_error /= static_cast<double>(folds);

  // Strict scan from the largest penalty, so ties keep the larger lambda.
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < result.mean_cv_error.size(); ++i)
    if (result.mean_cv_error(i) < result.mean_cv_error(best)) best = i;
  result.lambda_min_index = best;
  result.lambda_min = result.lambda_grid(best);
  return result;
}

} // namespace elicit
