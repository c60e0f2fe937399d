#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "elicit/cross_validation.hpp"
#include "elicit/errors.hpp"
#include "elicit/lasso.hpp"
#include "elicit/rng.hpp"
#include "elicit/types.hpp"

using namespace elicit;

namespace {

Eigen::MatrixXd random_matrix(RandomStream& rng, Eigen::Index n, Eigen::Index p) {
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

// Design whose columns satisfy (1/n) X^T X = I, so the lasso solution
// decouples into per-coordinate soft thresholds of the OLS coordinates.
Dataset orthonormal_instance(RandomStream& rng, Eigen::Index n, Eigen::Index p,
                             Eigen::VectorXd* ols_out) {
  Eigen::MatrixXd raw = random_matrix(rng, n, p);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  Dataset data;
  data.features = std::sqrt(static_cast<double>(n)) * q;
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.normal(0.0, 2.0);
  data.responses = y;
  if (ols_out)
    *ols_out = data.features.transpose() * y / static_cast<double>(n);
  return data;
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == doctest::Approx(2.0));
  CHECK(soft_threshold(-3.0, 1.0) == doctest::Approx(-2.0));
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(1.25, 0.0) == doctest::Approx(1.25));
  CHECK(soft_threshold(0.0, 0.0) == 0.0);
}

TEST_CASE("config validation") {
  LassoConfig config;
  CHECK_NOTHROW(config.validate());
  config.alpha = 1.5;
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config.alpha = 1.0;
  config.lambda = -0.1;
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config.lambda = 0.0;
  config.tolerance = 0.0;
  CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("orthonormal design matches the closed form") {
  RandomStream rng(derive_seed(41, {1}));
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.uniform_below(49));
    const Eigen::Index n = p + 5 + static_cast<Eigen::Index>(rng.uniform_below(20));
    Eigen::VectorXd ols;
    Dataset data = orthonormal_instance(rng, n, p, &ols);

    LassoConfig config;
    config.lambda = 0.05 + 0.5 * rng.uniform01();
    LassoFit fit = fit_lasso(data, config);
    CHECK(fit.converged);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double expected = soft_threshold(ols(j), config.lambda);
      CHECK(std::abs(fit.weights(j) - expected) < 1e-6);
    }
  }
}

TEST_CASE("single column matches the scalar solution") {
  RandomStream rng(derive_seed(41, {2}));
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform_below(40));
    Dataset data;
    data.features = random_matrix(rng, n, 1);
    data.responses = 1.7 * data.features.col(0);
    for (Eigen::Index i = 0; i < n; ++i) data.responses(i) += rng.normal(0.0, 0.3);

    LassoConfig config;
    config.lambda = 0.3 * rng.uniform01();
    LassoFit fit = fit_lasso(data, config);

    const double colsq = data.features.col(0).squaredNorm() / n;
    const double z = data.features.col(0).dot(data.responses) / n;
    const double expected = soft_threshold(z, config.lambda) / colsq;
    CHECK(fit.weights(0) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("penalty at or above lambda_max forces the zero vector") {
  RandomStream rng(derive_seed(41, {3}));
  for (bool standardize : {false, true}) {
    Dataset data;
    data.features = random_matrix(rng, 30, 12);
    data.responses = random_matrix(rng, 30, 1).col(0);

    LassoConfig config;
    config.standardize = standardize;
    config.lambda = lambda_max(data, standardize) * 1.000001;
    LassoFit fit = fit_lasso(data, config);
    CHECK(fit.weights.nnz() == 0);
  }
}

TEST_CASE("stationarity conditions hold at convergence") {
  RandomStream rng(derive_seed(41, {4}));
  for (int trial = 0; trial < 20; ++trial) {
    Dataset data;
    data.features = random_matrix(rng, 40, 60);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(60);
    for (int k = 0; k < 4; ++k) truth(rng.uniform_below(60)) = rng.normal();
    data.responses = data.features * truth;
    for (Eigen::Index i = 0; i < 40; ++i) data.responses(i) += rng.normal(0.0, 0.5);

    LassoConfig config;
    config.lambda = (0.05 + 0.9 * rng.uniform01()) * lambda_max(data, false);
    LassoFit fit = fit_lasso(data, config);
    CHECK(fit.converged);
    CHECK(fit.kkt_violation <= 5 * config.tolerance);
    CHECK(max_kkt_violation(data, fit.weights.weights, config.lambda, 1.0) <=
          10 * config.tolerance);
  }
}

TEST_CASE("objective is monotone over sweeps and beats the zero vector") {
  RandomStream rng(derive_seed(41, {5}));
  Dataset data;
  data.features = random_matrix(rng, 25, 80);
  data.responses = data.features.col(3) - 0.5 * data.features.col(17);
  for (Eigen::Index i = 0; i < 25; ++i) data.responses(i) += rng.normal(0.0, 0.2);

  LassoConfig config;
  config.lambda = 0.1 * lambda_max(data, false);
  LassoFit fit = fit_lasso(data, config);
  REQUIRE(fit.objective_trace.size() >= 2);
  for (std::size_t t = 1; t < fit.objective_trace.size(); ++t)
    CHECK(fit.objective_trace[t] <= fit.objective_trace[t - 1] + 1e-12);
  const double at_zero = elastic_net_objective(
      data, Eigen::VectorXd::Zero(80), config.lambda, config.alpha);
  CHECK(elastic_net_objective(data, fit.weights.weights, config.lambda,
                              config.alpha) <= at_zero);
}

TEST_CASE("elastic net mixing shrinks more than the pure lasso at fixed lambda") {
  RandomStream rng(derive_seed(41, {6}));
  Dataset data;
  data.features = random_matrix(rng, 30, 10);
  data.responses = 2.0 * data.features.col(2);

  LassoConfig lasso;
  lasso.lambda = 0.2;
  LassoConfig mixed = lasso;
  mixed.alpha = 0.5;
  const double w_lasso = fit_lasso(data, lasso).weights(2);
  const double w_mixed = fit_lasso(data, mixed).weights(2);
  CHECK(w_lasso > 0.0);
  CHECK(w_mixed > 0.0);
  CHECK(w_mixed < w_lasso);
}

TEST_CASE("standardized fit maps weights back to the original scale") {
  RandomStream rng(derive_seed(41, {7}));
  Dataset data;
  data.features = random_matrix(rng, 50, 6);
  data.features.col(1) *= 100.0;  // wildly different column scales
  data.features.col(4) *= 0.01;
  Eigen::VectorXd truth(6);
  truth << 0.0, 0.02, 0.0, -1.3, 40.0, 0.0;
  data.responses = data.features * truth;
  for (Eigen::Index i = 0; i < 50; ++i) data.responses(i) += rng.normal(0.0, 0.1);
  data.responses.array() -= data.responses.mean();

  LassoConfig config;
  config.standardize = true;
  config.lambda = 0.05;
  LassoFit fit = fit_lasso(data, config);
  CHECK(fit.converged);
  // Prediction error on the training rows should be small despite the scales.
  const Eigen::VectorXd fitted = data.features * fit.weights.weights;
  const double mse = (fitted - data.responses).squaredNorm() / 50;
  CHECK(mse < 0.5);
}

TEST_CASE("zero-variance column is skipped and gets weight zero") {
  RandomStream rng(derive_seed(41, {8}));
  Dataset data;
  data.features = random_matrix(rng, 20, 5);
  data.features.col(3).setConstant(7.0);
  data.responses = data.features.col(0);

  LassoConfig config;
  config.standardize = true;
  config.lambda = 0.01;
  LassoFit fit = fit_lasso(data, config);
  REQUIRE(fit.skipped_columns.size() == 1);
  CHECK(fit.skipped_columns[0] == 3);
  CHECK(fit.weights(3) == 0.0);
}

TEST_CASE("cross-validation grid shape and determinism") {
  RandomStream rng(derive_seed(41, {9}));
  Dataset data;
  data.features = random_matrix(rng, 40, 25);
  data.responses = data.features.col(5) + data.features.col(6);
  for (Eigen::Index i = 0; i < 40; ++i) data.responses(i) += rng.normal(0.0, 0.4);

  CvResult a = cv_select_lambda(data, 1.0, 5, 30, 99);
  CvResult b = cv_select_lambda(data, 1.0, 5, 30, 99);
  CHECK(a.lambda_grid.size() == 30);
  CHECK(a.mean_cv_error.size() == 30);
  const double top = lambda_max(data, false);
  CHECK(a.lambda_grid(0) == doctest::Approx(top));
  CHECK(a.lambda_grid(29) == doctest::Approx(top * 1e-3));
  for (Eigen::Index g = 1; g < 30; ++g)
    CHECK(a.lambda_grid(g) < a.lambda_grid(g - 1));
  CHECK(a.lambda_min == b.lambda_min);
  CHECK(a.mean_cv_error == b.mean_cv_error);
  CHECK(a.lambda_min == a.lambda_grid(a.lambda_min_index));
  for (Eigen::Index g = 0; g < 30; ++g)
    CHECK(a.mean_cv_error(a.lambda_min_index) <= a.mean_cv_error(g));
}

TEST_CASE("cross-validation tie handling on a degenerate response") {
  RandomStream rng(derive_seed(41, {10}));
  Dataset data;
  data.features = random_matrix(rng, 12, 4);
  data.responses = Eigen::VectorXd::Zero(12);

  // lambda_max is zero, every grid entry is zero, every error ties; the
  // scan keeps the first (largest-lambda) entry.
  CvResult result = cv_select_lambda(data, 1.0, 4, 10, 7);
  CHECK(result.lambda_min == 0.0);
  CHECK(result.lambda_min_index == 0);
}

TEST_CASE("cross-validation rejects more folds than rows") {
  RandomStream rng(derive_seed(41, {11}));
  Dataset data;
  data.features = random_matrix(rng, 6, 3);
  data.responses = data.features.col(0);
  CHECK_THROWS_AS(cv_select_lambda(data, 1.0, 7, 10, 1), ValidationError);
  CHECK_THROWS_AS(cv_select_lambda(data, 1.0, 1, 10, 1), ValidationError);
}

TEST_CASE("cross-validated refit recovers a planted support on an easy instance") {
  RandomStream rng(derive_seed(41, {12}));
  const Eigen::Index n = 100, p = 150, s = 5;
  Dataset data;
  data.features = random_matrix(rng, n, p);
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(p);
  std::vector<std::ptrdiff_t> support = rng.sample_without_replacement(p, s);
  for (auto j : support) {
    const double g = rng.normal();
    truth(j) = g + (g >= 0 ? 1.0 : -1.0);  // keep the signal away from zero
  }
  data.responses = data.features * truth;
  for (Eigen::Index i = 0; i < n; ++i) data.responses(i) += rng.normal();

  CvResult cv = cv_select_lambda(data, 1.0, 10, 100, 5);
  LassoConfig config;
  config.lambda = cv.lambda_min;
  LassoFit fit = fit_lasso(data, config);

  int missed = 0;
  for (auto j : support)
    if (fit.weights(j) == 0.0) ++missed;
  CHECK(missed == 0);
  CHECK(fit.weights.nnz() <= s + 15);
}

TEST_CASE("dataset and weight vector validation") {
  Dataset data;
  data.features = Eigen::MatrixXd::Ones(3, 2);
  data.responses = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(data.validate(), ValidationError);
  data.responses = Eigen::VectorXd::Ones(3);
  CHECK_NOTHROW(data.validate());
  data.features(1, 1) = std::nan("");
  CHECK_THROWS_AS(data.validate(), ValidationError);

  WeightVector w = WeightVector::zeros(4);
  CHECK(w.nnz() == 0);
  w.weights(2) = 3.0;
  CHECK(w.nnz() == 1);
  CHECK(w.support() == std::vector<Eigen::Index>{2});
  CHECK(predict(w, Eigen::Vector4d(1, 1, 2, 1)) == doctest::Approx(6.0));
  CHECK_THROWS_AS(predict(w, Eigen::Vector2d(1, 1)), ValidationError);
}
