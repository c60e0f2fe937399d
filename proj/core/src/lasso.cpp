#include "elicit/lasso.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "cd_solver.hpp"
#include "elicit/errors.hpp"

namespace elicit {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

void LassoConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("alpha must lie in [0, 1], got " +
                          std::to_string(alpha));
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda must be finite and nonnegative");
  if (max_sweeps < 1) throw ValidationError("max_sweeps must be positive");
  if (!(tolerance > 0.0)) throw ValidationError("tolerance must be positive");
}

double elastic_net_objective(const Dataset& data, const Eigen::VectorXd& weights,
                             double lambda, double alpha) {
  if (weights.size() != data.p())
    throw ValidationError("weights length does not match feature count");
  const Eigen::VectorXd residual = data.responses - data.features * weights;
  const double n = static_cast<double>(data.n());
  return residual.squaredNorm() / (2.0 * n) +
         lambda * (alpha * weights.lpNorm<1>() +
                   0.5 * (1.0 - alpha) * weights.squaredNorm());
}

double max_kkt_violation(const Dataset& data, const Eigen::VectorXd& weights,
                         double lambda, double alpha) {
  if (weights.size() != data.p())
    throw ValidationError("weights length does not match feature count");
  const double n = static_cast<double>(data.n());
  const double l1 = lambda * alpha;
  const double l2 = lambda * (1.0 - alpha);
  const Eigen::VectorXd residual = data.responses - data.features * weights;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    const double g = data.features.col(j).dot(residual) / n;
    double v = 0.0;
    if (weights(j) != 0.0)
      v = std::abs(g - l2 * weights(j) - l1 * (weights(j) > 0.0 ? 1.0 : -1.0));
    else
      v = std::max(0.0, std::abs(g) - l1);
    worst = std::max(worst, v);
  }
  return worst;
}

double lambda_max(const Dataset& data, bool standardize) {
  data.validate();
  const double n = static_cast<double>(data.n());
  double best = 0.0;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    double dot = 0.0;
    if (standardize) {
      const double mu = data.features.col(j).mean();
      const Eigen::ArrayXd centered = data.features.col(j).array() - mu;
      const double sd = std::sqrt(centered.square().sum() / n);
      if (sd == 0.0) continue;
      dot = (centered * data.responses.array()).sum() / (sd * n);
    } else {
      dot = data.features.col(j).dot(data.responses) / n;
    }
    best = std::max(best, std::abs(dot));
  }
  return best;
}

LassoFit fit_lasso(const Dataset& data, const LassoConfig& config) {
  config.validate();
  data.validate();

  Eigen::MatrixXd x = data.features;
  detail::ColumnTransform transform;
  if (config.standardize) transform = detail::standardize_columns(x);

  detail::CdSolver solver(std::move(x), data.responses);

  LassoFit fit;
  fit.objective_trace.reserve(64);
  const auto status =
      solver.solve(config.lambda, config.alpha, config.tolerance,
                   config.max_sweeps, 5.0, &fit.objective_trace);
  fit.converged = status.converged;
  fit.sweeps = status.sweeps;
  fit.kkt_violation = status.kkt_violation;

  Eigen::VectorXd weights = solver.weights();
  if (config.standardize) {
    for (Eigen::Index j = 0; j < weights.size(); ++j)
      if (transform.scale(j) > 0.0) weights(j) /= transform.scale(j);
    fit.skipped_columns = transform.skipped;
  }
  if (!weights.allFinite())
    throw NumericalError("coordinate descent produced non-finite weights");
  fit.weights = WeightVector{std::move(weights)};
  return fit;
}

} // namespace elicit
