#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace elicit::detail {

/// Coordinate-descent state over an already-transformed design matrix.
/// Columns with zero norm are inert: their weight stays zero. The weights
/// persist between solves, which is what warm-starting a penalty grid needs.
class CdSolver {
 public:
  CdSolver(Eigen::MatrixXd features, Eigen::VectorXd responses)
      : x_(std::move(features)),
        y_(std::move(responses)),
        residual_(y_),
        weights_(Eigen::VectorXd::Zero(x_.cols())),
        colsq_(x_.cols()) {
    const double n = static_cast<double>(x_.rows());
    for (Eigen::Index j = 0; j < x_.cols(); ++j)
      colsq_(j) = x_.col(j).squaredNorm() / n;
  }

  /// One cyclic pass; returns the largest absolute coordinate change.
  double sweep(double lambda, double alpha) {
    const double n = static_cast<double>(x_.rows());
    const double l1 = lambda * alpha;
    const double l2 = lambda * (1.0 - alpha);
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      const double denom = colsq_(j) + l2;
      if (denom <= 0.0) continue;
      const double z = x_.col(j).dot(residual_) / n + colsq_(j) * weights_(j);
      const double updated = soft_threshold_(z, l1) / denom;
      const double change = updated - weights_(j);
      if (change != 0.0) {
        residual_ -= change * x_.col(j);
        weights_(j) = updated;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    return max_change;
  }

  /// Largest stationarity violation at the current iterate.
  double max_violation(double lambda, double alpha) const {
    const double n = static_cast<double>(x_.rows());
    const double l1 = lambda * alpha;
    const double l2 = lambda * (1.0 - alpha);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      if (colsq_(j) == 0.0) continue;
      const double g = x_.col(j).dot(residual_) / n;
      double v = 0.0;
      if (weights_(j) != 0.0)
        v = std::abs(g - l2 * weights_(j) -
                     l1 * (weights_(j) > 0.0 ? 1.0 : -1.0));
      else
        v = std::max(0.0, std::abs(g) - l1);
      worst = std::max(worst, v);
    }
    return worst;
  }

  double objective(double lambda, double alpha) const {
    const double n = static_cast<double>(x_.rows());
    return residual_.squaredNorm() / (2.0 * n) +
           lambda * (alpha * weights_.lpNorm<1>() +
                     0.5 * (1.0 - alpha) * weights_.squaredNorm());
  }

  /// Sweeps until the largest coordinate change drops below tolerance and
  /// the stationarity violation is within kkt_slack * tolerance, or sweeps
  /// run out. Returns {converged, sweeps used, final violation}.
  struct SolveStatus {
    bool converged = false;
    int sweeps = 0;
    double kkt_violation = 0.0;
  };
  SolveStatus solve(double lambda, double alpha, double tolerance,
                    int max_sweeps, double kkt_slack = 5.0,
                    std::vector<double>* objective_trace = nullptr) {
    SolveStatus status;
    const double kkt_budget = kkt_slack * tolerance;
    while (status.sweeps < max_sweeps) {
      const double change = sweep(lambda, alpha);
      ++status.sweeps;
      if (objective_trace)
        objective_trace->push_back(objective(lambda, alpha));
      if (change < tolerance) {
        status.kkt_violation = max_violation(lambda, alpha);
        if (status.kkt_violation <= kkt_budget) {
          status.converged = true;
          return status;
        }
      }
    }
    status.kkt_violation = max_violation(lambda, alpha);
    return status;
  }

  const Eigen::VectorXd& weights() const { return weights_; }
  void zero_column(Eigen::Index j) {
    x_.col(j).setZero();
    colsq_(j) = 0.0;
  }

 private:
  static double soft_threshold_(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
  }

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd residual_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd colsq_;
};

/// Per-column affine transform used when standardizing a design matrix.
struct ColumnTransform {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<Eigen::Index> skipped;
};

/// Centers and scales columns to unit population variance in place.
/// Zero-variance columns are zeroed out and recorded.
inline ColumnTransform standardize_columns(Eigen::MatrixXd& x) {
  const double n = static_cast<double>(x.rows());
  ColumnTransform t;
  t.mean.resize(x.cols());
  t.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mu = x.col(j).mean();
    x.col(j).array() -= mu;
    const double sd = std::sqrt(x.col(j).squaredNorm() / n);
    t.mean(j) = mu;
    t.scale(j) = sd;
    if (sd > 0.0) {
      x.col(j) /= sd;
    } else {
      x.col(j).setZero();
      t.skipped.push_back(j);
    }
  }
  return t;
}

} // namespace elicit::detail
