#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "elicit/elicitation.hpp"
#include "elicit/types.hpp"

namespace elicit {

/// Resampling hooks for the optimal-query analysis: draw_training produces a
/// fresh training set from a seed, estimate fits a coefficient vector to it.
struct ScenarioSampler {
  std::function<Dataset(std::uint64_t)> draw_training;
  std::function<WeightVector(const Dataset&)> estimate;
};

/// Monte Carlo check of the sufficient conditions under which the
/// largest-product query is the loss-optimal single query.
///
/// Per resample r, with estimate theta_hat_r, write
///   delta_i = x_star(i) * (theta_hat_r(i) - theta_star(i)).
/// The candidate query c is the modal argmax of x_star(k) * theta_hat_r(k)
/// across resamples (ties toward the smaller index). For every alternative
/// i != c the conditions compare, in expectation,
///   d_sq_i      = delta_c^2 - delta_i^2
///   d_cross_ik  = delta_c * delta_k - delta_i * delta_k   (k != c, i)
/// and each is taken to hold when its sample mean is >= -2 standard errors.
/// When they all hold, querying c cannot lose to querying i, because the
/// per-resample loss gap decomposes exactly as
///   L_c - L_i = -d_sq_i - 2 * sum_{k != c,i} d_cross_ik,
/// where L_j = (sum_{k != j} delta_k)^2 is the target loss after feature j
/// is replaced by its true value.
struct TheoremConditionReport {
  int num_resamples = 0;
  Eigen::Index modal_c = 0;
  /// How many resamples agreed with the modal argmax.
  int modal_c_count = 0;
  /// Set when the estimate never varied across resamples; the standard
  /// errors are all zero and say nothing about sampling noise.
  bool zero_variance = false;

  /// Per alternative i (entries at i == modal_c are zero): mean and standard
  /// error of d_sq_i.
  Eigen::VectorXd delta_sq_mean;
  Eigen::VectorXd delta_sq_sem;
  /// Per feature j: mean and standard error of the replacement loss L_j.
  Eigen::VectorXd replacement_loss_mean;
  Eigen::VectorXd replacement_loss_sem;
  /// Per alternative i: mean and standard error of the paired gap L_c - L_i.
  Eigen::VectorXd loss_gap_mean;
  Eigen::VectorXd loss_gap_sem;

  /// min over i of mean(d_sq_i) + 2 sem(d_sq_i); the variance condition
  /// holds when this is nonnegative.
  double variance_margin = 0.0;
  bool variance_condition_holds = false;
  /// Same margin over all cross terms d_cross_ik.
  double cross_margin = 0.0;
  bool cross_condition_holds = false;

  bool conditions_hold() const {
    return variance_condition_holds && cross_condition_holds;
  }

  /// True when mean(L_c) <= mean(L_i) + k standard errors of the paired gap
  /// for every alternative i. k = 0 demands the ordering in raw sample means.
  bool ordering_holds_within(double k) const;
};

/// Runs num_resamples independent draws; resample r uses training seed
/// derive_seed(seed, {r}), so callers can reproduce the exact draws.
/// Requires num_resamples >= 2. With p = 1 there is no alternative query
/// and the report passes vacuously.
TheoremConditionReport estimate_theorem_conditions(const ScenarioSampler& sampler,
                                                   const TargetCase& target,
                                                   int num_resamples,
                                                   std::uint64_t seed);

} // namespace elicit
