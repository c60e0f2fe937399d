#include "elicit/theorem.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "elicit/errors.hpp"
#include "elicit/rng.hpp"

namespace elicit {

namespace {

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
};

MeanSem mean_sem(double sum, double sumsq, int n) {
  MeanSem out;
  out.mean = sum / n;
  const double var = std::max(0.0, (sumsq - sum * out.mean) / (n - 1));
  out.sem = std::sqrt(var / n);
  return out;
}

} // namespace

bool TheoremConditionReport::ordering_holds_within(double k) const {
  for (Eigen::Index i = 0; i < loss_gap_mean.size(); ++i) {
    if (i == modal_c) continue;
    if (loss_gap_mean(i) > k * loss_gap_sem(i)) return false;
  }
  return true;
}

TheoremConditionReport estimate_theorem_conditions(const ScenarioSampler& sampler,
                                                   const TargetCase& target,
                                                   int num_resamples,
                                                   std::uint64_t seed) {
  target.validate();
  if (!sampler.draw_training || !sampler.estimate)
    throw ValidationError("sampler hooks must both be set");
  if (num_resamples < 2)
    throw ValidationError("need at least 2 resamples for standard errors");

  const Eigen::Index p = target.x_star.size();
  const int R = num_resamples;

  TheoremConditionReport report;
  report.num_resamples = R;
  report.delta_sq_mean = Eigen::VectorXd::Zero(p);
  report.delta_sq_sem = Eigen::VectorXd::Zero(p);
  report.replacement_loss_mean = Eigen::VectorXd::Zero(p);
  report.replacement_loss_sem = Eigen::VectorXd::Zero(p);
  report.loss_gap_mean = Eigen::VectorXd::Zero(p);
  report.loss_gap_sem = Eigen::VectorXd::Zero(p);

  Eigen::MatrixXd deltas(R, p);
  std::vector<int> argmax_counts(static_cast<std::size_t>(p), 0);
  for (int r = 0; r < R; ++r) {
    const Dataset data =
        sampler.draw_training(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    const WeightVector estimate = sampler.estimate(data);
    if (estimate.size() != p)
      throw ValidationError("estimate length does not match the target");
    const Eigen::ArrayXd products =
        target.x_star.array() * estimate.weights.array();
    Eigen::Index c = 0;
    for (Eigen::Index k = 1; k < p; ++k)
      if (products(k) > products(c)) c = k;
    ++argmax_counts[static_cast<std::size_t>(c)];
    deltas.row(r) = target.x_star.array() *
                    (estimate.weights.array() - target.theta_star.array());
  }

  report.modal_c = 0;
  for (Eigen::Index k = 1; k < p; ++k)
    if (argmax_counts[static_cast<std::size_t>(k)] >
        argmax_counts[static_cast<std::size_t>(report.modal_c)])
      report.modal_c = k;
  report.modal_c_count =
      argmax_counts[static_cast<std::size_t>(report.modal_c)];

  report.zero_variance = true;
  for (int r = 1; r < R && report.zero_variance; ++r)
    if (deltas.row(r) != deltas.row(0)) report.zero_variance = false;

  const Eigen::Index c = report.modal_c;

  // Replacement losses L_j = (sum_{k != j} delta_k)^2 for every feature.
  {
    const Eigen::VectorXd row_sums = deltas.rowwise().sum();
    for (Eigen::Index j = 0; j < p; ++j) {
      double sum = 0.0;
      double sumsq = 0.0;
      for (int r = 0; r < R; ++r) {
        const double after = row_sums(r) - deltas(r, j);
        const double loss = after * after;
        sum += loss;
        sumsq += loss * loss;
      }
      const MeanSem ms = mean_sem(sum, sumsq, R);
      report.replacement_loss_mean(j) = ms.mean;
      report.replacement_loss_sem(j) = ms.sem;
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      if (i == c) continue;
      double sum = 0.0;
      double sumsq = 0.0;
      for (int r = 0; r < R; ++r) {
        const double after_c = row_sums(r) - deltas(r, c);
        const double after_i = row_sums(r) - deltas(r, i);
        const double gap = after_c * after_c - after_i * after_i;
        sum += gap;
        sumsq += gap * gap;
      }
      const MeanSem ms = mean_sem(sum, sumsq, R);
      report.loss_gap_mean(i) = ms.mean;
      report.loss_gap_sem(i) = ms.sem;
    }
  }

  if (p == 1) {
    report.variance_condition_holds = true;
    report.cross_condition_holds = true;
    return report;
  }

  double variance_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (i == c) continue;
    double sum = 0.0;
    double sumsq = 0.0;
    for (int r = 0; r < R; ++r) {
      const double v = deltas(r, c) * deltas(r, c) - deltas(r, i) * deltas(r, i);
      sum += v;
      sumsq += v * v;
    }
    const MeanSem ms = mean_sem(sum, sumsq, R);
    report.delta_sq_mean(i) = ms.mean;
    report.delta_sq_sem(i) = ms.sem;
    variance_margin = std::min(variance_margin, ms.mean + 2.0 * ms.sem);
  }
  report.variance_margin = variance_margin;
  report.variance_condition_holds = variance_margin >= 0.0;

  if (p == 2) {
    report.cross_margin = 0.0;
    report.cross_condition_holds = true;
    return report;
  }

  // Cross terms d_cross_ik accumulated pairwise in resample order.
  Eigen::MatrixXd cross_sum = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd cross_sumsq = Eigen::MatrixXd::Zero(p, p);
  for (int r = 0; r < R; ++r) {
    for (Eigen::Index i = 0; i < p; ++i) {
      if (i == c) continue;
      const double a = deltas(r, c) - deltas(r, i);
      for (Eigen::Index k = 0; k < p; ++k) {
        if (k == c || k == i) continue;
        const double v = a * deltas(r, k);
        cross_sum(i, k) += v;
        cross_sumsq(i, k) += v * v;
      }
    }
  }
  double cross_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (i == c) continue;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k == c || k == i) continue;
      const MeanSem ms = mean_sem(cross_sum(i, k), cross_sumsq(i, k), R);
      cross_margin = std::min(cross_margin, ms.mean + 2.0 * ms.sem);
    }
  }
  report.cross_margin = cross_margin;
  report.cross_condition_holds = cross_margin >= 0.0;
  return report;
}

} // namespace elicit
