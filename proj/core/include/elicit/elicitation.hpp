#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elicit/types.hpp"

namespace elicit {

/// The prediction task the queries are meant to improve: one feature vector
/// x_star whose response we want, and the coefficient vector theta_star that
/// actually generates that response.
struct TargetCase {
  Eigen::VectorXd x_star;
  Eigen::VectorXd theta_star;

  void validate() const;
};

/// Squared error of the target prediction:
/// (x_star . theta - x_star . theta_star)^2.
double target_loss(const Eigen::VectorXd& x_star, const Eigen::VectorXd& theta,
                   const Eigen::VectorXd& theta_star);

/// Simulated expert. Asked about feature i it reports truth(i), plus
/// N(0, noise_variance) noise, unless i is outside its knowledge mask,
/// in which case it declines. An empty mask means it knows every feature.
///
/// The noise for a query is drawn from a stream derived from
/// (rng_seed, query_counter), so answers depend only on the query index,
/// not on what was asked before.
struct ExpertModel {
  Eigen::VectorXd truth;
  std::vector<bool> knowledge_mask;
  double noise_variance = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
  bool knows(Eigen::Index feature) const;
};

struct Feedback {
  Eigen::Index feature_index = 0;
  double value = 0.0;
};

/// The expert's answer to the query_counter-th question, or nothing when the
/// feature is outside its knowledge.
std::optional<Feedback> expert_answer(const ExpertModel& expert,
                                      Eigen::Index feature,
                                      int query_counter);

enum class StrategyKind {
  /// Issues no queries at all; the baseline the others are measured against.
  NoInteraction,
  /// Queries features in a seeded random order.
  Random,
  /// Queries features by decreasing |x_star(i)|.
  LargestTargetFeature,
  /// Queries features by decreasing |x_star(i) * theta_init(i)|.
  LargestProductFeature,
};

struct StrategySpec {
  StrategyKind kind = StrategyKind::NoInteraction;
  /// When set the strategy knows the expert's mask and skips features the
  /// expert would decline.
  bool respect_mask = false;
  /// Order seed for the Random kind; ignored by the deterministic kinds.
  std::uint64_t rng_seed = 0;
};

/// "no-interaction", "random", "largest-target", "largest-product",
/// with "-subset" appended when respect_mask is set.
std::string strategy_name(const StrategySpec& spec);

/// Full query order the strategy would follow, before any budget cut. Ties
/// in the sort keys break toward the smaller index. An empty mask means no
/// filtering; with respect_mask set, masked-out features are dropped.
std::vector<Eigen::Index> rank_features(const StrategySpec& spec,
                                        const Eigen::VectorXd& x_star,
                                        const Eigen::VectorXd& theta_init,
                                        const std::vector<bool>& mask);

/// Returns a copy of theta with the answered coordinate overwritten.
Eigen::VectorXd apply_feedback(const Eigen::VectorXd& theta,
                               const Feedback& feedback);

struct ElicitationResult {
  /// Entry t is the target loss after t queries; entry 0 is the loss of
  /// theta_init. Length budget + 1.
  std::vector<double> loss_trajectory;
  WeightVector theta_final;
  int queries_issued = 0;
  int queries_answered = 0;
  /// Set when the strategy ran out of features before the budget; the
  /// trailing entries repeat the last attained loss.
  bool budget_padded = false;
};

/// Runs one elicitation session: rank, query, apply, re-score, for `budget`
/// rounds. A query the expert declines still spends budget. Requires
/// 0 <= budget <= p.
ElicitationResult run_elicitation(const Eigen::VectorXd& theta_init,
                                  const TargetCase& target,
                                  const ExpertModel& expert,
                                  const StrategySpec& spec, int budget);

/// The feature whose replacement by its true value lowers the target loss
/// the most (ties toward the smaller index), with the loss it attains.
/// This is the one-step optimum any single query could reach.
struct SingleReplacement {
  Eigen::Index feature_index = 0;
  double loss_after = 0.0;
};
SingleReplacement oracle_best_single_replacement(
    const Eigen::VectorXd& x_star, const Eigen::VectorXd& theta,
    const Eigen::VectorXd& theta_star);

/// Mask with exactly round(fraction * p) features known, chosen uniformly.
std::vector<bool> make_knowledge_mask(Eigen::Index p, double fraction,
                                      std::uint64_t seed);

} // namespace elicit
