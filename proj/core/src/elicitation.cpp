#include "elicit/elicitation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "elicit/errors.hpp"
#include "elicit/rng.hpp"

namespace elicit {

void TargetCase::validate() const {
  if (x_star.size() < 1) throw ValidationError("target needs at least one feature");
  if (x_star.size() != theta_star.size())
    throw ValidationError("x_star and theta_star lengths differ");
  if (!x_star.allFinite() || !theta_star.allFinite())
    throw ValidationError("target contains non-finite values");
}

double target_loss(const Eigen::VectorXd& x_star, const Eigen::VectorXd& theta,
                   const Eigen::VectorXd& theta_star) {
  if (x_star.size() != theta.size() || x_star.size() != theta_star.size())
    throw ValidationError("target loss arguments have mismatched lengths");
  const double diff = x_star.dot(theta) - x_star.dot(theta_star);
  return diff * diff;
}

void ExpertModel::validate() const {
  if (truth.size() < 1) throw ValidationError("expert truth is empty");
  if (!truth.allFinite())
    throw ValidationError("expert truth contains non-finite values");
  if (!knowledge_mask.empty() &&
      knowledge_mask.size() != static_cast<std::size_t>(truth.size()))
    throw ValidationError("knowledge mask length does not match truth");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    throw ValidationError("noise variance must be finite and nonnegative");
}

bool ExpertModel::knows(Eigen::Index feature) const {
  if (knowledge_mask.empty()) return true;
  return knowledge_mask[static_cast<std::size_t>(feature)];
}

std::optional<Feedback> expert_answer(const ExpertModel& expert,
                                      Eigen::Index feature,
                                      int query_counter) {
  if (feature < 0 || feature >= expert.truth.size())
    throw ValidationError("queried feature index out of range");
  if (query_counter < 0) throw ValidationError("query counter must be nonnegative");
  if (!expert.knows(feature)) return std::nullopt;
  double value = expert.truth(feature);
  if (expert.noise_variance > 0.0) {
    RandomStream stream(derive_seed(
        expert.rng_seed, {static_cast<std::uint64_t>(query_counter)}));
    value += stream.normal(0.0, std::sqrt(expert.noise_variance));
  }
  return Feedback{feature, value};
}

std::string strategy_name(const StrategySpec& spec) {
  std::string name;
  switch (spec.kind) {
    case StrategyKind::NoInteraction: name = "no-interaction"; break;
    case StrategyKind::Random: name = "random"; break;
    case StrategyKind::LargestTargetFeature: name = "largest-target"; break;
    case StrategyKind::LargestProductFeature: name = "largest-product"; break;
  }
  if (spec.respect_mask) name += "-subset";
  return name;
}

std::vector<Eigen::Index> rank_features(const StrategySpec& spec,
                                        const Eigen::VectorXd& x_star,
                                        const Eigen::VectorXd& theta_init,
                                        const std::vector<bool>& mask) {
  const Eigen::Index p = x_star.size();
  if (theta_init.size() != p)
    throw ValidationError("theta_init length does not match x_star");
  if (!mask.empty() && mask.size() != static_cast<std::size_t>(p))
    throw ValidationError("mask length does not match x_star");

  std::vector<Eigen::Index> order;
  switch (spec.kind) {
    case StrategyKind::NoInteraction:
      return order;
    case StrategyKind::Random:
      order = RandomStream(spec.rng_seed).permutation(p);
      break;
    case StrategyKind::LargestTargetFeature:
    case StrategyKind::LargestProductFeature: {
      order.resize(static_cast<std::size_t>(p));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      Eigen::VectorXd key(p);
      if (spec.kind == StrategyKind::LargestTargetFeature)
        key = x_star.cwiseAbs();
      else
        key = (x_star.array() * theta_init.array()).abs();
      std::sort(order.begin(), order.end(),
                [&key](Eigen::Index a, Eigen::Index b) {
                  if (key(a) != key(b)) return key(a) > key(b);
                  return a < b;
                });
      break;
    }
  }
  if (spec.respect_mask && !mask.empty()) {
    std::vector<Eigen::Index> kept;
    kept.reserve(order.size());
    for (const Eigen::Index i : order)
      if (mask[static_cast<std::size_t>(i)]) kept.push_back(i);
    return kept;
  }
  return order;
}

Eigen::VectorXd apply_feedback(const Eigen::VectorXd& theta,
                               const Feedback& feedback) {
  if (feedback.feature_index < 0 || feedback.feature_index >= theta.size())
    throw ValidationError("feedback feature index out of range");
  if (!std::isfinite(feedback.value))
    throw ValidationError("feedback value is not finite");
  Eigen::VectorXd updated = theta;
  updated(feedback.feature_index) = feedback.value;
  return updated;
}

ElicitationResult run_elicitation(const Eigen::VectorXd& theta_init,
                                  const TargetCase& target,
                                  const ExpertModel& expert,
                                  const StrategySpec& spec, int budget) {
  target.validate();
  expert.validate();
  const Eigen::Index p = target.x_star.size();
  if (theta_init.size() != p)
    throw ValidationError("theta_init length does not match the target");
  if (expert.truth.size() != p)
    throw ValidationError("expert truth length does not match the target");
  if (budget < 0 || budget > p)
    throw ValidationError("budget must lie in [0, p]");

  const std::vector<Eigen::Index> order =
      rank_features(spec, target.x_star, theta_init, expert.knowledge_mask);

  ElicitationResult result;
  result.loss_trajectory.reserve(static_cast<std::size_t>(budget) + 1);
  Eigen::VectorXd theta = theta_init;
  result.loss_trajectory.push_back(
      target_loss(target.x_star, theta, target.theta_star));

  for (int step = 0; step < budget; ++step) {
    if (static_cast<std::size_t>(result.queries_issued) >= order.size()) {
      result.budget_padded = true;
      result.loss_trajectory.push_back(result.loss_trajectory.back());
      continue;
    }
    const Eigen::Index feature =
        order[static_cast<std::size_t>(result.queries_issued)];
    const auto answer = expert_answer(expert, feature, result.queries_issued);
    ++result.queries_issued;
    if (answer) {
      theta = apply_feedback(theta, *answer);
      ++result.queries_answered;
    }
    result.loss_trajectory.push_back(
        target_loss(target.x_star, theta, target.theta_star));
  }

  result.theta_final = WeightVector{std::move(theta)};
  return result;
}

SingleReplacement oracle_best_single_replacement(
    const Eigen::VectorXd& x_star, const Eigen::VectorXd& theta,
    const Eigen::VectorXd& theta_star) {
  if (x_star.size() != theta.size() || x_star.size() != theta_star.size())
    throw ValidationError("oracle arguments have mismatched lengths");
  if (x_star.size() < 1) throw ValidationError("oracle needs at least one feature");
  const Eigen::ArrayXd delta =
      x_star.array() * (theta.array() - theta_star.array());
  const double total = delta.sum();
  SingleReplacement best;
  best.feature_index = 0;
  {
    const double after = total - delta(0);
    best.loss_after = after * after;
  }
  for (Eigen::Index i = 1; i < x_star.size(); ++i) {
    const double after = total - delta(i);
    const double loss = after * after;
    if (loss < best.loss_after) {
      best.feature_index = i;
      best.loss_after = loss;
    }
  }
  return best;
}

std::vector<bool> make_knowledge_mask(Eigen::Index p, double fraction,
                                      std::uint64_t seed) {
  if (p < 1) throw ValidationError("mask needs at least one feature");
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ValidationError("knowledge fraction must lie in [0, 1]");
  const auto k = static_cast<Eigen::Index>(
      std::llround(fraction * static_cast<double>(p)));
  std::vector<bool> mask(static_cast<std::size_t>(p), false);
  RandomStream stream(seed);
  for (const Eigen::Index i : stream.sample_without_replacement(p, k))
    mask[static_cast<std::size_t>(i)] = true;
  return mask;
}

} // namespace elicit
