#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "elicit/elicitation.hpp"
#include "elicit/errors.hpp"
#include "elicit/lasso.hpp"
#include "elicit/rng.hpp"
#include "elicit/theorem.hpp"

using namespace elicit;

namespace {

TargetCase make_target(std::initializer_list<double> xs,
                       std::initializer_list<double> ts) {
  TargetCase target;
  target.x_star = Eigen::VectorXd::Map(xs.begin(), static_cast<Eigen::Index>(xs.size()));
  target.theta_star = Eigen::VectorXd::Map(ts.begin(), static_cast<Eigen::Index>(ts.size()));
  return target;
}

ExpertModel exact_expert(const Eigen::VectorXd& truth) {
  ExpertModel expert;
  expert.truth = truth;
  return expert;
}

}  // namespace

TEST_CASE("target loss") {
  Eigen::VectorXd theta_star(2), theta(2), x(2);
  x << 1, 2;
  theta_star << 1, 1;
  theta << 1.5, 0.75;  // errors 0.5 and -0.25 cancel through x
  CHECK(target_loss(x, theta, theta_star) == doctest::Approx(0.0));
  CHECK(target_loss(x, theta_star, theta_star) == 0.0);

  Eigen::VectorXd x3 = Eigen::VectorXd::Ones(3), t3(3), s3 = Eigen::VectorXd::Zero(3);
  t3 << 0.1, 0.2, 0.3;
  CHECK(target_loss(x3, t3, s3) == doctest::Approx(0.36));
}

TEST_CASE("ranking orders") {
  Eigen::VectorXd x(3), theta(3);
  x << 2, -3, 0.5;
  theta << 1, 1, 4;
  std::vector<bool> no_mask;

  StrategySpec lp;
  lp.kind = StrategyKind::LargestProductFeature;
  // products |2|, |-3|, |2|: the tie between features 0 and 2 keeps index order
  CHECK(rank_features(lp, x, theta, no_mask) ==
        std::vector<Eigen::Index>{1, 0, 2});

  StrategySpec lt;
  lt.kind = StrategyKind::LargestTargetFeature;
  Eigen::VectorXd x2(3);
  x2 << 0.1, -5, 2;
  CHECK(rank_features(lt, x2, theta, no_mask) ==
        std::vector<Eigen::Index>{1, 2, 0});

  StrategySpec lp_subset = lp;
  lp_subset.respect_mask = true;
  std::vector<bool> mask{true, false, true};
  CHECK(rank_features(lp_subset, x, theta, mask) ==
        std::vector<Eigen::Index>{0, 2});

  StrategySpec none;
  CHECK(rank_features(none, x, theta, no_mask).empty());
}

TEST_CASE("random ranking is a seeded permutation without repeats") {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(40), theta = Eigen::VectorXd::Ones(40);
  StrategySpec random;
  random.kind = StrategyKind::Random;
  random.rng_seed = 11;
  std::vector<bool> no_mask;

  auto order = rank_features(random, x, theta, no_mask);
  CHECK(order == rank_features(random, x, theta, no_mask));
  CHECK(order.size() == 40);
  std::set<Eigen::Index> seen(order.begin(), order.end());
  CHECK(seen.size() == 40);

  random.rng_seed = 12;
  CHECK(order != rank_features(random, x, theta, no_mask));
}

TEST_CASE("expert answers") {
  Eigen::VectorXd truth(3);
  truth << 0.4, -1.2, 0.0;
  ExpertModel expert = exact_expert(truth);

  auto fb = expert_answer(expert, 1, 0);
  REQUIRE(fb.has_value());
  CHECK(fb->feature_index == 1);
  CHECK(fb->value == -1.2);

  expert.knowledge_mask = {true, false, true};
  CHECK(!expert_answer(expert, 1, 0).has_value());
  CHECK(expert_answer(expert, 0, 0).has_value());
}

TEST_CASE("expert noise follows the declared law") {
  Eigen::VectorXd truth(1);
  truth << 0.7;
  ExpertModel expert = exact_expert(truth);
  expert.noise_variance = 0.25;
  expert.rng_seed = 17;

  const int draws = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int q = 0; q < draws; ++q) {
    auto fb = expert_answer(expert, 0, q);
    REQUIRE(fb.has_value());
    sum += fb->value;
    sumsq += fb->value * fb->value;
  }
  const double mean = sum / draws;
  const double var = sumsq / draws - mean * mean;
  CHECK(std::abs(mean - 0.7) < 3 * 0.5 / 100.0);
  CHECK(std::abs(var - 0.25) < 0.025);

  // same query index, same answer: the stream is counter-indexed
  CHECK(expert_answer(expert, 0, 3)->value == expert_answer(expert, 0, 3)->value);
}

TEST_CASE("apply feedback") {
  Eigen::VectorXd theta(2);
  theta << 0.5, 0.2;
  Feedback fb{1, 0.9};
  Eigen::VectorXd once = apply_feedback(theta, fb);
  CHECK(once(0) == 0.5);
  CHECK(once(1) == 0.9);
  CHECK(apply_feedback(once, fb) == once);
  CHECK(theta(1) == 0.2);

  Eigen::VectorXd truth(2);
  truth << -1.0, 3.0;
  Eigen::VectorXd rebuilt = theta;
  for (Eigen::Index i = 0; i < 2; ++i)
    rebuilt = apply_feedback(rebuilt, Feedback{i, truth(i)});
  CHECK(rebuilt == truth);
}

TEST_CASE("elicitation walkthrough") {
  TargetCase target = make_target({1, 1, 1}, {1, 0, 0});
  Eigen::VectorXd theta_init(3);
  theta_init << 0.2, 0.5, 0.1;
  StrategySpec lp;
  lp.kind = StrategyKind::LargestProductFeature;

  ElicitationResult result =
      run_elicitation(theta_init, target, exact_expert(target.theta_star), lp, 2);
  REQUIRE(result.loss_trajectory.size() == 3);
  CHECK(result.loss_trajectory[0] == doctest::Approx(0.04));
  CHECK(result.loss_trajectory[1] == doctest::Approx(0.49));
  CHECK(result.loss_trajectory[2] == doctest::Approx(0.01));
  CHECK(result.queries_issued == 2);
  CHECK(result.queries_answered == 2);
  CHECK(!result.budget_padded);
  CHECK(result.theta_final.weights(1) == 0.0);
  CHECK(result.theta_final.weights(0) == 1.0);
}

TEST_CASE("budget zero returns only the initial loss") {
  TargetCase target = make_target({1, -2}, {0.3, 0.4});
  Eigen::VectorXd theta_init(2);
  theta_init << 0.0, 1.0;
  StrategySpec lp;
  lp.kind = StrategyKind::LargestProductFeature;
  ElicitationResult result =
      run_elicitation(theta_init, target, exact_expert(target.theta_star), lp, 0);
  CHECK(result.loss_trajectory ==
        std::vector<double>{target_loss(target.x_star, theta_init, target.theta_star)});
  CHECK(result.theta_final.weights == theta_init);
}

TEST_CASE("exact expert with the full budget recovers the truth") {
  RandomStream rng(derive_seed(55, {0}));
  const Eigen::Index p = 30;
  TargetCase target;
  target.x_star = Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return rng.normal(); });
  target.theta_star = Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return rng.normal(); });
  Eigen::VectorXd theta_init =
      Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return rng.normal(); });

  for (StrategyKind kind : {StrategyKind::Random, StrategyKind::LargestTargetFeature,
                            StrategyKind::LargestProductFeature}) {
    StrategySpec spec;
    spec.kind = kind;
    spec.rng_seed = 3;
    ElicitationResult result = run_elicitation(
        theta_init, target, exact_expert(target.theta_star), spec, static_cast<int>(p));
    CHECK(result.loss_trajectory.back() < 1e-20);
    CHECK((result.theta_final.weights - target.theta_star).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("no-interaction pads its empty order and never queries") {
  TargetCase target = make_target({1, 1}, {1, 2});
  Eigen::VectorXd theta_init = Eigen::VectorXd::Zero(2);
  StrategySpec none;
  ElicitationResult result =
      run_elicitation(theta_init, target, exact_expert(target.theta_star), none, 2);
  CHECK(result.budget_padded);
  CHECK(result.queries_issued == 0);
  const double initial = result.loss_trajectory[0];
  for (double loss : result.loss_trajectory) CHECK(loss == initial);
}

TEST_CASE("a declined query spends budget unless the strategy respects the mask") {
  TargetCase target = make_target({1, 1}, {2, 1});
  Eigen::VectorXd theta_init(2);
  theta_init << 0.5, 0.1;  // products 0.5 and 0.1: feature 0 ranks first
  ExpertModel expert = exact_expert(target.theta_star);
  expert.knowledge_mask = {false, true};

  StrategySpec blind;
  blind.kind = StrategyKind::LargestProductFeature;
  ElicitationResult wasted = run_elicitation(theta_init, target, expert, blind, 1);
  CHECK(wasted.queries_issued == 1);
  CHECK(wasted.queries_answered == 0);
  CHECK(wasted.loss_trajectory[1] == wasted.loss_trajectory[0]);

  StrategySpec aware = blind;
  aware.respect_mask = true;
  ElicitationResult skipped = run_elicitation(theta_init, target, expert, aware, 1);
  CHECK(skipped.queries_answered == 1);
  CHECK(skipped.theta_final.weights(1) == target.theta_star(1));
}

TEST_CASE("strategy names") {
  StrategySpec spec;
  CHECK(strategy_name(spec) == "no-interaction");
  spec.kind = StrategyKind::Random;
  CHECK(strategy_name(spec) == "random");
  spec.kind = StrategyKind::LargestTargetFeature;
  CHECK(strategy_name(spec) == "largest-target");
  spec.kind = StrategyKind::LargestProductFeature;
  CHECK(strategy_name(spec) == "largest-product");
  spec.respect_mask = true;
  CHECK(strategy_name(spec) == "largest-product-subset");
}

TEST_CASE("oracle single replacement") {
  // only coordinate 3 is wrong, so it is the only useful replacement
  TargetCase target = make_target({1, 1, 1, 1, 1}, {1, 2, 3, 4, 5});
  Eigen::VectorXd theta = target.theta_star;
  theta(3) = 0.0;
  auto best = oracle_best_single_replacement(target.x_star, theta, target.theta_star);
  CHECK(best.feature_index == 3);
  CHECK(best.loss_after == doctest::Approx(0.0));

  // all deltas share one sign: the largest magnitude wins
  TargetCase same_sign = make_target({1, 2, 1}, {0, 0, 0});
  Eigen::VectorXd over(3);
  over << 0.5, 0.8, 0.3;  // deltas 0.5, 1.6, 0.3
  auto pick = oracle_best_single_replacement(same_sign.x_star, over, same_sign.theta_star);
  CHECK(pick.feature_index == 1);
}

TEST_CASE("oracle agrees with a naive rescan on random instances") {
  RandomStream rng(derive_seed(55, {1}));
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index p = 10;
    Eigen::VectorXd x(p), theta(p), truth(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      x(i) = rng.normal();
      theta(i) = rng.normal();
      truth(i) = rng.normal();
    }
    auto fast = oracle_best_single_replacement(x, theta, truth);

    Eigen::Index best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < p; ++i) {
      Eigen::VectorXd candidate = theta;
      candidate(i) = truth(i);
      const double loss = target_loss(x, candidate, truth);
      if (loss < best_loss) {
        best_loss = loss;
        best = i;
      }
    }
    CHECK(fast.feature_index == best);
    CHECK(fast.loss_after == doctest::Approx(best_loss));
  }
}

TEST_CASE("first query is one-step optimal on aligned same-sign instances") {
  RandomStream rng(derive_seed(55, {2}));
  StrategySpec lp;
  lp.kind = StrategyKind::LargestProductFeature;
  std::vector<bool> no_mask;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.uniform_below(10));
    // positive x, zero truth, positive estimates: delta_i = x_i * theta_i > 0
    // and the product order equals the delta order by construction.
    Eigen::VectorXd x(p), theta(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      x(i) = 0.1 + rng.uniform01();
      theta(i) = 0.1 + rng.uniform01();
    }
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(p);
    auto order = rank_features(lp, x, theta, no_mask);
    auto oracle = oracle_best_single_replacement(x, theta, truth);
    CHECK(order[0] == oracle.feature_index);
  }
}

TEST_CASE("knowledge mask size and determinism") {
  auto mask = make_knowledge_mask(10, 0.7, 3);
  CHECK(mask == make_knowledge_mask(10, 0.7, 3));
  CHECK(std::count(mask.begin(), mask.end(), true) == 7);
  CHECK(make_knowledge_mask(10, 1.0, 3) == std::vector<bool>(10, true));
  const auto half = make_knowledge_mask(150, 0.5, 9);
  CHECK(std::count(half.begin(), half.end(), true) == 75);
}

TEST_CASE("theorem report is vacuous with a single feature") {
  ScenarioSampler sampler;
  sampler.draw_training = [](std::uint64_t seed) {
    RandomStream rng(seed);
    Dataset data;
    data.features = Eigen::MatrixXd::NullaryExpr(
        8, 1, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
    data.responses = 2.0 * data.features.col(0);
    return data;
  };
  sampler.estimate = [](const Dataset& data) {
    LassoConfig config;
    config.lambda = 0.01;
    return fit_lasso(data, config).weights;
  };
  TargetCase target = make_target({1.5}, {2.0});
  auto report = estimate_theorem_conditions(sampler, target, 50, 3);
  CHECK(report.modal_c == 0);
  CHECK(report.conditions_hold());
  CHECK(report.ordering_holds_within(0.0));
}

TEST_CASE("degenerate sampler is flagged as zero variance") {
  Dataset fixed;
  fixed.features = Eigen::MatrixXd::Identity(3, 3);
  fixed.responses = Eigen::Vector3d(1, 2, 3);
  ScenarioSampler sampler;
  sampler.draw_training = [fixed](std::uint64_t) { return fixed; };
  sampler.estimate = [](const Dataset& data) {
    return WeightVector(Eigen::VectorXd(data.responses));
  };
  TargetCase target = make_target({1, 1, 1}, {1, 2, 2.5});
  auto report = estimate_theorem_conditions(sampler, target, 10, 3);
  CHECK(report.zero_variance);
}

TEST_CASE("confirmed conditions imply the replacement-loss ordering") {
  // Estimates scatter independently around the truth with per-feature spreads
  // that grow with |x|, so the largest product dominates both conditions.
  RandomStream target_rng(derive_seed(55, {3}));
  const Eigen::Index p = 6;
  TargetCase target;
  target.x_star = Eigen::VectorXd(p);
  target.theta_star = Eigen::VectorXd(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    target.x_star(i) = 0.5 + target_rng.uniform01();
    target.theta_star(i) = 0.25 * target_rng.normal();
  }
  target.x_star(2) = 4.0;  // make one product clearly dominant
  ScenarioSampler sampler;
  sampler.draw_training = [p](std::uint64_t seed) {
    RandomStream rng(seed);
    Dataset data;
    data.features = Eigen::MatrixXd::NullaryExpr(
        4, p, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
    data.responses = Eigen::VectorXd::NullaryExpr(
        4, [&](Eigen::Index) { return rng.normal(); });
    return data;
  };
  const Eigen::VectorXd truth = target.theta_star;
  sampler.estimate = [truth](const Dataset& data) {
    RandomStream rng(seed_bits(data.responses(0)));
    Eigen::VectorXd w = truth;
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) += 0.5 * rng.normal() + 0.6;
    return WeightVector(std::move(w));
  };
  auto report = estimate_theorem_conditions(sampler, target, 400, 21);
  REQUIRE(report.conditions_hold());
  CHECK(report.ordering_holds_within(2.0));
  CHECK(report.modal_c == 2);
}
