#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "elicit/elicitation.hpp"
#include "elicit/synthetic.hpp"

namespace elicit {

/// One cell of the experiment grid. scenario is "shared", "per-patient" or
/// "real"; strategy is the strategy_name() string.
struct CurveKey {
  std::string scenario;
  std::string strategy;
  int n_train = 0;
  double noise_var = 0.0;
  double knowledge_frac = 1.0;

  friend bool operator==(const CurveKey&, const CurveKey&) = default;
  friend bool operator<(const CurveKey& a, const CurveKey& b) {
    return std::tie(a.scenario, a.strategy, a.n_train, a.noise_var,
                    a.knowledge_frac) <
           std::tie(b.scenario, b.strategy, b.n_train, b.noise_var,
                    b.knowledge_frac);
  }
};

struct LossCurvePoint {
  int budget = 0;
  double mean_loss = 0.0;
  double sem = 0.0;
  int reps = 0;
};

/// Mean target loss per budget with its standard error, budgets contiguous
/// from 0 and the repetition count constant across points.
struct LossCurve {
  CurveKey key;
  std::vector<LossCurvePoint> points;
};

/// Pointwise mean and standard error over per-repetition trajectories.
/// Sums run in repetition order, so the result is a deterministic function
/// of the input order. Requires at least two trajectories, all of one length.
LossCurve aggregate(const CurveKey& key,
                    const std::vector<std::vector<double>>& trajectories);

/// Expert settings swept by the experiment: every (noise variance,
/// knowledge fraction) combination becomes its own grid cell.
struct ExpertTemplate {
  std::vector<double> noise_variances{0.0};
  std::vector<double> knowledge_fractions{1.0};
};

/// Where the real-data experiment finds its inputs. Drugs or cells left
/// empty mean "all available"; each repetition samples up to max_drugs x
/// max_cells target pairs from the chosen sets.
struct RealDataSettings {
  std::string expression_csv;
  std::string responses_csv;
  /// Optional gene-filter file; empty means keep every gene.
  std::string gene_filter;
  /// Directory of per-drug proxy-coefficient caches; must be populated
  /// before the experiment runs.
  std::string cache_dir;
  std::vector<std::string> drugs;
  std::vector<std::string> cells;
  int max_drugs = 10;
  int max_cells = 10;
};

struct ExperimentConfig {
  /// Exactly one of synthetic / real must be set.
  std::optional<SyntheticConfig> synthetic;
  std::optional<RealDataSettings> real;
  std::vector<int> n_train_grid{5, 10, 15, 20, 25, 30};
  int budget_max = 10;
  std::vector<StrategySpec> strategies;
  ExpertTemplate expert;
  int repetitions = 100;
  std::uint64_t master_seed = 0;
  /// Worker threads over repetitions; never affects the results.
  int workers = 1;
  /// Cross-validation folds are min(this, n_train).
  int cv_folds_cap = 10;
  int cv_grid_size = 100;
  double alpha = 1.0;
  /// When set, skip cross-validation and fit at this multiple of
  /// lambda_max of each training set.
  std::optional<double> fixed_lambda_scale;
  /// Real data only: treat every (drug, cell) pair as its own sample
  /// instead of averaging pairs within a repetition first.
  bool sem_over_pairs = false;

  void validate() const;
};

/// Runs the full grid. Within a repetition every strategy and expert setting
/// sees the same initial estimate and target, so the comparisons are paired.
/// Results are a pure function of the config; the worker count changes
/// nothing.
std::vector<LossCurve> run_experiment(const ExperimentConfig& config);

/// CSV with header
/// `scenario,strategy,n_train,noise_var,knowledge_frac,budget,mean_loss,sem,reps`,
/// curves sorted by key, points by budget, numbers round-trip exact.
void write_results_csv(const std::string& path,
                       const std::vector<LossCurve>& curves);
std::vector<LossCurve> read_results_csv(const std::string& path);

} // namespace elicit
