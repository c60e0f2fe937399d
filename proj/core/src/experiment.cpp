#include "elicit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "elicit/cross_validation.hpp"
#include "elicit/csv.hpp"
#include "elicit/errors.hpp"
#include "elicit/lasso.hpp"
#include "elicit/parallel.hpp"
#include "elicit/real_data.hpp"
#include "elicit/rng.hpp"

namespace elicit {

LossCurve aggregate(const CurveKey& key,
                    const std::vector<std::vector<double>>& trajectories) {
  if (trajectories.size() < 2)
    throw ValidationError("aggregation needs at least 2 trajectories");
  const std::size_t length = trajectories.front().size();
  for (const auto& t : trajectories)
    if (t.size() != length)
      throw ValidationError("trajectories have unequal lengths");
  if (length == 0) throw ValidationError("trajectories are empty");

  const int reps = static_cast<int>(trajectories.size());
  LossCurve curve;
  curve.key = key;
  curve.points.reserve(length);
  for (std::size_t b = 0; b < length; ++b) {
    double sum = 0.0;
    for (const auto& t : trajectories) sum += t[b];
    const double mean = sum / reps;
    double ss = 0.0;
    for (const auto& t : trajectories) {
      const double d = t[b] - mean;
      ss += d * d;
    }
    const double sem = std::sqrt(ss / (reps - 1) / reps);
    curve.points.push_back({static_cast<int>(b), mean, sem, reps});
  }
  return curve;
}

void ExperimentConfig::validate() const {
  if (synthetic.has_value() == real.has_value())
    throw ValidationError("exactly one of synthetic or real must be set");
  if (synthetic) synthetic->validate();
  if (real) {
    if (real->expression_csv.empty() || real->responses_csv.empty())
      throw ValidationError("expression and response paths are required");
    if (real->cache_dir.empty())
      throw ValidationError("the ground-truth cache directory is required");
    if (real->max_drugs < 1 || real->max_cells < 1)
      throw ValidationError("per-repetition drug and cell caps must be positive");
  }
  if (n_train_grid.empty())
    throw ValidationError("n_train_grid must not be empty");
  for (const int n : n_train_grid) {
    if (n < 1) throw ValidationError("training sizes must be positive");
    if (synthetic && n > synthetic->pool_size)
      throw ValidationError("training size exceeds the pool");
  }
  if (budget_max < 0) throw ValidationError("budget_max must be nonnegative");
  if (synthetic && budget_max > synthetic->p)
    throw ValidationError("budget_max exceeds the feature count");
  if (strategies.empty()) throw ValidationError("no strategies configured");
  if (expert.noise_variances.empty() || expert.knowledge_fractions.empty())
    throw ValidationError("expert grids must not be empty");
  for (const double v : expert.noise_variances)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("noise variances must be finite and nonnegative");
  for (const double f : expert.knowledge_fractions)
    if (!(f >= 0.0 && f <= 1.0))
      throw ValidationError("knowledge fractions must lie in [0, 1]");
  if (repetitions < 2)
    throw ValidationError("need at least 2 repetitions for standard errors");
  if (workers < 1) throw ValidationError("workers must be positive");
  if (cv_folds_cap < 2) throw ValidationError("cv_folds_cap must be at least 2");
  if (cv_grid_size < 2) throw ValidationError("cv_grid_size must be at least 2");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("alpha must lie in [0, 1]");
  if (fixed_lambda_scale && !(*fixed_lambda_scale > 0.0))
    throw ValidationError("fixed_lambda_scale must be positive");
}

namespace {

/// One (n, noise, fraction, strategy) grid cell and its slot index.
struct Cell {
  CurveKey key;
  int n_train = 0;
  double noise_var = 0.0;
  double knowledge_frac = 1.0;
  std::size_t strategy = 0;
};

std::vector<Cell> enumerate_cells(const ExperimentConfig& config,
                                  const std::string& scenario) {
  std::vector<Cell> cells;
  for (const int n : config.n_train_grid)
    for (const double v : config.expert.noise_variances)
      for (const double f : config.expert.knowledge_fractions)
        for (std::size_t s = 0; s < config.strategies.size(); ++s) {
          Cell cell;
          cell.key = CurveKey{scenario, strategy_name(config.strategies[s]),
                              n, v, f};
          cell.n_train = n;
          cell.noise_var = v;
          cell.knowledge_frac = f;
          cell.strategy = s;
          cells.push_back(std::move(cell));
        }
  return cells;
}

double pick_lambda(const ExperimentConfig& config, const Dataset& data,
                   bool standardize, std::uint64_t cv_seed) {
  if (config.fixed_lambda_scale)
    return *config.fixed_lambda_scale * lambda_max(data, standardize);
  const int folds = std::min<int>(config.cv_folds_cap,
                                  static_cast<int>(data.n()));
  return cv_select_lambda(data, config.alpha, folds, config.cv_grid_size,
                          cv_seed, standardize)
      .lambda_min;
}

Eigen::VectorXd fit_initial(const ExperimentConfig& config, const Dataset& data,
                            bool standardize, double lambda) {
  LassoConfig fit_config;
  fit_config.alpha = config.alpha;
  fit_config.lambda = lambda;
  fit_config.standardize = standardize;
  return fit_lasso(data, fit_config).weights.weights;
}

StrategySpec resolve_strategy(const ExperimentConfig& config,
                              const StrategySpec& strategy, std::uint64_t rep) {
  StrategySpec resolved = strategy;
  if (strategy.kind == StrategyKind::Random)
    resolved.rng_seed = derive_seed(
        config.master_seed, {hash_string("strategy"), rep,
                             hash_string(strategy_name(strategy)),
                             strategy.rng_seed});
  return resolved;
}

std::vector<LossCurve> run_synthetic(const ExperimentConfig& config) {
  const SyntheticConfig& base = *config.synthetic;
  const std::string scenario =
      base.scenario == Scenario::SharedTheta ? "shared" : "per-patient";
  const std::vector<Cell> cells = enumerate_cells(config, scenario);
  const std::size_t R = static_cast<std::size_t>(config.repetitions);

  std::vector<std::vector<std::vector<double>>> slots(
      cells.size(), std::vector<std::vector<double>>(R));

  parallel_for(R, config.workers, [&](std::size_t r) {
    const auto rep = static_cast<std::uint64_t>(r);
    SyntheticConfig inst_config = base;
    inst_config.seed =
        derive_seed(config.master_seed, {hash_string("instance"), rep});
    const SyntheticInstance instance = make_instance(inst_config);

    // One initial estimate per training size, shared by every strategy and
    // expert setting in this repetition: the comparisons are paired.
    std::map<int, Eigen::VectorXd> initial;
    for (const int n : config.n_train_grid) {
      if (initial.count(n)) continue;
      const Dataset data = training_slice(instance, n);
      const double lambda = pick_lambda(
          config, data, true,
          derive_seed(config.master_seed, {hash_string("cv"), rep,
                                           static_cast<std::uint64_t>(n)}));
      initial.emplace(n, fit_initial(config, data, true, lambda));
    }

    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      const Cell& cell = cells[ci];
      const StrategySpec spec =
          resolve_strategy(config, config.strategies[cell.strategy], rep);

      ExpertModel expert;
      expert.truth = instance.target.theta_star;
      expert.noise_variance = cell.noise_var;
      expert.rng_seed =
          derive_seed(config.master_seed,
                      {hash_string("expert"), rep, seed_bits(cell.noise_var)});
      if (spec.respect_mask && cell.knowledge_frac < 1.0)
        expert.knowledge_mask = make_knowledge_mask(
            base.p, cell.knowledge_frac,
            derive_seed(config.master_seed, {hash_string("mask"), rep,
                                             seed_bits(cell.knowledge_frac)}));

      const ElicitationResult result =
          run_elicitation(initial.at(cell.n_train), instance.target, expert,
                          spec, config.budget_max);
      slots[ci][r] = result.loss_trajectory;
    }
  });

  std::map<CurveKey, std::vector<std::vector<double>>> grouped;
  for (std::size_t ci = 0; ci < cells.size(); ++ci)
    grouped.emplace(cells[ci].key, std::move(slots[ci]));
  std::vector<LossCurve> curves;
  curves.reserve(grouped.size());
  for (const auto& [key, trajectories] : grouped)
    curves.push_back(aggregate(key, trajectories));
  return curves;
}

struct RealInputs {
  ExpressionTable expression;
  ResponseTable responses;
  /// Per drug: target-eligible cells (response, expression row, cache entry).
  std::map<std::string, std::vector<std::string>> target_cells;
  /// Per drug: cells usable as training rows (response and expression row).
  std::map<std::string, std::vector<std::string>> training_cells;
  std::map<std::string, DrugPgt> caches;
  std::vector<std::string> drugs;
};

RealInputs load_real_inputs(const ExperimentConfig& config) {
  const RealDataSettings& rd = *config.real;
  RealInputs in;
  in.expression = load_expression(rd.expression_csv);
  if (!rd.gene_filter.empty())
    in.expression =
        filter_genes(in.expression, load_gene_filter(rd.gene_filter));
  in.responses = load_responses(rd.responses_csv);

  if (config.budget_max >
      static_cast<int>(in.expression.gene_ids.size()))
    throw ValidationError("budget_max exceeds the gene count");

  in.drugs = rd.drugs.empty() ? in.responses.drugs() : rd.drugs;
  if (in.drugs.empty()) throw ValidationError("no drugs in the response table");
  std::sort(in.drugs.begin(), in.drugs.end());

  const std::set<std::string> wanted_cells(rd.cells.begin(), rd.cells.end());
  for (const std::string& drug : in.drugs) {
    const std::vector<std::string> with_response = in.responses.cells_for(drug);
    if (with_response.empty())
      throw ValidationError("no responses for drug: " + drug);

    const std::filesystem::path cache_path =
        std::filesystem::path(rd.cache_dir) / drug_cache_filename(drug);
    if (!std::filesystem::exists(cache_path))
      throw IoError("no ground-truth cache for drug " + drug + " at " +
                    cache_path.string() + "; run learn-ground-truth first");
    DrugPgt cache = load_pgt_table(cache_path.string(), in.expression.gene_ids);

    std::vector<std::string> training;
    std::vector<std::string> targets;
    for (const std::string& cell : with_response) {
      if (!in.expression.row_index(cell)) continue;
      training.push_back(cell);
      if (!wanted_cells.empty() && !wanted_cells.count(cell)) continue;
      if (cache.count(cell)) targets.push_back(cell);
    }
    if (targets.empty())
      throw ValidationError("drug " + drug +
                            " has no usable target cells in the cache");
    in.training_cells.emplace(drug, std::move(training));
    in.target_cells.emplace(drug, std::move(targets));
    in.caches.emplace(drug, std::move(cache));
  }
  return in;
}

std::vector<LossCurve> run_real(const ExperimentConfig& config) {
  const RealInputs in = load_real_inputs(config);
  const std::vector<Cell> cells = enumerate_cells(config, "real");
  const std::size_t R = static_cast<std::size_t>(config.repetitions);
  const Eigen::Index p = static_cast<Eigen::Index>(in.expression.gene_ids.size());

  // slots[cell][rep] holds one trajectory per sampled (drug, cell line) pair.
  std::vector<std::vector<std::vector<std::vector<double>>>> slots(
      cells.size(), std::vector<std::vector<std::vector<double>>>(R));

  parallel_for(R, config.workers, [&](std::size_t r) {
    const auto rep = static_cast<std::uint64_t>(r);

    const std::size_t n_drugs =
        std::min<std::size_t>(static_cast<std::size_t>(config.real->max_drugs),
                              in.drugs.size());
    RandomStream drug_stream(
        derive_seed(config.master_seed, {hash_string("drugs"), rep}));
    std::vector<std::string> rep_drugs;
    for (const auto idx : drug_stream.sample_without_replacement(
             static_cast<std::ptrdiff_t>(in.drugs.size()),
             static_cast<std::ptrdiff_t>(n_drugs)))
      rep_drugs.push_back(in.drugs[static_cast<std::size_t>(idx)]);

    for (const std::string& drug : rep_drugs) {
      const std::vector<std::string>& targets = in.target_cells.at(drug);
      const std::size_t n_cells = std::min<std::size_t>(
          static_cast<std::size_t>(config.real->max_cells), targets.size());
      RandomStream cell_stream(derive_seed(
          config.master_seed, {hash_string("cells"), rep, hash_string(drug)}));
      std::vector<std::string> rep_cells;
      for (const auto idx : cell_stream.sample_without_replacement(
               static_cast<std::ptrdiff_t>(targets.size()),
               static_cast<std::ptrdiff_t>(n_cells)))
        rep_cells.push_back(targets[static_cast<std::size_t>(idx)]);

      for (const std::string& cell_line : rep_cells) {
        const RealTargetCase target = build_target_case(
            in.expression, drug, cell_line, in.caches.at(drug).at(cell_line));

        std::vector<std::string> eligible;
        for (const std::string& c : in.training_cells.at(drug))
          if (c != cell_line) eligible.push_back(c);

        const std::vector<std::ptrdiff_t> order =
            RandomStream(derive_seed(config.master_seed,
                                     {hash_string("rows"), rep,
                                      hash_string(drug), hash_string(cell_line)}))
                .permutation(static_cast<std::ptrdiff_t>(eligible.size()));

        std::map<int, Eigen::VectorXd> initial;
        for (const int n : config.n_train_grid) {
          if (initial.count(n)) continue;
          if (static_cast<std::size_t>(n) > eligible.size())
            throw ValidationError(
                "training size " + std::to_string(n) + " exceeds the " +
                std::to_string(eligible.size()) + " cells available for drug " +
                drug);
          Dataset data;
          data.features.resize(n, p);
          data.responses.resize(n);
          for (int i = 0; i < n; ++i) {
            const std::string& c =
                eligible[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            data.features.row(i) =
                in.expression.values.row(*in.expression.row_index(c));
            data.responses(i) = *in.responses.response(drug, c);
          }
          data.responses.array() -= data.responses.mean();
          const double lambda = pick_lambda(
              config, data, true,
              derive_seed(config.master_seed,
                          {hash_string("cv"), rep, hash_string(drug),
                           hash_string(cell_line),
                           static_cast<std::uint64_t>(n)}));
          initial.emplace(n, fit_initial(config, data, true, lambda));
        }

        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
          const Cell& cell = cells[ci];
          const StrategySpec spec =
              resolve_strategy(config, config.strategies[cell.strategy], rep);

          ExpertModel expert;
          expert.truth = target.target.theta_star;
          expert.noise_variance = cell.noise_var;
          expert.rng_seed = derive_seed(
              config.master_seed,
              {hash_string("expert"), rep, hash_string(drug),
               hash_string(cell_line), seed_bits(cell.noise_var)});
          if (spec.respect_mask && cell.knowledge_frac < 1.0)
            expert.knowledge_mask = make_knowledge_mask(
                p, cell.knowledge_frac,
                derive_seed(config.master_seed,
                            {hash_string("mask"), rep, hash_string(drug),
                             hash_string(cell_line),
                             seed_bits(cell.knowledge_frac)}));

          const ElicitationResult result =
              run_elicitation(initial.at(cell.n_train), target.target, expert,
                              spec, config.budget_max);
          slots[ci][r].push_back(result.loss_trajectory);
        }
      }
    }
  });

  std::map<CurveKey, std::vector<std::vector<double>>> grouped;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    std::vector<std::vector<double>> trajectories;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& pair_trajectories = slots[ci][r];
      if (pair_trajectories.empty())
        throw ValidationError("a repetition produced no target pairs");
      if (config.sem_over_pairs) {
        for (const auto& t : pair_trajectories) trajectories.push_back(t);
      } else {
        std::vector<double> mean(pair_trajectories.front().size(), 0.0);
        for (const auto& t : pair_trajectories)
          for (std::size_t b = 0; b < mean.size(); ++b) mean[b] += t[b];
        for (double& v : mean)
          v /= static_cast<double>(pair_trajectories.size());
        trajectories.push_back(std::move(mean));
      }
    }
    grouped.emplace(cells[ci].key, std::move(trajectories));
  }
  std::vector<LossCurve> curves;
  curves.reserve(grouped.size());
  for (const auto& [key, trajectories] : grouped)
    curves.push_back(aggregate(key, trajectories));
  return curves;
}

} // namespace

std::vector<LossCurve> run_experiment(const ExperimentConfig& config) {
  config.validate();
  return config.synthetic ? run_synthetic(config) : run_real(config);
}

void write_results_csv(const std::string& path,
                       const std::vector<LossCurve>& curves) {
  std::vector<const LossCurve*> sorted;
  sorted.reserve(curves.size());
  for (const LossCurve& c : curves) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(),
            [](const LossCurve* a, const LossCurve* b) { return a->key < b->key; });

  std::ofstream out(path);
  if (!out) throw IoError("cannot write results file: " + path);
  out << "scenario,strategy,n_train,noise_var,knowledge_frac,budget,"
         "mean_loss,sem,reps\n";
  for (const LossCurve* curve : sorted)
    for (const LossCurvePoint& pt : curve->points)
      out << curve->key.scenario << ',' << curve->key.strategy << ','
          << curve->key.n_train << ',' << format_double(curve->key.noise_var)
          << ',' << format_double(curve->key.knowledge_frac) << ','
          << pt.budget << ',' << format_double(pt.mean_loss) << ','
          << format_double(pt.sem) << ',' << pt.reps << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<LossCurve> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open results file: " + path);

  std::string line;
  std::size_t line_number = 1;
  if (!std::getline(in, line))
    throw IoError(path + ":1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line !=
      "scenario,strategy,n_train,noise_var,knowledge_frac,budget,mean_loss,"
      "sem,reps")
    throw IoError(path + ":1: unexpected header");

  std::map<CurveKey, LossCurve> curves;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_number);
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 9)
      throw IoError(where + ": expected 9 fields, got " +
                    std::to_string(fields.size()));
    CurveKey key;
    key.scenario = fields[0];
    key.strategy = fields[1];
    key.n_train = static_cast<int>(parse_long(fields[2], where));
    key.noise_var = parse_double(fields[3], where);
    key.knowledge_frac = parse_double(fields[4], where);
    LossCurvePoint pt;
    pt.budget = static_cast<int>(parse_long(fields[5], where));
    pt.mean_loss = parse_double(fields[6], where);
    pt.sem = parse_double(fields[7], where);
    pt.reps = static_cast<int>(parse_long(fields[8], where));
    auto [it, inserted] = curves.try_emplace(key);
    if (inserted) it->second.key = key;
    it->second.points.push_back(pt);
  }
  std::vector<LossCurve> out;
  out.reserve(curves.size());
  for (auto& [key, curve] : curves) {
    std::sort(curve.points.begin(), curve.points.end(),
              [](const LossCurvePoint& a, const LossCurvePoint& b) {
                return a.budget < b.budget;
              });
    out.push_back(std::move(curve));
  }
  return out;
}

} // namespace elicit
