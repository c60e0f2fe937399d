#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "elicit/cross_validation.hpp"
#include "elicit/csv.hpp"
#include "elicit/errors.hpp"
#include "elicit/experiment.hpp"
#include "elicit/lasso.hpp"
#include "elicit/real_data.hpp"
#include "elicit/rng.hpp"
#include "elicit/svg_chart.hpp"
#include "elicit/synthetic.hpp"
#include "elicit/theorem.hpp"

namespace {

using namespace elicit;

Scenario parse_scenario(const std::string& name) {
  if (name == "shared") return Scenario::SharedTheta;
  if (name == "per-patient") return Scenario::PerPatientTheta;
  throw ValidationError("unknown scenario: " + name +
                        " (expected shared or per-patient)");
}

FeatureDist parse_feature_dist(const std::string& name) {
  if (name == "normal") return FeatureDist::StandardNormal;
  if (name == "uniform") return FeatureDist::Uniform01;
  throw ValidationError("unknown feature distribution: " + name +
                        " (expected normal or uniform)");
}

std::vector<StrategySpec> default_strategies(bool with_subset) {
  std::vector<StrategySpec> out{
      {StrategyKind::NoInteraction, false, 0},
      {StrategyKind::Random, false, 0},
      {StrategyKind::LargestTargetFeature, false, 0},
      {StrategyKind::LargestProductFeature, false, 0},
  };
  if (with_subset)
    out.push_back({StrategyKind::LargestProductFeature, true, 0});
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

/// One SVG per (scenario, n, noise, fraction) cell, every strategy a series.
void write_plots(const std::vector<LossCurve>& curves, const std::string& dir) {
  using PanelKey = std::tuple<std::string, int, double, double>;
  std::map<PanelKey, std::vector<const LossCurve*>> panels;
  for (const LossCurve& curve : curves)
    panels[{curve.key.scenario, curve.key.n_train, curve.key.noise_var,
            curve.key.knowledge_frac}]
        .push_back(&curve);

  for (const auto& [panel, members] : panels) {
    const auto& [scenario, n, noise, frac] = panel;
    std::vector<ChartSeries> series;
    for (const LossCurve* curve : members) {
      ChartSeries s;
      s.label = curve->key.strategy;
      for (const LossCurvePoint& pt : curve->points) {
        s.x.push_back(pt.budget);
        s.y.push_back(pt.mean_loss);
        s.yerr.push_back(pt.sem);
      }
      series.push_back(std::move(s));
    }
    ChartSpec spec;
    spec.title = scenario + " n=" + std::to_string(n) + " noise=" +
                 format_double(noise) + " frac=" + format_double(frac);
    spec.x_label = "feedback budget";
    spec.y_label = "mean target loss";
    const std::filesystem::path path =
        std::filesystem::path(dir) /
        ("loss_" + scenario + "_n" + std::to_string(n) + "_noise" +
         format_double(noise) + "_frac" + format_double(frac) + ".svg");
    write_text_file(path.string(), render_line_chart(spec, series));
    std::cout << "wrote " << path.string() << "\n";
  }
}

std::string plot_dir_for(const std::string& out_csv) {
  const std::string dir = std::filesystem::path(out_csv).parent_path().string();
  return dir.empty() ? std::string(".") : dir;
}

struct SharedFlags {
  std::uint64_t seed = 0;
  int reps = 100;
  int budget = 10;
  int workers = 1;
  std::string out;
  bool plot = false;
};

void add_shared_flags(CLI::App& cmd, SharedFlags& flags) {
  cmd.add_option("--seed", flags.seed, "Master seed; all randomness flows from it");
  cmd.add_option("--reps", flags.reps, "Repetitions to average over");
  cmd.add_option("--budget", flags.budget, "Maximum number of expert queries");
  cmd.add_option("--workers", flags.workers,
                 "Worker threads over repetitions (never affects results)");
  cmd.add_option("-o,--out", flags.out, "Results CSV path")->required();
  cmd.add_flag("--plot", flags.plot, "Write one SVG chart per grid cell");
}

int cmd_run_synthetic(const SharedFlags& shared, const std::string& scenario,
                      const std::vector<int>& ns, int p, int sparsity, int pool,
                      const std::vector<double>& noise,
                      const std::vector<double>& subset, double obs_noise,
                      double theta_dist, const std::string& feature_dist,
                      bool target_from_pool,
                      const std::optional<double>& lambda_scale) {
  SyntheticConfig sc;
  sc.pool_size = pool;
  sc.p = p;
  sc.s = sparsity;
  sc.n_train = ns.empty() ? 1 : ns.front();
  sc.obs_noise_variance = obs_noise;
  sc.scenario = parse_scenario(scenario);
  sc.max_pairwise_theta_distance = theta_dist;
  sc.feature_dist = parse_feature_dist(feature_dist);
  sc.target_from_pool = target_from_pool;

  bool any_partial = false;
  for (const double f : subset) any_partial |= f < 1.0;

  ExperimentConfig config;
  config.synthetic = sc;
  config.n_train_grid = ns;
  config.budget_max = shared.budget;
  config.strategies = default_strategies(any_partial);
  config.expert.noise_variances = noise;
  config.expert.knowledge_fractions = subset;
  config.repetitions = shared.reps;
  config.master_seed = shared.seed;
  config.workers = shared.workers;
  config.fixed_lambda_scale = lambda_scale;

  const std::vector<LossCurve> curves = run_experiment(config);
  write_results_csv(shared.out, curves);
  std::cout << "wrote " << shared.out << " (" << curves.size() << " curves)\n";
  if (shared.plot) write_plots(curves, plot_dir_for(shared.out));
  return 0;
}

int cmd_run_real(const SharedFlags& shared, const std::string& expr,
                 const std::string& resp, const std::string& genes,
                 const std::string& cache, const std::vector<std::string>& drugs,
                 const std::vector<std::string>& cells,
                 const std::vector<int>& ns, int max_drugs, int max_cells,
                 bool sem_over_pairs,
                 const std::optional<double>& lambda_scale) {
  RealDataSettings rd;
  rd.expression_csv = expr;
  rd.responses_csv = resp;
  rd.gene_filter = genes;
  rd.cache_dir = cache;
  rd.drugs = drugs;
  rd.cells = cells;
  rd.max_drugs = max_drugs;
  rd.max_cells = max_cells;

  ExperimentConfig config;
  config.real = rd;
  config.n_train_grid = ns;
  config.budget_max = shared.budget;
  config.strategies = default_strategies(false);
  config.repetitions = shared.reps;
  config.master_seed = shared.seed;
  config.workers = shared.workers;
  config.sem_over_pairs = sem_over_pairs;
  config.fixed_lambda_scale = lambda_scale;

  const std::vector<LossCurve> curves = run_experiment(config);
  write_results_csv(shared.out, curves);
  std::cout << "wrote " << shared.out << " (" << curves.size() << " curves)\n";
  if (shared.plot) write_plots(curves, plot_dir_for(shared.out));
  return 0;
}

int cmd_learn_ground_truth(const std::string& expr_path,
                           const std::string& resp_path,
                           const std::string& genes_path,
                           const std::string& cache_dir,
                           std::vector<std::string> drugs,
                           const std::vector<std::string>& cells,
                           std::uint64_t seed, int folds, int grid_size) {
  ExpressionTable expression = load_expression(expr_path);
  if (!genes_path.empty())
    expression = filter_genes(expression, load_gene_filter(genes_path));
  const ResponseTable responses = load_responses(resp_path);

  if (drugs.empty()) drugs = responses.drugs();
  if (drugs.empty()) throw ValidationError("no drugs in the response table");

  std::map<std::string, std::string> filenames;
  for (const std::string& drug : drugs) {
    const std::string name = drug_cache_filename(drug);
    const auto [it, inserted] = filenames.emplace(name, drug);
    if (!inserted)
      throw IoError("drugs " + it->second + " and " + drug +
                    " map to the same cache file " + name);
  }

  std::filesystem::create_directories(cache_dir);
  for (const std::string& drug : drugs) {
    std::vector<std::string> targets;
    if (cells.empty()) {
      for (const std::string& cell : responses.cells_for(drug))
        if (expression.row_index(cell)) targets.push_back(cell);
    } else {
      for (const std::string& cell : cells) {
        if (!responses.response(drug, cell))
          throw ValidationError("no response for (" + cell + ", " + drug + ")");
        if (!expression.row_index(cell))
          throw ValidationError("cell line not in expression table: " + cell);
        targets.push_back(cell);
      }
    }
    if (targets.empty())
      throw ValidationError("no usable cell lines for drug: " + drug);

    DrugPgt table;
    for (const std::string& cell : targets) {
      const PgtLearnResult learned = learn_pseudo_ground_truth(
          expression, responses, drug, cell,
          derive_seed(seed, {hash_string("pgt"), hash_string(drug),
                             hash_string(cell)}),
          folds, grid_size);
      table.emplace(cell, learned.entry);
    }
    const std::filesystem::path path =
        std::filesystem::path(cache_dir) / drug_cache_filename(drug);
    save_pgt_table(path.string(), expression.gene_ids, table);
    std::cout << "drug " << drug << ": cached " << table.size()
              << " cell lines -> " << path.string() << "\n";
  }
  return 0;
}

int cmd_check_theorem(const std::string& scenario, int p, int sparsity,
                      int pool, int n, double obs_noise, double theta_dist,
                      const std::string& feature_dist, int resamples,
                      std::uint64_t seed, double lambda_scale, bool use_cv,
                      const std::string& out) {
  SyntheticConfig sc;
  sc.pool_size = pool;
  sc.p = p;
  sc.s = sparsity;
  sc.n_train = std::min<Eigen::Index>(n, pool);
  sc.obs_noise_variance = obs_noise;
  sc.scenario = parse_scenario(scenario);
  sc.max_pairwise_theta_distance = theta_dist;
  sc.feature_dist = parse_feature_dist(feature_dist);
  sc.seed = derive_seed(seed, {hash_string("instance")});
  if (n < 1) throw ValidationError("n must be positive");
  if (!(lambda_scale > 0.0))
    throw ValidationError("lambda-scale must be positive");

  const SyntheticInstance instance = make_instance(sc);
  const std::uint64_t cv_seed = derive_seed(seed, {hash_string("cv")});

  ScenarioSampler sampler;
  sampler.draw_training = [&instance, n](std::uint64_t draw_seed) {
    return draw_training_resample(instance, n, draw_seed);
  };
  sampler.estimate = [&, use_cv, lambda_scale](const Dataset& data) {
    LassoConfig config;
    config.alpha = 1.0;
    if (use_cv) {
      const int folds = std::min<int>(10, static_cast<int>(data.n()));
      config.lambda =
          cv_select_lambda(data, 1.0, folds, 100, cv_seed, false).lambda_min;
    } else {
      config.lambda = lambda_scale * lambda_max(data, false);
    }
    return fit_lasso(data, config).weights;
  };

  const TheoremConditionReport report = estimate_theorem_conditions(
      sampler, instance.target, resamples,
      derive_seed(seed, {hash_string("resample")}));

  std::cout << "resamples: " << report.num_resamples << "\n"
            << "candidate query: feature " << report.modal_c << " (argmax in "
            << report.modal_c_count << "/" << report.num_resamples
            << " resamples)\n"
            << "variance condition: "
            << (report.variance_condition_holds ? "holds" : "fails")
            << " (margin " << format_double(report.variance_margin) << ")\n"
            << "cross condition: "
            << (report.cross_condition_holds ? "holds" : "fails")
            << " (margin " << format_double(report.cross_margin) << ")\n"
            << "conditions: "
            << (report.conditions_hold() ? "CONFIRMED" : "NOT CONFIRMED")
            << "\n"
            << "loss ordering within 2 sem: "
            << (report.ordering_holds_within(2.0) ? "holds" : "fails") << "\n"
            << "zero resampling variance: "
            << (report.zero_variance ? "yes" : "no") << "\n";

  if (!out.empty()) {
    std::string csv =
        "feature,delta_sq_mean,delta_sq_sem,replacement_loss_mean,"
        "replacement_loss_sem,loss_gap_mean,loss_gap_sem\n";
    for (Eigen::Index i = 0; i < report.replacement_loss_mean.size(); ++i) {
      csv += std::to_string(i) + ',' + format_double(report.delta_sq_mean(i)) +
             ',' + format_double(report.delta_sq_sem(i)) + ',' +
             format_double(report.replacement_loss_mean(i)) + ',' +
             format_double(report.replacement_loss_sem(i)) + ',' +
             format_double(report.loss_gap_mean(i)) + ',' +
             format_double(report.loss_gap_sem(i)) + '\n';
    }
    write_text_file(out, csv);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

int cmd_plot(const std::string& in, const std::string& out_dir) {
  const std::vector<LossCurve> curves = read_results_csv(in);
  if (curves.empty()) throw ValidationError("no curves in " + in);
  std::filesystem::create_directories(out_dir);
  write_plots(curves, out_dir);
  return 0;
}

int run_app(int argc, char** argv) {
  CLI::App app{"Budgeted expert-feedback elicitation for small-n sparse regression"};
  app.require_subcommand(1);

  // run-synthetic
  auto* synth = app.add_subcommand(
      "run-synthetic", "Sweep strategies on generated data and write loss curves");
  SharedFlags synth_shared;
  add_shared_flags(*synth, synth_shared);
  std::string synth_scenario = "shared";
  std::vector<int> synth_ns{10};
  int synth_p = 150;
  int synth_sparsity = 5;
  int synth_pool = 1000;
  std::vector<double> synth_noise{0.0};
  std::vector<double> synth_subset{1.0};
  double synth_obs_noise = 1.0;
  double synth_theta_dist = 0.5;
  std::string synth_feature_dist = "normal";
  bool synth_target_from_pool = false;
  std::optional<double> synth_lambda_scale;
  synth->add_option("--scenario", synth_scenario, "shared or per-patient");
  synth->add_option("--n", synth_ns, "Training sizes")->delimiter(',');
  synth->add_option("--p", synth_p, "Feature count");
  synth->add_option("--sparsity", synth_sparsity, "True support size");
  synth->add_option("--pool", synth_pool, "Patient pool size");
  synth->add_option("--noise", synth_noise, "Expert noise variances")
      ->delimiter(',');
  synth->add_option("--obs-noise", synth_obs_noise,
                    "Observation noise variance");
  synth->add_option("--subset", synth_subset,
                    "Expert knowledge fractions; any value below 1 adds the "
                    "mask-aware largest-product strategy")
      ->delimiter(',');
  synth->add_option("--theta-dist", synth_theta_dist,
                    "Pairwise coefficient distance bound (per-patient)");
  synth->add_option("--feature-dist", synth_feature_dist,
                    "Feature distribution: normal or uniform");
  synth->add_flag("--target-from-pool", synth_target_from_pool,
                  "Use a held-out pool row as the target instead of a fresh draw");
  synth->add_option("--lambda-scale", synth_lambda_scale,
                    "Skip cross-validation; fit at this multiple of lambda_max");

  // run-real
  auto* real = app.add_subcommand(
      "run-real", "Run the strategy sweep on expression/response tables");
  SharedFlags real_shared;
  add_shared_flags(*real, real_shared);
  std::string real_expr;
  std::string real_resp;
  std::string real_genes;
  std::string real_cache;
  std::vector<std::string> real_drugs;
  std::vector<std::string> real_cells;
  std::vector<int> real_ns{10};
  int real_max_drugs = 10;
  int real_max_cells = 10;
  bool real_sem_over_pairs = false;
  std::optional<double> real_lambda_scale;
  real->add_option("--expr", real_expr, "Expression CSV")->required();
  real->add_option("--resp", real_resp, "Response CSV")->required();
  real->add_option("--genes", real_genes, "Gene filter file");
  real->add_option("--cache", real_cache, "Ground-truth cache directory")
      ->required();
  real->add_option("--drugs", real_drugs, "Drugs to include (default all)")
      ->delimiter(',');
  real->add_option("--cells", real_cells,
                   "Target cell lines to include (default all cached)")
      ->delimiter(',');
  real->add_option("--n", real_ns, "Training sizes")->delimiter(',');
  real->add_option("--max-drugs", real_max_drugs,
                   "Drugs sampled per repetition");
  real->add_option("--max-cells", real_max_cells,
                   "Target cells sampled per drug and repetition");
  real->add_flag("--sem-over-pairs", real_sem_over_pairs,
                 "Standard error over all pairs instead of over repetitions");
  real->add_option("--lambda-scale", real_lambda_scale,
                   "Skip cross-validation; fit at this multiple of lambda_max");

  // learn-ground-truth
  auto* learn = app.add_subcommand(
      "learn-ground-truth",
      "Learn leave-one-out proxy coefficients and cache them per drug");
  std::string learn_expr;
  std::string learn_resp;
  std::string learn_genes;
  std::string learn_cache;
  std::vector<std::string> learn_drugs;
  std::vector<std::string> learn_cells;
  std::uint64_t learn_seed = 0;
  int learn_folds = 10;
  int learn_grid = 100;
  learn->add_option("--expr", learn_expr, "Expression CSV")->required();
  learn->add_option("--resp", learn_resp, "Response CSV")->required();
  learn->add_option("--genes", learn_genes, "Gene filter file");
  learn->add_option("--cache", learn_cache, "Cache directory to write")
      ->required();
  learn->add_option("--drugs", learn_drugs, "Drugs to learn (default all)")
      ->delimiter(',');
  learn->add_option("--cells", learn_cells,
                    "Cell lines to hold out (default all usable)")
      ->delimiter(',');
  learn->add_option("--seed", learn_seed, "Cross-validation seed");
  learn->add_option("--folds", learn_folds, "Cross-validation folds");
  learn->add_option("--grid", learn_grid, "Penalty grid size");

  // check-theorem
  auto* check = app.add_subcommand(
      "check-theorem",
      "Monte Carlo check of the optimal-query sufficient conditions");
  std::string check_scenario = "shared";
  int check_p = 150;
  int check_sparsity = 5;
  int check_pool = 1000;
  int check_n = 10;
  double check_obs_noise = 1.0;
  double check_theta_dist = 0.5;
  std::string check_feature_dist = "normal";
  int check_resamples = 1000;
  std::uint64_t check_seed = 0;
  double check_lambda_scale = 0.1;
  bool check_cv = false;
  std::string check_out;
  check->add_option("--scenario", check_scenario, "shared or per-patient");
  check->add_option("--p", check_p, "Feature count");
  check->add_option("--sparsity", check_sparsity, "True support size");
  check->add_option("--pool", check_pool, "Pool size behind the fixed target");
  check->add_option("--n", check_n, "Training rows per resample");
  check->add_option("--obs-noise", check_obs_noise,
                    "Observation noise variance");
  check->add_option("--theta-dist", check_theta_dist,
                    "Pairwise coefficient distance bound (per-patient)");
  check->add_option("--feature-dist", check_feature_dist,
                    "Feature distribution: normal or uniform");
  check->add_option("--resamples", check_resamples, "Monte Carlo resamples");
  check->add_option("--seed", check_seed, "Master seed");
  check->add_option("--lambda-scale", check_lambda_scale,
                    "Estimator penalty as a multiple of lambda_max");
  check->add_flag("--cv", check_cv,
                  "Select the penalty by cross-validation per resample");
  check->add_option("-o,--out", check_out, "Per-feature report CSV");

  // plot
  auto* plot = app.add_subcommand("plot", "Render charts from a results CSV");
  std::string plot_in;
  std::string plot_out_dir = ".";
  plot->add_option("-i,--in", plot_in, "Results CSV")->required();
  plot->add_option("--out-dir", plot_out_dir, "Directory for the SVG files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (app.got_subcommand(synth))
    return cmd_run_synthetic(synth_shared, synth_scenario, synth_ns, synth_p,
                             synth_sparsity, synth_pool, synth_noise,
                             synth_subset, synth_obs_noise, synth_theta_dist,
                             synth_feature_dist, synth_target_from_pool,
                             synth_lambda_scale);
  if (app.got_subcommand(real))
    return cmd_run_real(real_shared, real_expr, real_resp, real_genes,
                        real_cache, real_drugs, real_cells, real_ns,
                        real_max_drugs, real_max_cells, real_sem_over_pairs,
                        real_lambda_scale);
  if (app.got_subcommand(learn))
    return cmd_learn_ground_truth(learn_expr, learn_resp, learn_genes,
                                  learn_cache, learn_drugs, learn_cells,
                                  learn_seed, learn_folds, learn_grid);
  if (app.got_subcommand(check))
    return cmd_check_theorem(check_scenario, check_p, check_sparsity,
                             check_pool, check_n, check_obs_noise,
                             check_theta_dist, check_feature_dist,
                             check_resamples, check_seed, check_lambda_scale,
                             check_cv, check_out);
  if (app.got_subcommand(plot)) return cmd_plot(plot_in, plot_out_dir);
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run_app(argc, argv);
  } catch (const elicit::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const elicit::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const elicit::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
