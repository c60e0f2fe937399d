#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "elicit/experiment.hpp"
#include "elicit/rng.hpp"

using namespace elicit;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

std::filesystem::path work_dir() {
  static const std::filesystem::path dir = [] {
    const std::filesystem::path d =
        std::filesystem::temp_directory_path() /
        ("elicit_cli_" + std::to_string(::getpid()));
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

/// Runs the installed binary with stdout and stderr folded together.
CliResult run_cli(const std::string& args) {
  const std::string log = (work_dir() / "last_run.log").string();
  const std::string command =
      std::string(ELICIT_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  result.output.assign(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  return result;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Expression and response fixtures shaped like the drug-sensitivity data:
/// 16 cell lines, 10 genes, one drug, a planted two-gene signal.
struct RealFixture {
  std::string expr;
  std::string resp;
};

const RealFixture& real_fixture() {
  static const RealFixture fixture = [] {
    const int cells = 16;
    const int genes = 10;
    RandomStream rng(123);
    std::string expr = "cell_line";
    for (int j = 0; j < genes; ++j) expr += ",G" + std::to_string(j);
    expr += "\n";
    std::string resp = "cell_line,drug,log_ic50\n";
    for (int i = 0; i < cells; ++i) {
      const std::string cell = "LINE" + std::to_string(i);
      expr += cell;
      std::vector<double> x(genes);
      for (int j = 0; j < genes; ++j) {
        x[j] = rng.normal();
        expr += "," + std::to_string(x[j]);
      }
      expr += "\n";
      const double y = 1.5 * x[1] - 2.0 * x[4] + 0.05 * rng.normal();
      resp += cell + ",dexamethasone," + std::to_string(y) + "\n";
    }

    RealFixture out;
    out.expr = (work_dir() / "expression.csv").string();
    out.resp = (work_dir() / "responses.csv").string();
    std::ofstream(out.expr) << expr;
    std::ofstream(out.resp) << resp;
    return out;
  }();
  return fixture;
}

}  // namespace

TEST_CASE("help and argument errors") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("run-synthetic --help").exit_code == 0);

  // No subcommand, unknown flag, and invalid values all fail fast.
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("run-synthetic --no-such-flag 1 -o x.csv").exit_code == 1);
  CHECK(run_cli("run-synthetic -o " + (work_dir() / "x.csv").string() +
                " --reps 1")
            .exit_code == 1);
  const CliResult bad_scenario =
      run_cli("run-synthetic -o " + (work_dir() / "x.csv").string() +
              " --scenario bogus");
  CHECK(bad_scenario.exit_code == 1);
  CHECK(bad_scenario.output.find("error") != std::string::npos);
}

TEST_CASE("missing input files exit with the i/o code") {
  const std::string missing = (work_dir() / "does_not_exist.csv").string();
  CHECK(run_cli("plot -i " + missing).exit_code == 2);
  CHECK(run_cli("run-real --expr " + missing + " --resp " + missing +
                " --cache " + (work_dir() / "nocache").string() + " -o " +
                (work_dir() / "x.csv").string())
            .exit_code == 2);
}

TEST_CASE("synthetic run writes a readable results table") {
  const std::string out = (work_dir() / "synth.csv").string();
  const CliResult run = run_cli(
      "run-synthetic --p 12 --sparsity 3 --pool 40 --n 4,8 --reps 4 "
      "--budget 3 --seed 3 -o " +
      out);
  REQUIRE_MESSAGE(run.exit_code == 0, run.output);

  const std::string text = read_file(out);
  CHECK(text.rfind("scenario,strategy,n_train,noise_var,knowledge_frac,"
                   "budget,mean_loss,sem,reps\n",
                   0) == 0);

  const std::vector<LossCurve> curves = read_results_csv(out);
  // Four default strategies, two training sizes.
  CHECK(curves.size() == 8);
  for (const LossCurve& curve : curves) {
    CHECK(curve.key.scenario == "shared");
    CHECK(curve.points.size() == 4);
    CHECK(curve.points.front().reps == 4);
  }
}

TEST_CASE("worker count never changes the output bytes") {
  const std::string base =
      "run-synthetic --p 10 --sparsity 2 --pool 30 --n 6 --reps 6 "
      "--budget 4 --seed 9 ";
  const std::string out1 = (work_dir() / "w1.csv").string();
  const std::string out4 = (work_dir() / "w4.csv").string();
  REQUIRE(run_cli(base + "--workers 1 -o " + out1).exit_code == 0);
  REQUIRE(run_cli(base + "--workers 4 -o " + out4).exit_code == 0);
  CHECK(read_file(out1) == read_file(out4));
}

TEST_CASE("theorem check reports its verdict") {
  const std::string out = (work_dir() / "theorem.csv").string();
  const CliResult run = run_cli(
      "check-theorem --p 6 --sparsity 2 --pool 30 --n 8 --resamples 50 "
      "--seed 3 -o " +
      out);
  REQUIRE_MESSAGE(run.exit_code == 0, run.output);
  CHECK(run.output.find("candidate query: feature") != std::string::npos);
  CHECK(run.output.find("variance condition:") != std::string::npos);
  CHECK(run.output.find("cross condition:") != std::string::npos);
  CHECK(run.output.find("conditions:") != std::string::npos);

  const std::string text = read_file(out);
  CHECK(text.rfind("feature,", 0) == 0);
  // Header plus one row per feature.
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}

TEST_CASE("ground-truth learning then the real-data sweep") {
  const RealFixture& fixture = real_fixture();
  const std::string cache = (work_dir() / "cache").string();

  const CliResult learn = run_cli("learn-ground-truth --expr " + fixture.expr +
                                  " --resp " + fixture.resp + " --cache " +
                                  cache + " --seed 5 --grid 40");
  REQUIRE_MESSAGE(learn.exit_code == 0, learn.output);
  CHECK(learn.output.find("drug dexamethasone: cached 16 cell lines") !=
        std::string::npos);
  CHECK(std::filesystem::exists(std::filesystem::path(cache) /
                                "dexamethasone.csv"));

  const std::string out = (work_dir() / "real.csv").string();
  const CliResult run = run_cli("run-real --expr " + fixture.expr + " --resp " +
                                fixture.resp + " --cache " + cache +
                                " --n 12 --reps 3 --budget 3 --max-cells 2 "
                                "--seed 11 -o " +
                                out);
  REQUIRE_MESSAGE(run.exit_code == 0, run.output);

  const std::vector<LossCurve> curves = read_results_csv(out);
  CHECK(curves.size() == 4);
  for (const LossCurve& curve : curves) {
    CHECK(curve.key.scenario == "real");
    CHECK(curve.key.n_train == 12);
    CHECK(curve.points.size() == 4);
  }

  SUBCASE("running the sweep without the cache fails with guidance") {
    const CliResult uncached =
        run_cli("run-real --expr " + fixture.expr + " --resp " + fixture.resp +
                " --cache " + (work_dir() / "empty_cache").string() +
                " --n 12 --reps 2 -o " + (work_dir() / "never.csv").string());
    CHECK(uncached.exit_code == 2);
    CHECK(uncached.output.find("learn-ground-truth") != std::string::npos);
  }
}

TEST_CASE("plot renders one chart per grid cell") {
  const std::string out = (work_dir() / "plot_input.csv").string();
  REQUIRE(run_cli("run-synthetic --p 10 --sparsity 2 --pool 30 --n 5,7 "
                  "--reps 3 --budget 2 --seed 4 -o " +
                  out)
              .exit_code == 0);

  const std::string plot_dir = (work_dir() / "charts").string();
  const CliResult plot = run_cli("plot -i " + out + " --out-dir " + plot_dir);
  REQUIRE_MESSAGE(plot.exit_code == 0, plot.output);

  std::vector<std::filesystem::path> svgs;
  for (const auto& entry : std::filesystem::directory_iterator(plot_dir))
    if (entry.path().extension() == ".svg") svgs.push_back(entry.path());
  REQUIRE(svgs.size() == 2);
  for (const auto& path : svgs) {
    const std::string text = read_file(path);
    CHECK(text.rfind("<svg", 0) == 0);
    CHECK(text.find("</svg>") != std::string::npos);
    CHECK(text.find("feedback budget") != std::string::npos);
  }
}
