#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "plmtest/config.hpp"
#include "plmtest/error.hpp"
#include "plmtest/experiment.hpp"
#include "plmtest/log.hpp"
#include "plmtest/real_data.hpp"
#include "plmtest/report.hpp"
#include "selfcheck.hpp"

namespace fs = std::filesystem;
using namespace plmtest;

namespace {

enum Exit { ok = 0, config_failure = 1, data_failure = 2, numerical_failure = 3 };

int exit_code(const Error& e, bool data_command) {
  if (e.is_numerical()) return numerical_failure;
  switch (e.code()) {
    case ErrorCode::config_error:
    case ErrorCode::unknown_method:
      return config_failure;
    default:
      return data_command ? data_failure : config_failure;
  }
}

struct SimulateArgs {
  std::string config;
  std::string preset;
  std::string out = "results";
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
};

int simulate(const SimulateArgs& args) {
  auto cfg = harness::load_config(args.config);
  if (!args.preset.empty()) harness::apply_preset(cfg, args.preset);
  if (args.workers) cfg.workers = *args.workers;
  if (args.seed) cfg.master_seed = *args.seed;
  if (args.replicates) cfg.replicates = *args.replicates;
  harness::validate(cfg);

  const auto cells = harness::expand_cells(cfg);
  std::clog << "running " << cells.size() << " cells x " << cfg.replicates << " replicates on "
            << cfg.workers << " worker(s)\n";
  const auto results = harness::run_grid(cfg, [](std::size_t done, std::size_t total) {
    std::clog << "  cell " << done << "/" << total << " done\n";
  });
  const auto rows = report::rows_from_results(results);

  fs::create_directories(args.out);
  {
    std::ofstream csv(fs::path(args.out) / "results.csv");
    report::write_csv(csv, rows);
    if (!csv) throw Error(ErrorCode::io_error, "cannot write results.csv");
  }
  const std::string table = report::format_table(rows);
  {
    std::ofstream txt(fs::path(args.out) / "table.txt");
    txt << table;
  }
  {
    std::ofstream used(fs::path(args.out) / "config.json");
    used << harness::config_to_json_text(cfg) << '\n';
  }
  std::cout << table;
  int violations = 0;
  for (const auto& r : results) violations += r.dominance_violations;
  if (violations > 0) {
    std::cerr << "error: " << violations << " replicates violate T_PE >= T_n\n";
    return numerical_failure;
  }
  return ok;
}

struct TestArgs {
  std::string data;
  std::string response;
  std::string x_index;
  std::string method = "lasso";
  int splits = 30;
  double alpha = 0.05;
  std::uint64_t seed = 20240601;
  std::string aggregation = "quantile";
  int trees = 100;
};

int test(const TestArgs& args) {
  real_data::RealDataOptions opts;
  opts.test.nuisance.method = args.method;
  opts.test.nuisance.forest.trees = args.trees;
  opts.test.alpha = args.alpha;
  opts.test.tests = {TestKind::tilde, TestKind::pe_hard, TestKind::pe_soft};
  opts.splits = args.splits;
  opts.seed = args.seed;
  opts.rule = qtest::parse_aggregation(args.aggregation);
  if (!nuisance::has_estimator(args.method)) {
    throw Error(ErrorCode::unknown_method, "unknown method '" + args.method + "'");
  }
  if (args.splits < 1) throw Error(ErrorCode::config_error, "--splits must be >= 1");
  if (!(args.alpha > 0.0 && args.alpha < 1.0)) {
    throw Error(ErrorCode::config_error, "--alpha must lie in (0, 1)");
  }

  const auto table = real_data::read_csv_file(args.data);
  const auto index = real_data::read_index_file(args.x_index);
  const Dataset d = real_data::build_dataset(table, args.response, index);
  const auto rep = real_data::run(d, opts);
  std::cout << real_data::format_report(rep);
  return ok;
}

int selftest() {
  int failed = 0;
  for (const auto& c : oracle::run_selfchecks()) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    if (!c.passed) ++failed;
  }
  std::cout << (failed == 0 ? "all checks passed\n" : std::to_string(failed) + " check(s) failed\n");
  return failed == 0 ? ok : numerical_failure;
}

struct GenerateArgs {
  std::string out = "dataset";
  Index n = 200;
  Index p = 1000;
  double rho = 0.5;
  std::string model = "M1";
  std::string scenario = "S1";
  Index s1 = 0;
  std::uint64_t seed = 1;
};

int generate(const GenerateArgs& args) {
  simgen::GenConfig cfg;
  cfg.n_total = args.n;
  if (args.p % 2 != 0) throw Error(ErrorCode::config_error, "p must be even");
  cfg.p1 = cfg.p2 = args.p / 2;
  cfg.rho = args.rho;
  cfg.model = simgen::parse_model(args.model);
  const auto scen = simgen::parse_scenario(args.scenario);
  cfg.s1 = scen == simgen::Scenario::s1_null ? 0 : args.s1;
  cfg.c1 = scen == simgen::Scenario::s1_null ? 0.0 : simgen::scenario_signal(scen, args.s1);
  cfg.seed = args.seed;
  const Dataset d = simgen::generate(cfg);
  fs::create_directories(args.out);
  std::ofstream csv(fs::path(args.out) / "data.csv");
  report::write_dataset_csv(csv, d);
  std::ofstream idx(fs::path(args.out) / "x_index.txt");
  report::write_x_index(idx, d);
  std::cout << "wrote " << (fs::path(args.out) / "data.csv").string() << " and x_index.txt\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic-form and power-enhanced tests for partially linear models"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Log per-replicate retries");
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo grid");
  sim_cmd->add_option("--config", sim.config, "JSON experiment config")->required();
  sim_cmd->add_option("--preset", sim.preset, "quick or paper")
      ->check(CLI::IsMember({"quick", "paper"}));
  sim_cmd->add_option("--out", sim.out, "Output directory");
  sim_cmd->add_option("--workers", sim.workers, "Worker threads")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Master seed");
  sim_cmd->add_option("--replicates", sim.replicates, "Override the replicate count")
      ->check(CLI::PositiveNumber);

  TestArgs tst;
  auto* test_cmd = app.add_subcommand("test", "Test beta_X = 0 and beta_Z = 0 on a CSV");
  test_cmd->add_option("--data", tst.data, "CSV with a header row")->required();
  test_cmd->add_option("--response", tst.response, "Response column name")->required();
  test_cmd->add_option("--x-index", tst.x_index, "File of 1-based X column indices")->required();
  test_cmd->add_option("--method", tst.method, "lasso or forest");
  test_cmd->add_option("--splits", tst.splits, "Number of random splits M");
  test_cmd->add_option("--alpha", tst.alpha, "Significance level");
  test_cmd->add_option("--seed", tst.seed, "Seed");
  test_cmd->add_option("--aggregation", tst.aggregation, "quantile or twice_median");
  test_cmd->add_option("--trees", tst.trees, "Forest size");

  auto* self_cmd = app.add_subcommand("selftest", "Run oracle-equivalence and invariant checks");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write one simulated dataset as CSV");
  gen_cmd->add_option("--out", gen.out, "Output directory");
  gen_cmd->add_option("--n", gen.n, "Rows");
  gen_cmd->add_option("--p", gen.p, "Total dimension (even)");
  gen_cmd->add_option("--rho", gen.rho, "Toeplitz correlation");
  gen_cmd->add_option("--model", gen.model, "M1, M2 or M3");
  gen_cmd->add_option("--scenario", gen.scenario, "S1, S2 or S3");
  gen_cmd->add_option("--s1", gen.s1, "Active X coefficients");
  gen_cmd->add_option("--seed", gen.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_failure;
  }
  log::set_level(quiet ? log::Level::quiet : verbose ? log::Level::info : log::Level::warning);

  const bool data_command = test_cmd->parsed() || gen_cmd->parsed();
  try {
    if (sim_cmd->parsed()) return simulate(sim);
    if (test_cmd->parsed()) return test(tst);
    if (self_cmd->parsed()) return selftest();
    if (gen_cmd->parsed()) return generate(gen);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e, data_command);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return numerical_failure;
  }
  return ok;
}
