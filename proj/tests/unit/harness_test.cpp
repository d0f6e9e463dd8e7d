#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "plmtest/config.hpp"
#include "plmtest/error.hpp"
#include "plmtest/experiment.hpp"
#include "plmtest/real_data.hpp"
#include "plmtest/report.hpp"

using namespace plmtest;
using namespace plmtest::harness;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::io_error;
}

ExperimentConfig tiny_config() {
  return config_from_json_text(R"({
    "grid": {"N": [60], "p": [20, 30], "rho": [0.5], "model": ["M1"]},
    "scenarios": [{"scenario": "S1"}, {"scenario": "S2", "s1": [2]}],
    "gamma": {"s2": 5, "c2": 0.5},
    "tests": ["tilde", "pe_hard", "pe_soft"],
    "pe": {"r_boot": 5},
    "replicates": 6,
    "master_seed": 11,
    "timing": false
  })");
}

}  // namespace

TEST(Config, DefaultsAndParsing) {
  const auto cfg = config_from_json_text("{}");
  EXPECT_EQ(cfg.replicates, 500);
  EXPECT_EQ(cfg.test.nuisance.method, "lasso");
  EXPECT_EQ(cfg.test.pe.lambda_k, 0.9);
  EXPECT_EQ(cfg.test.pe.a_np, 5.0);
  EXPECT_EQ(cfg.test.pe.r_boot, 30);
  EXPECT_EQ(cfg.s2, 20);
  EXPECT_EQ(cfg.c2, 0.5);
  EXPECT_NO_THROW(validate(cfg));

  const auto t = tiny_config();
  EXPECT_EQ(t.grid.p, (std::vector<Index>{20, 30}));
  EXPECT_EQ(t.test.tests.size(), 3u);
  EXPECT_FALSE(t.record_timing);
}

TEST(Config, RoundTripsThroughJson) {
  const auto a = tiny_config();
  const auto b = config_from_json_text(config_to_json_text(a));
  EXPECT_EQ(config_to_json_text(a), config_to_json_text(b));
}

TEST(Config, Errors) {
  EXPECT_EQ(code_of([] { config_from_json_text("{not json"); }), ErrorCode::config_error);
  EXPECT_EQ(code_of([] { validate(config_from_json_text(R"({"grid": {"p": [999]}})")); }),
            ErrorCode::config_error);
  EXPECT_EQ(code_of([] { validate(config_from_json_text(R"({"alpha": 1.5})")); }),
            ErrorCode::config_error);
  EXPECT_EQ(code_of([] { validate(config_from_json_text(R"({"nuisance": {"method": "svm"}})")); }),
            ErrorCode::config_error);
  EXPECT_EQ(code_of([] {
              validate(config_from_json_text(
                  R"({"grid": {"p": [20]}, "scenarios": [{"scenario": "S2", "s1": [11]}]})"));
            }),
            ErrorCode::config_error);
  EXPECT_EQ(code_of([] { load_config("/nonexistent/config.json"); }), ErrorCode::config_error);
}

TEST(Config, GeneratorConfigRoundTrip) {
  simgen::GenConfig g;
  g.model = simgen::Model::m2;
  g.s1 = 3;
  g.c1 = simgen::scenario_signal(simgen::Scenario::s2_sparse, 3);
  g.seed = 99;
  const auto back = gen_config_from_json_text(gen_config_to_json_text(g));
  EXPECT_EQ(back.model, g.model);
  EXPECT_EQ(back.c1, g.c1);
  EXPECT_EQ(back.seed, g.seed);
  EXPECT_EQ(simgen::generate(back).y, simgen::generate(g).y);
}

TEST(Cells, ModelOneTableBlock) {
  const auto cfg = config_from_json_text(R"({
    "grid": {"N": [200, 300], "p": [1000, 1500, 2000], "rho": [0.5], "model": ["M1"]},
    "scenarios": [{"scenario": "S1"}, {"scenario": "S2", "s1": [1, 3, 5]},
                  {"scenario": "S3", "s1_percent": [30, 50, 70]}]
  })");
  const auto cells = expand_cells(cfg);
  EXPECT_EQ(cells.size(), 6u * 7u);
  EXPECT_EQ(cells[0].id(), "M1|N=200|p=1000|rho=0.5|S1|s1=0|c1=0|lasso");
  EXPECT_EQ(cells[4].scenario, simgen::Scenario::s3_dense);
  EXPECT_EQ(cells[4].s1, 150);  // floor(30% of p1 = 500)
  EXPECT_DOUBLE_EQ(cells[4].c1, 1.0 / std::sqrt(150.0));
  EXPECT_DOUBLE_EQ(cells[3].c1, std::pow(5.0, -2.0 / 3.0));
  EXPECT_NE(cells[0].hash(), cells[1].hash());
  EXPECT_NO_THROW(validate(cfg));
}

TEST(Cells, Presets) {
  auto cfg = config_from_json_text("{}");
  apply_preset(cfg, "paper");
  EXPECT_EQ(expand_cells(cfg).size(), 2u * 3u * 3u * 3u * 7u);
  apply_preset(cfg, "quick");
  EXPECT_EQ(cfg.replicates, 200);
  EXPECT_THROW(apply_preset(cfg, "huge"), Error);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 5) throw Error(ErrorCode::io_error, "boom");
                            }),
               Error);
}

TEST(RunGrid, DeterministicAcrossWorkerCounts) {
  auto cfg = tiny_config();
  cfg.workers = 1;
  const auto one = report::to_csv(report::rows_from_results(run_grid(cfg)));
  cfg.workers = 3;
  const auto three = report::to_csv(report::rows_from_results(run_grid(cfg)));
  EXPECT_EQ(one, three);
  // 4 cells x 3 tests plus the header.
  EXPECT_EQ(std::count(one.begin(), one.end(), '\n'), 13);
}

TEST(RunGrid, CellResultsAreConsistent) {
  const auto cfg = tiny_config();
  const auto results = run_grid(cfg);
  ASSERT_EQ(results.size(), 4u);
  for (const auto& r : results) {
    EXPECT_EQ(r.replicates, 6);
    EXPECT_EQ(r.dominance_violations, 0);
    EXPECT_EQ(r.wall_ms, 0.0);
    ASSERT_EQ(r.records.size(), 6u);
    int tilde = 0;
    for (const auto& rec : r.records) tilde += rec.reject[0] ? 1 : 0;
    EXPECT_EQ(r.find(TestKind::tilde)->rejections, tilde);
    EXPECT_EQ(r.err(TestKind::tilde), tilde / 6.0);
  }
  // A single cell run alone matches its grid counterpart.
  const auto alone = run_cell(results[2].cell, cfg);
  EXPECT_EQ(alone.records[3].statistic, results[2].records[3].statistic);
}

TEST(Report, CsvHeaderAndFormatting) {
  report::ResultRow r;
  r.model = "M1";
  r.n_total = 200;
  r.p = 1000;
  r.rho = 0.5;
  r.scenario = "S1";
  r.estimator = "lasso";
  r.test = "tilde";
  r.replicates = 500;
  r.rejections = 26;
  r.mean_stat = 0.0123;
  const auto csv = report::to_csv({r});
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,N,p,rho,scenario,s1,c1,estimator,test,alpha,replicates,rejections,err,"
            "mc_stderr,mean_stat,wall_ms,retries");
  EXPECT_NE(csv.find(",500,26,0.052,"), std::string::npos);
  EXPECT_EQ(report::format_rate(1.0), "1.000");
  EXPECT_NEAR(r.mc_stderr(), std::sqrt(0.052 * 0.948 / 500), 1e-15);
}

TEST(Report, CsvRoundTrip) {
  const auto rows = report::rows_from_results(run_grid(tiny_config()));
  const auto parsed = report::parse_csv_text(report::to_csv(rows));
  EXPECT_EQ(parsed, rows);
  EXPECT_THROW(report::parse_csv_text("bad header\n"), Error);
}

TEST(Report, TableGroupsScenarios) {
  const auto rows = report::rows_from_results(run_grid(tiny_config()));
  const auto table = report::format_table(rows);
  EXPECT_NE(table.find("Size"), std::string::npos);
  EXPECT_NE(table.find("Power (Sparse)"), std::string::npos);
  EXPECT_NE(table.find("S2 s1=2"), std::string::npos);
  EXPECT_NE(table.find("pe_soft"), std::string::npos);
}

TEST(RealData, CsvParsing) {
  std::istringstream csv("a,b,y\n1,2,3\n4,5,6\n");
  const auto t = real_data::read_csv(csv);
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b", "y"}));
  EXPECT_EQ(t.values(1, 2), 6.0);
  std::istringstream ragged("a,b\n1\n");
  EXPECT_EQ(code_of([&] { real_data::read_csv(ragged); }), ErrorCode::parse_error);
  std::istringstream text("a,b\n1,x\n");
  EXPECT_EQ(code_of([&] { real_data::read_csv(text); }), ErrorCode::parse_error);
  std::istringstream idx("1\n\n3\n");
  EXPECT_EQ(real_data::read_index(idx), (std::vector<Index>{1, 3}));
}

TEST(RealData, BuildDataset) {
  std::istringstream csv("x1,z1,y,x2\n1,2,3,4\n5,6,7,8\n");
  const auto t = real_data::read_csv(csv);
  const auto d = real_data::build_dataset(t, "y", {1, 4});
  EXPECT_EQ(d.p1(), 2);
  EXPECT_EQ(d.p2(), 1);
  EXPECT_EQ(d.x(1, 1), 8.0);
  EXPECT_EQ(d.z(0, 0), 2.0);
  EXPECT_EQ(d.y(1), 7.0);
  EXPECT_EQ(code_of([&] { real_data::build_dataset(t, "y", {5}); }), ErrorCode::index_out_of_range);
  EXPECT_EQ(code_of([&] { real_data::build_dataset(t, "y", {3}); }), ErrorCode::index_out_of_range);
  EXPECT_EQ(code_of([&] { real_data::build_dataset(t, "y", {1, 2, 4}); }),
            ErrorCode::index_out_of_range);
  EXPECT_EQ(code_of([&] { real_data::build_dataset(t, "w", {1}); }), ErrorCode::index_out_of_range);
}

TEST(RealData, PValueFormatting) {
  EXPECT_EQ(real_data::format_pvalue(0.0004), "<0.001");
  EXPECT_EQ(real_data::format_pvalue(0.33), "0.330");
}

TEST(RealData, SignalInXAndNoiseInZ) {
  simgen::GenConfig g;
  g.n_total = 100;
  g.p1 = 30;
  g.p2 = 30;
  g.s1 = 30;
  g.c1 = 0.4;
  g.c2 = 0.0;
  g.seed = 5;
  const auto d = simgen::generate(g);
  std::ostringstream csv;
  report::write_dataset_csv(csv, d);
  std::ostringstream idx;
  report::write_x_index(idx, d);
  std::istringstream csv_in(csv.str());
  std::istringstream idx_in(idx.str());
  const auto loaded = real_data::build_dataset(real_data::read_csv(csv_in), "y",
                                               real_data::read_index(idx_in));
  EXPECT_LE((loaded.x - d.x).cwiseAbs().maxCoeff(), 0.0);

  real_data::RealDataOptions opts;
  opts.splits = 10;
  opts.test.tests = {TestKind::tilde, TestKind::pe_hard, TestKind::pe_soft};
  opts.test.pe.r_boot = 10;
  const auto rep = real_data::run(loaded, opts);
  ASSERT_EQ(rep.hypotheses.size(), 2u);
  EXPECT_LT(rep.hypotheses[0].methods[0].p_value, 0.001);
  EXPECT_GT(rep.hypotheses[1].methods[0].p_value, 0.01);
  const auto text = real_data::format_report(rep);
  EXPECT_NE(text.find("<0.001"), std::string::npos);
  EXPECT_NE(text.find("H0'"), std::string::npos);
}

TEST(RealData, NullPValuesAreRoughlyUniform) {
  // With beta = 0 and g = 0 both hypotheses hold; single-split p-values
  // should then be uniform.
  std::vector<double> px;
  std::vector<double> pz;
  real_data::RealDataOptions opts;
  opts.splits = 1;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    simgen::GenConfig g;
    g.n_total = 80;
    g.p1 = 20;
    g.p2 = 20;
    g.c2 = 0.0;
    g.seed = seed;
    opts.seed = seed;
    const auto rep = real_data::run(simgen::generate(g), opts);
    px.push_back(rep.hypotheses[0].methods[0].p_value);
    pz.push_back(rep.hypotheses[1].methods[0].p_value);
  }
  const auto uniform = [](double v) { return std::clamp(v, 0.0, 1.0); };
  EXPECT_GT(oracle::ks_pvalue(oracle::ks_statistic(px, uniform), px.size()), 0.01);
  EXPECT_GT(oracle::ks_pvalue(oracle::ks_statistic(pz, uniform), pz.size()), 0.01);
}

TEST(Oracles, KolmogorovSmirnov) {
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back((i + 0.5) / 200.0);
  const auto uniform = [](double v) { return v; };
  EXPECT_NEAR(oracle::ks_statistic(grid, uniform), 0.0025, 1e-12);
  EXPECT_GT(oracle::ks_pvalue(0.0025, 200), 0.99);
  EXPECT_LT(oracle::ks_pvalue(0.2, 200), 1e-6);
  // Critical value at level 0.05 for large n is about 1.358 / sqrt(n).
  EXPECT_NEAR(oracle::ks_pvalue(1.358 / std::sqrt(10000.0), 10000), 0.05, 0.002);
}
