#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plmtest/penhance.hpp"
#include "plmtest/simgen.hpp"

namespace plmtest::harness {

struct GridSpec {
  std::vector<Index> n_total{200};
  std::vector<Index> p{1000};  // total dimension, split evenly into p1 = p2 = p/2
  std::vector<double> rho{0.5};
  std::vector<simgen::Model> models{simgen::Model::m1};
};

// One scenario block; S2 lists s1 directly, S3 may give s1 as a percentage of
// p1 (floor(pct * p1 / 100)), S1 ignores both.
struct ScenarioSpec {
  simgen::Scenario kind = simgen::Scenario::s1_null;
  std::vector<Index> s1;
  std::vector<int> s1_percent;
};

struct ExperimentConfig {
  GridSpec grid;
  std::vector<ScenarioSpec> scenarios{ScenarioSpec{}};
  Index s2 = 20;
  double c2 = 0.5;
  double noise_sd = 1.0;
  penhance::TestOptions test;
  int replicates = 500;
  std::uint64_t master_seed = 20240601;
  int workers = 1;
  bool record_timing = true;
};

// A fully concrete grid cell.
struct CellSpec {
  simgen::Model model = simgen::Model::m1;
  Index n_total = 0;
  Index p = 0;
  Index p1 = 0;
  Index p2 = 0;
  double rho = 0.0;
  simgen::Scenario scenario = simgen::Scenario::s1_null;
  Index s1 = 0;
  double c1 = 0.0;
  std::string estimator;

  // Canonical text id; its hash keys the cell's seed stream.
  std::string id() const;
  std::uint64_t hash() const;

  simgen::GenConfig gen_config(const ExperimentConfig& cfg, std::uint64_t seed) const;
};

// Throws Error{config_error} describing the first problem found.
void validate(const ExperimentConfig& cfg);

// Cells in table order: model, N, p, rho, then scenario blocks.
std::vector<CellSpec> expand_cells(const ExperimentConfig& cfg);

// JSON schema (every key optional; defaults above):
// {
//   "grid": {"N": [200], "p": [1000], "rho": [0.5], "model": ["M1"]},
//   "scenarios": [{"scenario": "S1"}, {"scenario": "S2", "s1": [1, 3, 5]},
//                 {"scenario": "S3", "s1_percent": [30, 50, 70]}],
//   "gamma": {"s2": 20, "c2": 0.5},
//   "noise_sd": 1.0,
//   "nuisance": {"method": "lasso", "folds": 10, "path_length": 100,
//                "lambda_ratio": 0.001, "trees": 100, "mtry": 0, "min_leaf": 5},
//   "tests": ["tilde", "pe_hard", "pe_soft"],
//   "pe": {"lambda": 0.9, "a_np": 5, "r_boot": 30, "theory_threshold": false},
//   "alpha": 0.05, "replicates": 500, "master_seed": 20240601, "workers": 1,
//   "timing": true
// }
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json_text(const ExperimentConfig& cfg);

// A single generator config as JSON:
// {"N": 200, "p1": 500, "p2": 500, "rho": 0.5, "model": "M1", "s1": 0, "c1": 0,
//  "s2": 20, "c2": 0.5, "noise_sd": 1.0, "seed": 1}
std::string gen_config_to_json_text(const simgen::GenConfig& g);
simgen::GenConfig gen_config_from_json_text(const std::string& text);

// "quick": 200 replicates, p in {500, 1000}, 50 trees.
// "paper": 500 replicates, N in {200, 300}, p in {1000, 1500, 2000},
//          rho in {0.3, 0.5, 0.7}, models M1-M3, all three scenario blocks.
void apply_preset(ExperimentConfig& cfg, const std::string& name);

}  // namespace plmtest::harness
