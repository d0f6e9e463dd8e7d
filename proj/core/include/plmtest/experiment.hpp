#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "plmtest/config.hpp"

namespace plmtest::harness {

// Calls fn(i) for i in [0, count) on `workers` threads. Workers pull the next
// index from a shared counter, so scheduling never affects which work item a
// result belongs to. The first exception thrown is rethrown after all workers
// stop.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

struct ReplicateRecord {
  std::vector<double> statistic;  // per requested test, in cfg.test.tests order
  std::vector<bool> reject;
  int retries = 0;
  bool failed = false;  // every attempt hit a numerical error
  double elapsed_ms = 0.0;
};

struct TestTally {
  TestKind kind = TestKind::tilde;
  int rejections = 0;
  double mean_stat = 0.0;
};

struct CellResult {
  CellSpec cell;
  double alpha = 0.05;
  int replicates = 0;
  std::vector<TestTally> tests;
  int retries = 0;
  int failures = 0;
  double wall_ms = 0.0;
  // Replicates where an enhanced statistic fell below the plain one or a
  // plain rejection was not matched by the enhanced test.
  int dominance_violations = 0;
  std::vector<ReplicateRecord> records;

  const TestTally* find(TestKind kind) const noexcept;
  double err(TestKind kind) const;
};

// Replicate r uses the child seed derive_seed(master_seed, {cell hash, r}); a
// replicate hitting a numerical error (e.g. Lambda-hat <= 0) is redrawn with a
// fresh seed up to 3 times and otherwise counted as a non-rejection.
ReplicateRecord run_replicate(const CellSpec& cell, const ExperimentConfig& cfg, int replicate);

// Folds replicate records (in replicate order) into a cell summary.
CellResult summarize_cell(const CellSpec& cell, const ExperimentConfig& cfg,
                          std::vector<ReplicateRecord> records);

CellResult run_cell(const CellSpec& cell, const ExperimentConfig& cfg);

// Runs every cell, parallel over (cell, replicate) tasks. Results are in cell
// order and independent of cfg.workers. `progress`, if set, is called after
// each finished cell with (cells done, cells total).
std::vector<CellResult> run_grid(
    const ExperimentConfig& cfg,
    const std::function<void(std::size_t, std::size_t)>& progress = {});

}  // namespace plmtest::harness
