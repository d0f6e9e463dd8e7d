#include "plmtest/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "plmtest/error.hpp"
#include "plmtest/log.hpp"

namespace plmtest::harness {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop.store(true);
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

const TestTally* CellResult::find(TestKind kind) const noexcept {
  for (const auto& t : tests) {
    if (t.kind == kind) return &t;
  }
  return nullptr;
}

double CellResult::err(TestKind kind) const {
  const auto* t = find(kind);
  if (t == nullptr) throw Error(ErrorCode::config_error, "test not run in this cell");
  return static_cast<double>(t->rejections) / static_cast<double>(replicates);
}

ReplicateRecord run_replicate(const CellSpec& cell, const ExperimentConfig& cfg, int replicate) {
  constexpr int kMaxRetries = 3;
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t base =
      derive_seed(cfg.master_seed, {cell.hash(), static_cast<std::uint64_t>(replicate)});

  ReplicateRecord rec;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    const std::uint64_t seed =
        attempt == 0 ? base : derive_seed(base, Purpose::retry, static_cast<std::uint64_t>(attempt));
    try {
      const Dataset d = simgen::generate(cell.gen_config(cfg, derive_seed(seed, Purpose::generate)));
      const TestOutcome out =
          penhance::power_enhanced_test(d, cfg.test, derive_seed(seed, Purpose::replicate));
      for (const auto& m : out.methods) {
        rec.statistic.push_back(m.statistic);
        rec.reject.push_back(m.reject);
      }
      break;
    } catch (const Error& e) {
      if (!e.is_numerical()) throw;
      log::info("cell " + cell.id() + " replicate " + std::to_string(replicate) + ": " + e.what());
      if (attempt == kMaxRetries) {
        rec.failed = true;
        rec.statistic.assign(cfg.test.tests.size(), std::nan(""));
        rec.reject.assign(cfg.test.tests.size(), false);
        log::warning("cell " + cell.id() + " replicate " + std::to_string(replicate) +
                     " failed after " + std::to_string(kMaxRetries) + " retries");
      } else {
        ++rec.retries;
      }
    }
  }
  if (cfg.record_timing) {
    rec.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               start)
                         .count();
  }
  return rec;
}

CellResult summarize_cell(const CellSpec& cell, const ExperimentConfig& cfg,
                          std::vector<ReplicateRecord> records) {
  CellResult res;
  res.cell = cell;
  res.alpha = cfg.test.alpha;
  res.replicates = static_cast<int>(records.size());
  const auto k = cfg.test.tests.size();
  res.tests.resize(k);
  std::vector<double> sums(k, 0.0);
  std::vector<int> counted(k, 0);
  for (std::size_t t = 0; t < k; ++t) res.tests[t].kind = cfg.test.tests[t];

  const auto tilde_at = std::find(cfg.test.tests.begin(), cfg.test.tests.end(), TestKind::tilde);
  for (const auto& rec : records) {
    res.retries += rec.retries;
    res.wall_ms += rec.elapsed_ms;
    if (rec.failed) {
      ++res.failures;
      continue;
    }
    for (std::size_t t = 0; t < k; ++t) {
      if (rec.reject[t]) ++res.tests[t].rejections;
      sums[t] += rec.statistic[t];
      ++counted[t];
    }
    if (tilde_at != cfg.test.tests.end()) {
      const auto ti = static_cast<std::size_t>(tilde_at - cfg.test.tests.begin());
      bool violated = false;
      for (std::size_t t = 0; t < k; ++t) {
        if (t == ti) continue;
        if (rec.statistic[t] < rec.statistic[ti]) violated = true;
        if (rec.reject[ti] && !rec.reject[t]) violated = true;
      }
      if (violated) ++res.dominance_violations;
    }
  }
  for (std::size_t t = 0; t < k; ++t) {
    res.tests[t].mean_stat = counted[t] > 0 ? sums[t] / counted[t] : std::nan("");
  }
  if (res.dominance_violations > 0) {
    log::warning("cell " + cell.id() + ": " + std::to_string(res.dominance_violations) +
                 " replicates violate T_PE >= T_n dominance");
  }
  res.records = std::move(records);
  return res;
}

CellResult run_cell(const CellSpec& cell, const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<ReplicateRecord> records(static_cast<std::size_t>(cfg.replicates));
  parallel_for(records.size(), cfg.workers, [&](std::size_t r) {
    records[r] = run_replicate(cell, cfg, static_cast<int>(r));
  });
  return summarize_cell(cell, cfg, std::move(records));
}

std::vector<CellResult> run_grid(const ExperimentConfig& cfg,
                                 const std::function<void(std::size_t, std::size_t)>& progress) {
  validate(cfg);
  const auto cells = expand_cells(cfg);
  const auto reps = static_cast<std::size_t>(cfg.replicates);

  std::vector<std::vector<ReplicateRecord>> records(cells.size(),
                                                    std::vector<ReplicateRecord>(reps));
  std::vector<std::atomic<std::size_t>> remaining(cells.size());
  for (auto& r : remaining) r.store(reps);
  std::atomic<std::size_t> cells_done{0};
  std::mutex progress_mutex;

  parallel_for(cells.size() * reps, cfg.workers, [&](std::size_t task) {
    const std::size_t c = task / reps;
    const std::size_t r = task % reps;
    records[c][r] = run_replicate(cells[c], cfg, static_cast<int>(r));
    if (remaining[c].fetch_sub(1) == 1 && progress) {
      std::lock_guard lock(progress_mutex);
      progress(++cells_done, cells.size());
    }
  });

  std::vector<CellResult> results;
  results.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    results.push_back(summarize_cell(cells[c], cfg, std::move(records[c])));
  }
  return results;
}

}  // namespace plmtest::harness
