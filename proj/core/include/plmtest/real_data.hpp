#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "plmtest/penhance.hpp"

namespace plmtest::real_data {

struct Table {
  std::vector<std::string> header;
  Matrix values;  // rows x columns, all numeric
};

// Header row plus numeric rows. Throws Error{parse_error} on ragged rows or
// non-numeric fields and Error{non_finite_entry} on NaN/Inf.
Table read_csv(std::istream& is);
Table read_csv_file(const std::string& path);

// One 1-based column index per line; blank lines are skipped.
std::vector<Index> read_index(std::istream& is);
std::vector<Index> read_index_file(const std::string& path);

// X = indexed columns, Z = every other non-response column. The index must name
// a nonempty strict subset of the predictor columns (Error{index_out_of_range}
// otherwise). The result is not standardized.
Dataset build_dataset(const Table& table, const std::string& response,
                      const std::vector<Index>& x_index);

struct RealDataOptions {
  penhance::TestOptions test;
  int splits = 30;
  qtest::Aggregation rule = qtest::Aggregation::quantile;
  std::uint64_t seed = 20240601;
};

struct HypothesisRow {
  std::string name;  // "H0: beta_X = 0" or "H0': beta_Z = 0"
  std::vector<MethodResult> methods;
  int retries = 0;
};

struct RealDataReport {
  Index rows = 0;
  Index p_x = 0;
  Index p_z = 0;
  std::vector<HypothesisRow> hypotheses;
};

// Standardizes every column, then runs the multi-split test for beta_X = 0 and
// for beta_Z = 0 (roles swapped).
RealDataReport run(const Dataset& raw, const RealDataOptions& opts);

// p-values below 0.001 print as "<0.001", others with 3 decimals.
std::string format_pvalue(double p);
std::string format_report(const RealDataReport& report);

}  // namespace plmtest::real_data
