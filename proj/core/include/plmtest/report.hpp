#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "plmtest/experiment.hpp"

namespace plmtest::report {

// One CSV row: a (cell, test) pair. err and mc_stderr are derived from the
// counts, so a row round-trips exactly through the CSV.
struct ResultRow {
  std::string model;
  Index n_total = 0;
  Index p = 0;
  double rho = 0.0;
  std::string scenario;
  Index s1 = 0;
  double c1 = 0.0;
  std::string estimator;
  std::string test;
  double alpha = 0.05;
  int replicates = 0;
  int rejections = 0;
  double mean_stat = 0.0;
  double wall_ms = 0.0;
  int retries = 0;

  double err() const noexcept;
  double mc_stderr() const noexcept;

  bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kCsvHeader =
    "model,N,p,rho,scenario,s1,c1,estimator,test,alpha,replicates,rejections,err,mc_stderr,"
    "mean_stat,wall_ms,retries";

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
// Fixed 3 decimals, as in the rejection-rate tables.
std::string format_rate(double v);

std::vector<ResultRow> rows_from_results(const std::vector<harness::CellResult>& results);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::string to_csv(const std::vector<ResultRow>& rows);

// Throws Error{parse_error} on a malformed header, field count or number.
std::vector<ResultRow> parse_csv(std::istream& is);
std::vector<ResultRow> parse_csv_text(const std::string& text);

// Aligned table: one line per (model, N, p, rho, estimator, test), columns
// grouped Size | Power (Sparse) | Power (Dense).
std::string format_table(const std::vector<ResultRow>& rows);

// Dataset export for cross-checking: columns x1..xp1, z1..zp2, y, and an index
// file listing the 1-based column numbers of the X block.
void write_dataset_csv(std::ostream& os, const Dataset& d);
void write_x_index(std::ostream& os, const Dataset& d);

}  // namespace plmtest::report
