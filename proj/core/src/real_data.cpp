#include "plmtest/real_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "plmtest/error.hpp"

namespace plmtest::real_data {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  return in;
}

}  // namespace

Table read_csv(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::parse_error, "CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split_line(line);
  const auto cols = t.header.size();

  std::vector<double> values;
  Index rows = 0;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != cols) {
      throw Error(ErrorCode::parse_error, "CSV line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(cols) + " fields, got " +
                                              std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const auto& f = fields[j];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) {
        throw Error(ErrorCode::parse_error, "CSV line " + std::to_string(line_no) + ", column '" +
                                                t.header[j] + "': not a number '" + f + "'");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::non_finite_entry, "CSV line " + std::to_string(line_no) +
                                                     ", column '" + t.header[j] + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  t.values.resize(rows, static_cast<Index>(cols));
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < static_cast<Index>(cols); ++j) {
      t.values(i, j) = values[static_cast<std::size_t>(i) * cols + static_cast<std::size_t>(j)];
    }
  }
  return t;
}

Table read_csv_file(const std::string& path) {
  auto in = open(path);
  return read_csv(in);
}

std::vector<Index> read_index(std::istream& is) {
  std::vector<Index> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw Error(ErrorCode::parse_error,
                  "index file line " + std::to_string(line_no) + ": not an integer '" + line + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<Index> read_index_file(const std::string& path) {
  auto in = open(path);
  return read_index(in);
}

Dataset build_dataset(const Table& table, const std::string& response,
                      const std::vector<Index>& x_index) {
  const auto cols = static_cast<Index>(table.header.size());
  const auto resp_it = std::find(table.header.begin(), table.header.end(), response);
  if (resp_it == table.header.end()) {
    throw Error(ErrorCode::index_out_of_range, "response column '" + response + "' not found");
  }
  const auto resp = static_cast<Index>(resp_it - table.header.begin());

  std::vector<bool> is_x(static_cast<std::size_t>(cols), false);
  for (const Index one_based : x_index) {
    const Index j = one_based - 1;
    if (j < 0 || j >= cols) {
      throw Error(ErrorCode::index_out_of_range,
                  "X index " + std::to_string(one_based) + " outside 1.." + std::to_string(cols));
    }
    if (j == resp) {
      throw Error(ErrorCode::index_out_of_range, "X index names the response column");
    }
    if (is_x[static_cast<std::size_t>(j)]) {
      throw Error(ErrorCode::index_out_of_range, "X index " + std::to_string(one_based) +
                                                     " listed twice");
    }
    is_x[static_cast<std::size_t>(j)] = true;
  }
  std::vector<Index> xs;
  std::vector<Index> zs;
  for (Index j = 0; j < cols; ++j) {
    if (j == resp) continue;
    (is_x[static_cast<std::size_t>(j)] ? xs : zs).push_back(j);
  }
  if (xs.empty() || zs.empty()) {
    throw Error(ErrorCode::index_out_of_range,
                "X index must name a nonempty strict subset of the predictor columns");
  }
  Dataset d;
  d.y = table.values.col(resp);
  d.x = table.values(Eigen::all, xs);
  d.z = table.values(Eigen::all, zs);
  return d;
}

RealDataReport run(const Dataset& raw, const RealDataOptions& opts) {
  validate(raw);
  const Dataset d = standardize(raw);
  RealDataReport report;
  report.rows = d.rows();
  report.p_x = d.p1();
  report.p_z = d.p2();

  const auto h0 = penhance::power_enhanced_multi_split(d, opts.test, opts.splits,
                                                       derive_seed(opts.seed, {1}), opts.rule);
  report.hypotheses.push_back({"H0: beta_X = 0", h0.aggregated, h0.retries});
  const auto h0_swapped = penhance::power_enhanced_multi_split(
      d.swapped_roles(), opts.test, opts.splits, derive_seed(opts.seed, {2}), opts.rule);
  report.hypotheses.push_back({"H0': beta_Z = 0", h0_swapped.aggregated, h0_swapped.retries});
  return report;
}

std::string format_pvalue(double p) {
  if (p < 0.001) return "<0.001";
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << p;
  return os.str();
}

std::string format_report(const RealDataReport& report) {
  std::ostringstream os;
  os << "n = " << report.rows << ", |X| = " << report.p_x << ", |Z| = " << report.p_z << "\n\n";
  std::size_t name_width = 10;
  for (const auto& h : report.hypotheses) name_width = std::max(name_width, h.name.size());
  os << std::left << std::setw(static_cast<int>(name_width)) << "hypothesis";
  if (!report.hypotheses.empty()) {
    for (const auto& m : report.hypotheses.front().methods) {
      os << "  " << std::right << std::setw(8) << to_string(m.kind);
    }
  }
  os << '\n';
  for (const auto& h : report.hypotheses) {
    os << std::left << std::setw(static_cast<int>(name_width)) << h.name;
    for (const auto& m : h.methods) {
      os << "  " << std::right << std::setw(8) << format_pvalue(m.p_value);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace plmtest::real_data
