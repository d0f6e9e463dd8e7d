#include "plmtest/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "plmtest/error.hpp"

namespace plmtest::report {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, std::string_view what) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::parse_error, "bad " + std::string(what) + " value '" + s + "'");
  }
  return value;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

double ResultRow::err() const noexcept {
  return replicates > 0 ? static_cast<double>(rejections) / replicates : 0.0;
}

double ResultRow::mc_stderr() const noexcept {
  if (replicates <= 0) return 0.0;
  const double e = err();
  return std::sqrt(e * (1.0 - e) / replicates);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_rate(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

std::vector<ResultRow> rows_from_results(const std::vector<harness::CellResult>& results) {
  std::vector<ResultRow> rows;
  for (const auto& cell : results) {
    for (const auto& t : cell.tests) {
      ResultRow r;
      r.model = std::string(simgen::to_string(cell.cell.model));
      r.n_total = cell.cell.n_total;
      r.p = cell.cell.p;
      r.rho = cell.cell.rho;
      r.scenario = std::string(simgen::to_string(cell.cell.scenario));
      r.s1 = cell.cell.s1;
      r.c1 = cell.cell.c1;
      r.estimator = cell.cell.estimator;
      r.test = std::string(to_string(t.kind));
      r.alpha = cell.alpha;
      r.replicates = cell.replicates;
      r.rejections = t.rejections;
      r.mean_stat = t.mean_stat;
      r.wall_ms = cell.wall_ms;
      r.retries = cell.retries;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.model << ',' << r.n_total << ',' << r.p << ',' << format_double(r.rho) << ','
       << r.scenario << ',' << r.s1 << ',' << format_double(r.c1) << ',' << r.estimator << ','
       << r.test << ',' << format_double(r.alpha) << ',' << r.replicates << ',' << r.rejections
       << ',' << format_rate(r.err()) << ',' << format_double(r.mc_stderr()) << ','
       << format_double(r.mean_stat) << ',' << format_double(r.wall_ms) << ',' << r.retries
       << '\n';
  }
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

std::vector<ResultRow> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw Error(ErrorCode::parse_error, "results CSV: unexpected header");
  }
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 17) {
      throw Error(ErrorCode::parse_error,
                  "results CSV line " + std::to_string(line_no) + ": expected 17 fields");
    }
    ResultRow r;
    r.model = f[0];
    r.n_total = parse_number<Index>(f[1], "N");
    r.p = parse_number<Index>(f[2], "p");
    r.rho = parse_number<double>(f[3], "rho");
    r.scenario = f[4];
    r.s1 = parse_number<Index>(f[5], "s1");
    r.c1 = parse_number<double>(f[6], "c1");
    r.estimator = f[7];
    r.test = f[8];
    r.alpha = parse_number<double>(f[9], "alpha");
    r.replicates = parse_number<int>(f[10], "replicates");
    r.rejections = parse_number<int>(f[11], "rejections");
    const double err = parse_number<double>(f[12], "err");
    if (std::abs(err - r.err()) > 5e-4 + 1e-12) {
      throw Error(ErrorCode::parse_error,
                  "results CSV line " + std::to_string(line_no) + ": err disagrees with counts");
    }
    r.mean_stat = f[14] == "nan" ? std::nan("") : parse_number<double>(f[14], "mean_stat");
    r.wall_ms = parse_number<double>(f[15], "wall_ms");
    r.retries = parse_number<int>(f[16], "retries");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> parse_csv_text(const std::string& text) {
  std::istringstream is(text);
  return parse_csv(is);
}

std::string format_table(const std::vector<ResultRow>& rows) {
  // Column keys in order of first appearance within each scenario group.
  std::vector<std::pair<std::string, std::string>> columns;  // (scenario, label)
  auto column_label = [](const ResultRow& r) {
    if (r.scenario == "S1") return std::string("S1");
    return r.scenario + " s1=" + std::to_string(r.s1);
  };
  for (const char* scen : {"S1", "S2", "S3"}) {
    for (const auto& r : rows) {
      if (r.scenario != scen) continue;
      std::pair<std::string, std::string> key{r.scenario, column_label(r)};
      if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
  }

  std::vector<std::string> row_keys;
  std::map<std::string, std::map<std::string, std::string>> cells;
  for (const auto& r : rows) {
    const std::string key = r.model + "  N=" + std::to_string(r.n_total) +
                            "  p=" + std::to_string(r.p) + "  rho=" + format_double(r.rho) +
                            "  " + r.estimator + "  " + r.test;
    if (!cells.count(key)) row_keys.push_back(key);
    cells[key][column_label(r)] = format_rate(r.err());
  }

  std::size_t key_width = 0;
  for (const auto& k : row_keys) key_width = std::max(key_width, k.size());
  std::vector<std::size_t> widths;
  for (const auto& c : columns) widths.push_back(std::max<std::size_t>(c.second.size(), 5));

  auto group_name = [](const std::string& scen) {
    if (scen == "S1") return std::string("Size");
    if (scen == "S2") return std::string("Power (Sparse)");
    return std::string("Power (Dense)");
  };

  // Widen the last column of a group until the group name fits.
  for (std::size_t i = 0; i < columns.size();) {
    std::size_t j = i;
    std::size_t span = 0;
    while (j < columns.size() && columns[j].first == columns[i].first) span += widths[j++] + 2;
    const std::size_t need = group_name(columns[i].first).size() + 2;
    if (span < need) widths[j - 1] += need - span;
    i = j;
  }

  std::ostringstream os;
  os << std::string(key_width, ' ');
  for (std::size_t i = 0; i < columns.size();) {
    std::size_t j = i;
    std::size_t span = 0;
    while (j < columns.size() && columns[j].first == columns[i].first) span += widths[j++] + 2;
    const std::string name = group_name(columns[i].first);
    os << "  " << name << std::string(span - 2 - name.size(), ' ');
    i = j;
  }
  os << '\n' << std::string(key_width, ' ');
  for (std::size_t i = 0; i < columns.size(); ++i) os << "  " << pad(columns[i].second, widths[i]);
  os << '\n';
  for (const auto& k : row_keys) {
    os << k << std::string(key_width - k.size(), ' ');
    const auto& row = cells[k];
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const auto it = row.find(columns[i].second);
      os << "  " << pad(it == row.end() ? "-" : it->second, widths[i]);
    }
    os << '\n';
  }
  return os.str();
}

void write_dataset_csv(std::ostream& os, const Dataset& d) {
  for (Index j = 0; j < d.p1(); ++j) os << 'x' << j + 1 << ',';
  for (Index j = 0; j < d.p2(); ++j) os << 'z' << j + 1 << ',';
  os << "y\n";
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.p1(); ++j) os << format_double(d.x(i, j)) << ',';
    for (Index j = 0; j < d.p2(); ++j) os << format_double(d.z(i, j)) << ',';
    os << format_double(d.y(i)) << '\n';
  }
}

void write_x_index(std::ostream& os, const Dataset& d) {
  for (Index j = 0; j < d.p1(); ++j) os << j + 1 << '\n';
}

}  // namespace plmtest::report
