#include "ddr/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace ddr {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip(const std::string& s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, Index row, const std::string& col) {
  const std::string cell = strip(raw);
  double value = 0.0;
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("parse error at row " + std::to_string(row) + ", column '" + col +
                     "': non-numeric cell '" + cell + "'");
  return value;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

RawTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + path + "' is empty, header row required");
  RawTable table;
  for (auto& name : split_line(line)) table.header.push_back(strip(name));
  Index row = 0;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    ++row;
    auto fields = split_line(line);
    if (fields.size() != table.header.size())
      throw ParseError("parse error at row " + std::to_string(row) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    std::vector<double> values(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j)
      values[j] = parse_cell(fields[j], row, table.header[j]);
    table.rows.push_back(std::move(values));
  }
  return table;
}

// Splits the table into the named special column and the remaining covariates.
std::pair<Vector, CovariateMatrix> split_special(const RawTable& table,
                                                 const std::string& special) {
  auto it = std::find(table.header.begin(), table.header.end(), special);
  if (it == table.header.end())
    throw SchemaError("required column '" + special + "' not found");
  const auto special_idx = static_cast<std::size_t>(it - table.header.begin());

  const Index n = static_cast<Index>(table.rows.size());
  const Index r = static_cast<Index>(table.header.size()) - 1;
  CovariateMatrix x;
  x.values.resize(n, r);
  Vector v(n);
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (j != special_idx) x.column_names.push_back(table.header[j]);
  for (Index i = 0; i < n; ++i) {
    Index c = 0;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j == special_idx)
        v(i) = table.rows[i][j];
      else
        x.values(i, c++) = table.rows[i][j];
    }
  }
  return {std::move(v), std::move(x)};
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < header.size(); ++j)
    out << (j ? "," : "") << header[j];
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j)
      out << (j ? "," : "") << format_double(values(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

NonprobSample load_nonprob_csv(const std::string& path, const std::string& outcome_col) {
  auto table = read_table(path);
  auto [y, x] = split_special(table, outcome_col);
  NonprobSample a{std::move(x), std::move(y)};
  validate(a);
  return a;
}

ProbSample load_prob_csv(const std::string& path, const std::string& weight_col) {
  auto table = read_table(path);
  auto [d, x] = split_special(table, weight_col);
  for (Index i = 0; i < d.size(); ++i)
    if (!(d(i) > 0.0) || !std::isfinite(d(i)))
      throw DomainError("nonpositive design weight at row " + std::to_string(i + 1));
  ProbSample b{std::move(x), std::move(d)};
  validate(b);
  return b;
}

void write_nonprob_csv(const NonprobSample& a, const std::string& path,
                       const std::string& outcome_col) {
  std::vector<std::string> header = a.x.column_names;
  header.push_back(outcome_col);
  Matrix values(a.x.rows(), a.x.cols() + 1);
  values.leftCols(a.x.cols()) = a.x.values;
  values.col(a.x.cols()) = a.y;
  write_table(path, header, values);
}

void write_prob_csv(const ProbSample& b, const std::string& path, const std::string& weight_col) {
  std::vector<std::string> header = b.x.column_names;
  header.push_back(weight_col);
  Matrix values(b.x.rows(), b.x.cols() + 1);
  values.leftCols(b.x.cols()) = b.x.values;
  values.col(b.x.cols()) = b.d;
  write_table(path, header, values);
}

}  // namespace ddr
