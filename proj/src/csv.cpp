#include "ocp/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ocp {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim spaces and stray carriage returns
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw std::runtime_error(where + ": cannot parse '" + cell + "' as a number");
  if (!std::isfinite(v)) throw std::runtime_error(where + ": non-finite feature value");
  return v;
}

long parse_label(const std::string& cell, const std::string& where) {
  long v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw std::runtime_error(where + ": cannot parse '" + cell + "' as an integer label");
  return v;
}

}  // namespace

namespace {

Dataset read_csv_impl(std::istream& in, const std::string& name, bool require_labels) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(name + ": empty CSV file");
  const auto header = split_line(line);
  if (header.empty()) throw std::runtime_error(name + ": empty header row");

  std::size_t y_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") {
      y_col = c;
      break;
    }
  }
  const bool has_labels = y_col != header.size();
  if (!has_labels && require_labels) {
    std::string cols;
    for (const auto& h : header) cols += (cols.empty() ? "" : ", ") + h;
    throw std::runtime_error(name + ": no label column named 'y' (columns: " + cols + ")");
  }

  Dataset data;
  data.d = header.size() - (has_labels ? 1 : 0);

  std::size_t line_no = 1;
  std::vector<double> row(data.d);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;  // blank line
    const auto where = name + ":" + std::to_string(line_no);
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error(where + ": expected " + std::to_string(header.size()) +
                               " columns, found " + std::to_string(cells.size()));
    std::size_t j = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (has_labels && c == y_col) continue;
      row[j++] = parse_double(cells[c], where);
    }
    int y = 0;
    if (has_labels) {
      const long label = parse_label(cells[y_col], where);
      if (label < 1)
        throw std::runtime_error(where + ": label " + std::to_string(label) +
                                 " is not 1-based; relabel classes to 1..K");
      y = static_cast<int>(label);
    }
    data.append_row(row, y);
    data.num_classes = std::max(data.num_classes, y);
  }

  if (data.size() == 0) throw std::runtime_error(name + ": CSV contains no data rows");
  if (require_labels &&
      std::set<int>(data.labels.begin(), data.labels.end()).size() < 2)
    throw std::runtime_error(name + ": labels must include at least 2 classes");
  return data;
}

}  // namespace

Dataset read_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  return read_csv_dataset(in, path);
}

Dataset read_csv_dataset(std::istream& in, const std::string& name) {
  return read_csv_impl(in, name, true);
}

Dataset read_csv_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  return read_csv_impl(in, path, false);
}

void write_csv_dataset(const Dataset& data, std::ostream& out) {
  for (std::size_t j = 1; j <= data.d; ++j) out << 'x' << j << ',';
  out << "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    for (std::size_t j = 0; j < data.d; ++j) out << format_double(x[j]) << ',';
    out << data.labels[i] << '\n';
  }
}

}  // namespace ocp
