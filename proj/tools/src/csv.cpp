#include "nel/tools/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "nel/errors.hpp"

namespace nel::tools {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = first + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

CsvData parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw DataError("csv: missing header row");
  }
  const auto header = split_line(line);
  std::size_t d = header.size();
  CsvData out;
  if (trim(header.back()) == "label") {
    out.has_label_column = true;
    --d;
  }
  if (d == 0) throw DataError("csv: no feature columns");
  for (std::size_t j = 0; j < d; ++j) {
    if (trim(header[j]) != "f" + std::to_string(j)) {
      throw DataError("csv: header column " + std::to_string(j + 1) + " is '" +
                      trim(header[j]) + "', expected 'f" + std::to_string(j) + "'");
    }
  }

  std::vector<double> values;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("csv: row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      const std::string cell = trim(cells[j]);
      if (!parse_number(cell, v)) {
        throw DataError("csv: row " + std::to_string(row) + ", column f" +
                        std::to_string(j) + ": '" + cell + "' is not a number");
      }
      values.push_back(v);
    }
    if (out.has_label_column) {
      const std::string lab = trim(cells[d]);
      out.labels.push_back(lab.empty() ? std::nullopt : std::optional<std::string>(lab));
    } else {
      out.labels.emplace_back(std::nullopt);
    }
  }
  if (row == 0) throw DataError("csv: no data rows");
  out.points = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(d), row);
  return out;
}

CsvData read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("csv: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_csv(buf.str());
}

LabelMapping map_labels(const std::vector<std::optional<std::string>>& labels) {
  LabelMapping m;
  std::unordered_map<std::string, int> index;
  m.ids.reserve(labels.size());
  for (const auto& l : labels) {
    if (!l) {
      m.ids.push_back(-1);
      continue;
    }
    auto [it, inserted] = index.try_emplace(*l, static_cast<int>(m.names.size()));
    if (inserted) m.names.push_back(*l);
    m.ids.push_back(it->second);
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_csv(const Matrix& points, const std::vector<std::string>* labels) {
  std::string s;
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    if (j) s += ',';
    s += "f" + std::to_string(j);
  }
  if (labels) s += ",label";
  s += '\n';
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
      if (j) s += ',';
      s += format_double(points(j, i));
    }
    if (labels) s += ',' + (*labels)[static_cast<std::size_t>(i)];
    s += '\n';
  }
  return s;
}

}  // namespace nel::tools
