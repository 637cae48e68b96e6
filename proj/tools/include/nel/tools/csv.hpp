#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nel/cholesky.hpp"

namespace nel::tools {

/// Parsed CSV: feature columns f0..f{d-1} and an optional trailing `label`.
struct CsvData {
  Matrix points;  // d x N
  bool has_label_column = false;
  /// One entry per row; nullopt for an empty label cell or no label column.
  std::vector<std::optional<std::string>> labels;
};

/// Strict reader. Rows are numbered from 1 after the header; errors name the
/// row and column, e.g. "row 2, column f1: '1.2.3' is not a number".
/// Throws DataError.
CsvData read_csv(const std::string& path);
CsvData parse_csv(const std::string& text);

/// Dense ids for string labels in order of first appearance.
struct LabelMapping {
  std::vector<std::string> names;
  /// -1 for unlabeled rows.
  std::vector<int> ids;
};
LabelMapping map_labels(const std::vector<std::optional<std::string>>& labels);

/// Writes points (and labels, when given) in the format read_csv accepts.
std::string format_csv(const Matrix& points, const std::vector<std::string>* labels);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace nel::tools
