#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace zeno {

/// A CSV artifact: `# key=value` header lines, one column-name line, then
/// rows.  Empty optionals are written as empty fields.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  /// Column values by name; throws ValidationError for an unknown column.
  std::vector<std::optional<double>> column(const std::string& name) const;
  std::optional<std::string> header_value(const std::string& key) const;
};

/// Shortest decimal text that parses back to the same double.
std::string format_number(double x);

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

struct PlotSeries {
  std::string label;
  std::string csv_path;
  std::string x_column;
  std::string y_column;
  /// Optional error-bar column (drawn as +-1 standard error).
  std::string error_column;
  bool markers = false;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Draws the series straight from their CSV files.  Points that cannot be
/// shown (empty fields, non-positive values on a log axis) are skipped.
void write_svg(const std::string& path, const PlotSpec& spec);

}  // namespace zeno
