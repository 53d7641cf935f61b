#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "treexplain/data.hpp"

namespace treexplain {

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
};

struct ScatterData {
  std::string x_axis;
  std::string y_axis;
  std::vector<ScatterPoint> points;
  std::optional<double> spearman;  // nullopt when undefined
};

struct ScatterFilter {
  std::optional<std::string> method;  // keep rows of this method ("fe"/"cv")
  bool gated_only = false;
};

// Spearman rank correlation with average ranks for ties. Undefined (nullopt)
// for fewer than two points or when either side is constant.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Pulls (x, y) pairs out of a candidate CSV export. Rows with an empty x or y
// cell are dropped. x_axis must be cv_acc, explain_cv or train_acc; y_axis
// must be test_acc.
ScatterData scatter_from_table(const CsvTable& table, const std::string& x_axis,
                               const std::string& y_axis, const ScatterFilter& filter = {});

// Header "<x_axis>,<y_axis>", one row per point, then a footer comment
// "# spearman=<value|undefined>".
void write_scatter_csv(std::ostream& out, const ScatterData& data);
ScatterData read_scatter_csv(const std::filesystem::path& path);

void write_scatter_svg(std::ostream& out, const ScatterData& data);

ScatterData emit_scatter(const std::filesystem::path& report_csv, const std::string& x_axis,
                         const std::string& y_axis, const std::filesystem::path& out,
                         const ScatterFilter& filter = {},
                         const std::optional<std::filesystem::path>& svg = std::nullopt);

}  // namespace treexplain
