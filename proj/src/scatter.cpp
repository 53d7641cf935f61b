#include "treexplain/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "treexplain/error.hpp"

namespace treexplain {

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_cell(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  char* end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size();
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::DimensionMismatch, "spearman: x and y differ in length");
  }
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

ScatterData scatter_from_table(const CsvTable& table, const std::string& x_axis,
                               const std::string& y_axis, const ScatterFilter& filter) {
  if (x_axis != "cv_acc" && x_axis != "explain_cv" && x_axis != "train_acc") {
    throw Error(ErrorKind::InvalidSpec, "x axis must be cv_acc, explain_cv or train_acc");
  }
  if (y_axis != "test_acc") throw Error(ErrorKind::InvalidSpec, "y axis must be test_acc");
  const std::size_t xi = table.column_index(x_axis);
  const std::size_t yi = table.column_index(y_axis);
  const std::size_t method_col = filter.method ? table.column_index("method") : 0;
  const std::size_t gated_col = filter.gated_only ? table.column_index("gated") : 0;

  ScatterData data;
  data.x_axis = x_axis;
  data.y_axis = y_axis;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : table.rows) {
    if (filter.method && row[method_col] != *filter.method) continue;
    if (filter.gated_only && row[gated_col] != "true") continue;
    ScatterPoint p;
    if (!parse_cell(row[xi], p.x) || !parse_cell(row[yi], p.y)) continue;
    data.points.push_back(p);
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  data.spearman = spearman(xs, ys);
  return data;
}

void write_scatter_csv(std::ostream& out, const ScatterData& data) {
  out << data.x_axis << ',' << data.y_axis << '\n';
  for (const auto& p : data.points) out << format_real(p.x) << ',' << format_real(p.y) << '\n';
  out << "# spearman=" << (data.spearman ? format_real(*data.spearman) : "undefined") << '\n';
}

ScatterData read_scatter_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  ScatterData data;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyFile, path.string() + " is empty");
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::Parse, "scatter header needs two columns");
  data.x_axis = line.substr(0, comma);
  data.y_axis = line.substr(comma + 1);
  bool footer = false;
  while (std::getline(in, line)) {
    if (line.starts_with("# spearman=")) {
      const std::string value = line.substr(11);
      double v = 0.0;
      if (value != "undefined") {
        if (!parse_cell(value, v)) throw Error(ErrorKind::Parse, "bad spearman footer");
        data.spearman = v;
      }
      footer = true;
      continue;
    }
    const auto sep = line.find(',');
    ScatterPoint p;
    if (sep == std::string::npos || !parse_cell(line.substr(0, sep), p.x) ||
        !parse_cell(line.substr(sep + 1), p.y)) {
      throw Error(ErrorKind::Parse, "bad scatter row '" + line + "'");
    }
    data.points.push_back(p);
  }
  if (!footer) throw Error(ErrorKind::Parse, "scatter file lacks the spearman footer");
  return data;
}

void write_scatter_svg(std::ostream& out, const ScatterData& data) {
  constexpr double width = 480.0;
  constexpr double height = 360.0;
  constexpr double margin = 56.0;

  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (!data.points.empty()) {
    const auto [xmin, xmax] = std::minmax_element(
        data.points.begin(), data.points.end(),
        [](const ScatterPoint& a, const ScatterPoint& b) { return a.x < b.x; });
    const auto [ymin, ymax] = std::minmax_element(
        data.points.begin(), data.points.end(),
        [](const ScatterPoint& a, const ScatterPoint& b) { return a.y < b.y; });
    x_lo = xmin->x;
    x_hi = xmax->x;
    y_lo = ymin->y;
    y_hi = ymax->y;
  }
  if (x_hi == x_lo) { x_lo -= 0.5; x_hi += 0.5; }
  if (y_hi == y_lo) { y_lo -= 0.5; y_hi += 0.5; }
  const auto px = [&](double x) {
    return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
  };
  const auto py = [&](double y) {
    return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\">" << data.x_axis << "</text>\n";
  out << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << height / 2 << ")\">" << data.y_axis << "</text>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 16 << "\">" << x_lo
      << "</text>\n";
  out << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 16
      << "\" text-anchor=\"end\">" << x_hi << "</text>\n";
  out << "<text x=\"" << margin - 4 << "\" y=\"" << height - margin
      << "\" text-anchor=\"end\">" << y_lo << "</text>\n";
  out << "<text x=\"" << margin - 4 << "\" y=\"" << margin + 4 << "\" text-anchor=\"end\">"
      << y_hi << "</text>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\">spearman = "
      << (data.spearman ? format_real(*data.spearman) : "undefined") << "</text>\n";
  out << "</g>\n";
  for (const auto& p : data.points) {
    out << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y)
        << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
  }
  out << "</svg>\n";
}

ScatterData emit_scatter(const std::filesystem::path& report_csv, const std::string& x_axis,
                         const std::string& y_axis, const std::filesystem::path& out,
                         const ScatterFilter& filter,
                         const std::optional<std::filesystem::path>& svg) {
  const ScatterData data = scatter_from_table(read_csv_table(report_csv), x_axis, y_axis, filter);
  {
    std::ofstream file(out);
    if (!file) throw Error(ErrorKind::Io, "cannot write " + out.string());
    write_scatter_csv(file, data);
  }
  if (svg) {
    std::ofstream file(*svg);
    if (!file) throw Error(ErrorKind::Io, "cannot write " + svg->string());
    write_scatter_svg(file, data);
  }
  return data;
}

}  // namespace treexplain
