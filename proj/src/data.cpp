#include "treexplain/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "treexplain/error.hpp"
#include "treexplain/rng.hpp"

namespace treexplain {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_real(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

Dataset::Dataset(std::string name, std::vector<std::string> feature_names,
                 std::vector<std::string> class_names, std::vector<double> features,
                 std::vector<int> labels)
    : name_(std::move(name)),
      feature_names_(std::move(feature_names)),
      class_names_(std::move(class_names)),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  const std::size_t n = labels_.size();
  const std::size_t d = feature_names_.size();
  const std::size_t c = class_names_.size();
  if (n < 2) throw Error(ErrorKind::EmptyFile, "dataset needs at least 2 rows");
  if (d < 1) throw Error(ErrorKind::DimensionMismatch, "dataset needs at least 1 feature");
  if (c < 2) throw Error(ErrorKind::SingleClass, "dataset needs at least 2 classes");
  if (features_.size() != n * d) {
    throw Error(ErrorKind::DimensionMismatch, "feature matrix is not n x d");
  }
  for (double v : features_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonNumericCell, "non-finite feature value");
    }
  }
  std::vector<bool> seen(c, false);
  for (int y : labels_) {
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw Error(ErrorKind::BadClass, "label out of range");
    }
    seen[static_cast<std::size_t>(y)] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw Error(ErrorKind::SingleClass, "every class must appear at least once");
  }
}

Dataset Dataset::with_labels(std::vector<int> labels) const {
  return Dataset(name_, feature_names_, class_names_, features_, std::move(labels));
}

IndexList FoldPlan::complement(std::size_t i) const {
  IndexList out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f == i) continue;
    out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t CsvTable::column_index(std::string_view column) const {
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) {
    throw Error(ErrorKind::MissingColumn,
                "missing column '" + std::string(column) + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  CsvTable table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw Error(ErrorKind::NonNumericCell,
                  path.string() + ": line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw Error(ErrorKind::EmptyFile, path.string() + " is empty");
  return table;
}

Dataset load_csv(const std::filesystem::path& path, std::string_view label_column,
                 std::string name) {
  const CsvTable table = read_csv_table(path);
  const std::size_t label_col = table.column_index(label_column);
  if (table.rows.empty()) {
    throw Error(ErrorKind::EmptyFile, path.string() + " has no data rows");
  }

  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j != label_col) feature_names.push_back(table.header[j]);
  }
  if (feature_names.empty()) {
    throw Error(ErrorKind::MissingColumn, "no feature columns besides the label");
  }

  std::vector<std::string> class_names;
  std::map<std::string, int, std::less<>> class_ids;
  std::vector<double> features;
  std::vector<int> labels;
  features.reserve(table.rows.size() * feature_names.size());
  labels.reserve(table.rows.size());

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j == label_col) continue;
      double v = 0.0;
      if (!parse_real(cells[j], v)) {
        throw Error(ErrorKind::NonNumericCell,
                    "non-numeric cell at row " + std::to_string(r + 1) + ", column '" +
                        table.header[j] + "': '" + cells[j] + "'");
      }
      features.push_back(v);
    }
    const std::string& label = cells[label_col];
    auto [it, inserted] =
        class_ids.try_emplace(label, static_cast<int>(class_names.size()));
    if (inserted) class_names.push_back(label);
    labels.push_back(it->second);
  }
  if (class_names.size() < 2) {
    throw Error(ErrorKind::SingleClass,
                "label column '" + std::string(label_column) + "' has a single class");
  }
  return Dataset(std::move(name), std::move(feature_names), std::move(class_names),
                 std::move(features), std::move(labels));
}

SplitPlan train_test_split(const Dataset& ds, double train_fraction,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidSpec, "train_fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.n_rows();
  const std::size_t n_classes = ds.n_classes();

  std::vector<IndexList> by_class(n_classes);
  for (std::size_t i = 0; i < n; ++i) {
    by_class[static_cast<std::size_t>(ds.label(i))].push_back(i);
  }

  // Largest-remainder allotment of round(f * n) train slots across classes.
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n));
  std::vector<std::size_t> quota(n_classes);
  std::vector<double> remainder(n_classes);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const double share = train_fraction * static_cast<double>(by_class[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(share));
    remainder[c] = share - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(n_classes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n_train; i = (i + 1) % n_classes) {
    const std::size_t c = order[i];
    if (quota[c] < by_class[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  SplitPlan plan;
  plan.seed = seed;
  plan.train_fraction = train_fraction;
  Rng rng(derive_seed(seed, Stream::Split));
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (quota[c] == 0) {
      throw Error(ErrorKind::DegenerateSplit,
                  "class '" + ds.class_names()[c] + "' would be absent from the train set");
    }
    auto& members = by_class[c];
    shuffle(std::span<std::size_t>(members), rng);
    plan.train_indices.insert(plan.train_indices.end(), members.begin(),
                              members.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    plan.test_indices.insert(plan.test_indices.end(),
                             members.begin() + static_cast<std::ptrdiff_t>(quota[c]),
                             members.end());
  }
  if (plan.test_indices.empty()) {
    throw Error(ErrorKind::DegenerateSplit, "test set would be empty");
  }
  std::sort(plan.train_indices.begin(), plan.train_indices.end());
  std::sort(plan.test_indices.begin(), plan.test_indices.end());
  return plan;
}

FoldPlan stratified_kfold(std::span<const std::size_t> indices,
                          std::span<const int> labels, std::size_t k,
                          std::uint64_t seed) {
  const std::size_t n = indices.size();
  if (k < 2) throw Error(ErrorKind::TooManyFolds, "k must be at least 2");
  if (k > n) {
    throw Error(ErrorKind::TooManyFolds, "k = " + std::to_string(k) + " exceeds " +
                                             std::to_string(n) + " samples");
  }

  std::map<int, IndexList> by_class;
  for (std::size_t idx : indices) {
    if (idx >= labels.size()) {
      throw Error(ErrorKind::DimensionMismatch, "fold index outside the label view");
    }
    by_class[labels[idx]].push_back(idx);
  }
  std::size_t smallest = n;
  for (const auto& [label, members] : by_class) smallest = std::min(smallest, members.size());
  // Leave-one-out (k == n) is always allowed: every fold holds one sample.
  if (k > smallest && k != n) {
    throw Error(ErrorKind::TooManyFolds,
                "k = " + std::to_string(k) + " exceeds the smallest class count " +
                    std::to_string(smallest));
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(k);
  Rng rng(derive_seed(seed, Stream::Folds));
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    shuffle(std::span<std::size_t>(members), rng);
    for (std::size_t idx : members) {
      plan.folds[next].push_back(idx);
      next = (next + 1) % k;
    }
  }
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  return plan;
}

}  // namespace treexplain
