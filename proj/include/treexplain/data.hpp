#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace treexplain {

using IndexList = std::vector<std::size_t>;

// Dense row-major feature matrix with integer class labels.
//
// Invariants (checked on construction): n >= 2, d >= 1, C >= 2, all feature
// values finite, every label in [0, C) and every class present at least once.
class Dataset {
 public:
  Dataset(std::string name, std::vector<std::string> feature_names,
          std::vector<std::string> class_names, std::vector<double> features,
          std::vector<int> labels);

  const std::string& name() const noexcept { return name_; }
  std::size_t n_rows() const noexcept { return labels_.size(); }
  std::size_t n_features() const noexcept { return feature_names_.size(); }
  std::size_t n_classes() const noexcept { return class_names_.size(); }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * n_features(), n_features()};
  }
  double at(std::size_t i, std::size_t j) const {
    return features_[i * n_features() + j];
  }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const noexcept { return labels_; }
  std::span<const double> features() const noexcept { return features_; }

  const std::vector<std::string>& feature_names() const noexcept {
    return feature_names_;
  }
  const std::vector<std::string>& class_names() const noexcept {
    return class_names_;
  }

  // Copy of this dataset with a replacement label vector (same n, same C).
  Dataset with_labels(std::vector<int> labels) const;

 private:
  std::string name_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> class_names_;
  std::vector<double> features_;
  std::vector<int> labels_;
};

struct SplitPlan {
  IndexList train_indices;
  IndexList test_indices;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
};

struct FoldPlan {
  std::vector<IndexList> folds;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  // All indices outside fold `i`, ascending.
  IndexList complement(std::size_t i) const;
};

// Raw string table from a headed CSV file. Cells are trimmed of surrounding
// whitespace; no quoting support.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Position of `column` in the header; throws MissingColumn.
  std::size_t column_index(std::string_view column) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);

// Labels are encoded in order of first appearance; every other column must
// parse as a finite real.
Dataset load_csv(const std::filesystem::path& path, std::string_view label_column,
                 std::string name);

// Stratified train/test split. |train| = round(train_fraction * n); per-class
// train counts are allotted by largest remainder so each class lands within
// one sample of its proportional share.
SplitPlan train_test_split(const Dataset& ds, double train_fraction,
                           std::uint64_t seed);

// Stratified k-fold over `indices` (labels looked up through `labels`, which
// is indexed by row id). Per-class shuffle, then round-robin dealing.
FoldPlan stratified_kfold(std::span<const std::size_t> indices,
                          std::span<const int> labels, std::size_t k,
                          std::uint64_t seed);

}  // namespace treexplain
