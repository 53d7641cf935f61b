#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "doctest.h"
#include "treexplain/data.hpp"
#include "treexplain/error.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& file) {
  return std::filesystem::path(TREEXPLAIN_DATA_DIR) / file;
}

inline std::filesystem::path grid_path(const std::string& file) {
  return std::filesystem::path(TREEXPLAIN_GRID_DIR) / file;
}

inline treexplain::Dataset iris() {
  return treexplain::load_csv(data_path("iris.csv"), "species", "iris");
}
inline treexplain::Dataset wine() {
  return treexplain::load_csv(data_path("wine.csv"), "cultivar", "wine");
}

inline treexplain::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                        const std::vector<int>& labels) {
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  std::vector<std::string> features;
  for (std::size_t j = 0; j < d; ++j) features.push_back("f" + std::to_string(j));
  int n_classes = 0;
  for (int y : labels) n_classes = std::max(n_classes, y + 1);
  std::vector<std::string> classes;
  for (int c = 0; c < n_classes; ++c) classes.push_back("c" + std::to_string(c));
  return treexplain::Dataset("synthetic", features, classes, flat, labels);
}

// Random classification data: `n` rows, `d` features drawn from a small value
// grid (so ties occur), labels correlated with the first feature.
inline treexplain::Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t d,
                                          int n_classes) {
  std::uniform_int_distribution<int> level(0, 9);
  std::uniform_int_distribution<int> noise(0, 3);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : rows[i]) v = level(rng) * 0.5;
    labels[i] = (static_cast<int>(rows[i][0] * 2) + noise(rng)) % n_classes;
  }
  // Make sure every class is present.
  for (int c = 0; c < n_classes; ++c) labels[static_cast<std::size_t>(c)] = c;
  return make_dataset(rows, labels);
}

inline treexplain::IndexList all_rows(const treexplain::Dataset& ds) {
  treexplain::IndexList out(ds.n_rows());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

template <class Fn>
treexplain::ErrorKind error_kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const treexplain::Error& e) {
    return e.kind();
  }
  FAIL("expected a treexplain::Error");
  return treexplain::ErrorKind::Io;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("treexplain_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p) << content;
    return p;
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
