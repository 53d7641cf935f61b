#pragma once

// Data-parallel inner loops used by split search and attribution scoring.
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 variant. The variants perform the same floating-point
// operations in the same order per output element (no FMA contraction, and
// reductions use the same four-lane partial sums), so results are bitwise
// identical across dispatch targets. That keeps fitted trees independent of the
// machine they were trained on.

#include <cstddef>
#include <span>
#include <string_view>

namespace treexplain::kernels {

// out[p] = sum_c L[c][p]^2 / wl[p] + sum_c (T[c] - L[c][p])^2 / (W - wl[p])
//
// `left_counts` is class-major with row stride out.size(). Maximizing this
// score over split positions minimizes the weighted Gini impurity of the two
// children.
using GiniScoresFn = void (*)(std::span<const double> left_counts, std::size_t n_classes,
                              std::span<const double> left_weight,
                              std::span<const double> class_totals, double total_weight,
                              std::span<double> out);

// out[p] = sl[p]^2 / wl[p] + (S - sl[p])^2 / (W - wl[p])
//
// Maximizing over positions minimizes the children's weighted sum of squared
// errors.
using VarianceScoresFn = void (*)(std::span<const double> left_sum,
                                  std::span<const double> left_weight, double total_sum,
                                  double total_weight, std::span<double> out);

// sum_i (v[i] - center)^2
using SumSquaredDeviationFn = double (*)(std::span<const double> values, double center);

// acc[i] += scale * x[i]
using ScaledAddFn = void (*)(std::span<double> acc, double scale, std::span<const double> x);

struct KernelTable {
  std::string_view name;
  GiniScoresFn gini_scores;
  VarianceScoresFn variance_scores;
  SumSquaredDeviationFn sum_squared_deviation;
  ScaledAddFn scaled_add;
};

const KernelTable& scalar_table();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_table();

// Best table for this CPU. TREEXPLAIN_KERNELS=scalar forces the reference path.
const KernelTable& active();

inline void gini_scores(std::span<const double> left_counts, std::size_t n_classes,
                        std::span<const double> left_weight,
                        std::span<const double> class_totals, double total_weight,
                        std::span<double> out) {
  active().gini_scores(left_counts, n_classes, left_weight, class_totals, total_weight, out);
}

inline void variance_scores(std::span<const double> left_sum,
                            std::span<const double> left_weight, double total_sum,
                            double total_weight, std::span<double> out) {
  active().variance_scores(left_sum, left_weight, total_sum, total_weight, out);
}

inline double sum_squared_deviation(std::span<const double> values, double center) {
  return active().sum_squared_deviation(values, center);
}

inline void scaled_add(std::span<double> acc, double scale, std::span<const double> x) {
  active().scaled_add(acc, scale, x);
}

}  // namespace treexplain::kernels
