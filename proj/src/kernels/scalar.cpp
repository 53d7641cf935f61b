#include "treexplain/kernels.hpp"

namespace treexplain::kernels {

namespace {

void gini_scores_scalar(std::span<const double> left_counts, std::size_t n_classes,
                        std::span<const double> left_weight,
                        std::span<const double> class_totals, double total_weight,
                        std::span<double> out) {
  const std::size_t m = out.size();
  for (std::size_t p = 0; p < m; ++p) {
    const double wl = left_weight[p];
    const double wr = total_weight - wl;
    double sl = 0.0;
    double sr = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double l = left_counts[c * m + p];
      const double r = class_totals[c] - l;
      sl += l * l;
      sr += r * r;
    }
    out[p] = sl / wl + sr / wr;
  }
}

void variance_scores_scalar(std::span<const double> left_sum,
                            std::span<const double> left_weight, double total_sum,
                            double total_weight, std::span<double> out) {
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double sl = left_sum[p];
    const double sr = total_sum - sl;
    out[p] = sl * sl / left_weight[p] + sr * sr / (total_weight - left_weight[p]);
  }
}

// Four interleaved partial sums, combined as (s0 + s2) + (s1 + s3), then the
// tail in order. The AVX2 variant reduces in exactly this order.
double sum_squared_deviation_scalar(std::span<const double> values, double center) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n = values.size();
  const std::size_t body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4) {
    for (std::size_t lane = 0; lane < 4; ++lane) {
      const double dev = values[i + lane] - center;
      s[lane] += dev * dev;
    }
  }
  double total = (s[0] + s[2]) + (s[1] + s[3]);
  for (std::size_t i = body; i < n; ++i) {
    const double dev = values[i] - center;
    total += dev * dev;
  }
  return total;
}

void scaled_add_scalar(std::span<double> acc, double scale, std::span<const double> x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * x[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",
      &gini_scores_scalar,
      &variance_scores_scalar,
      &sum_squared_deviation_scalar,
      &scaled_add_scalar,
  };
  return table;
}

}  // namespace treexplain::kernels
