// Compiled with -mavx2 (and without -mfma). Only reached after a runtime CPU
// check in dispatch.cpp.

#include <immintrin.h>

#include "treexplain/kernels.hpp"

namespace treexplain::kernels {

namespace {

void gini_scores_avx2(std::span<const double> left_counts, std::size_t n_classes,
                      std::span<const double> left_weight,
                      std::span<const double> class_totals, double total_weight,
                      std::span<double> out) {
  const std::size_t m = out.size();
  const std::size_t body = m - m % 4;
  const __m256d w_total = _mm256_set1_pd(total_weight);
  for (std::size_t p = 0; p < body; p += 4) {
    const __m256d wl = _mm256_loadu_pd(left_weight.data() + p);
    const __m256d wr = _mm256_sub_pd(w_total, wl);
    __m256d sl = _mm256_setzero_pd();
    __m256d sr = _mm256_setzero_pd();
    for (std::size_t c = 0; c < n_classes; ++c) {
      const __m256d l = _mm256_loadu_pd(left_counts.data() + c * m + p);
      const __m256d r = _mm256_sub_pd(_mm256_set1_pd(class_totals[c]), l);
      sl = _mm256_add_pd(sl, _mm256_mul_pd(l, l));
      sr = _mm256_add_pd(sr, _mm256_mul_pd(r, r));
    }
    _mm256_storeu_pd(out.data() + p,
                     _mm256_add_pd(_mm256_div_pd(sl, wl), _mm256_div_pd(sr, wr)));
  }
  for (std::size_t p = body; p < m; ++p) {
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

void variance_scores_avx2(std::span<const double> left_sum,
                          std::span<const double> left_weight, double total_sum,
                          double total_weight, std::span<double> out) {
  const std::size_t m = out.size();
  const std::size_t body = m - m % 4;
  const __m256d s_total = _mm256_set1_pd(total_sum);
  const __m256d w_total = _mm256_set1_pd(total_weight);
  for (std::size_t p = 0; p < body; p += 4) {
    const __m256d sl = _mm256_loadu_pd(left_sum.data() + p);
    const __m256d wl = _mm256_loadu_pd(left_weight.data() + p);
    const __m256d sr = _mm256_sub_pd(s_total, sl);
    const __m256d wr = _mm256_sub_pd(w_total, wl);
    const __m256d left = _mm256_div_pd(_mm256_mul_pd(sl, sl), wl);
    const __m256d right = _mm256_div_pd(_mm256_mul_pd(sr, sr), wr);
    _mm256_storeu_pd(out.data() + p, _mm256_add_pd(left, right));
  }
  for (std::size_t p = body; p < m; ++p) {
    const double sl = left_sum[p];
    const double sr = total_sum - sl;
    out[p] = sl * sl / left_weight[p] + sr * sr / (total_weight - left_weight[p]);
  }
}

double sum_squared_deviation_avx2(std::span<const double> values, double center) {
  const std::size_t n = values.size();
  const std::size_t body = n - n % 4;
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d dev = _mm256_sub_pd(_mm256_loadu_pd(values.data() + i), c);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dev, dev));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
  for (std::size_t i = body; i < n; ++i) {
    const double dev = values[i] - center;
    total += dev * dev;
  }
  return total;
}

void scaled_add_avx2(std::span<double> acc, double scale, std::span<const double> x) {
  const std::size_t n = acc.size();
  const std::size_t body = n - n % 4;
  const __m256d s = _mm256_set1_pd(scale);
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d a = _mm256_loadu_pd(acc.data() + i);
    const __m256d v = _mm256_loadu_pd(x.data() + i);
    _mm256_storeu_pd(acc.data() + i, _mm256_add_pd(a, _mm256_mul_pd(s, v)));
  }
  for (std::size_t i = body; i < n; ++i) acc[i] += scale * x[i];
}

}  // namespace

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{
      "avx2",
      &gini_scores_avx2,
      &variance_scores_avx2,
      &sum_squared_deviation_avx2,
      &scaled_add_avx2,
  };
  return table;
}

}  // namespace treexplain::kernels
