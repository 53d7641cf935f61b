#include <cstdlib>
#include <string_view>

#include "treexplain/kernels.hpp"

namespace treexplain::kernels {

#if defined(TREEXPLAIN_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

const KernelTable* avx2_table() {
#if defined(TREEXPLAIN_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select_table() {
  if (const char* forced = std::getenv("TREEXPLAIN_KERNELS")) {
    if (std::string_view(forced) == "scalar") return scalar_table();
  }
  if (const KernelTable* avx2 = avx2_table()) return *avx2;
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select_table();
  return table;
}

}  // namespace treexplain::kernels
