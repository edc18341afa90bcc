// Runtime selection of kernel variants. No intrinsics in this file.

#include "patchaudit/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace patchaudit::kernels {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{
      Isa::scalar,          &scalar::channel_sums,    &scalar::saturation_counts,
      &scalar::abs_diff_adjacent, &scalar::abs_diff_rows, &scalar::luminance_x1000,
      &scalar::histogram_counts,
  };
  return table;
}

const KernelTable* avx2_table() noexcept {
#if defined(PATCHAUDIT_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool supported = __builtin_cpu_supports("avx2");
  static const KernelTable table{
      Isa::avx2,          &avx2::channel_sums,    &avx2::saturation_counts,
      &avx2::abs_diff_adjacent, &avx2::abs_diff_rows, &avx2::luminance_x1000,
      // scatter-bound; the reference loop is as fast as a vector version
      &scalar::histogram_counts,
  };
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select() noexcept {
  if (const char* forced = std::getenv("PATCHAUDIT_ISA"); forced != nullptr) {
    if (std::string_view(forced) == "scalar") {
      return scalar_table();
    }
  }
  if (const KernelTable* table = avx2_table()) {
    return *table;
  }
  return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace patchaudit::kernels
