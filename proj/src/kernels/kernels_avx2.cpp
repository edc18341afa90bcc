// AVX2 variants. Functions carry a target attribute instead of compiling the
// whole file with -mavx2, so inline library code instantiated here stays
// baseline x86-64. Only enter after the dispatcher has confirmed CPU support.

#include "patchaudit/kernels.hpp"

#include <immintrin.h>

#define PATCHAUDIT_AVX2 __attribute__((target("avx2")))

namespace patchaudit::kernels::avx2 {
namespace {

// Byte masks for a 96-byte period (three 32-byte vectors) of interleaved RGB.
// kChannelMask[k][c] has 0xFF where byte 32k + j belongs to channel c.
struct ChannelMasks {
  alignas(32) std::uint8_t bytes[3][3][32];
  constexpr ChannelMasks() : bytes{} {
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < 3; ++c) {
        for (int j = 0; j < 32; ++j) {
          bytes[k][c][j] = ((32 * k + j) % 3 == c) ? 0xFF : 0x00;
        }
      }
    }
  }
};
constexpr ChannelMasks kMasks{};

PATCHAUDIT_AVX2 inline __m256i mask(int k, int c) {
  return _mm256_load_si256(reinterpret_cast<const __m256i*>(kMasks.bytes[k][c]));
}

PATCHAUDIT_AVX2 inline std::uint64_t horizontal_sum_epi64(__m256i v) {
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
  return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

PATCHAUDIT_AVX2 inline __m256i widen_add(__m256i acc, __m256i v32) {
  acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_castsi256_si128(v32)));
  return _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_extracti128_si256(v32, 1)));
}

}  // namespace

PATCHAUDIT_AVX2 std::array<std::uint64_t, 3> channel_sums(std::span<const std::uint8_t> rgb) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc[3] = {zero, zero, zero};
  std::size_t i = 0;
  for (; i + 96 <= rgb.size(); i += 96) {
    for (int k = 0; k < 3; ++k) {
      const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rgb.data() + i + 32 * k));
      for (int c = 0; c < 3; ++c) {
        acc[c] = _mm256_add_epi64(acc[c], _mm256_sad_epu8(_mm256_and_si256(v, mask(k, c)), zero));
      }
    }
  }
  const auto tail = scalar::channel_sums(rgb.subspan(i));
  return {horizontal_sum_epi64(acc[0]) + tail[0], horizontal_sum_epi64(acc[1]) + tail[1],
          horizontal_sum_epi64(acc[2]) + tail[2]};
}

PATCHAUDIT_AVX2 SaturationCounts saturation_counts(std::span<const std::uint8_t> rgb) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i full = _mm256_set1_epi8(static_cast<char>(0xFF));
  const __m256i ones = _mm256_set1_epi8(1);
  __m256i acc_zero[3] = {zero, zero, zero};
  __m256i acc_max[3] = {zero, zero, zero};
  std::size_t i = 0;
  for (; i + 96 <= rgb.size(); i += 96) {
    for (int k = 0; k < 3; ++k) {
      const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rgb.data() + i + 32 * k));
      const __m256i is_zero = _mm256_and_si256(_mm256_cmpeq_epi8(v, zero), ones);
      const __m256i is_max = _mm256_and_si256(_mm256_cmpeq_epi8(v, full), ones);
      for (int c = 0; c < 3; ++c) {
        const __m256i m = mask(k, c);
        acc_zero[c] = _mm256_add_epi64(acc_zero[c], _mm256_sad_epu8(_mm256_and_si256(is_zero, m), zero));
        acc_max[c] = _mm256_add_epi64(acc_max[c], _mm256_sad_epu8(_mm256_and_si256(is_max, m), zero));
      }
    }
  }
  SaturationCounts counts = scalar::saturation_counts(rgb.subspan(i));
  for (int c = 0; c < 3; ++c) {
    counts.at_zero[c] += horizontal_sum_epi64(acc_zero[c]);
    counts.at_max[c] += horizontal_sum_epi64(acc_max[c]);
  }
  return counts;
}

PATCHAUDIT_AVX2 std::uint64_t abs_diff_adjacent(std::span<const std::int32_t> row) {
  if (row.size() < 2) {
    return 0;
  }
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 9 <= row.size(); i += 8) {
    const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row.data() + i));
    const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row.data() + i + 1));
    acc = widen_add(acc, _mm256_abs_epi32(_mm256_sub_epi32(b, a)));
  }
  return horizontal_sum_epi64(acc) + scalar::abs_diff_adjacent(row.subspan(i));
}

PATCHAUDIT_AVX2 std::uint64_t abs_diff_rows(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 8 <= a.size(); i += 8) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + i));
    acc = widen_add(acc, _mm256_abs_epi32(_mm256_sub_epi32(vb, va)));
  }
  return horizontal_sum_epi64(acc) + scalar::abs_diff_rows(a.subspan(i), b.subspan(i));
}

PATCHAUDIT_AVX2 void luminance_x1000(std::span<const std::uint8_t> rgb, std::span<std::int32_t> out) {
  // Eight pixels (24 bytes) per step: dwords 0-2 go to the low lane and 3-5 to
  // the high lane, then each lane gathers its four R, G and B bytes as dwords.
  const __m256i spread = _mm256_setr_epi32(0, 1, 2, 0, 3, 4, 5, 0);
  const __m256i pick_r = _mm256_setr_epi8(0, -1, -1, -1, 3, -1, -1, -1, 6, -1, -1, -1, 9, -1, -1, -1,
                                          0, -1, -1, -1, 3, -1, -1, -1, 6, -1, -1, -1, 9, -1, -1, -1);
  const __m256i pick_g = _mm256_setr_epi8(1, -1, -1, -1, 4, -1, -1, -1, 7, -1, -1, -1, 10, -1, -1, -1,
                                          1, -1, -1, -1, 4, -1, -1, -1, 7, -1, -1, -1, 10, -1, -1, -1);
  const __m256i pick_b = _mm256_setr_epi8(2, -1, -1, -1, 5, -1, -1, -1, 8, -1, -1, -1, 11, -1, -1, -1,
                                          2, -1, -1, -1, 5, -1, -1, -1, 8, -1, -1, -1, 11, -1, -1, -1);
  const __m256i wr = _mm256_set1_epi32(299);
  const __m256i wg = _mm256_set1_epi32(587);
  const __m256i wb = _mm256_set1_epi32(114);
  std::size_t p = 0;
  // The 32-byte load reads 8 bytes past the 24 it uses.
  for (; 3 * p + 32 <= rgb.size() && p + 8 <= out.size(); p += 8) {
    const __m256i raw = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rgb.data() + 3 * p));
    const __m256i v = _mm256_permutevar8x32_epi32(raw, spread);
    const __m256i r = _mm256_shuffle_epi8(v, pick_r);
    const __m256i g = _mm256_shuffle_epi8(v, pick_g);
    const __m256i b = _mm256_shuffle_epi8(v, pick_b);
    const __m256i y = _mm256_add_epi32(_mm256_add_epi32(_mm256_mullo_epi32(r, wr), _mm256_mullo_epi32(g, wg)),
                                       _mm256_mullo_epi32(b, wb));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + p), y);
  }
  scalar::luminance_x1000(rgb.subspan(3 * p), out.subspan(p));
}

}  // namespace patchaudit::kernels::avx2
