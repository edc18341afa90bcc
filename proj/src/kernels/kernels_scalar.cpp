#include "patchaudit/kernels.hpp"

#include <cstdlib>

namespace patchaudit::kernels::scalar {

std::array<std::uint64_t, 3> channel_sums(std::span<const std::uint8_t> rgb) {
  std::array<std::uint64_t, 3> sums{};
  for (std::size_t i = 0; i + 2 < rgb.size(); i += 3) {
    sums[0] += rgb[i];
    sums[1] += rgb[i + 1];
    sums[2] += rgb[i + 2];
  }
  return sums;
}

SaturationCounts saturation_counts(std::span<const std::uint8_t> rgb) {
  SaturationCounts counts;
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    const std::size_t c = i % 3;
    counts.at_zero[c] += rgb[i] == 0;
    counts.at_max[c] += rgb[i] == 255;
  }
  return counts;
}

std::uint64_t abs_diff_adjacent(std::span<const std::int32_t> row) {
  std::uint64_t total = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    total += static_cast<std::uint64_t>(std::abs(row[i] - row[i - 1]));
  }
  return total;
}

std::uint64_t abs_diff_rows(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    total += static_cast<std::uint64_t>(std::abs(a[i] - b[i]));
  }
  return total;
}

void luminance_x1000(std::span<const std::uint8_t> rgb, std::span<std::int32_t> out) {
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = 299 * rgb[3 * p] + 587 * rgb[3 * p + 1] + 114 * rgb[3 * p + 2];
  }
}

void histogram_counts(std::span<const std::uint8_t> rgb, unsigned bins,
                      std::span<std::uint64_t> out) {
  std::array<std::uint32_t, 256> bin_of{};
  for (std::uint64_t v = 0; v < 256; ++v) {
    bin_of[v] = static_cast<std::uint32_t>((v * bins) >> 8);
  }
  for (std::size_t i = 0; i + 2 < rgb.size(); i += 3) {
    ++out[bin_of[rgb[i]]];
    ++out[bins + bin_of[rgb[i + 1]]];
    ++out[2 * bins + bin_of[rgb[i + 2]]];
  }
}

}  // namespace patchaudit::kernels::scalar
