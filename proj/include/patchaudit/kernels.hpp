#pragma once

// Pixel inner loops used by the feature extractors and detectors.
//
// Every kernel has a scalar reference implementation and, where it pays off,
// an AVX2 variant. Variants are selected once at runtime from CPUID and all
// variants return bit-identical results (integer accumulation only), so the
// choice never changes any output.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace patchaudit::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

struct SaturationCounts {
  std::array<std::uint64_t, 3> at_zero{};
  std::array<std::uint64_t, 3> at_max{};
  friend bool operator==(const SaturationCounts&, const SaturationCounts&) = default;
};

/// Kernel entry points for one instruction set.
struct KernelTable {
  Isa isa;
  // Per-channel sums over interleaved RGB bytes. Length must be a multiple of 3.
  std::array<std::uint64_t, 3> (*channel_sums)(std::span<const std::uint8_t> rgb);
  // Per-channel counts of bytes equal to 0 and to 255.
  SaturationCounts (*saturation_counts)(std::span<const std::uint8_t> rgb);
  // Sum of |v[i+1] - v[i]| over a row.
  std::uint64_t (*abs_diff_adjacent)(std::span<const std::int32_t> row);
  // Sum of |a[i] - b[i]|; spans must have equal length.
  std::uint64_t (*abs_diff_rows)(std::span<const std::int32_t> a, std::span<const std::int32_t> b);
  // Luminance scaled by 1000: 299 R + 587 G + 114 B, one value per pixel.
  void (*luminance_x1000)(std::span<const std::uint8_t> rgb, std::span<std::int32_t> out);
  // Per-channel bin counts with bin = floor(v * bins / 256); out has 3 * bins slots
  // laid out R block, G block, B block. Counts are added to out.
  void (*histogram_counts)(std::span<const std::uint8_t> rgb, unsigned bins,
                           std::span<std::uint64_t> out);
};

const KernelTable& scalar_table() noexcept;

/// AVX2 table, or nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_table() noexcept;

/// The table picked for this process. PATCHAUDIT_ISA=scalar in the environment
/// forces the reference kernels.
const KernelTable& active() noexcept;

namespace scalar {
std::array<std::uint64_t, 3> channel_sums(std::span<const std::uint8_t> rgb);
SaturationCounts saturation_counts(std::span<const std::uint8_t> rgb);
std::uint64_t abs_diff_adjacent(std::span<const std::int32_t> row);
std::uint64_t abs_diff_rows(std::span<const std::int32_t> a, std::span<const std::int32_t> b);
void luminance_x1000(std::span<const std::uint8_t> rgb, std::span<std::int32_t> out);
void histogram_counts(std::span<const std::uint8_t> rgb, unsigned bins,
                      std::span<std::uint64_t> out);
}  // namespace scalar

#if defined(PATCHAUDIT_HAVE_AVX2)
namespace avx2 {
std::array<std::uint64_t, 3> channel_sums(std::span<const std::uint8_t> rgb);
SaturationCounts saturation_counts(std::span<const std::uint8_t> rgb);
std::uint64_t abs_diff_adjacent(std::span<const std::int32_t> row);
std::uint64_t abs_diff_rows(std::span<const std::int32_t> a, std::span<const std::int32_t> b);
void luminance_x1000(std::span<const std::uint8_t> rgb, std::span<std::int32_t> out);
}  // namespace avx2
#endif

}  // namespace patchaudit::kernels
