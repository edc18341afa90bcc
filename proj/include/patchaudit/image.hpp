#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace patchaudit {

enum class Split { train, test };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

/// Row-major interleaved 8-bit RGB.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t pixel_count() const noexcept { return width * height; }
  std::span<const std::uint8_t> rgb() const noexcept { return pixels; }
  std::span<std::uint8_t> rgb() noexcept { return pixels; }

  std::uint8_t* at(std::size_t x, std::size_t y) noexcept { return &pixels[3 * (y * width + x)]; }
  const std::uint8_t* at(std::size_t x, std::size_t y) const noexcept {
    return &pixels[3 * (y * width + x)];
  }

  /// Throws ArgumentError unless width, height > 0 and the buffer holds
  /// exactly width * height triples.
  void validate() const;

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

struct LabeledImage : RgbImage {
  std::size_t label = 0;
  Split split = Split::train;
  std::string source;

  friend bool operator==(const LabeledImage&, const LabeledImage&) = default;
};

RgbImage make_solid(std::size_t width, std::size_t height, std::uint8_t r, std::uint8_t g,
                    std::uint8_t b);

/// Swaps axes; used by symmetry checks on the detectors.
RgbImage transpose(const RgbImage& image);

}  // namespace patchaudit
