#include "patchaudit/image.hpp"

#include "patchaudit/error.hpp"

namespace patchaudit {

std::string_view to_string(Split split) noexcept {
  return split == Split::train ? "train" : "test";
}

Split parse_split(std::string_view text) {
  if (text == "train") {
    return Split::train;
  }
  if (text == "test") {
    return Split::test;
  }
  throw ArgumentError("unknown split '" + std::string(text) + "' (expected train or test)");
}

void RgbImage::validate() const {
  if (width == 0 || height == 0) {
    throw ArgumentError("image has zero width or height");
  }
  if (pixels.size() != width * height * 3) {
    throw ArgumentError("pixel buffer holds " + std::to_string(pixels.size()) + " bytes, expected " +
                        std::to_string(width * height * 3));
  }
}

RgbImage make_solid(std::size_t width, std::size_t height, std::uint8_t r, std::uint8_t g,
                    std::uint8_t b) {
  RgbImage image{width, height, std::vector<std::uint8_t>(width * height * 3)};
  for (std::size_t p = 0; p < width * height; ++p) {
    image.pixels[3 * p] = r;
    image.pixels[3 * p + 1] = g;
    image.pixels[3 * p + 2] = b;
  }
  return image;
}

RgbImage transpose(const RgbImage& image) {
  RgbImage out{image.height, image.width, std::vector<std::uint8_t>(image.pixels.size())};
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const std::uint8_t* src = image.at(x, y);
      std::uint8_t* dst = out.at(y, x);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

}  // namespace patchaudit
