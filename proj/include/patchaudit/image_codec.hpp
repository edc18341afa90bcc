#pragma once

// Decoding and encoding of TIFF, baseline JPEG and PNG through the system
// codec libraries. Everything is normalized to 8-bit RGB on the way in.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "patchaudit/image.hpp"

namespace patchaudit {

enum class ImageFormat { unknown, jpeg, png, tiff };

/// Identifies the container from its magic bytes.
ImageFormat sniff_format(std::span<const std::uint8_t> bytes) noexcept;

/// Decodes any supported format. Grayscale is replicated to three channels,
/// alpha is dropped, 16-bit samples are right-shifted by 8. Throws
/// DecodeError naming `source` on any malformed or truncated input.
RgbImage decode_image(std::span<const std::uint8_t> bytes, const std::string& source);

RgbImage read_image_file(const std::filesystem::path& path);

/// Baseline JPEG with 4:2:0 chroma subsampling and the standard IJG
/// quality-to-quantization scaling. quality in [1, 100].
std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality);

std::vector<std::uint8_t> encode_png(const RgbImage& image, int compression_level = 6);

enum class PngLayout { gray, gray_alpha, rgb, rgba };

/// Raw PNG writer for fixtures: `samples` holds width*height*channels values
/// of the given bit depth (8 or 16; 16-bit values are big-endian pairs).
std::vector<std::uint8_t> encode_png_samples(std::span<const std::uint8_t> samples, std::size_t width,
                                             std::size_t height, PngLayout layout, int bit_depth);

/// Uncompressed TIFF. `bit_depth` 16 writes each byte v as v * 257.
std::vector<std::uint8_t> encode_tiff(const RgbImage& image, int bit_depth = 8);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace patchaudit
