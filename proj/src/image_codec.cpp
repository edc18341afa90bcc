#include "patchaudit/image_codec.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <mutex>

#include <jpeglib.h>
#include <png.h>
#include <tiffio.h>

#include "patchaudit/error.hpp"

namespace patchaudit {

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) noexcept {
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return ImageFormat::jpeg;
  }
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) {
    return ImageFormat::png;
  }
  if (bytes.size() >= 4 && ((bytes[0] == 'I' && bytes[1] == 'I' && bytes[2] == 42 && bytes[3] == 0) ||
                            (bytes[0] == 'M' && bytes[1] == 'M' && bytes[2] == 0 && bytes[3] == 42))) {
    return ImageFormat::tiff;
  }
  return ImageFormat::unknown;
}

// ---------------------------------------------------------------------------
// JPEG
//
// libjpeg reports fatal errors through longjmp. The functions that own a
// setjmp point keep no objects with non-trivial destructors in scope; the
// output buffers live in the caller's frame.

namespace {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
  int warnings;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

void jpeg_emit_message(j_common_ptr cinfo, int level) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  if (level < 0) {
    // Corrupt-data warnings (premature EOF, bad Huffman codes) become errors.
    if (mgr->warnings == 0) {
      (*cinfo->err->format_message)(cinfo, mgr->message);
    }
    ++mgr->warnings;
  }
}

struct JpegDecoded {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t>* pixels = nullptr;
};

bool decode_jpeg_raw(const std::uint8_t* data, std::size_t size, JpegDecoded* out,
                     JpegErrorManager* err) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err->base);
  err->base.error_exit = jpeg_error_exit;
  err->base.emit_message = jpeg_emit_message;
  err->warnings = 0;
  err->message[0] = '\0';
  if (setjmp(err->jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out->width = cinfo.output_width;
  out->height = cinfo.output_height;
  out->pixels->resize(out->width * out->height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out->pixels->data() + static_cast<std::size_t>(cinfo.output_scanline) * out->width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return err->warnings == 0;
}

struct JpegEncoded {
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
};

bool encode_jpeg_raw(const RgbImage* image, int quality, JpegEncoded* out, JpegErrorManager* err) {
  jpeg_compress_struct cinfo;
  cinfo.err = jpeg_std_error(&err->base);
  err->base.error_exit = jpeg_error_exit;
  err->warnings = 0;
  err->message[0] = '\0';
  if (setjmp(err->jump)) {
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &out->buffer, &out->size);
  cinfo.image_width = static_cast<JDIMENSION>(image->width);
  cinfo.image_height = static_cast<JDIMENSION>(image->height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  cinfo.dct_method = JDCT_ISLOW;
  cinfo.optimize_coding = FALSE;
  // 4:2:0: luma sampled 2x2, both chroma planes 1x1.
  cinfo.comp_info[0].h_samp_factor = 2;
  cinfo.comp_info[0].v_samp_factor = 2;
  cinfo.comp_info[1].h_samp_factor = 1;
  cinfo.comp_info[1].v_samp_factor = 1;
  cinfo.comp_info[2].h_samp_factor = 1;
  cinfo.comp_info[2].v_samp_factor = 1;
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(image->pixels.data() +
                                     static_cast<std::size_t>(cinfo.next_scanline) * image->width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

RgbImage decode_jpeg(std::span<const std::uint8_t> bytes, const std::string& source) {
  RgbImage image;
  JpegDecoded out;
  out.pixels = &image.pixels;
  JpegErrorManager err;
  if (!decode_jpeg_raw(bytes.data(), bytes.size(), &out, &err)) {
    throw DecodeError(source, std::string("JPEG decode failed: ") + err.message);
  }
  image.width = out.width;
  image.height = out.height;
  return image;
}

// ---------------------------------------------------------------------------
// PNG

struct PngReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->size) {
    png_error(png, "unexpected end of data");
  }
  std::memcpy(out, cursor->data + cursor->offset, length);
  cursor->offset += length;
}

struct PngError {
  char message[256];
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* err = static_cast<PngError*>(png_get_error_ptr(png));
  std::snprintf(err->message, sizeof(err->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngDecoded {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t>* pixels = nullptr;
  std::vector<png_bytep>* rows = nullptr;
};

bool decode_png_raw(const std::uint8_t* data, std::size_t size, PngDecoded* out, PngError* err) {
  err->message[0] = '\0';
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, err, png_error_handler, png_warning_handler);
  if (png == nullptr) {
    std::snprintf(err->message, sizeof(err->message), "cannot allocate decoder");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  PngReadCursor cursor{data, size, 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (info == nullptr) {
    png_error(png, "cannot allocate info");
  }
  png_set_read_fn(png, &cursor, png_read_from_memory);
  png_read_info(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_packing(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  if (png_get_channels(png, info) != 3 || png_get_bit_depth(png, info) != 8) {
    png_error(png, "unsupported pixel layout after normalization");
  }
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->pixels->resize(out->width * out->height * 3);
  out->rows->resize(out->height);
  for (std::size_t y = 0; y < out->height; ++y) {
    (*out->rows)[y] = out->pixels->data() + y * out->width * 3;
  }
  png_read_image(png, out->rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes, const std::string& source) {
  RgbImage image;
  std::vector<png_bytep> rows;
  PngDecoded out;
  out.pixels = &image.pixels;
  out.rows = &rows;
  PngError err;
  if (!decode_png_raw(bytes.data(), bytes.size(), &out, &err)) {
    throw DecodeError(source, std::string("PNG decode failed: ") + err.message);
  }
  image.width = out.width;
  image.height = out.height;
  return image;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  sink->insert(sink->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct PngWriteJob {
  const std::uint8_t* samples;
  std::size_t width;
  std::size_t height;
  int color_type;
  int channels;
  int bit_depth;
  int compression_level;
  std::vector<std::uint8_t>* sink;
  std::vector<png_bytep>* rows;
};

bool encode_png_raw(const PngWriteJob* job, PngError* err) {
  err->message[0] = '\0';
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, err, png_error_handler, png_warning_handler);
  if (png == nullptr) {
    std::snprintf(err->message, sizeof(err->message), "cannot allocate encoder");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  if (info == nullptr) {
    png_error(png, "cannot allocate info");
  }
  png_set_write_fn(png, job->sink, png_write_to_vector, png_flush_noop);
  png_set_compression_level(png, job->compression_level);
  png_set_IHDR(png, info, static_cast<png_uint_32>(job->width), static_cast<png_uint_32>(job->height),
               job->bit_depth, job->color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = job->width * static_cast<std::size_t>(job->channels) *
                             static_cast<std::size_t>(job->bit_depth / 8);
  job->rows->resize(job->height);
  for (std::size_t y = 0; y < job->height; ++y) {
    (*job->rows)[y] = const_cast<png_bytep>(job->samples + y * stride);
  }
  png_write_image(png, job->rows->data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

// ---------------------------------------------------------------------------
// TIFF

thread_local std::string tiff_last_error;

void tiff_error_handler(const char* module, const char* fmt, va_list args) {
  char buffer[512];
  std::vsnprintf(buffer, sizeof(buffer), fmt, args);
  tiff_last_error = module != nullptr ? std::string(module) + ": " + buffer : std::string(buffer);
}

void tiff_warning_handler(const char*, const char*, va_list) {}

void install_tiff_handlers() {
  static std::once_flag once;
  std::call_once(once, [] {
    TIFFSetErrorHandler(tiff_error_handler);
    TIFFSetWarningHandler(tiff_warning_handler);
  });
}

struct TiffMemory {
  std::vector<std::uint8_t> data;
  toff_t position = 0;
};

tmsize_t tiff_read(thandle_t handle, void* buffer, tmsize_t size) {
  auto* mem = static_cast<TiffMemory*>(handle);
  if (mem->position >= mem->data.size()) {
    return 0;
  }
  const auto available = static_cast<tmsize_t>(mem->data.size() - mem->position);
  const tmsize_t n = size < available ? size : available;
  std::memcpy(buffer, mem->data.data() + mem->position, static_cast<std::size_t>(n));
  mem->position += static_cast<toff_t>(n);
  return n;
}

tmsize_t tiff_write(thandle_t handle, void* buffer, tmsize_t size) {
  auto* mem = static_cast<TiffMemory*>(handle);
  const std::size_t end = mem->position + static_cast<std::size_t>(size);
  if (end > mem->data.size()) {
    mem->data.resize(end);
  }
  std::memcpy(mem->data.data() + mem->position, buffer, static_cast<std::size_t>(size));
  mem->position = end;
  return size;
}

toff_t tiff_seek(thandle_t handle, toff_t offset, int whence) {
  auto* mem = static_cast<TiffMemory*>(handle);
  switch (whence) {
    case SEEK_SET:
      mem->position = offset;
      break;
    case SEEK_CUR:
      mem->position += offset;
      break;
    case SEEK_END:
      mem->position = mem->data.size() + offset;
      break;
    default:
      return static_cast<toff_t>(-1);
  }
  return mem->position;
}

int tiff_close(thandle_t) { return 0; }

toff_t tiff_size(thandle_t handle) { return static_cast<TiffMemory*>(handle)->data.size(); }

int tiff_map(thandle_t, void**, toff_t*) { return 0; }

void tiff_unmap(thandle_t, void*, toff_t) {}

struct TiffCloser {
  void operator()(TIFF* tif) const { TIFFClose(tif); }
};
using TiffHandle = std::unique_ptr<TIFF, TiffCloser>;

TiffHandle open_tiff(TiffMemory& mem, const char* mode) {
  install_tiff_handlers();
  tiff_last_error.clear();
  return TiffHandle(TIFFClientOpen("memory", mode, &mem, tiff_read, tiff_write, tiff_seek, tiff_close,
                                   tiff_size, tiff_map, tiff_unmap));
}

// Contiguous 8/16-bit gray or RGB strips, read scanline by scanline so that
// 16-bit samples are right-shifted instead of rescaled.
bool read_tiff_scanlines(TIFF* tif, std::uint32_t width, std::uint32_t height, RgbImage& image) {
  std::uint16_t bits = 0;
  std::uint16_t samples = 0;
  std::uint16_t photometric = 0;
  std::uint16_t planar = PLANARCONFIG_CONTIG;
  std::uint16_t format = SAMPLEFORMAT_UINT;
  TIFFGetFieldDefaulted(tif, TIFFTAG_BITSPERSAMPLE, &bits);
  TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLESPERPIXEL, &samples);
  TIFFGetFieldDefaulted(tif, TIFFTAG_PLANARCONFIG, &planar);
  TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLEFORMAT, &format);
  if (!TIFFGetField(tif, TIFFTAG_PHOTOMETRIC, &photometric)) {
    return false;
  }
  const bool gray = photometric == PHOTOMETRIC_MINISBLACK && (samples == 1 || samples == 2);
  const bool rgb = photometric == PHOTOMETRIC_RGB && (samples == 3 || samples == 4);
  if (TIFFIsTiled(tif) || planar != PLANARCONFIG_CONTIG || format != SAMPLEFORMAT_UINT ||
      (bits != 8 && bits != 16) || !(gray || rgb)) {
    return false;
  }
  std::vector<std::uint8_t> line(static_cast<std::size_t>(TIFFScanlineSize(tif)));
  const std::size_t bytes_per_sample = bits / 8;
  for (std::uint32_t y = 0; y < height; ++y) {
    if (TIFFReadScanline(tif, line.data(), y, 0) < 0) {
      throw std::runtime_error(tiff_last_error.empty() ? "scanline read failed" : tiff_last_error);
    }
    for (std::uint32_t x = 0; x < width; ++x) {
      std::uint8_t* dst = image.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const std::size_t sample = gray ? 0 : static_cast<std::size_t>(c);
        const std::size_t offset = (static_cast<std::size_t>(x) * samples + sample) * bytes_per_sample;
        if (bits == 8) {
          dst[c] = line[offset];
        } else {
          std::uint16_t value;
          std::memcpy(&value, &line[offset], sizeof(value));
          dst[c] = static_cast<std::uint8_t>(value >> 8);
        }
      }
    }
  }
  return true;
}

RgbImage decode_tiff(std::span<const std::uint8_t> bytes, const std::string& source) {
  TiffMemory mem{std::vector<std::uint8_t>(bytes.begin(), bytes.end()), 0};
  TiffHandle tif = open_tiff(mem, "rm");
  if (!tif) {
    throw DecodeError(source, "TIFF open failed: " + tiff_last_error);
  }
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
  TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
  if (width == 0 || height == 0) {
    throw DecodeError(source, "TIFF has zero dimensions");
  }
  RgbImage image{width, height, std::vector<std::uint8_t>(std::size_t{width} * height * 3)};
  try {
    if (read_tiff_scanlines(tif.get(), width, height, image)) {
      return image;
    }
  } catch (const std::runtime_error& e) {
    throw DecodeError(source, std::string("TIFF decode failed: ") + e.what());
  }
  std::vector<std::uint32_t> raster(std::size_t{width} * height);
  if (!TIFFReadRGBAImageOriented(tif.get(), width, height, raster.data(), ORIENTATION_TOPLEFT, 1)) {
    throw DecodeError(source, "TIFF decode failed: " + tiff_last_error);
  }
  for (std::size_t p = 0; p < raster.size(); ++p) {
    image.pixels[3 * p] = static_cast<std::uint8_t>(TIFFGetR(raster[p]));
    image.pixels[3 * p + 1] = static_cast<std::uint8_t>(TIFFGetG(raster[p]));
    image.pixels[3 * p + 2] = static_cast<std::uint8_t>(TIFFGetB(raster[p]));
  }
  return image;
}

}  // namespace

RgbImage decode_image(std::span<const std::uint8_t> bytes, const std::string& source) {
  switch (sniff_format(bytes)) {
    case ImageFormat::jpeg:
      return decode_jpeg(bytes, source);
    case ImageFormat::png:
      return decode_png(bytes, source);
    case ImageFormat::tiff:
      return decode_tiff(bytes, source);
    case ImageFormat::unknown:
      break;
  }
  throw DecodeError(source, "unrecognized image format");
}

RgbImage read_image_file(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const std::runtime_error& e) {
    throw DecodeError(path.string(), e.what());
  }
  return decode_image(bytes, path.string());
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality) {
  if (quality < 1 || quality > 100) {
    throw ArgumentError("JPEG quality must be in [1, 100], got " + std::to_string(quality));
  }
  image.validate();
  JpegEncoded out;
  JpegErrorManager err;
  const bool ok = encode_jpeg_raw(&image, quality, &out, &err);
  std::vector<std::uint8_t> bytes;
  if (ok) {
    bytes.assign(out.buffer, out.buffer + out.size);
  }
  std::free(out.buffer);
  if (!ok) {
    throw std::runtime_error(std::string("JPEG encode failed: ") + err.message);
  }
  return bytes;
}

std::vector<std::uint8_t> encode_png(const RgbImage& image, int compression_level) {
  image.validate();
  std::vector<std::uint8_t> sink;
  std::vector<png_bytep> rows;
  PngWriteJob job{image.pixels.data(), image.width, image.height, PNG_COLOR_TYPE_RGB, 3, 8,
                  compression_level, &sink, &rows};
  PngError err;
  if (!encode_png_raw(&job, &err)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + err.message);
  }
  return sink;
}

std::vector<std::uint8_t> encode_png_samples(std::span<const std::uint8_t> samples, std::size_t width,
                                             std::size_t height, PngLayout layout, int bit_depth) {
  int color_type = PNG_COLOR_TYPE_RGB;
  int channels = 3;
  switch (layout) {
    case PngLayout::gray:
      color_type = PNG_COLOR_TYPE_GRAY;
      channels = 1;
      break;
    case PngLayout::gray_alpha:
      color_type = PNG_COLOR_TYPE_GRAY_ALPHA;
      channels = 2;
      break;
    case PngLayout::rgb:
      break;
    case PngLayout::rgba:
      color_type = PNG_COLOR_TYPE_RGB_ALPHA;
      channels = 4;
      break;
  }
  if (bit_depth != 8 && bit_depth != 16) {
    throw ArgumentError("PNG bit depth must be 8 or 16");
  }
  if (samples.size() != width * height * static_cast<std::size_t>(channels * bit_depth / 8)) {
    throw ArgumentError("PNG sample buffer size does not match dimensions");
  }
  std::vector<std::uint8_t> sink;
  std::vector<png_bytep> rows;
  PngWriteJob job{samples.data(), width, height, color_type, channels, bit_depth, 6, &sink, &rows};
  PngError err;
  if (!encode_png_raw(&job, &err)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + err.message);
  }
  return sink;
}

std::vector<std::uint8_t> encode_tiff(const RgbImage& image, int bit_depth) {
  image.validate();
  if (bit_depth != 8 && bit_depth != 16) {
    throw ArgumentError("TIFF bit depth must be 8 or 16");
  }
  TiffMemory mem;
  {
    TiffHandle tif = open_tiff(mem, "w");
    if (!tif) {
      throw std::runtime_error("TIFF encode failed: " + tiff_last_error);
    }
    TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(image.width));
    TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(image.height));
    TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, 3);
    TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, bit_depth);
    TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_RGB);
    TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
    TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, static_cast<std::uint32_t>(image.height));
    std::vector<std::uint8_t> line(image.width * 3 * static_cast<std::size_t>(bit_depth / 8));
    for (std::size_t y = 0; y < image.height; ++y) {
      const std::uint8_t* src = image.at(0, y);
      if (bit_depth == 8) {
        std::memcpy(line.data(), src, image.width * 3);
      } else {
        for (std::size_t i = 0; i < image.width * 3; ++i) {
          const std::uint16_t wide = static_cast<std::uint16_t>(src[i] * 257);
          std::memcpy(&line[2 * i], &wide, sizeof(wide));
        }
      }
      if (TIFFWriteScanline(tif.get(), line.data(), static_cast<std::uint32_t>(y), 0) < 0) {
        throw std::runtime_error("TIFF encode failed: " + tiff_last_error);
      }
    }
  }
  return std::move(mem.data);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

}  // namespace patchaudit
