#include "beet/png_io.hpp"

#include <png.h>

#include <array>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "beet/error.hpp"

namespace beet {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

// Palette shared by semantic masks; colors are for viewing only.
constexpr std::array<std::array<png_byte, 3>, kNumClasses> kClassColors = {{
    {0, 0, 0},        // Bg
    {230, 190, 60},   // Beet
    {250, 250, 250},  // Cut
    {40, 160, 40},    // Leaf
    {120, 80, 40},    // Soil
    {220, 40, 40},    // Dmg
    {120, 40, 160},   // Rot
}};

enum class Layout { Indexed, Rgb };

void write_png(const std::filesystem::path& path, int width, int height, const std::uint8_t* data,
               Layout layout, int palette_size) {
  if (width <= 0 || height <= 0) throw IoError("cannot write an empty PNG: " + path.string());
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  const int color_type = layout == Layout::Indexed ? PNG_COLOR_TYPE_PALETTE : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  std::array<png_color, kNumClasses> palette{};
  if (layout == Layout::Indexed) {
    for (int i = 0; i < palette_size; ++i) {
      const auto& c = palette_size == 2 ? (i == 0 ? kClassColors[0] : kClassColors[2])
                                        : kClassColors[static_cast<std::size_t>(i)];
      palette[static_cast<std::size_t>(i)] = png_color{c[0], c[1], c[2]};
    }
    png_set_PLTE(png, info, palette.data(), palette_size);
  }
  png_write_info(png, info);
  const std::size_t stride =
      static_cast<std::size_t>(width) * (layout == Layout::Indexed ? 1 : 3);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

Decoded read_png(const std::filesystem::path& path, bool to_rgb) {
  FilePtr file = open_file(path, "rb");
  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw IoError("'" + path.string() + "' is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  Decoded out;
  std::string failure;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed decoding PNG '" + path.string() + "'" +
                  (failure.empty() ? "" : ": " + failure));
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (to_rgb) {
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
  } else {
    if (color_type != PNG_COLOR_TYPE_PALETTE && color_type != PNG_COLOR_TYPE_GRAY) {
      failure = "mask PNG must be indexed or grayscale";
      png_error(png, "unsupported color type");
    }
    if (bit_depth == 16) {
      failure = "16-bit mask PNGs are not supported";
      png_error(png, "unsupported bit depth");
    }
    if (bit_depth < 8) png_set_packing(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.data.resize(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = out.data.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

void write_semantic_png(const std::filesystem::path& path, const SemanticMask& mask) {
  write_png(path, mask.width(), mask.height(), mask.cells().data(), Layout::Indexed, kNumClasses);
}

SemanticMask read_semantic_png(const std::filesystem::path& path) {
  Decoded d = read_png(path, false);
  try {
    return SemanticMask(d.width, d.height, std::move(d.data));
  } catch (const ValidationError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

void write_binary_png(const std::filesystem::path& path, const BinaryMask& mask) {
  write_png(path, mask.width(), mask.height(), mask.cells().data(), Layout::Indexed, 2);
}

BinaryMask read_binary_png(const std::filesystem::path& path) {
  Decoded d = read_png(path, false);
  // Grayscale masks saved as 0/255 are common; accept them.
  for (auto& v : d.data) {
    if (v == 255) v = 1;
  }
  try {
    return BinaryMask(d.width, d.height, std::move(d.data));
  } catch (const ValidationError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
  write_png(path, image.width, image.height, image.pixels.data(), Layout::Rgb, 0);
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  Decoded d = read_png(path, true);
  if (d.channels != 3) throw IoError("'" + path.string() + "' did not decode to RGB");
  RgbImage img;
  img.width = d.width;
  img.height = d.height;
  img.pixels = std::move(d.data);
  return img;
}

}  // namespace beet
