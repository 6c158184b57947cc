#include "avs/dataio/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace avs::dataio {

namespace {

using File = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

File open(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_fail(png_structp, png_const_charp msg) { throw std::runtime_error(msg); }
void png_warn(png_structp, png_const_charp) {}

struct Image {
  int width = 0, height = 0, channels = 0, depth = 0;
  std::vector<unsigned char> bytes;  // row-major, big-endian 16-bit samples
};

void write_png(const std::filesystem::path& path, const Image& img, int color_type) {
  auto f = open(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  try {
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), img.depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // No timestamps or text chunks: output depends only on pixels.
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels * (img.depth / 8);
    for (int y = 0; y < img.height; ++y)
      png_write_row(png, const_cast<png_bytep>(img.bytes.data() + stride * static_cast<std::size_t>(y)));
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path& path) {
  auto f = open(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw std::runtime_error(path.string() + ": not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  Image img;
  try {
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int ct = png_get_color_type(png, info);
    if (ct == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (ct == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.channels = png_get_channels(png, info);
    img.depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    img.bytes.resize(stride * static_cast<std::size_t>(img.height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = img.bytes.data() + stride * static_cast<std::size_t>(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  } catch (const std::exception& e) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace

void write_rgb_png(const std::filesystem::path& path, const Tensor<float>& rgb) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3) throw std::invalid_argument("write_rgb_png: expected 3 x H x W, got " + shape_str(rgb.shape()));
  Image img{rgb.dim(2), rgb.dim(1), 3, 8, {}};
  img.bytes.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  std::size_t k = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        img.bytes[k++] = static_cast<unsigned char>(std::lround(std::clamp(rgb.at(c, y, x), 0.0f, 1.0f) * 255.0f));
  write_png(path, img, PNG_COLOR_TYPE_RGB);
}

Tensor<float> read_rgb_png(const std::filesystem::path& path) {
  const Image img = read_png(path);
  if (img.depth != 8) throw std::runtime_error(path.string() + ": expected 8-bit image");
  Tensor<float> out({3, img.height, img.width});
  const std::size_t n = static_cast<std::size_t>(img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const unsigned char* p = img.bytes.data() + (static_cast<std::size_t>(y) * img.width + x) * n;
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = static_cast<float>(p[n >= 3 ? c : 0]) / 255.0f;
    }
  return out;
}

void write_depth_png(const std::filesystem::path& path, const Tensor<float>& depth) {
  if (depth.rank() != 2) throw std::invalid_argument("write_depth_png: expected H x W, got " + shape_str(depth.shape()));
  Image img{depth.dim(1), depth.dim(0), 1, 16, {}};
  img.bytes.resize(static_cast<std::size_t>(img.width) * img.height * 2);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double mm = std::isfinite(depth[i]) ? std::clamp(std::round(depth[i] * 1000.0), 0.0, 65535.0) : 0.0;
    const auto v = static_cast<unsigned>(mm);
    img.bytes[2 * i] = static_cast<unsigned char>(v >> 8);
    img.bytes[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
  }
  write_png(path, img, PNG_COLOR_TYPE_GRAY);
}

Tensor<float> read_depth_png(const std::filesystem::path& path) {
  const Image img = read_png(path);
  if (img.depth != 16 || img.channels != 1) throw std::runtime_error(path.string() + ": expected 16-bit gray depth");
  Tensor<float> out({img.height, img.width});
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<float>(((img.bytes[2 * i] << 8) | img.bytes[2 * i + 1]) / 1000.0);
  return out;
}

}  // namespace avs::dataio
