#include "segedit/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>

namespace segedit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error("png: " + what + ": " + path.string());
}

void write_png(const std::filesystem::path& path, int width, int height, int color_type,
               int bit_depth, const std::uint8_t* data, std::size_t row_bytes) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) fail(path, "cannot open for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(path, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "libpng error while writing");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // in-memory samples are little-endian

  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(data + static_cast<std::size_t>(y) * row_bytes);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FilePtr fp;

  explicit PngReader(const std::filesystem::path& path) {
    fp.reset(std::fopen(path.string().c_str(), "rb"));
    if (!fp) fail(path, "cannot open for reading");
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png_create_read_struct failed");
    info = png_create_info_struct(png);
    if (!info) {
      png_destroy_read_struct(&png, nullptr, nullptr);
      fail(path, "png_create_info_struct failed");
    }
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    fail(path, "rgb buffer size does not match dimensions");
  }
  write_png(path, width, height, PNG_COLOR_TYPE_RGB, 8, rgb.data(),
            static_cast<std::size_t>(width) * 3);
}

void write_png_gray8(const std::filesystem::path& path, int width, int height,
                     const std::vector<std::uint8_t>& gray) {
  if (gray.size() != static_cast<std::size_t>(width) * height) {
    fail(path, "gray buffer size does not match dimensions");
  }
  write_png(path, width, height, PNG_COLOR_TYPE_GRAY, 8, gray.data(),
            static_cast<std::size_t>(width));
}

void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      const std::vector<std::uint16_t>& gray) {
  if (gray.size() != static_cast<std::size_t>(width) * height) {
    fail(path, "gray16 buffer size does not match dimensions");
  }
  write_png(path, width, height, PNG_COLOR_TYPE_GRAY, 16,
            reinterpret_cast<const std::uint8_t*>(gray.data()),
            static_cast<std::size_t>(width) * 2);
}

Rgb8Image read_png_rgb8(const std::filesystem::path& path) {
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) fail(path, "libpng error while reading");
  png_init_io(r.png, r.fp.get());
  png_read_info(r.png, r.info);
  if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_RGB ||
      png_get_bit_depth(r.png, r.info) != 8) {
    fail(path, "expected 8-bit RGB");
  }
  Rgb8Image img;
  img.width = static_cast<int>(png_get_image_width(r.png, r.info));
  img.height = static_cast<int>(png_get_image_height(r.png, r.info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        img.pixels.data() + static_cast<std::size_t>(y) * img.width * 3;
  }
  png_read_image(r.png, rows.data());
  return img;
}

Gray8Image read_png_gray8(const std::filesystem::path& path) {
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) fail(path, "libpng error while reading");
  png_init_io(r.png, r.fp.get());
  png_read_info(r.png, r.info);
  if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(r.png, r.info) != 8) {
    fail(path, "expected 8-bit grayscale");
  }
  Gray8Image img;
  img.width = static_cast<int>(png_get_image_width(r.png, r.info));
  img.height = static_cast<int>(png_get_image_height(r.png, r.info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
  }
  png_read_image(r.png, rows.data());
  return img;
}

Gray16Image read_png_gray16(const std::filesystem::path& path) {
  PngReader r(path);
  if (setjmp(png_jmpbuf(r.png))) fail(path, "libpng error while reading");
  png_init_io(r.png, r.fp.get());
  png_read_info(r.png, r.info);
  if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(r.png, r.info) != 16) {
    fail(path, "expected 16-bit grayscale");
  }
  png_set_swap(r.png);
  Gray16Image img;
  img.width = static_cast<int>(png_get_image_width(r.png, r.info));
  img.height = static_cast<int>(png_get_image_height(r.png, r.info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] = reinterpret_cast<png_bytep>(
        img.pixels.data() + static_cast<std::size_t>(y) * img.width);
  }
  png_read_image(r.png, rows.data());
  return img;
}

}  // namespace segedit
