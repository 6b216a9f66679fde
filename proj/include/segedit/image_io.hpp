#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace segedit {

// Thin libpng wrappers for the dataset's on-disk formats. All loaders throw
// std::runtime_error with the offending path on failure.

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<std::uint8_t>& rgb);
void write_png_gray8(const std::filesystem::path& path, int width, int height,
                     const std::vector<std::uint8_t>& gray);
void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      const std::vector<std::uint16_t>& gray);

struct Rgb8Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel
};

struct Gray8Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

struct Gray16Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;
};

Rgb8Image read_png_rgb8(const std::filesystem::path& path);
Gray8Image read_png_gray8(const std::filesystem::path& path);
Gray16Image read_png_gray16(const std::filesystem::path& path);

}  // namespace segedit
