#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rca::geometry {

// 8-bit raster, row-major with interleaved channels (1 = gray, 3 = RGB).
// Pixel (x, y) has its center at integer coordinates (x, y).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0);

  bool empty() const { return width == 0 || height == 0; }
  std::uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

// Binary PGM (P5) for 1 channel, PPM (P6) for 3 channels, maxval 255.
Image read_pnm(const std::filesystem::path& path);
Image decode_pnm(const std::string& bytes);
std::string encode_pnm(const Image& image);
void write_pnm(const std::filesystem::path& path, const Image& image);

}  // namespace rca::geometry
