#pragma once

#include <array>
#include <cstddef>

#include "rca/geometry/raster.hpp"

namespace rca::features {

// Handcrafted terrain descriptor:
//   [0, 6)   per-channel mean (R, G, B) then per-channel std dev, 0..255 units
//   [6, 22)  16-bin grayscale intensity histogram, sums to 1
//   [22, 30) 8-bin gradient-orientation histogram, magnitude weighted, sums to 1
// Gray patches are treated as three identical channels.
inline constexpr std::size_t kTextureDim = 30;
inline constexpr std::size_t kIntensityOffset = 6;
inline constexpr std::size_t kIntensityBins = 16;
inline constexpr std::size_t kOrientationOffset = 22;
inline constexpr std::size_t kOrientationBins = 8;

struct TextureFeature {
  std::array<double, kTextureDim> vector{};

  bool operator==(const TextureFeature&) const = default;
};

TextureFeature texture_feature(const geometry::Image& patch);

double distance(const TextureFeature& a, const TextureFeature& b);

}  // namespace rca::features
