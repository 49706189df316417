#include "rca/features/texture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "rca/common/error.hpp"

namespace rca::features {

TextureFeature texture_feature(const geometry::Image& patch) {
  if (patch.empty()) throw ValidationError("texture_feature: empty patch");
  if (patch.width * patch.height < 2) throw ValidationError("texture_feature: degenerate 1x1 patch");

  const int w = patch.width, h = patch.height;
  const std::size_t count = static_cast<std::size_t>(w) * h;
  auto channel = [&](int x, int y, int c) -> std::uint64_t {
    return patch.at(x, y, patch.channels == 1 ? 0 : c);
  };

  TextureFeature f;
  // Integer moments keep the statistics independent of pixel order.
  for (int c = 0; c < 3; ++c) {
    std::uint64_t sum = 0, sum_sq = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::uint64_t v = channel(x, y, c);
        sum += v;
        sum_sq += v * v;
      }
    }
    const double n = static_cast<double>(count);
    const double mean = static_cast<double>(sum) / n;
    const double var = std::max(0.0, (static_cast<double>(sum_sq) - static_cast<double>(sum) * mean) / n);
    f.vector[static_cast<std::size_t>(c)] = mean;
    f.vector[static_cast<std::size_t>(3 + c)] = std::sqrt(var);
  }

  std::vector<double> gray(count);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double g = 0.299 * static_cast<double>(channel(x, y, 0)) +
                       0.587 * static_cast<double>(channel(x, y, 1)) +
                       0.114 * static_cast<double>(channel(x, y, 2));
      gray[static_cast<std::size_t>(y) * w + x] = g;
      const auto bin = std::min<std::size_t>(kIntensityBins - 1,
                                             static_cast<std::size_t>(g * kIntensityBins / 256.0));
      f.vector[kIntensityOffset + bin] += 1.0;
    }
  }
  for (std::size_t b = 0; b < kIntensityBins; ++b) {
    f.vector[kIntensityOffset + b] /= static_cast<double>(count);
  }

  double total = 0.0;
  std::array<double, kOrientationBins> hist{};
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const double gx = 0.5 * (gray[static_cast<std::size_t>(y) * w + x + 1] -
                               gray[static_cast<std::size_t>(y) * w + x - 1]);
      const double gy = 0.5 * (gray[static_cast<std::size_t>(y + 1) * w + x] -
                               gray[static_cast<std::size_t>(y - 1) * w + x]);
      const double mag = std::hypot(gx, gy);
      if (mag <= 0.0) continue;
      const double angle = std::atan2(gy, gx) + std::numbers::pi;  // [0, 2pi]
      auto bin = static_cast<std::size_t>(angle / (2.0 * std::numbers::pi) * kOrientationBins);
      bin = std::min(bin, kOrientationBins - 1);
      hist[bin] += mag;
      total += mag;
    }
  }
  for (std::size_t b = 0; b < kOrientationBins; ++b) {
    f.vector[kOrientationOffset + b] =
        total > 0.0 ? hist[b] / total : 1.0 / static_cast<double>(kOrientationBins);
  }
  return f;
}

double distance(const TextureFeature& a, const TextureFeature& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kTextureDim; ++i) {
    const double d = a.vector[i] - b.vector[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace rca::features
