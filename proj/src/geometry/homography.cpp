#include "rca/geometry/homography.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rca/common/error.hpp"

namespace rca::geometry {

Eigen::Matrix3d bev_homography(const Extrinsics& fp_to_bev, const GroundPlane& plane) {
  if (!(plane.dist > 0.0)) throw ValidationError("bev_homography: plane dist must be positive");
  return fp_to_bev.R - fp_to_bev.t * plane.normal.transpose() / plane.dist;
}

Eigen::Vector2d warp_point(const Eigen::Vector3d& p_fp, const Eigen::Matrix3d& H,
                           const CameraModel& cam) {
  const Eigen::Vector3d q = cam.K() * (H * (cam.K_inv() * p_fp));
  if (std::abs(q.z()) < 1e-12) throw NumericError("warp_point: point maps to infinity");
  return {q.x() / q.z(), q.y() / q.z()};
}

Eigen::Vector2d warp_point(const Eigen::Vector2d& p_fp, const Eigen::Matrix3d& H,
                           const CameraModel& cam) {
  return warp_point(Eigen::Vector3d(p_fp.x(), p_fp.y(), 1.0), H, cam);
}

WarpedImage warp_image_to_bev_masked(const Image& image, const Eigen::Matrix3d& H,
                                     const CameraModel& cam, int out_width, int out_height,
                                     std::uint8_t sentinel) {
  if (!H.allFinite() || std::abs(H.determinant()) < 1e-12) {
    throw ValidationError("warp_image_to_bev: singular homography");
  }
  if (out_width <= 0 || out_height <= 0) throw ValidationError("warp_image_to_bev: empty output");
  const Eigen::Matrix3d back = cam.K() * H.inverse() * cam.K_inv();

  WarpedImage out{Image(out_width, out_height, image.channels, sentinel),
                  std::vector<std::uint8_t>(static_cast<std::size_t>(out_width) * out_height, 0)};
  const int w = image.width, h = image.height, ch = image.channels;
  for (int v = 0; v < out_height; ++v) {
    for (int u = 0; u < out_width; ++u) {
      const Eigen::Vector3d q = back * Eigen::Vector3d(u, v, 1.0);
      if (!(q.z() > 1e-12)) continue;
      const double x = q.x() / q.z();
      const double y = q.y() / q.z();
      if (!(x >= -0.5 && x < w - 0.5 && y >= -0.5 && y < h - 0.5)) continue;
      const double fx0 = std::floor(x), fy0 = std::floor(y);
      const double ax = x - fx0, ay = y - fy0;
      const int x0 = std::clamp(static_cast<int>(fx0), 0, w - 1);
      const int x1 = std::clamp(static_cast<int>(fx0) + 1, 0, w - 1);
      const int y0 = std::clamp(static_cast<int>(fy0), 0, h - 1);
      const int y1 = std::clamp(static_cast<int>(fy0) + 1, 0, h - 1);
      for (int c = 0; c < ch; ++c) {
        const double top = (1.0 - ax) * image.at(x0, y0, c) + ax * image.at(x1, y0, c);
        const double bottom = (1.0 - ax) * image.at(x0, y1, c) + ax * image.at(x1, y1, c);
        const double value = (1.0 - ay) * top + ay * bottom;
        out.image.at(u, v, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
      }
      out.valid[static_cast<std::size_t>(v) * out_width + u] = 1;
    }
  }
  return out;
}

Image warp_image_to_bev(const Image& image, const Eigen::Matrix3d& H, const CameraModel& cam,
                        int out_width, int out_height, std::uint8_t sentinel) {
  return warp_image_to_bev_masked(image, H, cam, out_width, out_height, sentinel).image;
}

}  // namespace rca::geometry
