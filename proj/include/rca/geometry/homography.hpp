#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rca/geometry/camera.hpp"
#include "rca/geometry/raster.hpp"

namespace rca::geometry {

// Plane-induced Euclidean homography H = R - t n^T / d, where
// `fp_to_bev` maps first-person camera coordinates into the BEV camera
// frame and `plane` is the ground plane in first-person camera coordinates.
Eigen::Matrix3d bev_homography(const Extrinsics& fp_to_bev, const GroundPlane& plane);

// K H K^-1 p normalized by its third coordinate.
Eigen::Vector2d warp_point(const Eigen::Vector3d& p_fp, const Eigen::Matrix3d& H,
                           const CameraModel& cam);
Eigen::Vector2d warp_point(const Eigen::Vector2d& p_fp, const Eigen::Matrix3d& H,
                           const CameraModel& cam);

struct WarpedImage {
  Image image;
  // 1 where the output pixel was sampled from the source, 0 where it was filled.
  std::vector<std::uint8_t> valid;
};

// Inverse-mapping warp with bilinear sampling; output pixels whose preimage
// lies outside the source (or behind the source camera) get `sentinel`.
WarpedImage warp_image_to_bev_masked(const Image& image, const Eigen::Matrix3d& H,
                                     const CameraModel& cam, int out_width, int out_height,
                                     std::uint8_t sentinel = 0);
Image warp_image_to_bev(const Image& image, const Eigen::Matrix3d& H, const CameraModel& cam,
                        int out_width, int out_height, std::uint8_t sentinel = 0);

}  // namespace rca::geometry
