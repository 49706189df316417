#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rca/geometry/raster.hpp"

namespace rca::geometry {

// Pinhole camera; images are assumed distortion-corrected.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  Eigen::Matrix3d K() const;
  Eigen::Matrix3d K_inv() const;
  void validate() const;
  bool contains(const Eigen::Vector2d& pixel) const;
};

// Rigid transform X_to = R * X_from + t (world -> camera for extrinsics).
struct Extrinsics {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  void validate() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return R * x + t; }
  Extrinsics inverse() const;
  // Position of the target frame's origin expressed in the source frame.
  Eigen::Vector3d origin_in_source() const { return -R.transpose() * t; }
};

// Transform taking points in frame A to frame B, given world->A and world->B.
Extrinsics relative_extrinsics(const Extrinsics& world_to_a, const Extrinsics& world_to_b);

struct Footprint {
  int index = 0;
  double yaw = 0.0;
  Eigen::Vector3d p_world = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector2d> p_pixel;
};

// Plane n^T X + dist = 0 in camera coordinates: normal points from the
// plane toward the camera and dist is the camera-to-plane distance.
struct GroundPlane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double dist = 1.0;

  void validate() const;
};

double wrap_angle(double angle);

// Optical frame (x right, y down, z forward) of a camera at world position
// `position` (z-up world) looking along `yaw`, tilted down by `pitch`.
Extrinsics camera_extrinsics(const Eigen::Vector3d& position, double yaw, double pitch);

// World plane z = ground_z expressed in the camera frame of `world_to_cam`.
GroundPlane ground_plane_in_camera(const Extrinsics& world_to_cam, double ground_z = 0.0);

// K [R|t] X with homogeneous division; nullopt when depth <= 0.
std::optional<Eigen::Vector2d> project_point(const CameraModel& cam, const Extrinsics& ext,
                                             const Eigen::Vector3d& p_world);

// Camera-frame intersection of the pixel ray with the plane; nullopt when the
// ray is parallel to the plane or meets it behind the camera.
std::optional<Eigen::Vector3d> ray_plane_intersection(const CameraModel& cam,
                                                      const Eigen::Vector2d& pixel,
                                                      const GroundPlane& plane);

// Heading filter against the reference yaw (footprint 0 unless given), then
// the m closest to the camera, then projection; footprints behind the camera
// or outside the image are dropped. Output is ordered by distance.
std::vector<Footprint> project_footprints(std::span<const Footprint> footprints,
                                          const CameraModel& cam, const Extrinsics& ext,
                                          double theta, std::size_t m,
                                          std::optional<double> reference_yaw = std::nullopt);

struct CropBox {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
};

// Box of w x h pixels centered on `center`; nullopt if it leaves the image.
std::optional<CropBox> crop_box(int image_width, int image_height, const Eigen::Vector2d& center,
                                int w, int h);
std::optional<Image> crop_patch(const Image& image, const Eigen::Vector2d& center, int w, int h);
Image crop(const Image& image, const CropBox& box);

}  // namespace rca::geometry
