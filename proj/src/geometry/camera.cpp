#include "rca/geometry/camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "rca/common/error.hpp"

namespace rca::geometry {

Eigen::Matrix3d CameraModel::K() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraModel::K_inv() const {
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("camera: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ValidationError("camera: image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw ValidationError("camera: principal point outside the image");
  }
}

bool CameraModel::contains(const Eigen::Vector2d& pixel) const {
  return pixel.x() >= -0.5 && pixel.x() < width - 0.5 && pixel.y() >= -0.5 &&
         pixel.y() < height - 0.5;
}

void Extrinsics::validate() const {
  if (!R.allFinite() || !t.allFinite()) throw ValidationError("extrinsics: non-finite values");
  if (((R.transpose() * R) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ValidationError("extrinsics: R is not orthonormal");
  }
  if (std::abs(R.determinant() - 1.0) > 1e-9) {
    throw ValidationError("extrinsics: det(R) != 1");
  }
}

Extrinsics Extrinsics::inverse() const {
  Extrinsics inv;
  inv.R = R.transpose();
  inv.t = -inv.R * t;
  return inv;
}

Extrinsics relative_extrinsics(const Extrinsics& world_to_a, const Extrinsics& world_to_b) {
  Extrinsics rel;
  rel.R = world_to_b.R * world_to_a.R.transpose();
  rel.t = world_to_b.t - rel.R * world_to_a.t;
  return rel;
}

void GroundPlane::validate() const {
  if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > 1e-9) {
    throw ValidationError("ground plane: normal must be unit length");
  }
  if (!(dist > 0.0)) throw ValidationError("ground plane: dist must be positive");
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

Extrinsics camera_extrinsics(const Eigen::Vector3d& position, double yaw, double pitch) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const Eigen::Vector3d forward(cy * cp, sy * cp, -sp);
  const Eigen::Vector3d right(sy, -cy, 0.0);
  const Eigen::Vector3d down = forward.cross(right);
  Extrinsics ext;
  ext.R.row(0) = right.transpose();
  ext.R.row(1) = down.transpose();
  ext.R.row(2) = forward.transpose();
  ext.t = -ext.R * position;
  return ext;
}

GroundPlane ground_plane_in_camera(const Extrinsics& world_to_cam, double ground_z) {
  GroundPlane plane;
  plane.normal = world_to_cam.R * Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d center = world_to_cam.origin_in_source();
  plane.dist = center.z() - ground_z;
  return plane;
}

std::optional<Eigen::Vector2d> project_point(const CameraModel& cam, const Extrinsics& ext,
                                             const Eigen::Vector3d& p_world) {
  const Eigen::Vector3d pc = ext.apply(p_world);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const Eigen::Vector3d uvw = cam.K() * pc;
  return Eigen::Vector2d(uvw.x() / uvw.z(), uvw.y() / uvw.z());
}

std::optional<Eigen::Vector3d> ray_plane_intersection(const CameraModel& cam,
                                                      const Eigen::Vector2d& pixel,
                                                      const GroundPlane& plane) {
  const Eigen::Vector3d ray = cam.K_inv() * Eigen::Vector3d(pixel.x(), pixel.y(), 1.0);
  const double denom = plane.normal.dot(ray);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double s = -plane.dist / denom;
  if (!(s > 0.0)) return std::nullopt;
  return Eigen::Vector3d(ray * s);
}

std::vector<Footprint> project_footprints(std::span<const Footprint> footprints,
                                          const CameraModel& cam, const Extrinsics& ext,
                                          double theta, std::size_t m,
                                          std::optional<double> reference_yaw) {
  std::vector<Footprint> out;
  if (footprints.empty()) return out;
  const double ref = reference_yaw.value_or(footprints.front().yaw);

  std::vector<Footprint> kept;
  for (const auto& fp : footprints) {
    if (std::abs(wrap_angle(fp.yaw - ref)) <= theta) kept.push_back(fp);
  }

  const Eigen::Vector3d camera_center = ext.origin_in_source();
  std::stable_sort(kept.begin(), kept.end(), [&](const Footprint& a, const Footprint& b) {
    return (a.p_world - camera_center).norm() < (b.p_world - camera_center).norm();
  });
  if (kept.size() > m) kept.resize(m);

  for (auto& fp : kept) {
    auto pixel = project_point(cam, ext, fp.p_world);
    if (!pixel || !cam.contains(*pixel)) continue;
    fp.p_pixel = *pixel;
    out.push_back(fp);
  }
  return out;
}

std::optional<CropBox> crop_box(int image_width, int image_height, const Eigen::Vector2d& center,
                                int w, int h) {
  if (w < 1 || h < 1) throw ValidationError("crop: w and h must be >= 1");
  if (!center.allFinite()) return std::nullopt;
  const double fx0 = std::floor(center.x() - w / 2.0 + 0.5);
  const double fy0 = std::floor(center.y() - h / 2.0 + 0.5);
  if (fx0 < 0.0 || fy0 < 0.0 || fx0 + w > image_width || fy0 + h > image_height) {
    return std::nullopt;
  }
  return CropBox{static_cast<int>(fx0), static_cast<int>(fy0), w, h};
}

Image crop(const Image& image, const CropBox& box) {
  Image patch(box.w, box.h, image.channels);
  const std::size_t row_bytes = static_cast<std::size_t>(box.w) * image.channels;
  for (int y = 0; y < box.h; ++y) {
    const auto* src = &image.data[(static_cast<std::size_t>(box.y0 + y) * image.width + box.x0) *
                                  image.channels];
    std::copy_n(src, row_bytes, &patch.data[static_cast<std::size_t>(y) * row_bytes]);
  }
  return patch;
}

std::optional<Image> crop_patch(const Image& image, const Eigen::Vector2d& center, int w, int h) {
  auto box = crop_box(image.width, image.height, center, w, h);
  if (!box) return std::nullopt;
  return crop(image, *box);
}

}  // namespace rca::geometry
