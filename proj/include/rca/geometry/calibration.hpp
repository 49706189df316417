#pragma once

#include <filesystem>

#include "json.hpp"

#include "rca/geometry/camera.hpp"

namespace rca::geometry {

// Camera intrinsics, vehicle-frame -> camera extrinsics and the ground plane
// in camera coordinates.
struct Calibration {
  CameraModel camera;
  Extrinsics extrinsics;
  GroundPlane plane;

  void validate() const;
};

nlohmann::json to_json(const CameraModel& cam);
nlohmann::json to_json(const Extrinsics& ext);
nlohmann::json to_json(const GroundPlane& plane);
nlohmann::json to_json(const Calibration& calib);

CameraModel camera_from_json(const nlohmann::json& j);
Extrinsics extrinsics_from_json(const nlohmann::json& j);
GroundPlane plane_from_json(const nlohmann::json& j);
Calibration calibration_from_json(const nlohmann::json& j);

Calibration read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path, const Calibration& calib);

}  // namespace rca::geometry
