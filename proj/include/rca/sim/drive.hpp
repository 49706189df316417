#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rca/geometry/calibration.hpp"
#include "rca/geometry/camera.hpp"
#include "rca/geometry/raster.hpp"
#include "rca/signals/state_log.hpp"
#include "rca/sim/world.hpp"

namespace rca::sim {

inline constexpr std::array<std::uint8_t, 3> kSkyColor{150, 190, 235};
inline constexpr std::array<std::uint8_t, 3> kVoidColor{20, 20, 20};

// Forward-looking camera mounted above the vehicle origin. The vehicle
// frame is x forward, y left, z up with the ground at z = 0.
struct CameraRig {
  geometry::CameraModel camera{200.0, 200.0, 160.0, 128.0, 320, 256};
  double height = 1.2;
  double pitch = 0.21;  // downward tilt, radians

  geometry::Extrinsics vehicle_to_camera() const;
  geometry::Extrinsics world_to_camera(const Eigen::Vector2d& position, double yaw) const;
  geometry::Calibration calibration() const;
};

struct DriveOptions {
  double speed = 1.0;
  double state_rate = 200.0;
  double image_rate = 5.0;
  std::uint64_t seed = 0;
  bool render_images = true;
  CameraRig rig;
};

struct Frame {
  double t = 0.0;
  std::size_t state_index = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double yaw = 0.0;
  geometry::Image image;  // empty when rendering is disabled
};

struct DriveOutput {
  signals::StateLog log;
  std::vector<Frame> frames;
};

// Constant-speed traversal of the waypoint polyline. Sample i is at
// t = i / state_rate; floor(length / speed * state_rate) samples are emitted.
DriveOutput simulate_drive(const WorldMap& world, const std::vector<Eigen::Vector2d>& path,
                           const DriveOptions& options);

// Per-pixel ray cast onto the world ground plane z = 0.
geometry::Image render_view(const WorldMap& world, const geometry::CameraModel& cam,
                            const geometry::Extrinsics& world_to_cam, std::uint64_t seed);
geometry::Image render_view(const WorldMap& world, const CameraRig& rig, const Eigen::Vector2d& position,
                            double yaw, std::uint64_t seed);

}  // namespace rca::sim
