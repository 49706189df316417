#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rca::signals {

// One vehicle-state sample. The world frame is z-up. Angular velocity is
// ordered (roll, pitch, yaw) with yaw positive counter-clockwise seen from
// above. Linear acceleration is body-frame kinematic acceleration
// (x forward, y left) whose z component is reported pointing downward.
struct VehicleStateSample {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
};

using StateLog = std::vector<VehicleStateSample>;

// Throws ValidationError unless every quaternion is unit length (1e-6),
// timestamps are strictly increasing and all values are finite.
void validate_log(std::span<const VehicleStateSample> log);

double yaw_of(const Eigen::Quaterniond& q);
Eigen::Quaterniond quaternion_from_yaw(double yaw);

// CSV with header t,px,py,pz,qw,qx,qy,qz,wr,wp,wy,ax,ay,az.
StateLog read_state_log(const std::filesystem::path& path);
StateLog parse_state_log(const std::string& csv);
std::string format_state_log(std::span<const VehicleStateSample> log);
void write_state_log(const std::filesystem::path& path, std::span<const VehicleStateSample> log);

}  // namespace rca::signals
