#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "rca/geometry/calibration.hpp"
#include "rca/geometry/raster.hpp"
#include "rca/signals/spectrum.hpp"
#include "rca/sim/drive.hpp"
#include "rca/sim/world.hpp"

namespace rca::sim {

struct ExportOptions {
  std::size_t window = 256;
  std::size_t stride = 128;
  bool hann = false;
  double theta = 0.26;
  std::size_t m = 10;
  int patch_w = 64;
  int patch_h = 64;
  bool bev = false;
  double bev_height = 4.0;  // virtual top-down camera above the ground
  double bev_ahead = 3.0;   // and this far ahead of the vehicle
  double horizon_s = 10.0;  // only windows anchored this far into the future

  void validate() const;
};

struct WindowRecord {
  int window_id = 0;
  std::size_t start_index = 0;
  signals::AnchorPose anchor;
  int gt_class = 0;
  signals::AmplitudeSpectrum spectrum;
};

struct PatchRecord {
  int record_id = 0;
  std::string patch_path;  // relative to the dataset directory
  int window_id = 0;
  int frame_index = 0;
  std::string view = "fp";  // "fp" or "bev"
  int gt_class = 0;
  Eigen::Vector2d foot = Eigen::Vector2d::Zero();
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  geometry::Image patch;
};

struct Dataset {
  std::vector<WindowRecord> windows;
  std::vector<PatchRecord> records;
  geometry::Calibration calibration;
  std::size_t skipped_images = 0;  // frames without any valid footprint
};

// Windows the state log, projects each frame's upcoming window anchors into
// the frame and crops one patch per surviving footprint.
Dataset export_dataset(const DriveOutput& drive, const WorldMap& world, const CameraRig& rig,
                       const ExportOptions& options);

// Top-down virtual camera used for BEV augmentation of a frame.
geometry::Extrinsics bev_camera(const Eigen::Vector2d& position, double yaw, double ahead, double height);

struct DatasetProvenance {
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
};

// Layout: manifest.json, states.csv, windows.csv, records.csv,
// calibration.json, images/*.ppm, patches/*.ppm.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset, const DriveOutput& drive,
                   const WorldMap& world, const DatasetProvenance& provenance);

// Loads windows, records (with patch pixels) and calibration.
Dataset read_dataset(const std::filesystem::path& dir);

std::string format_windows_csv(const std::vector<WindowRecord>& windows);
std::vector<WindowRecord> parse_windows_csv(const std::string& csv);
std::string format_records_csv(const std::vector<PatchRecord>& records);
std::vector<PatchRecord> parse_records_csv(const std::string& csv);

}  // namespace rca::sim
