#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "rca/geometry/camera.hpp"
#include "rca/geometry/raster.hpp"
#include "rca/learning/regressor.hpp"

namespace rca::planning {

inline constexpr double kUnknown = -1.0;

struct CostmapSpec {
  Eigen::Vector2d origin{0.0, -4.0};  // vehicle-frame corner of cell (0, 0)
  double resolution = 0.1;
  int width = 80;   // cells along vehicle x
  int height = 80;  // cells along vehicle y

  void validate() const;
};

// Row-major grid, cell (ix, iy) covers origin + [ix, ix+1) x [iy, iy+1) * resolution.
struct Costmap {
  CostmapSpec spec;
  std::vector<double> cells;
  std::vector<int> counts;

  Costmap() = default;
  explicit Costmap(const CostmapSpec& spec);

  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * spec.width + ix; }
  double at(int ix, int iy) const { return cells[index(ix, iy)]; }
  bool known(int ix, int iy) const { return counts[index(ix, iy)] > 0; }
  std::optional<std::pair<int, int>> cell_of(const Eigen::Vector2d& p) const;
  Eigen::Vector2d cell_center(int ix, int iy) const;
  std::size_t known_count() const;
  void validate() const;
};

enum class SplatMode {
  kCenter,     // each patch lands in the one cell hit by its center ray
  kFootprint,  // each cell averages every patch whose pixel box contains the cell's projection
};

struct CostmapOptions {
  int patch = 256;
  SplatMode splat = SplatMode::kCenter;
};

struct PatchTile {
  geometry::CropBox box;
  Eigen::Vector2d center;  // pixel coordinates
};

// Lower image half tiled with patch x patch boxes at 50% overlap.
std::vector<PatchTile> tile_lower_half(const geometry::CameraModel& cam, int patch);

// Vehicle-frame ground point seen through `pixel`, or nullopt if the ray
// misses the plane. `ext` maps vehicle frame to camera.
std::optional<Eigen::Vector2d> ground_point(const geometry::CameraModel& cam,
                                            const geometry::Extrinsics& ext,
                                            const geometry::GroundPlane& plane,
                                            const Eigen::Vector2d& pixel);

using PatchCostFn = std::function<double(const geometry::Image& patch)>;

Costmap build_costmap(const geometry::Image& image, const PatchCostFn& patch_cost,
                      const geometry::CameraModel& cam, const geometry::Extrinsics& ext,
                      const geometry::GroundPlane& plane, const CostmapSpec& grid,
                      const CostmapOptions& options = {});

Costmap build_costmap(const geometry::Image& image, const learning::RegressorModel& model,
                      const geometry::CameraModel& cam, const geometry::Extrinsics& ext,
                      const geometry::GroundPlane& plane, const CostmapSpec& grid,
                      const CostmapOptions& options = {});

// 8-bit gray image, column = ix, row = iy; round(254 * cost), UNKNOWN = 255.
geometry::Image costmap_to_pgm(const Costmap& map);
nlohmann::json costmap_header(const Costmap& map);
Costmap costmap_from_pgm(const geometry::Image& pgm, const nlohmann::json& header);

void write_costmap(const std::filesystem::path& pgm_path, const Costmap& map);
// Reads `<stem>.pgm` with its `<stem>.json` header.
Costmap read_costmap(const std::filesystem::path& pgm_path);

}  // namespace rca::planning
