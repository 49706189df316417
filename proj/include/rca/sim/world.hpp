#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace rca::sim {

struct Band {
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;
};

// Procedural ground texture: base color modulated by world-anchored value
// noise, plus square spots of `spot_size` meters drawn with `spot_density`.
struct TextureSpec {
  std::array<double, 3> base_color{128, 128, 128};
  double noise_amplitude = 0.0;
  double noise_scale = 0.05;  // meters per noise lattice cell
  double spot_density = 0.0;  // probability per spot cell
  double spot_size = 0.04;
  std::array<double, 3> spot_color{0, 0, 0};
};

// Vibration signature for (roll rate, pitch rate, a_z).
struct TerrainClassSpec {
  int id = 0;
  std::string name;
  std::array<std::vector<Band>, 3> bands;
  std::array<double, 3> noise_amp{0, 0, 0};
  TextureSpec texture;

  // Sum over axes and bands of a^2 / 2 (mean power of the sinusoid bank).
  double band_energy() const;
};

// Ids must equal positions 0..k-1, frequencies stay below Nyquist and band
// energy increases strictly with id (id doubles as roughness rank).
void validate_classes(const std::vector<TerrainClassSpec>& classes, double state_rate);

std::vector<TerrainClassSpec> default_classes();

struct WorldMap {
  std::vector<TerrainClassSpec> classes;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();  // world corner of cell (0, 0)
  double cell_size = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<int> grid;  // row-major, index iy * nx + ix

  double extent_x() const { return cell_size * nx; }
  double extent_y() const { return cell_size * ny; }
  bool contains(const Eigen::Vector2d& p) const;
  // Throws ValidationError outside the world.
  int class_at(const Eigen::Vector2d& p) const;
  const TerrainClassSpec& spec(int id) const { return classes.at(static_cast<std::size_t>(id)); }
  void validate(double state_rate = 200.0) const;
};

// 64 m x 64 m checkerboard of 8 m blocks cycling through the default classes.
WorldMap default_world();
// Smooth asphalt with a rough gravel strip on the right of the x axis
// (x in [2.5, 20), y < 0.1); the vehicle starts at the origin facing +x.
WorldMap corridor_world();
// Single-class world; extents are rounded up to whole meters.
WorldMap uniform_world(const std::vector<TerrainClassSpec>& classes, int class_id,
                       const Eigen::Vector2d& origin, double extent_x, double extent_y);

// Polyline crossing every default-world class, 60 m long.
std::vector<Eigen::Vector2d> default_path();
// Boustrophedon sweep over the world with rows `spacing` meters apart,
// staying `margin` meters inside the border.
std::vector<Eigen::Vector2d> lawnmower_path(const WorldMap& world, double margin, double spacing);

double path_length(const std::vector<Eigen::Vector2d>& path);

nlohmann::json to_json(const WorldMap& world);
WorldMap world_from_json(const nlohmann::json& j);
WorldMap read_world(const std::filesystem::path& path);

std::vector<Eigen::Vector2d> waypoints_from_json(const nlohmann::json& j);
std::vector<Eigen::Vector2d> read_waypoints(const std::filesystem::path& path);

// Deterministic RGB of the class texture at world point p.
std::array<std::uint8_t, 3> texture_color(const TextureSpec& tex, const Eigen::Vector2d& p,
                                          std::uint64_t seed);

}  // namespace rca::sim
