#include "rca/planning/costmap.hpp"

#include <algorithm>
#include <cmath>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"
#include "rca/features/texture.hpp"

namespace rca::planning {

void CostmapSpec::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw ValidationError("costmap: resolution must be positive");
  if (width < 1 || height < 1) throw ValidationError("costmap: dimensions must be >= 1");
  if (!origin.allFinite()) throw ValidationError("costmap: origin must be finite");
}

Costmap::Costmap(const CostmapSpec& s) : spec(s) {
  spec.validate();
  cells.assign(static_cast<std::size_t>(spec.width) * spec.height, kUnknown);
  counts.assign(cells.size(), 0);
}

std::optional<std::pair<int, int>> Costmap::cell_of(const Eigen::Vector2d& p) const {
  const double fx = std::floor((p.x() - spec.origin.x()) / spec.resolution);
  const double fy = std::floor((p.y() - spec.origin.y()) / spec.resolution);
  if (!(fx >= 0.0 && fx < spec.width && fy >= 0.0 && fy < spec.height)) return std::nullopt;
  return std::pair{static_cast<int>(fx), static_cast<int>(fy)};
}

Eigen::Vector2d Costmap::cell_center(int ix, int iy) const {
  return spec.origin + spec.resolution * Eigen::Vector2d(ix + 0.5, iy + 0.5);
}

std::size_t Costmap::known_count() const {
  std::size_t n = 0;
  for (int c : counts) n += c > 0 ? 1 : 0;
  return n;
}

void Costmap::validate() const {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(spec.width) * spec.height;
  if (cells.size() != n || counts.size() != n) throw ValidationError("costmap: storage size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] < 0) throw ValidationError("costmap: negative count");
    if (counts[i] > 0 && !(cells[i] >= 0.0 && cells[i] <= 1.0))
      throw ValidationError("costmap: known cell outside [0, 1]");
    if (counts[i] == 0 && cells[i] != kUnknown)
      throw ValidationError("costmap: unknown cell without sentinel");
  }
}

std::vector<PatchTile> tile_lower_half(const geometry::CameraModel& cam, int patch) {
  cam.validate();
  if (patch < 2) throw ValidationError("costmap: patch size must be >= 2");
  const int top = cam.height / 2;
  if (cam.height - top < patch || cam.width < patch)
    throw ValidationError("costmap: image lower half is smaller than one patch");
  const int stride = patch / 2;
  std::vector<PatchTile> tiles;
  for (int y0 = top; y0 + patch <= cam.height; y0 += stride)
    for (int x0 = 0; x0 + patch <= cam.width; x0 += stride)
      tiles.push_back({{x0, y0, patch, patch},
                       Eigen::Vector2d(x0 + 0.5 * (patch - 1), y0 + 0.5 * (patch - 1))});
  return tiles;
}

std::optional<Eigen::Vector2d> ground_point(const geometry::CameraModel& cam,
                                            const geometry::Extrinsics& ext,
                                            const geometry::GroundPlane& plane,
                                            const Eigen::Vector2d& pixel) {
  const auto hit = geometry::ray_plane_intersection(cam, pixel, plane);
  if (!hit) return std::nullopt;
  const Eigen::Vector3d v = ext.inverse().apply(*hit);
  return v.head<2>();
}

Costmap build_costmap(const geometry::Image& image, const PatchCostFn& patch_cost,
                      const geometry::CameraModel& cam, const geometry::Extrinsics& ext,
                      const geometry::GroundPlane& plane, const CostmapSpec& grid,
                      const CostmapOptions& options) {
  cam.validate();
  ext.validate();
  plane.validate();
  if (image.width != cam.width || image.height != cam.height)
    throw ValidationError("costmap: image size does not match the camera");
  const auto tiles = tile_lower_half(cam, options.patch);

  std::vector<double> tile_cost(tiles.size());
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const double c = patch_cost(geometry::crop(image, tiles[i].box));
    if (!std::isfinite(c)) throw NumericError("costmap: non-finite patch cost");
    tile_cost[i] = std::clamp(c, 0.0, 1.0);
  }

  Costmap map(grid);
  std::vector<double> sum(map.cells.size(), 0.0);
  if (options.splat == SplatMode::kCenter) {
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      const auto p = ground_point(cam, ext, plane, tiles[i].center);
      if (!p) continue;
      const auto cell = map.cell_of(*p);
      if (!cell) continue;
      const std::size_t k = map.index(cell->first, cell->second);
      sum[k] += tile_cost[i];
      ++map.counts[k];
    }
  } else {
    // Vehicle-frame cell centers on the plane z = 0.
    for (int iy = 0; iy < map.spec.height; ++iy) {
      for (int ix = 0; ix < map.spec.width; ++ix) {
        const Eigen::Vector2d c = map.cell_center(ix, iy);
        const auto px = geometry::project_point(cam, ext, Eigen::Vector3d(c.x(), c.y(), 0.0));
        if (!px) continue;
        const std::size_t k = map.index(ix, iy);
        for (std::size_t i = 0; i < tiles.size(); ++i) {
          const auto& b = tiles[i].box;
          if (px->x() >= b.x0 - 0.5 && px->x() < b.x0 + b.w - 0.5 && px->y() >= b.y0 - 0.5 &&
              px->y() < b.y0 + b.h - 0.5) {
            sum[k] += tile_cost[i];
            ++map.counts[k];
          }
        }
      }
    }
  }
  for (std::size_t k = 0; k < sum.size(); ++k)
    if (map.counts[k] > 0) map.cells[k] = sum[k] / map.counts[k];
  return map;
}

Costmap build_costmap(const geometry::Image& image, const learning::RegressorModel& model,
                      const geometry::CameraModel& cam, const geometry::Extrinsics& ext,
                      const geometry::GroundPlane& plane, const CostmapSpec& grid,
                      const CostmapOptions& options) {
  const PatchCostFn fn = [&model](const geometry::Image& patch) {
    return learning::predict(model, features::texture_feature(patch)).cost;
  };
  return build_costmap(image, fn, cam, ext, plane, grid, options);
}

geometry::Image costmap_to_pgm(const Costmap& map) {
  geometry::Image img(map.spec.width, map.spec.height, 1, 255);
  for (int iy = 0; iy < map.spec.height; ++iy)
    for (int ix = 0; ix < map.spec.width; ++ix)
      if (map.known(ix, iy))
        img.at(ix, iy) = static_cast<std::uint8_t>(std::lround(254.0 * std::clamp(map.at(ix, iy), 0.0, 1.0)));
  return img;
}

nlohmann::json costmap_header(const Costmap& map) {
  return {{"origin", {map.spec.origin.x(), map.spec.origin.y()}},
          {"resolution", map.spec.resolution},
          {"width", map.spec.width},
          {"height", map.spec.height},
          {"scale", 254},
          {"unknown", 255}};
}

Costmap costmap_from_pgm(const geometry::Image& pgm, const nlohmann::json& header) {
  CostmapSpec spec;
  try {
    spec.origin = {header.at("origin").at(0).get<double>(), header.at("origin").at(1).get<double>()};
    spec.resolution = header.at("resolution").get<double>();
    spec.width = header.at("width").get<int>();
    spec.height = header.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("costmap header: ") + e.what());
  }
  Costmap map(spec);
  if (pgm.channels != 1 || pgm.width != spec.width || pgm.height != spec.height)
    throw ValidationError("costmap: PGM does not match its header");
  for (int iy = 0; iy < spec.height; ++iy)
    for (int ix = 0; ix < spec.width; ++ix) {
      const int v = pgm.at(ix, iy);
      if (v == 255) continue;
      map.cells[map.index(ix, iy)] = v / 254.0;
      map.counts[map.index(ix, iy)] = 1;
    }
  return map;
}

void write_costmap(const std::filesystem::path& pgm_path, const Costmap& map) {
  geometry::write_pnm(pgm_path, costmap_to_pgm(map));
  auto json_path = pgm_path;
  json_path.replace_extension(".json");
  write_text_file(json_path, costmap_header(map).dump(2) + "\n");
}

Costmap read_costmap(const std::filesystem::path& pgm_path) {
  auto json_path = pgm_path;
  json_path.replace_extension(".json");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(read_text_file(json_path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("costmap header " + json_path.string() + ": " + e.what());
  }
  return costmap_from_pgm(geometry::read_pnm(pgm_path), header);
}

}  // namespace rca::planning
