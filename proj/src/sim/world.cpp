#include "rca/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

namespace rca::sim {

namespace {

constexpr const char* kAxisNames[3] = {"roll", "pitch", "z"};

TerrainClassSpec make_class(int id, std::string name, std::array<std::vector<Band>, 3> bands,
                            std::array<double, 3> noise, TextureSpec tex) {
  TerrainClassSpec c;
  c.id = id;
  c.name = std::move(name);
  c.bands = std::move(bands);
  c.noise_amp = noise;
  c.texture = tex;
  return c;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t seed, std::int64_t ix, std::int64_t iy, std::uint64_t salt) {
  std::uint64_t h = mix(seed ^ salt);
  h = mix(h ^ static_cast<std::uint64_t>(ix));
  h = mix(h ^ static_cast<std::uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(std::uint64_t seed, double x, double y, std::uint64_t salt) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
  auto fade = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const double u = fade(x - fx), v = fade(y - fy);
  const double a = lattice(seed, ix, iy, salt), b = lattice(seed, ix + 1, iy, salt);
  const double c = lattice(seed, ix, iy + 1, salt), d = lattice(seed, ix + 1, iy + 1, salt);
  return (a + (b - a) * u) + ((c + (d - c) * u) - (a + (b - a) * u)) * v;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

std::array<double, 3> color_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("world: colors need three components");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ValidationError(where + ": unknown key '" + key + "'");
}

}  // namespace

double TerrainClassSpec::band_energy() const {
  double e = 0.0;
  for (const auto& axis : bands)
    for (const auto& b : axis) e += 0.5 * b.amplitude * b.amplitude;
  return e;
}

void validate_classes(const std::vector<TerrainClassSpec>& classes, double state_rate) {
  if (classes.empty()) throw ValidationError("world: no terrain classes");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    if (c.id != static_cast<int>(i)) throw ValidationError("world: class ids must be 0..k-1 in order");
    for (const auto& axis : c.bands)
      for (const auto& b : axis) {
        if (!(b.frequency > 0.0 && b.frequency < 0.5 * state_rate))
          throw ValidationError("world: class '" + c.name + "' band frequency outside (0, Nyquist)");
        if (!(b.amplitude >= 0.0) || !std::isfinite(b.amplitude))
          throw ValidationError("world: band amplitudes must be finite and >= 0");
      }
    for (double n : c.noise_amp)
      if (!(n >= 0.0) || !std::isfinite(n)) throw ValidationError("world: noise amplitudes must be >= 0");
    const auto& t = c.texture;
    if (!(t.noise_scale > 0.0) || !(t.spot_size > 0.0) || !(t.spot_density >= 0.0 && t.spot_density <= 1.0) ||
        !(t.noise_amplitude >= 0.0))
      throw ValidationError("world: invalid texture parameters for class '" + c.name + "'");
    if (i > 0 && !(c.band_energy() > classes[i - 1].band_energy()))
      throw ValidationError("world: band energy must increase strictly with class id");
  }
}

std::vector<TerrainClassSpec> default_classes() {
  TextureSpec asphalt{{88, 88, 92}, 14.0, 0.05, 0.04, 0.03, {130, 130, 132}};
  TextureSpec grass{{62, 118, 48}, 34.0, 0.06, 0.18, 0.04, {112, 150, 58}};
  TextureSpec gravel{{152, 136, 114}, 48.0, 0.03, 0.32, 0.05, {86, 78, 70}};
  return {
      make_class(0, "asphalt", {{{{8.0, 0.03}}, {{6.0, 0.03}}, {{12.0, 0.15}}}}, {0.01, 0.01, 0.04}, asphalt),
      make_class(1, "grass", {{{{3.0, 0.05}, {9.0, 0.02}}, {{4.0, 0.05}}, {{5.0, 0.25}, {15.0, 0.1}}}},
                 {0.015, 0.015, 0.06}, grass),
      make_class(2, "gravel",
                 {{{{14.0, 0.09}, {22.0, 0.04}}, {{11.0, 0.09}, {25.0, 0.04}}, {{18.0, 0.4}, {30.0, 0.2}}}},
                 {0.03, 0.03, 0.12}, gravel),
  };
}

bool WorldMap::contains(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d q = p - origin;
  return q.x() >= 0.0 && q.y() >= 0.0 && q.x() < extent_x() && q.y() < extent_y();
}

int WorldMap::class_at(const Eigen::Vector2d& p) const {
  if (!contains(p)) throw ValidationError("world: point outside the world extent");
  const Eigen::Vector2d q = (p - origin) / cell_size;
  const int ix = std::min(nx - 1, static_cast<int>(std::floor(q.x())));
  const int iy = std::min(ny - 1, static_cast<int>(std::floor(q.y())));
  return grid[static_cast<std::size_t>(iy) * nx + ix];
}

void WorldMap::validate(double state_rate) const {
  validate_classes(classes, state_rate);
  if (!(cell_size > 0.0) || nx < 1 || ny < 1) throw ValidationError("world: invalid grid geometry");
  if (grid.size() != static_cast<std::size_t>(nx) * ny) throw ValidationError("world: grid size mismatch");
  for (int id : grid)
    if (id < 0 || id >= static_cast<int>(classes.size()))
      throw ValidationError("world: grid cell holds an unknown class id");
}

WorldMap default_world() {
  WorldMap w;
  w.classes = default_classes();
  w.cell_size = 8.0;
  w.nx = w.ny = 8;
  for (int by = 0; by < w.ny; ++by)
    for (int bx = 0; bx < w.nx; ++bx) w.grid.push_back((bx + by) % 3);
  return w;
}

WorldMap corridor_world() {
  WorldMap w;
  w.classes = default_classes();
  w.origin = {-2.0, -10.0};
  w.cell_size = 0.1;
  w.nx = 240;
  w.ny = 200;
  w.grid.assign(static_cast<std::size_t>(w.nx) * w.ny, 0);
  for (int iy = 0; iy < w.ny; ++iy)
    for (int ix = 0; ix < w.nx; ++ix) {
      // cell centers, so boundaries fall on cell edges
      const double x = w.origin.x() + (ix + 0.5) * w.cell_size;
      const double y = w.origin.y() + (iy + 0.5) * w.cell_size;
      if (x >= 2.5 && x < 20.0 && y < 0.1) w.grid[static_cast<std::size_t>(iy) * w.nx + ix] = 2;
    }
  return w;
}

WorldMap uniform_world(const std::vector<TerrainClassSpec>& classes, int class_id,
                       const Eigen::Vector2d& origin, double extent_x, double extent_y) {
  WorldMap w;
  w.classes = classes;
  w.origin = origin;
  w.cell_size = 1.0;
  w.nx = static_cast<int>(std::ceil(extent_x));
  w.ny = static_cast<int>(std::ceil(extent_y));
  w.grid.assign(static_cast<std::size_t>(w.nx) * w.ny, class_id);
  return w;
}

std::vector<Eigen::Vector2d> default_path() { return {{2.0, 4.0}, {50.0, 4.0}, {50.0, 12.0}, {46.0, 12.0}}; }

std::vector<Eigen::Vector2d> lawnmower_path(const WorldMap& world, double margin, double spacing) {
  if (!(spacing > 0.0) || !(margin >= 0.0)) throw ValidationError("path: spacing must be > 0, margin >= 0");
  const double x0 = world.origin.x() + margin, x1 = world.origin.x() + world.extent_x() - margin;
  const double y_end = world.origin.y() + world.extent_y() - margin;
  if (!(x1 > x0)) throw ValidationError("path: margin leaves no room");
  std::vector<Eigen::Vector2d> path;
  bool forward = true;
  for (double y = world.origin.y() + margin; y < y_end; y += spacing) {
    path.emplace_back(forward ? x0 : x1, y);
    path.emplace_back(forward ? x1 : x0, y);
    forward = !forward;
  }
  return path;
}

double path_length(const std::vector<Eigen::Vector2d>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += (path[i] - path[i - 1]).norm();
  return len;
}

std::array<std::uint8_t, 3> texture_color(const TextureSpec& tex, const Eigen::Vector2d& p,
                                          std::uint64_t seed) {
  const double coarse = value_noise(seed, p.x() / (4.0 * tex.noise_scale), p.y() / (4.0 * tex.noise_scale), 1);
  const double fine = value_noise(seed, p.x() / tex.noise_scale, p.y() / tex.noise_scale, 2);
  const double n = tex.noise_amplitude * (0.6 * (2.0 * fine - 1.0) + 0.4 * (2.0 * coarse - 1.0));

  std::array<double, 3> c = tex.base_color;
  if (tex.spot_density > 0.0) {
    const auto sx = static_cast<std::int64_t>(std::floor(p.x() / tex.spot_size));
    const auto sy = static_cast<std::int64_t>(std::floor(p.y() / tex.spot_size));
    if (lattice(seed, sx, sy, 3) < tex.spot_density) c = tex.spot_color;
  }
  return {to_byte(c[0] + n), to_byte(c[1] + n), to_byte(c[2] + n)};
}

nlohmann::json to_json(const WorldMap& world) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : world.classes) {
    nlohmann::json bands = nlohmann::json::object();
    for (int a = 0; a < 3; ++a) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& b : c.bands[static_cast<std::size_t>(a)]) list.push_back({b.frequency, b.amplitude});
      bands[kAxisNames[a]] = list;
    }
    const auto& t = c.texture;
    classes.push_back({{"id", c.id},
                       {"name", c.name},
                       {"bands", bands},
                       {"noise_amp", c.noise_amp},
                       {"texture",
                        {{"base_color", t.base_color},
                         {"noise_amplitude", t.noise_amplitude},
                         {"noise_scale", t.noise_scale},
                         {"spot_density", t.spot_density},
                         {"spot_size", t.spot_size},
                         {"spot_color", t.spot_color}}}});
  }
  return {{"classes", classes},
          {"origin", {world.origin.x(), world.origin.y()}},
          {"cell_size", world.cell_size},
          {"nx", world.nx},
          {"ny", world.ny},
          {"grid", world.grid}};
}

WorldMap world_from_json(const nlohmann::json& j) {
  try {
    reject_unknown(j, {"classes", "origin", "cell_size", "nx", "ny", "grid"}, "world");
    WorldMap w;
    if (j.contains("classes")) {
      for (const auto& cj : j.at("classes")) {
        reject_unknown(cj, {"id", "name", "bands", "noise_amp", "texture"}, "world class");
        TerrainClassSpec c;
        c.id = cj.at("id").get<int>();
        c.name = cj.value("name", std::string("class") + std::to_string(c.id));
        const auto& bj = cj.at("bands");
        reject_unknown(bj, {"roll", "pitch", "z"}, "world class bands");
        for (int a = 0; a < 3; ++a)
          if (bj.contains(kAxisNames[a]))
            for (const auto& pair : bj.at(kAxisNames[a])) {
              if (!pair.is_array() || pair.size() != 2)
                throw ValidationError("world: bands are [frequency, amplitude] pairs");
              c.bands[static_cast<std::size_t>(a)].push_back({pair[0].get<double>(), pair[1].get<double>()});
            }
        const auto& nj = cj.at("noise_amp");
        if (!nj.is_array() || nj.size() != 3) throw ValidationError("world: noise_amp needs three values");
        c.noise_amp = {nj[0].get<double>(), nj[1].get<double>(), nj[2].get<double>()};
        if (cj.contains("texture")) {
          const auto& tj = cj.at("texture");
          reject_unknown(tj, {"base_color", "noise_amplitude", "noise_scale", "spot_density", "spot_size", "spot_color"},
                         "world class texture");
          TextureSpec t;
          if (tj.contains("base_color")) t.base_color = color_from_json(tj.at("base_color"));
          if (tj.contains("spot_color")) t.spot_color = color_from_json(tj.at("spot_color"));
          t.noise_amplitude = tj.value("noise_amplitude", t.noise_amplitude);
          t.noise_scale = tj.value("noise_scale", t.noise_scale);
          t.spot_density = tj.value("spot_density", t.spot_density);
          t.spot_size = tj.value("spot_size", t.spot_size);
          c.texture = t;
        }
        w.classes.push_back(std::move(c));
      }
    } else {
      w.classes = default_classes();
    }
    if (j.contains("origin")) w.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
    w.cell_size = j.at("cell_size").get<double>();
    w.nx = j.at("nx").get<int>();
    w.ny = j.at("ny").get<int>();
    w.grid = j.at("grid").get<std::vector<int>>();
    w.validate();
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("world: malformed JSON: ") + e.what());
  }
}

WorldMap read_world(const std::filesystem::path& path) {
  try {
    return world_from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("world " + path.string() + ": " + e.what());
  }
}

std::vector<Eigen::Vector2d> waypoints_from_json(const nlohmann::json& j) {
  try {
    const nlohmann::json& list = j.is_object() ? j.at("waypoints") : j;
    if (!list.is_array()) throw ValidationError("waypoints must be an array of [x, y] pairs");
    std::vector<Eigen::Vector2d> path;
    for (const auto& p : list) {
      if (!p.is_array() || p.size() != 2) throw ValidationError("waypoints must be [x, y] pairs");
      path.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return path;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("waypoints: malformed JSON: ") + e.what());
  }
}

std::vector<Eigen::Vector2d> read_waypoints(const std::filesystem::path& path) {
  try {
    return waypoints_from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("waypoints " + path.string() + ": " + e.what());
  }
}

}  // namespace rca::sim
