#include "rca/sim/drive.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "rca/common/error.hpp"

namespace rca::sim {

namespace {

struct PathPoint {
  Eigen::Vector2d position;
  double yaw;
};

class PolylineWalker {
 public:
  explicit PolylineWalker(const std::vector<Eigen::Vector2d>& path) {
    for (std::size_t i = 1; i < path.size(); ++i) {
      const Eigen::Vector2d d = path[i] - path[i - 1];
      const double len = d.norm();
      if (len <= 0.0) continue;
      segments_.push_back({path[i - 1], d / len, len, total_});
      total_ += len;
    }
    if (segments_.empty()) throw ValidationError("drive: path has zero length");
  }

  double length() const { return total_; }

  PathPoint at(double s) const {
    std::size_t k = 0;
    while (k + 1 < segments_.size() && s >= segments_[k + 1].start) ++k;
    const auto& seg = segments_[k];
    const double local = std::min(s - seg.start, seg.length);
    return {seg.origin + local * seg.dir, std::atan2(seg.dir.y(), seg.dir.x())};
  }

 private:
  struct Segment {
    Eigen::Vector2d origin, dir;
    double length, start;
  };
  std::vector<Segment> segments_;
  double total_ = 0.0;
};

}  // namespace

geometry::Extrinsics CameraRig::vehicle_to_camera() const {
  return geometry::camera_extrinsics(Eigen::Vector3d(0.0, 0.0, height), 0.0, pitch);
}

geometry::Extrinsics CameraRig::world_to_camera(const Eigen::Vector2d& position, double yaw) const {
  return geometry::camera_extrinsics(Eigen::Vector3d(position.x(), position.y(), height), yaw, pitch);
}

geometry::Calibration CameraRig::calibration() const {
  geometry::Calibration c;
  c.camera = camera;
  c.extrinsics = vehicle_to_camera();
  c.plane = geometry::ground_plane_in_camera(c.extrinsics);
  return c;
}

DriveOutput simulate_drive(const WorldMap& world, const std::vector<Eigen::Vector2d>& path,
                           const DriveOptions& o) {
  world.validate(o.state_rate);
  if (path.size() < 2) throw ValidationError("drive: path needs at least two waypoints");
  if (!(o.speed > 0.0) || !(o.state_rate > 0.0) || !(o.image_rate > 0.0))
    throw ValidationError("drive: speed and rates must be positive");
  if (o.image_rate > o.state_rate) throw ValidationError("drive: image_rate exceeds state_rate");
  if (o.render_images) o.rig.camera.validate();
  for (const auto& p : path)
    if (!world.contains(p)) throw ValidationError("drive: path exits the world");

  const PolylineWalker walker(path);
  const double duration = walker.length() / o.speed;
  const auto n = static_cast<std::size_t>(std::floor(duration * o.state_rate + 1e-9));
  if (n < 1) throw ValidationError("drive: path too short for one state sample");

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::vector<std::array<std::vector<double>, 3>> phases(world.classes.size());
  for (std::size_t c = 0; c < world.classes.size(); ++c)
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < world.classes[c].bands[a].size(); ++b) phases[c][a].push_back(phase_dist(rng));
  std::normal_distribution<double> gauss(0.0, 1.0);

  DriveOutput out;
  out.log.reserve(n);
  double prev_yaw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / o.state_rate;
    const PathPoint pp = walker.at(o.speed * t);
    const int cls = world.class_at(pp.position);
    const auto& spec = world.classes[static_cast<std::size_t>(cls)];

    std::array<double, 3> sig{};
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < spec.bands[a].size(); ++b) {
        const auto& band = spec.bands[a][b];
        sig[a] += band.amplitude *
                  std::sin(2.0 * std::numbers::pi * band.frequency * t + phases[static_cast<std::size_t>(cls)][a][b]);
      }
    }
    for (std::size_t a = 0; a < 3; ++a) sig[a] += spec.noise_amp[a] * gauss(rng);

    const double yaw_rate = i == 0 ? 0.0 : geometry::wrap_angle(pp.yaw - prev_yaw) * o.state_rate;
    prev_yaw = pp.yaw;

    signals::VehicleStateSample s;
    s.t = t;
    s.p = Eigen::Vector3d(pp.position.x(), pp.position.y(), 0.0);
    s.q = signals::quaternion_from_yaw(pp.yaw);
    s.w = Eigen::Vector3d(sig[0], sig[1], yaw_rate);
    s.a = Eigen::Vector3d(0.0, o.speed * yaw_rate, sig[2]);
    out.log.push_back(s);
  }

  const auto frames = static_cast<std::size_t>(std::floor(duration * o.image_rate + 1e-9));
  for (std::size_t k = 0; k < frames; ++k) {
    const double t_img = static_cast<double>(k) / o.image_rate;
    const auto idx = static_cast<std::size_t>(std::lround(t_img * o.state_rate));
    if (idx >= n) break;
    Frame f;
    f.state_index = idx;
    f.t = out.log[idx].t;
    f.position = out.log[idx].p.head<2>();
    f.yaw = signals::yaw_of(out.log[idx].q);
    if (o.render_images) f.image = render_view(world, o.rig, f.position, f.yaw, o.seed);
    out.frames.push_back(std::move(f));
  }
  return out;
}

geometry::Image render_view(const WorldMap& world, const geometry::CameraModel& cam,
                            const geometry::Extrinsics& world_to_cam, std::uint64_t seed) {
  cam.validate();
  world_to_cam.validate();
  const Eigen::Matrix3d Rt = world_to_cam.R.transpose();
  const Eigen::Vector3d center = world_to_cam.origin_in_source();
  geometry::Image img(cam.width, cam.height, 3);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Eigen::Vector3d ray_cam((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      const Eigen::Vector3d ray = Rt * ray_cam;
      std::array<std::uint8_t, 3> rgb = kSkyColor;
      if (ray.z() < -1e-12 && center.z() > 0.0) {
        const double s = -center.z() / ray.z();
        const Eigen::Vector2d hit = (center + s * ray).head<2>();
        if (world.contains(hit))
          rgb = texture_color(world.spec(world.class_at(hit)).texture, hit, seed);
        else
          rgb = kVoidColor;
      }
      for (int c = 0; c < 3; ++c) img.at(u, v, c) = rgb[static_cast<std::size_t>(c)];
    }
  }
  return img;
}

geometry::Image render_view(const WorldMap& world, const CameraRig& rig, const Eigen::Vector2d& position,
                            double yaw, std::uint64_t seed) {
  return render_view(world, rig.camera, rig.world_to_camera(position, yaw), seed);
}

}  // namespace rca::sim
