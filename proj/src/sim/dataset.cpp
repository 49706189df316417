#include "rca/sim/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"
#include "rca/geometry/homography.hpp"

namespace rca::sim {

namespace {

std::string numbered(const char* dir, int id, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/%0*d.ppm", dir, digits, id);
  return buf;
}

bool mask_covers(const geometry::WarpedImage& w, const geometry::CropBox& b) {
  for (int y = b.y0; y < b.y0 + b.h; ++y)
    for (int x = b.x0; x < b.x0 + b.w; ++x)
      if (!w.valid[static_cast<std::size_t>(y) * w.image.width + x]) return false;
  return true;
}

std::vector<std::string> csv_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

void ExportOptions::validate() const {
  if (window < 2 || stride < 1) throw ValidationError("export: window must be >= 2 and stride >= 1");
  if (!(theta >= 0.0)) throw ValidationError("export: theta must be >= 0");
  if (m < 1) throw ValidationError("export: m must be >= 1");
  if (patch_w < 1 || patch_h < 1) throw ValidationError("export: patch size must be >= 1");
  if (!(bev_height > 0.0)) throw ValidationError("export: bev_height must be positive");
  if (!(horizon_s > 0.0)) throw ValidationError("export: horizon_s must be positive");
}

geometry::Extrinsics bev_camera(const Eigen::Vector2d& position, double yaw, double ahead, double height) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  geometry::Extrinsics e;
  // looking straight down with image-up pointing along the heading
  e.R << s, -c, 0.0,  //
      -c, -s, 0.0,    //
      0.0, 0.0, -1.0;
  const Eigen::Vector3d center(position.x() + ahead * c, position.y() + ahead * s, height);
  e.t = -e.R * center;
  return e;
}

Dataset export_dataset(const DriveOutput& drive, const WorldMap& world, const CameraRig& rig,
                       const ExportOptions& o) {
  o.validate();
  rig.camera.validate();
  Dataset ds;
  ds.calibration = rig.calibration();

  const auto windows = signals::window_states(drive.log, o.window, o.stride);
  signals::SpectrumOptions sopt;
  sopt.hann = o.hann;
  std::vector<std::size_t> anchor_index;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    WindowRecord w;
    w.window_id = static_cast<int>(i);
    w.start_index = windows[i].start_index;
    w.anchor = windows[i].anchor;
    w.gt_class = world.class_at(w.anchor.position.head<2>());
    w.spectrum = signals::amplitude_spectrum(windows[i], sopt);
    ds.windows.push_back(std::move(w));
    anchor_index.push_back(windows[i].start_index + o.window / 2);
  }

  const auto& cam = rig.camera;
  for (std::size_t fi = 0; fi < drive.frames.size(); ++fi) {
    const Frame& frame = drive.frames[fi];
    if (frame.image.empty()) throw ValidationError("export: frame without a rendered image");

    std::vector<geometry::Footprint> fps;
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
      const auto& w = ds.windows[i];
      if (anchor_index[i] <= frame.state_index) continue;
      if (w.anchor.t - frame.t > o.horizon_s) break;
      geometry::Footprint fp;
      fp.index = w.window_id;
      fp.yaw = w.anchor.yaw;
      fp.p_world = Eigen::Vector3d(w.anchor.position.x(), w.anchor.position.y(), 0.0);
      fps.push_back(fp);
    }
    const auto world_to_cam = rig.world_to_camera(frame.position, frame.yaw);
    const auto kept = geometry::project_footprints(fps, cam, world_to_cam, o.theta, o.m, frame.yaw);

    std::size_t emitted = 0;
    for (const auto& fp : kept) {
      auto patch = geometry::crop_patch(frame.image, *fp.p_pixel, o.patch_w, o.patch_h);
      if (!patch) continue;
      PatchRecord r;
      r.record_id = static_cast<int>(ds.records.size());
      r.patch_path = numbered("patches", r.record_id, 6);
      r.window_id = fp.index;
      r.frame_index = static_cast<int>(fi);
      r.view = "fp";
      r.gt_class = ds.windows[static_cast<std::size_t>(fp.index)].gt_class;
      r.foot = fp.p_world.head<2>();
      r.pixel = *fp.p_pixel;
      r.patch = std::move(*patch);
      ds.records.push_back(std::move(r));
      ++emitted;
    }
    if (emitted == 0) {
      ++ds.skipped_images;
      continue;
    }

    if (o.bev) {
      const auto world_to_bev = bev_camera(frame.position, frame.yaw, o.bev_ahead, o.bev_height);
      const auto fp_to_bev = geometry::relative_extrinsics(world_to_cam, world_to_bev);
      const auto H = geometry::bev_homography(fp_to_bev, geometry::ground_plane_in_camera(world_to_cam));
      const auto warped = geometry::warp_image_to_bev_masked(frame.image, H, cam, cam.width, cam.height);
      for (const auto& fp : kept) {
        const auto px = geometry::project_point(cam, world_to_bev, fp.p_world);
        if (!px) continue;
        const auto box = geometry::crop_box(cam.width, cam.height, *px, o.patch_w, o.patch_h);
        if (!box || !mask_covers(warped, *box)) continue;
        PatchRecord r;
        r.record_id = static_cast<int>(ds.records.size());
        r.patch_path = numbered("patches", r.record_id, 6);
        r.window_id = fp.index;
        r.frame_index = static_cast<int>(fi);
        r.view = "bev";
        r.gt_class = ds.windows[static_cast<std::size_t>(fp.index)].gt_class;
        r.foot = fp.p_world.head<2>();
        r.pixel = *px;
        r.patch = geometry::crop(warped.image, *box);
        ds.records.push_back(std::move(r));
      }
    }
  }
  return ds;
}

std::string format_windows_csv(const std::vector<WindowRecord>& windows) {
  std::ostringstream out;
  out << "window_id,start_index,anchor_t,anchor_x,anchor_y,anchor_yaw,gt_class";
  const std::size_t len = windows.empty() ? 0 : windows.front().spectrum.bins() * signals::kAxes;
  for (std::size_t k = 0; k < len; ++k) out << ",s" << k;
  out << '\n';
  for (const auto& w : windows) {
    out << w.window_id << ',' << w.start_index << ',' << format_double(w.anchor.t) << ','
        << format_double(w.anchor.position.x()) << ',' << format_double(w.anchor.position.y()) << ','
        << format_double(w.anchor.yaw) << ',' << w.gt_class;
    const auto flat = w.spectrum.concatenated();
    if (flat.size() != len) throw ValidationError("windows: inconsistent spectrum lengths");
    for (double v : flat) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

std::vector<WindowRecord> parse_windows_csv(const std::string& csv) {
  const auto lines = csv_lines(csv);
  if (lines.empty() || lines[0].rfind("window_id,start_index,anchor_t,", 0) != 0)
    throw ValidationError("windows.csv: missing or unexpected header");
  const std::size_t cols = split(lines[0], ',').size();
  if (cols < 8 || (cols - 7) % signals::kAxes != 0) throw ValidationError("windows.csv: bad spectrum columns");
  std::vector<WindowRecord> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li], ',');
    if (f.size() != cols) throw ValidationError("windows.csv: wrong field count on line " + std::to_string(li + 1));
    WindowRecord w;
    w.window_id = static_cast<int>(parse_int(f[0]));
    w.start_index = static_cast<std::size_t>(parse_int(f[1]));
    w.anchor.t = parse_double(f[2]);
    w.anchor.position = Eigen::Vector3d(parse_double(f[3]), parse_double(f[4]), 0.0);
    w.anchor.yaw = parse_double(f[5]);
    w.gt_class = static_cast<int>(parse_int(f[6]));
    std::vector<double> flat;
    for (std::size_t k = 7; k < cols; ++k) flat.push_back(parse_double(f[k]));
    w.spectrum = signals::AmplitudeSpectrum::from_concatenated(flat);
    if (w.window_id != static_cast<int>(out.size())) throw ValidationError("windows.csv: ids must be 0..N-1");
    out.push_back(std::move(w));
  }
  return out;
}

std::string format_records_csv(const std::vector<PatchRecord>& records) {
  std::ostringstream out;
  out << "record_id,patch_path,window_id,frame_index,view,gt_class,foot_x,foot_y,pixel_u,pixel_v\n";
  for (const auto& r : records)
    out << r.record_id << ',' << r.patch_path << ',' << r.window_id << ',' << r.frame_index << ',' << r.view << ','
        << r.gt_class << ',' << format_double(r.foot.x()) << ',' << format_double(r.foot.y()) << ','
        << format_double(r.pixel.x()) << ',' << format_double(r.pixel.y()) << '\n';
  return out.str();
}

std::vector<PatchRecord> parse_records_csv(const std::string& csv) {
  const auto lines = csv_lines(csv);
  if (lines.empty() ||
      lines[0] != "record_id,patch_path,window_id,frame_index,view,gt_class,foot_x,foot_y,pixel_u,pixel_v")
    throw ValidationError("records.csv: missing or unexpected header");
  std::vector<PatchRecord> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li], ',');
    if (f.size() != 10) throw ValidationError("records.csv: wrong field count on line " + std::to_string(li + 1));
    PatchRecord r;
    r.record_id = static_cast<int>(parse_int(f[0]));
    r.patch_path = std::string(f[1]);
    r.window_id = static_cast<int>(parse_int(f[2]));
    r.frame_index = static_cast<int>(parse_int(f[3]));
    r.view = std::string(f[4]);
    if (r.view != "fp" && r.view != "bev") throw ValidationError("records.csv: view must be fp or bev");
    r.gt_class = static_cast<int>(parse_int(f[5]));
    r.foot = {parse_double(f[6]), parse_double(f[7])};
    r.pixel = {parse_double(f[8]), parse_double(f[9])};
    out.push_back(std::move(r));
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& ds, const DriveOutput& drive,
                   const WorldMap& world, const DatasetProvenance& provenance) {
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "patches");
  signals::write_state_log(dir / "states.csv", drive.log);
  write_text_file(dir / "windows.csv", format_windows_csv(ds.windows));
  write_text_file(dir / "records.csv", format_records_csv(ds.records));
  geometry::write_calibration(dir / "calibration.json", ds.calibration);
  write_text_file(dir / "world.json", to_json(world).dump() + "\n");

  nlohmann::json images = nlohmann::json::array();
  for (std::size_t i = 0; i < drive.frames.size(); ++i) {
    const auto& f = drive.frames[i];
    const std::string file = numbered("images", static_cast<int>(i), 5);
    if (!f.image.empty()) geometry::write_pnm(dir / file, f.image);
    images.push_back({{"file", file},
                      {"t", f.t},
                      {"state_index", f.state_index},
                      {"x", f.position.x()},
                      {"y", f.position.y()},
                      {"yaw", f.yaw}});
  }
  for (const auto& r : ds.records) geometry::write_pnm(dir / r.patch_path, r.patch);

  std::size_t bev = 0;
  for (const auto& r : ds.records) bev += r.view == "bev" ? 1 : 0;
  nlohmann::json manifest = {
      {"format", "rca-dataset/1"},
      {"seed", provenance.seed},
      {"params", provenance.params},
      {"files",
       {{"states", "states.csv"},
        {"windows", "windows.csv"},
        {"records", "records.csv"},
        {"calibration", "calibration.json"},
        {"world", "world.json"}}},
      {"counts",
       {{"states", drive.log.size()},
        {"images", drive.frames.size()},
        {"windows", ds.windows.size()},
        {"records", ds.records.size()},
        {"bev_records", bev},
        {"skipped_images", ds.skipped_images}}},
      {"images", images}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_regular_file(dir / "manifest.json"))
    throw ValidationError("dataset: no manifest.json in " + dir.string());
  Dataset ds;
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    if (manifest.at("format").get<std::string>() != "rca-dataset/1")
      throw ValidationError("dataset: unsupported manifest format");
    ds.skipped_images = manifest.at("counts").at("skipped_images").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("dataset manifest: ") + e.what());
  }
  ds.windows = parse_windows_csv(read_text_file(dir / "windows.csv"));
  ds.records = parse_records_csv(read_text_file(dir / "records.csv"));
  ds.calibration = geometry::read_calibration(dir / "calibration.json");
  for (auto& r : ds.records) {
    if (r.window_id < 0 || r.window_id >= static_cast<int>(ds.windows.size()))
      throw ValidationError("dataset: record references an unknown window");
    r.patch = geometry::read_pnm(dir / r.patch_path);
  }
  return ds;
}

}  // namespace rca::sim
