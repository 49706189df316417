#include "rca/geometry/calibration.hpp"

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

namespace rca::geometry {

using nlohmann::json;

namespace {

Eigen::Vector3d vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string(what) + ": expected 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(std::string("calibration: missing field '") + key + "'");
  }
  return j.at(key);
}

}  // namespace

void Calibration::validate() const {
  camera.validate();
  extrinsics.validate();
  plane.validate();
}

json to_json(const CameraModel& cam) {
  return {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx},
          {"cy", cam.cy}, {"width", cam.width}, {"height", cam.height}};
}

json to_json(const Extrinsics& ext) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({ext.R(r, 0), ext.R(r, 1), ext.R(r, 2)});
  return {{"R", rows}, {"t", {ext.t.x(), ext.t.y(), ext.t.z()}}};
}

json to_json(const GroundPlane& plane) {
  return {{"normal", {plane.normal.x(), plane.normal.y(), plane.normal.z()}},
          {"dist", plane.dist}};
}

json to_json(const Calibration& calib) {
  return {{"camera", to_json(calib.camera)},
          {"extrinsics", to_json(calib.extrinsics)},
          {"plane", to_json(calib.plane)}};
}

CameraModel camera_from_json(const json& j) {
  try {
    CameraModel cam;
    cam.fx = field(j, "fx").get<double>();
    cam.fy = field(j, "fy").get<double>();
    cam.cx = field(j, "cx").get<double>();
    cam.cy = field(j, "cy").get<double>();
    cam.width = field(j, "width").get<int>();
    cam.height = field(j, "height").get<int>();
    cam.validate();
    return cam;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("camera: ") + e.what());
  }
}

Extrinsics extrinsics_from_json(const json& j) {
  try {
    Extrinsics ext;
    const auto& rows = field(j, "R");
    if (!rows.is_array() || rows.size() != 3) throw ValidationError("extrinsics: R must be 3x3");
    for (int r = 0; r < 3; ++r) ext.R.row(r) = vec3(rows[r], "extrinsics.R").transpose();
    ext.t = vec3(field(j, "t"), "extrinsics.t");
    ext.validate();
    return ext;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("extrinsics: ") + e.what());
  }
}

GroundPlane plane_from_json(const json& j) {
  try {
    GroundPlane plane;
    plane.normal = vec3(field(j, "normal"), "plane.normal");
    plane.dist = field(j, "dist").get<double>();
    plane.validate();
    return plane;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("plane: ") + e.what());
  }
}

Calibration calibration_from_json(const json& j) {
  Calibration c;
  c.camera = camera_from_json(field(j, "camera"));
  c.extrinsics = extrinsics_from_json(field(j, "extrinsics"));
  c.plane = plane_from_json(field(j, "plane"));
  return c;
}

Calibration read_calibration(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("calibration " + path.string() + ": " + e.what());
  }
  return calibration_from_json(j);
}

void write_calibration(const std::filesystem::path& path, const Calibration& calib) {
  write_text_file(path, to_json(calib).dump(2) + "\n");
}

}  // namespace rca::geometry
