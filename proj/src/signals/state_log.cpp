#include "rca/signals/state_log.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

namespace rca::signals {

namespace {

constexpr const char* kHeader = "t,px,py,pz,qw,qx,qy,qz,wr,wp,wy,ax,ay,az";

bool finite(const Eigen::Vector3d& v) { return v.allFinite(); }

}  // namespace

void validate_log(std::span<const VehicleStateSample> log) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& s = log[i];
    if (!std::isfinite(s.t) || !finite(s.p) || !finite(s.w) || !finite(s.a) ||
        !s.q.coeffs().allFinite()) {
      throw ValidationError("state log: non-finite value at sample " + std::to_string(i));
    }
    if (std::abs(s.q.norm() - 1.0) > 1e-6) {
      throw ValidationError("state log: quaternion not unit length at sample " + std::to_string(i));
    }
    if (i > 0 && !(s.t > log[i - 1].t)) {
      throw ValidationError("state log: timestamps not strictly increasing at sample " +
                            std::to_string(i));
    }
  }
}

double yaw_of(const Eigen::Quaterniond& q) {
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()),
                    1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

Eigen::Quaterniond quaternion_from_yaw(double yaw) {
  return Eigen::Quaterniond(std::cos(yaw / 2.0), 0.0, 0.0, std::sin(yaw / 2.0));
}

StateLog parse_state_log(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("state log: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw ValidationError("state log: unexpected header '" + line + "'");

  StateLog log;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto fields = split(line, ',');
    if (fields.size() != 14) {
      throw ValidationError("state log: row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected 14");
    }
    double v[14];
    for (int i = 0; i < 14; ++i) v[i] = parse_double(fields[i]);
    VehicleStateSample s;
    s.t = v[0];
    s.p = {v[1], v[2], v[3]};
    s.q = Eigen::Quaterniond(v[4], v[5], v[6], v[7]);
    s.w = {v[8], v[9], v[10]};
    s.a = {v[11], v[12], v[13]};
    log.push_back(s);
  }
  validate_log(log);
  return log;
}

StateLog read_state_log(const std::filesystem::path& path) {
  return parse_state_log(read_text_file(path));
}

std::string format_state_log(std::span<const VehicleStateSample> log) {
  std::string out = kHeader;
  out += '\n';
  for (const auto& s : log) {
    const double v[14] = {s.t,       s.p.x(),   s.p.y(),   s.p.z(),   s.q.w(),
                          s.q.x(),   s.q.y(),   s.q.z(),   s.w.x(),   s.w.y(),
                          s.w.z(),   s.a.x(),   s.a.y(),   s.a.z()};
    for (int i = 0; i < 14; ++i) {
      if (i) out += ',';
      out += format_double(v[i]);
    }
    out += '\n';
  }
  return out;
}

void write_state_log(const std::filesystem::path& path, std::span<const VehicleStateSample> log) {
  write_text_file(path, format_state_log(log));
}

}  // namespace rca::signals
