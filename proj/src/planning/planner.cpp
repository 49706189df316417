#include "rca/planning/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

namespace rca::planning {

TrajectoryCandidate make_arc(double curvature, double arc_length, double ds) {
  if (!std::isfinite(curvature)) throw ValidationError("trajectory: curvature must be finite");
  if (!(arc_length > 0.0) || !(ds > 0.0) || ds > arc_length)
    throw ValidationError("trajectory: need 0 < ds <= arc_length");
  TrajectoryCandidate t;
  t.curvature = curvature;
  t.arc_length = arc_length;
  t.ds = ds;
  const long n = std::lround(arc_length / ds);
  for (long i = 0; i <= n; ++i) {
    const double s = std::min(arc_length, static_cast<double>(i) * ds);
    Pose2 p;
    if (std::abs(curvature) < 1e-12) {
      p.x = s;
    } else {
      p.x = std::sin(curvature * s) / curvature;
      p.y = (1.0 - std::cos(curvature * s)) / curvature;
    }
    p.heading = curvature * s;
    t.poses.push_back(p);
  }
  return t;
}

std::vector<TrajectoryCandidate> make_library(const LibraryOptions& o) {
  if (o.count < 1) throw ValidationError("trajectory library: count must be >= 1");
  if (!(o.max_curvature >= 0.0)) throw ValidationError("trajectory library: max_curvature must be >= 0");
  std::vector<TrajectoryCandidate> lib;
  for (int i = 0; i < o.count; ++i) {
    const double k = o.count == 1 ? 0.0 : -o.max_curvature + 2.0 * o.max_curvature * i / (o.count - 1);
    lib.push_back(make_arc(k, o.arc_length, o.ds));
  }
  return lib;
}

double score_trajectory(const TrajectoryCandidate& traj, const Costmap& map,
                        const Eigen::Vector2d& goal, const ScoreOptions& options) {
  if (traj.poses.size() < 2) throw ValidationError("score: trajectory needs at least two poses");
  double traversal = 0.0;
  for (const auto& p : traj.poses) {
    const auto cell = map.cell_of({p.x, p.y});
    const double c = (cell && map.known(cell->first, cell->second)) ? map.at(cell->first, cell->second)
                                                                     : options.unknown_cost;
    traversal += c * traj.ds;
  }
  const auto& end = traj.poses.back();
  return traversal + options.goal_weight * (Eigen::Vector2d(end.x, end.y) - goal).norm();
}

PlanResult plan(const Costmap& map, const Eigen::Vector2d& goal,
                const std::vector<TrajectoryCandidate>& library, const ScoreOptions& options) {
  if (library.empty()) throw ValidationError("plan: empty trajectory library");
  PlanResult r;
  for (const auto& t : library) r.scores.push_back(score_trajectory(t, map, goal, options));
  for (std::size_t i = 1; i < library.size(); ++i) {
    const double a = r.scores[i], b = r.scores[r.index];
    if (a < b || (a == b && std::abs(library[i].curvature) < std::abs(library[r.index].curvature)))
      r.index = i;
  }
  r.trajectory = library[r.index];
  return r;
}

std::string format_trajectory_csv(const TrajectoryCandidate& traj) {
  std::ostringstream out;
  out << "x,y,heading\n";
  for (const auto& p : traj.poses)
    out << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.heading) << '\n';
  return out.str();
}

}  // namespace rca::planning
