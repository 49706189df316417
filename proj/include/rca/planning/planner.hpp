#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "rca/planning/costmap.hpp"

namespace rca::planning {

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

// Constant-curvature arc from the vehicle origin, heading along +x.
struct TrajectoryCandidate {
  double curvature = 0.0;
  double arc_length = 0.0;
  double ds = 0.0;
  std::vector<Pose2> poses;
};

TrajectoryCandidate make_arc(double curvature, double arc_length, double ds);

struct LibraryOptions {
  int count = 15;
  double max_curvature = 0.5;
  double arc_length = 6.0;
  double ds = 0.1;
};

// Curvatures evenly spaced over [-max_curvature, max_curvature].
std::vector<TrajectoryCandidate> make_library(const LibraryOptions& options = {});

struct ScoreOptions {
  double unknown_cost = 0.5;
  double goal_weight = 1.0;
};

double score_trajectory(const TrajectoryCandidate& traj, const Costmap& map,
                        const Eigen::Vector2d& goal, const ScoreOptions& options = {});

struct PlanResult {
  TrajectoryCandidate trajectory;
  std::size_t index = 0;
  std::vector<double> scores;
};

PlanResult plan(const Costmap& map, const Eigen::Vector2d& goal,
                const std::vector<TrajectoryCandidate>& library, const ScoreOptions& options = {});

std::string format_trajectory_csv(const TrajectoryCandidate& traj);

}  // namespace rca::planning
