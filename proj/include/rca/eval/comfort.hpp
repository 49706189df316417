#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "rca/signals/state_log.hpp"

namespace rca::eval {

enum class MotionAxis : int { z = 0, roll = 1, pitch = 2, yaw = 3 };
inline constexpr std::size_t kMotionAxes = 4;
const char* axis_name(MotionAxis axis);

struct PmiWeights {
  double w_a = 1.0;
  double w_j = 1.0;
  double w_aj = 0.0;

  void validate() const;
};

struct PmiValue {
  double mu = 0.0;
  double a_max = 0.0;
  double j_max = 0.0;
};

// Acceleration is a_z for the z axis and the time derivative of the angular
// rate otherwise; jerk is the derivative of acceleration. Derivatives use
// central differences inside the log and one-sided ones at its ends.
PmiValue pmi(std::span<const signals::VehicleStateSample> log, MotionAxis axis, const PmiWeights& weights);

struct PmiReport {
  std::string run;
  std::array<PmiValue, kMotionAxes> axes{};
  std::array<double, kMotionAxes> normalized{};
};

PmiReport pmi_report(std::span<const signals::VehicleStateSample> log, const std::string& run,
                     const PmiWeights& weights);

// Element-wise mean of several reports of the same run.
PmiReport average_reports(std::span<const PmiReport> reports, const std::string& run);

// Divides each axis by its maximum mu over the set; axes whose maximum is
// zero normalize to 0 everywhere.
std::vector<PmiReport> normalize_pmi(std::vector<PmiReport> reports);

// Pearson correlation of average ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);
std::vector<double> average_ranks(std::span<const double> values);

// `run,axis,mu,a_max,j_max,mu_normalized`
std::string format_pmi_csv(std::span<const PmiReport> reports);
// One row per run, one normalized-mu column per axis.
std::string format_pmi_chart_csv(std::span<const PmiReport> reports);

}  // namespace rca::eval
