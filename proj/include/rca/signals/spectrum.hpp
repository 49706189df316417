#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rca/signals/state_log.hpp"

namespace rca::signals {

enum class Axis : int { roll = 0, pitch = 1, z = 2 };
inline constexpr std::size_t kAxes = 3;

// Log pose at the window's center sample.
struct AnchorPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  double t = 0.0;
};

// n consecutive (w_roll, w_pitch, a_z) triples.
struct SignalWindow {
  std::vector<std::array<double, kAxes>> samples;
  std::size_t start_index = 0;
  AnchorPose anchor;
};

struct AmplitudeSpectrum {
  std::array<std::vector<double>, kAxes> per_axis;

  std::size_t bins() const { return per_axis[0].size(); }
  // roll ++ pitch ++ z, length 3 * bins().
  std::vector<double> concatenated() const;
  static AmplitudeSpectrum from_concatenated(std::span<const double> values);
};

struct SpectrumOptions {
  bool hann = false;
};

// Windows at offsets 0, stride, 2*stride, ... while a full window fits.
// Returns an empty list when the log is shorter than n; throws on
// non-monotone timestamps or n/stride == 0.
std::vector<SignalWindow> window_states(std::span<const VehicleStateSample> log, std::size_t n,
                                        std::size_t stride);

// Per axis: remove the mean, real FFT, magnitudes divided by n (bins 0..n/2).
AmplitudeSpectrum amplitude_spectrum(const SignalWindow& window, const SpectrumOptions& options = {});

double total_energy(const AmplitudeSpectrum& spectrum);

}  // namespace rca::signals
