#include "rca/signals/spectrum.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "rca/common/error.hpp"

namespace rca::signals {

namespace {

// FFTW's planner is not re-entrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    if (!in_ || !out_) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
    if (!plan_) throw NumericError("fftw: cannot create plan");
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }

  double* input() { return in_.get(); }

  // Magnitudes |X_k| / n for k = 0..n/2 of the current input.
  std::vector<double> magnitudes() {
    fftw_execute(plan_);
    std::vector<double> mags(n_ / 2 + 1);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t k = 0; k < mags.size(); ++k) {
      mags[k] = std::hypot(out_.get()[k][0], out_.get()[k][1]) * scale;
    }
    return mags;
  }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwDeleter> in_;
  std::unique_ptr<fftw_complex, FftwDeleter> out_;
  fftw_plan plan_ = nullptr;
};

}  // namespace

std::vector<double> AmplitudeSpectrum::concatenated() const {
  std::vector<double> out;
  out.reserve(kAxes * bins());
  for (const auto& axis : per_axis) out.insert(out.end(), axis.begin(), axis.end());
  return out;
}

AmplitudeSpectrum AmplitudeSpectrum::from_concatenated(std::span<const double> values) {
  if (values.empty() || values.size() % kAxes != 0) {
    throw ValidationError("spectrum length " + std::to_string(values.size()) +
                          " is not a positive multiple of 3");
  }
  const std::size_t bins = values.size() / kAxes;
  AmplitudeSpectrum s;
  for (std::size_t d = 0; d < kAxes; ++d) {
    s.per_axis[d].assign(values.begin() + static_cast<std::ptrdiff_t>(d * bins),
                         values.begin() + static_cast<std::ptrdiff_t>((d + 1) * bins));
  }
  return s;
}

std::vector<SignalWindow> window_states(std::span<const VehicleStateSample> log, std::size_t n,
                                        std::size_t stride) {
  if (n == 0 || stride == 0) throw ValidationError("window_states: n and stride must be >= 1");
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (!(log[i].t > log[i - 1].t)) {
      throw ValidationError("window_states: timestamps not strictly increasing at sample " +
                            std::to_string(i));
    }
  }
  std::vector<SignalWindow> windows;
  if (log.size() < n) return windows;
  for (std::size_t start = 0; start + n <= log.size(); start += stride) {
    SignalWindow w;
    w.start_index = start;
    w.samples.reserve(n);
    for (std::size_t i = start; i < start + n; ++i) {
      w.samples.push_back({log[i].w.x(), log[i].w.y(), log[i].a.z()});
    }
    const auto& center = log[start + n / 2];
    w.anchor.position = center.p;
    w.anchor.yaw = yaw_of(center.q);
    w.anchor.t = center.t;
    windows.push_back(std::move(w));
  }
  return windows;
}

AmplitudeSpectrum amplitude_spectrum(const SignalWindow& window, const SpectrumOptions& options) {
  const std::size_t n = window.samples.size();
  if (n == 0) throw ValidationError("amplitude_spectrum: empty window");
  for (const auto& s : window.samples) {
    for (double v : s) {
      if (!std::isfinite(v)) throw ValidationError("amplitude_spectrum: non-finite sample");
    }
  }

  RealFft fft(n);
  AmplitudeSpectrum spectrum;
  for (std::size_t d = 0; d < kAxes; ++d) {
    double mean = 0.0;
    for (const auto& s : window.samples) mean += s[d];
    mean /= static_cast<double>(n);
    double* in = fft.input();
    for (std::size_t i = 0; i < n; ++i) {
      double v = window.samples[i][d] - mean;
      if (options.hann && n > 1) {
        v *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
      }
      in[i] = v;
    }
    spectrum.per_axis[d] = fft.magnitudes();
  }
  return spectrum;
}

double total_energy(const AmplitudeSpectrum& spectrum) {
  double e = 0.0;
  for (const auto& axis : spectrum.per_axis) {
    for (double v : axis) e += v * v;
  }
  return e;
}

}  // namespace rca::signals
