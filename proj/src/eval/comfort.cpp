#include "rca/eval/comfort.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

namespace rca::eval {

namespace {

std::vector<double> derivative(std::span<const double> y, std::span<const double> t) {
  const std::size_t n = y.size();
  std::vector<double> d(n);
  d[0] = (y[1] - y[0]) / (t[1] - t[0]);
  d[n - 1] = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
  return d;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

const char* axis_name(MotionAxis axis) {
  switch (axis) {
    case MotionAxis::z: return "z";
    case MotionAxis::roll: return "roll";
    case MotionAxis::pitch: return "pitch";
    case MotionAxis::yaw: return "yaw";
  }
  return "?";
}

void PmiWeights::validate() const {
  if (!(w_a >= 0.0) || !(w_j >= 0.0) || !std::isfinite(w_a) || !std::isfinite(w_j) || !std::isfinite(w_aj))
    throw ValidationError("pmi: weights w_a and w_j must be finite and >= 0");
}

PmiValue pmi(std::span<const signals::VehicleStateSample> log, MotionAxis axis, const PmiWeights& weights) {
  weights.validate();
  if (log.size() < 3) throw ValidationError("pmi: need at least 3 samples");
  const std::size_t n = log.size();
  std::vector<double> t(n), sig(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = log[i].t;
    switch (axis) {
      case MotionAxis::z: sig[i] = log[i].a.z(); break;
      case MotionAxis::roll: sig[i] = log[i].w.x(); break;
      case MotionAxis::pitch: sig[i] = log[i].w.y(); break;
      case MotionAxis::yaw: sig[i] = log[i].w.z(); break;
    }
    if (!std::isfinite(sig[i]) || !std::isfinite(t[i])) throw ValidationError("pmi: non-finite log values");
  }
  const double mean_dt = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
  if (!(mean_dt > 0.0)) throw ValidationError("pmi: timestamps must increase");
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((t[i] - t[i - 1]) - mean_dt) > 0.01 * mean_dt)
      throw ValidationError("pmi: sample spacing jitter exceeds 1%");

  const std::vector<double> acc = axis == MotionAxis::z ? sig : derivative(sig, t);
  const std::vector<double> jerk = derivative(acc, t);
  PmiValue v;
  v.a_max = max_abs(acc);
  v.j_max = max_abs(jerk);
  v.mu = weights.w_a * v.a_max + weights.w_j * v.j_max + weights.w_aj * v.a_max * v.j_max;
  return v;
}

PmiReport pmi_report(std::span<const signals::VehicleStateSample> log, const std::string& run,
                     const PmiWeights& weights) {
  PmiReport r;
  r.run = run;
  for (std::size_t a = 0; a < kMotionAxes; ++a) r.axes[a] = pmi(log, static_cast<MotionAxis>(a), weights);
  return r;
}

PmiReport average_reports(std::span<const PmiReport> reports, const std::string& run) {
  if (reports.empty()) throw ValidationError("pmi: nothing to average");
  PmiReport r;
  r.run = run;
  for (const auto& x : reports)
    for (std::size_t a = 0; a < kMotionAxes; ++a) {
      r.axes[a].mu += x.axes[a].mu;
      r.axes[a].a_max += x.axes[a].a_max;
      r.axes[a].j_max += x.axes[a].j_max;
    }
  const double n = static_cast<double>(reports.size());
  for (auto& v : r.axes) {
    v.mu /= n;
    v.a_max /= n;
    v.j_max /= n;
  }
  return r;
}

std::vector<PmiReport> normalize_pmi(std::vector<PmiReport> reports) {
  if (reports.empty()) throw ValidationError("normalize_pmi: no reports");
  for (std::size_t a = 0; a < kMotionAxes; ++a) {
    double mx = 0.0;
    for (const auto& r : reports) mx = std::max(mx, r.axes[a].mu);
    for (auto& r : reports) r.normalized[a] = mx > 0.0 ? r.axes[a].mu / mx : 0.0;
  }
  return reports;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ValidationError("spearman: lists differ in length");
  if (xs.size() < 2) throw ValidationError("spearman: need at least two values");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw ValidationError("spearman: non-finite value");
  const auto rx = average_ranks(xs), ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("spearman: zero rank variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string format_pmi_csv(std::span<const PmiReport> reports) {
  std::ostringstream out;
  out << "run,axis,mu,a_max,j_max,mu_normalized\n";
  for (const auto& r : reports)
    for (std::size_t a = 0; a < kMotionAxes; ++a)
      out << r.run << ',' << axis_name(static_cast<MotionAxis>(a)) << ',' << format_double(r.axes[a].mu) << ','
          << format_double(r.axes[a].a_max) << ',' << format_double(r.axes[a].j_max) << ','
          << format_double(r.normalized[a]) << '\n';
  return out.str();
}

std::string format_pmi_chart_csv(std::span<const PmiReport> reports) {
  std::ostringstream out;
  out << "run";
  for (std::size_t a = 0; a < kMotionAxes; ++a) out << ',' << axis_name(static_cast<MotionAxis>(a));
  out << '\n';
  for (const auto& r : reports) {
    out << r.run;
    for (double v : r.normalized) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace rca::eval
