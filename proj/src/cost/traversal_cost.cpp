#include "rca/cost/traversal_cost.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "rca/common/error.hpp"

namespace rca::cost {

std::vector<ClassSpectralStats> class_means(std::span<const signals::AmplitudeSpectrum> spectra,
                                            std::span<const int> labels) {
  if (spectra.size() != labels.size()) throw ValidationError("class_means: lists not aligned");
  if (spectra.empty()) throw ValidationError("class_means: no samples");
  const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
  if (*std::min_element(labels.begin(), labels.end()) < 0) {
    throw ValidationError("class_means: negative class id");
  }
  const std::size_t bins = spectra.front().bins();

  std::vector<ClassSpectralStats> stats(static_cast<std::size_t>(classes));
  for (int k = 0; k < classes; ++k) {
    auto& s = stats[static_cast<std::size_t>(k)];
    s.k = k;
    for (auto& axis : s.mean_spectrum.per_axis) axis.assign(bins, 0.0);
  }
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    auto& s = stats[static_cast<std::size_t>(labels[i])];
    for (std::size_t d = 0; d < signals::kAxes; ++d) {
      if (spectra[i].per_axis[d].size() != bins) {
        throw ValidationError("class_means: spectra differ in length");
      }
      for (std::size_t b = 0; b < bins; ++b) s.mean_spectrum.per_axis[d][b] += spectra[i].per_axis[d][b];
    }
    ++s.count;
  }
  for (auto& s : stats) {
    if (s.count == 0) throw ValidationError("class_means: class " + std::to_string(s.k) + " is empty");
    for (auto& axis : s.mean_spectrum.per_axis) {
      for (double& v : axis) v /= static_cast<double>(s.count);
    }
  }
  return stats;
}

std::vector<ClassSpectralStats> assign_weights(std::span<const ClassSpectralStats> stats,
                                               std::span<const double> base_weights) {
  if (stats.size() != base_weights.size()) {
    throw ValidationError("assign_weights: " + std::to_string(base_weights.size()) +
                          " weights for " + std::to_string(stats.size()) + " classes");
  }
  for (double w : base_weights) {
    if (!(w > 0.0)) throw ValidationError("assign_weights: weights must be positive");
  }
  std::vector<std::size_t> order(stats.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> energy(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) energy[i] = stats[i].energy();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (energy[a] != energy[b]) return energy[a] < energy[b];
    return stats[a].k < stats[b].k;
  });
  std::vector<ClassSpectralStats> out(stats.begin(), stats.end());
  for (std::size_t rank = 0; rank < order.size(); ++rank) out[order[rank]].omega = base_weights[rank];
  return out;
}

CostLabel traversal_cost(const signals::AmplitudeSpectrum& spectrum, const ClassSpectralStats& stats) {
  double sum = 0.0;
  for (std::size_t d = 0; d < signals::kAxes; ++d) {
    const auto& m = stats.mean_spectrum.per_axis[d];
    const auto& a = spectrum.per_axis[d];
    if (m.size() != a.size()) throw ValidationError("traversal_cost: spectrum dimension mismatch");
    for (std::size_t b = 0; b < a.size(); ++b) sum += m[b] * a[b];
  }
  return {stats.omega * sum, 0.0, stats.k};
}

std::vector<CostLabel> normalize_costs(std::span<const CostLabel> labels, NormalizationBounds* bounds) {
  if (labels.empty()) throw ValidationError("normalize_costs: no labels");
  NormalizationBounds b{labels.front().value, labels.front().value};
  for (const auto& l : labels) {
    b.min = std::min(b.min, l.value);
    b.max = std::max(b.max, l.value);
  }
  std::vector<CostLabel> out(labels.begin(), labels.end());
  for (auto& l : out) l.normalized = b.apply(l.value);
  if (bounds) *bounds = b;
  return out;
}

nlohmann::json to_json(const ClassSpectralStats& stats) {
  return {{"k", stats.k},
          {"count", stats.count},
          {"omega", stats.omega},
          {"energy", stats.energy()},
          {"mean_spectrum", {{"roll", stats.mean_spectrum.per_axis[0]},
                             {"pitch", stats.mean_spectrum.per_axis[1]},
                             {"z", stats.mean_spectrum.per_axis[2]}}}};
}

ClassSpectralStats class_stats_from_json(const nlohmann::json& j) {
  try {
    ClassSpectralStats s;
    s.k = j.at("k").get<int>();
    s.count = j.at("count").get<std::size_t>();
    s.omega = j.at("omega").get<double>();
    const auto& m = j.at("mean_spectrum");
    s.mean_spectrum.per_axis[0] = m.at("roll").get<std::vector<double>>();
    s.mean_spectrum.per_axis[1] = m.at("pitch").get<std::vector<double>>();
    s.mean_spectrum.per_axis[2] = m.at("z").get<std::vector<double>>();
    if (s.count < 1 || !(s.omega > 0.0)) throw ValidationError("class stats: invalid count or omega");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("class stats: ") + e.what());
  }
}

}  // namespace rca::cost
