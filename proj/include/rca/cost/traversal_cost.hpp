#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "rca/signals/spectrum.hpp"

namespace rca::cost {

struct ClassSpectralStats {
  int k = 0;
  signals::AmplitudeSpectrum mean_spectrum;
  std::size_t count = 0;
  double omega = 1.0;

  double energy() const { return signals::total_energy(mean_spectrum); }
};

struct CostLabel {
  double value = 0.0;
  double normalized = 0.0;
  int class_id = 0;
};

struct NormalizationBounds {
  double min = 0.0;
  double max = 0.0;

  double apply(double value) const { return max > min ? (value - min) / (max - min) : 0.0; }
};

// Per-class arithmetic mean spectrum. Classes are 0..max(label); each must
// have at least one sample.
std::vector<ClassSpectralStats> class_means(std::span<const signals::AmplitudeSpectrum> spectra,
                                            std::span<const int> labels);

// Ranks classes by mean-spectrum energy (ties by class id) and hands out
// base_weights in that order.
std::vector<ClassSpectralStats> assign_weights(std::span<const ClassSpectralStats> stats,
                                               std::span<const double> base_weights);

// omega_k * sum_d dot(M^{d,k}, A^d).
CostLabel traversal_cost(const signals::AmplitudeSpectrum& spectrum, const ClassSpectralStats& stats);

// Min-max normalization across the dataset; constant values map to 0.
std::vector<CostLabel> normalize_costs(std::span<const CostLabel> labels,
                                       NormalizationBounds* bounds = nullptr);

nlohmann::json to_json(const ClassSpectralStats& stats);
ClassSpectralStats class_stats_from_json(const nlohmann::json& j);

}  // namespace rca::cost
