#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "rca/cost/traversal_cost.hpp"
#include "rca/features/clustering.hpp"
#include "rca/features/spectrum_encoder.hpp"
#include "rca/features/texture.hpp"
#include "rca/learning/regressor.hpp"
#include "rca/pipeline/config.hpp"
#include "rca/sim/dataset.hpp"

namespace rca::pipeline {

struct SimulationResult {
  sim::DriveOutput drive;
  sim::Dataset dataset;
};

SimulationResult simulate(const PipelineConfig& config, const sim::WorldMap& world,
                          const std::vector<Eigen::Vector2d>& path);

// Clustering works on windows: a window's visual feature is the mean texture
// feature of the patches cropped at its footprint, and only windows with at
// least one patch take part. Patches inherit their window's class and cost.
struct LabelResult {
  std::vector<features::TextureFeature> record_features;  // aligned with dataset.records
  std::vector<int> window_ids;                            // clustered windows
  std::vector<int> window_gt;
  std::vector<int> window_cluster;
  features::SpectrumEncoder encoder;
  features::ClusterModel clusters;
  std::vector<cost::ClassSpectralStats> stats;
  std::vector<cost::CostLabel> record_labels;
  cost::NormalizationBounds bounds;
  double nmi = 0.0;
  double accuracy = 0.0;
};

LabelResult label_dataset(const sim::Dataset& dataset, const PipelineConfig& config);

std::vector<learning::TrainSample> training_samples(const sim::Dataset& dataset,
                                                    const std::vector<features::TextureFeature>& features,
                                                    const std::vector<cost::CostLabel>& labels);

learning::TrainResult train_regressor(std::span<const learning::TrainSample> samples, const PipelineConfig& config);

// File-based stages. Each writes its artifacts plus run.json into `out` and
// returns a short summary for display.
nlohmann::json run_simulate(const PipelineConfig& config, const std::optional<std::filesystem::path>& world_path,
                            const std::optional<std::filesystem::path>& waypoints_path,
                            const std::filesystem::path& out);
nlohmann::json run_label(const PipelineConfig& config, const std::filesystem::path& dataset_dir,
                         const std::filesystem::path& out);
nlohmann::json run_train(const PipelineConfig& config, const std::filesystem::path& labels_dir,
                         const std::filesystem::path& out);
nlohmann::json run_predict(const PipelineConfig& config, const std::filesystem::path& model_path,
                           const std::filesystem::path& image_path,
                           const std::filesystem::path& calibration_path, const std::filesystem::path& out);
nlohmann::json run_plan(const PipelineConfig& config, const std::filesystem::path& costmap_path,
                        const Eigen::Vector2d& goal, const std::filesystem::path& out);
// Runs sharing a name are averaged before normalization.
nlohmann::json run_eval(const PipelineConfig& config,
                        const std::vector<std::pair<std::string, std::filesystem::path>>& runs,
                        const std::filesystem::path& out);

std::string format_labeled_csv(const sim::Dataset& dataset, const std::vector<cost::CostLabel>& labels);
std::vector<cost::CostLabel> parse_labeled_csv(const std::string& csv, const sim::Dataset& dataset);

}  // namespace rca::pipeline
