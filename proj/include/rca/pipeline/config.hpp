#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "rca/eval/comfort.hpp"
#include "rca/features/spectrum_encoder.hpp"
#include "rca/learning/regressor.hpp"
#include "rca/planning/costmap.hpp"
#include "rca/planning/planner.hpp"
#include "rca/sim/dataset.hpp"
#include "rca/sim/drive.hpp"

namespace rca::pipeline {

struct ClusteringConfig {
  int k = 3;
  int pca_dims = 8;
  int restarts = 5;
  int max_iter = 100;
  double tol = 1e-8;
};

struct GridConfig {
  planning::CostmapSpec spec;
  int patch = 64;
  planning::SplatMode splat = planning::SplatMode::kFootprint;
};

struct SimConfig {
  double speed = 1.0;
  double state_rate = 200.0;
  double image_rate = 5.0;
  sim::CameraRig rig;
};

// Every tunable of the pipeline. Stage seeds are derived from `seed`.
struct PipelineConfig {
  std::uint64_t seed = 1;
  sim::ExportOptions footprints;  // window/stride/hann live under "signals"
  ClusteringConfig clustering;
  features::EncoderConfig encoder;
  std::vector<double> cost_weights{1.0, 2.0, 4.0};
  learning::TrainConfig train;
  GridConfig grid;
  planning::LibraryOptions library;
  planning::ScoreOptions scoring;
  eval::PmiWeights pmi;
  SimConfig sim;

  void validate() const;

  std::uint64_t sim_seed() const { return seed; }
  std::uint64_t encoder_seed() const { return seed + 1; }
  std::uint64_t cluster_seed() const { return seed + 2; }
  std::uint64_t train_seed() const { return seed + 3; }
};

nlohmann::json to_json(const PipelineConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig read_config(const std::filesystem::path& path);

}  // namespace rca::pipeline
