#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rca/common/error.hpp"
#include "rca/common/text.hpp"
#include "rca/pipeline/config.hpp"
#include "rca/pipeline/stages.hpp"

namespace {

Eigen::Vector2d parse_goal(const std::string& text) {
  const auto parts = rca::split(text, ',');
  if (parts.size() != 2) throw rca::ValidationError("--goal expects x,y");
  return {rca::parse_double(parts[0]), rca::parse_double(parts[1])};
}

std::vector<std::pair<std::string, std::filesystem::path>> parse_runs(const std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::filesystem::path>> runs;
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      runs.emplace_back(std::filesystem::path(a).stem().string(), a);
    } else {
      runs.emplace_back(a.substr(0, eq), a.substr(eq + 1));
    }
  }
  return runs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RCA traversability pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  app.add_option("--config", config_path, "pipeline config JSON");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out, "output directory");

  auto* simulate = app.add_subcommand("simulate", "simulate a drive and export a dataset");
  std::string world_path, waypoints_path;
  simulate->add_option("--world", world_path, "world spec JSON");
  simulate->add_option("--waypoints", waypoints_path, "waypoints JSON");

  auto* label = app.add_subcommand("label", "cluster vehicle states and generate cost labels");
  std::string dataset_dir;
  label->add_option("--dataset", dataset_dir, "dataset directory")->required();

  auto* train = app.add_subcommand("train", "train the cost regressor");
  std::string labels_dir;
  train->add_option("--labels", labels_dir, "label stage output directory")->required();

  auto* predict = app.add_subcommand("predict", "build a costmap from an image");
  std::string model_path, image_path, calibration_path;
  predict->add_option("--model", model_path, "model JSON")->required();
  predict->add_option("--image", image_path, "PPM/PGM image")->required();
  predict->add_option("--calibration", calibration_path, "calibration JSON")->required();

  auto* plan = app.add_subcommand("plan", "select a trajectory on a costmap");
  std::string costmap_path, goal_text;
  plan->add_option("--costmap", costmap_path, "costmap PGM (with JSON header beside it)")->required();
  plan->add_option("--goal", goal_text, "goal in the vehicle frame as x,y")->required();

  auto* evaluate = app.add_subcommand("eval", "PMI report for state logs");
  std::vector<std::string> run_args;
  evaluate->add_option("logs", run_args, "state logs as name=path (repeated names are averaged)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string stage = app.get_subcommands().front()->get_name();
  try {
    stage = "config";
    rca::pipeline::PipelineConfig config;
    if (!config_path.empty()) config = rca::pipeline::read_config(config_path);
    if (seed) config.seed = *seed;
    config.validate();
    stage = app.get_subcommands().front()->get_name();

    nlohmann::json summary;
    if (*simulate) {
      summary = rca::pipeline::run_simulate(
          config, world_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(world_path),
          waypoints_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(waypoints_path), out);
    } else if (*label) {
      summary = rca::pipeline::run_label(config, dataset_dir, out);
    } else if (*train) {
      summary = rca::pipeline::run_train(config, labels_dir, out);
    } else if (*predict) {
      summary = rca::pipeline::run_predict(config, model_path, image_path, calibration_path, out);
    } else if (*plan) {
      summary = rca::pipeline::run_plan(config, costmap_path, parse_goal(goal_text), out);
    } else if (*evaluate) {
      summary = rca::pipeline::run_eval(config, parse_runs(run_args), out);
    }
    std::cout << stage << ": " << summary.dump() << '\n';
    return 0;
  } catch (const rca::ValidationError& e) {
    std::cerr << "rca " << stage << ": error: " << e.what() << '\n';
    return 2;
  } catch (const rca::NumericError& e) {
    std::cerr << "rca " << stage << ": numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "rca " << stage << ": failure: " << e.what() << '\n';
    return 3;
  }
}
