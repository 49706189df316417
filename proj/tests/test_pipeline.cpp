#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rca/common/error.hpp"
#include "rca/eval/comfort.hpp"
#include "rca/geometry/calibration.hpp"
#include "rca/geometry/raster.hpp"
#include "rca/pipeline/config.hpp"
#include "rca/pipeline/stages.hpp"
#include "rca/planning/costmap.hpp"
#include "rca/signals/state_log.hpp"
#include "rca/sim/drive.hpp"

using namespace rca;
using namespace rca::pipeline;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rca_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Heave log a_z = amp * sin(2 pi f t) with matching angular rates.
signals::StateLog shaky_log(double amp, double seconds = 4.0) {
  signals::StateLog log;
  for (int i = 0; i < static_cast<int>(seconds * 200); ++i) {
    signals::VehicleStateSample s;
    s.t = i / 200.0;
    s.p = {s.t, 0.0, 0.0};
    s.a.z() = amp * std::sin(2.0 * 3.14159 * 3.0 * s.t);
    s.w = amp * Eigen::Vector3d(std::sin(5.0 * s.t), std::cos(4.0 * s.t), 0.2 * std::sin(2.0 * s.t));
    log.push_back(s);
  }
  return log;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  PipelineConfig c;
  c.seed = 42;
  c.clustering.k = 4;
  c.cost_weights = {1.0, 2.0, 3.0, 5.0};
  c.train.epochs = 7;
  c.grid.splat = planning::SplatMode::kCenter;
  c.sim.rig.pitch = 0.3;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.grid.splat, planning::SplatMode::kCenter);
  EXPECT_EQ(back.train_seed(), 45u);
  EXPECT_EQ(config_from_json(nlohmann::json::object()).clustering.k, 3);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto j = to_json(PipelineConfig{});
  j["turbo"] = true;
  EXPECT_THROW(config_from_json(j), ValidationError);
  j = to_json(PipelineConfig{});
  j["train"]["momentum"] = 0.9;
  EXPECT_THROW(config_from_json(j), ValidationError);
  j = to_json(PipelineConfig{});
  j["clustering"]["k"] = 1;
  EXPECT_THROW(config_from_json(j), ValidationError);
  j = to_json(PipelineConfig{});
  j["cost"]["weights"] = {1.0, 2.0};
  EXPECT_THROW(config_from_json(j), ValidationError);
  j = to_json(PipelineConfig{});
  j["grid"]["splat"] = "gaussian";
  EXPECT_THROW(config_from_json(j), ValidationError);
}

class PipelineRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config = new PipelineConfig();
    config->seed = 5;
    config->encoder.epochs = 60;
    root = new fs::path(scratch("run"));
    simulate_summary = run_simulate(*config, std::nullopt, std::nullopt, *root / "sim");
    label_summary = run_label(*config, *root / "sim", *root / "label");
    train_summary = run_train(*config, *root / "label", *root / "train");
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root);
    delete root;
    delete config;
  }
  static PipelineConfig* config;
  static fs::path* root;
  static nlohmann::json simulate_summary, label_summary, train_summary;
};
PipelineConfig* PipelineRun::config = nullptr;
fs::path* PipelineRun::root = nullptr;
nlohmann::json PipelineRun::simulate_summary, PipelineRun::label_summary, PipelineRun::train_summary;

TEST_F(PipelineRun, SimulateWritesManifest) {
  const auto manifest = nlohmann::json::parse(slurp(*root / "sim" / "manifest.json"));
  EXPECT_EQ(manifest["images"].size(), 300u);
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_TRUE(fs::exists(*root / "sim" / "run.json"));
  EXPECT_EQ(signals::read_state_log(*root / "sim" / "states.csv").size(), 12000u);
}

TEST_F(PipelineRun, SimulateIsByteIdenticalOnRerun) {
  const auto again = *root / "sim_again";
  run_simulate(*config, std::nullopt, std::nullopt, again);
  EXPECT_EQ(slurp(again / "manifest.json"), slurp(*root / "sim" / "manifest.json"));
  EXPECT_EQ(slurp(again / "records.csv"), slurp(*root / "sim" / "records.csv"));
}

TEST_F(PipelineRun, LabelKeepsEveryRecordAndRecoversClasses) {
  const auto ds = sim::read_dataset(*root / "sim");
  const auto labels = parse_labeled_csv(slurp(*root / "label" / "labeled.csv"), ds);
  EXPECT_EQ(labels.size(), ds.records.size());
  for (const auto& l : labels) {
    EXPECT_GE(l.normalized, 0.0);
    EXPECT_LE(l.normalized, 1.0);
  }
  EXPECT_GE(label_summary["accuracy"].get<double>(), 0.9);
  EXPECT_TRUE(fs::exists(*root / "label" / "cluster_model.json"));
  const auto metrics = slurp(*root / "label" / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, 13), "metric,value\n");
}

TEST_F(PipelineRun, LabelRejectsTooManyClusters) {
  auto c = *config;
  c.clustering.k = 500;
  c.cost_weights.assign(500, 1.0);
  EXPECT_THROW(run_label(c, *root / "sim", *root / "label_k"), ValidationError);
}

TEST_F(PipelineRun, TrainLogAndDeterminism) {
  const auto log = slurp(*root / "train" / "train_log.csv");
  std::vector<std::string> lines;
  std::istringstream in(log);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 151u);
  auto loss_of = [](const std::string& line) {
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    std::getline(row, field, ',');
    std::getline(row, field, ',');
    return std::stod(field);
  };
  EXPECT_LT(loss_of(lines.back()), loss_of(lines[1]));
  run_train(*config, *root / "label", *root / "train_again");
  EXPECT_EQ(slurp(*root / "train_again" / "model.json"), slurp(*root / "train" / "model.json"));
}

TEST_F(PipelineRun, PredictAndPlan) {
  const auto out = *root / "predict";
  run_predict(*config, *root / "train" / "model.json", *root / "sim" / "images" / "00010.ppm",
              *root / "sim" / "calibration.json", out);
  const auto pgm = geometry::read_pnm(out / "costmap.pgm");
  EXPECT_EQ(pgm.width, config->grid.spec.width);
  EXPECT_EQ(pgm.height, config->grid.spec.height);
  EXPECT_EQ(pgm.channels, 1);
  const auto map = planning::read_costmap(out / "costmap.pgm");
  EXPECT_GT(map.known_count(), 0u);

  const auto plan_out = *root / "plan";
  const auto summary = run_plan(*config, out / "costmap.pgm", {6.0, 0.0}, plan_out);
  const auto csv = slurp(plan_out / "trajectory.csv");
  EXPECT_EQ(csv.substr(0, 12), "x,y,heading\n");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 62);
  EXPECT_TRUE(fs::exists(plan_out / "run.json"));
  EXPECT_TRUE(summary.contains("curvature"));
}

TEST_F(PipelineRun, SkyOnlyViewGivesUnknownMap) {
  auto calib = geometry::read_calibration(*root / "sim" / "calibration.json");
  calib.extrinsics = geometry::camera_extrinsics({0.0, 0.0, 1.2}, 0.0, -1.0);
  calib.plane = geometry::ground_plane_in_camera(calib.extrinsics);
  const auto dir = *root / "sky";
  fs::create_directories(dir);
  geometry::write_calibration(dir / "calibration.json", calib);
  geometry::Image sky(calib.camera.width, calib.camera.height, 3);
  for (int y = 0; y < sky.height; ++y)
    for (int x = 0; x < sky.width; ++x)
      for (int c = 0; c < 3; ++c) sky.at(x, y, c) = sim::kSkyColor[static_cast<std::size_t>(c)];
  geometry::write_pnm(dir / "sky.ppm", sky);
  run_predict(*config, *root / "train" / "model.json", dir / "sky.ppm", dir / "calibration.json", dir / "out");
  const auto pgm = geometry::read_pnm(dir / "out" / "costmap.pgm");
  for (auto v : pgm.data) EXPECT_EQ(v, 255);
}

TEST(Stages, CorruptWorldIsAValidationError) {
  const auto dir = scratch("corrupt");
  write_file(dir / "world.json", "{\"nx\": 3, \"ny\": ");
  EXPECT_THROW(run_simulate(PipelineConfig{}, dir / "world.json", std::nullopt, dir / "out"), ValidationError);
  write_file(dir / "world.json", "{\"nx\": 2, \"ny\": 1, \"cell_size\": 1, \"origin\": [0, 0], \"grid\": [0, 9]}");
  EXPECT_THROW(run_simulate(PipelineConfig{}, dir / "world.json", std::nullopt, dir / "out"), ValidationError);
  fs::remove_all(dir);
}

TEST(Stages, EvalNormalizesAgainstTheRoughestRun) {
  const auto dir = scratch("eval");
  signals::write_state_log(dir / "calm.csv", shaky_log(0.5));
  signals::write_state_log(dir / "rough.csv", shaky_log(2.0));
  const auto summary = run_eval(PipelineConfig{}, {{"calm", dir / "calm.csv"}, {"rough", dir / "rough.csv"}}, dir / "out");
  for (const auto& [axis, value] : summary["rough"].items()) EXPECT_DOUBLE_EQ(value.get<double>(), 1.0) << axis;
  for (const auto& [axis, value] : summary["calm"].items()) EXPECT_LT(value.get<double>(), 1.0) << axis;
  EXPECT_TRUE(fs::exists(dir / "out" / "pmi.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "pmi_chart.csv"));

  signals::StateLog still = shaky_log(0.0);
  signals::write_state_log(dir / "still.csv", still);
  const auto single = run_eval(PipelineConfig{}, {{"still", dir / "still.csv"}, {"one", dir / "calm.csv"}}, dir / "single");
  for (const auto& [axis, value] : single["one"].items()) EXPECT_EQ(value.get<double>(), 1.0);
  for (const auto& [axis, value] : single["still"].items()) EXPECT_EQ(value.get<double>(), 0.0);
  fs::remove_all(dir);
}

TEST(Stages, EvalAveragesRepeatedRuns) {
  const auto dir = scratch("eval_avg");
  const std::vector<double> amps{0.5, 1.0, 3.0};
  for (std::size_t i = 0; i < amps.size(); ++i)
    signals::write_state_log(dir / ("log" + std::to_string(i) + ".csv"), shaky_log(amps[i]));
  const auto summary = run_eval(PipelineConfig{},
                                {{"a", dir / "log0.csv"}, {"a", dir / "log1.csv"}, {"b", dir / "log2.csv"}}, dir / "out");
  // hand-summed oracle: mean of the two "a" runs over the single "b" run
  for (std::size_t axis = 0; axis < eval::kMotionAxes; ++axis) {
    const auto m = static_cast<eval::MotionAxis>(axis);
    const double a = 0.5 * (eval::pmi(shaky_log(0.5), m, {}).mu + eval::pmi(shaky_log(1.0), m, {}).mu);
    const double b = eval::pmi(shaky_log(3.0), m, {}).mu;
    const double expected = a / std::max(a, b);
    EXPECT_NEAR(summary["a"][eval::axis_name(m)].get<double>(), expected, 1e-12);
  }
  fs::remove_all(dir);
}
