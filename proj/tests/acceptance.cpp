// Acceptance runner: prints one [PASS]/[FAIL] line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rca/common/text.hpp"
#include "rca/cost/traversal_cost.hpp"
#include "rca/eval/comfort.hpp"
#include "rca/features/metrics.hpp"
#include "rca/geometry/camera.hpp"
#include "rca/geometry/homography.hpp"
#include "rca/learning/regressor.hpp"
#include "rca/pipeline/config.hpp"
#include "rca/pipeline/stages.hpp"
#include "rca/planning/costmap.hpp"
#include "rca/planning/planner.hpp"
#include "rca/signals/spectrum.hpp"
#include "rca/sim/dataset.hpp"
#include "rca/sim/drive.hpp"
#include "rca/sim/world.hpp"

#ifndef RCA_CLI_PATH
#error "RCA_CLI_PATH must point at the rca executable"
#endif

using namespace rca;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = seconds_since(t0);
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << ' ' << name << " (" << o.detail << "; " << fmt(dt)
            << " s)" << std::endl;
}

// ---------------------------------------------------------------- 1
std::vector<double> naive_dft_magnitudes(const std::vector<double>& x) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * j % n) / static_cast<double>(n);
      acc += (x[j] - mean) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    mag[k] = std::abs(acc) / static_cast<double>(n);
  }
  return mag;
}

Outcome criterion_fft() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    signals::SignalWindow w;
    w.samples.resize(256);
    for (auto& s : w.samples) s = {g(rng), 3.0 * g(rng), 0.5 * g(rng) + 9.81};
    const auto spec = signals::amplitude_spectrum(w);
    for (std::size_t a = 0; a < signals::kAxes; ++a) {
      std::vector<double> x;
      for (const auto& s : w.samples) x.push_back(s[a]);
      const auto oracle = naive_dft_magnitudes(x);
      for (std::size_t k = 0; k < oracle.size(); ++k) worst = std::max(worst, std::abs(oracle[k] - spec.per_axis[a][k]));
    }
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-9 && dt < 5.0, "max abs error " + fmt(worst)};
}

// ---------------------------------------------------------------- 2
Outcome criterion_homography() {
  const auto t0 = Clock::now();
  const geometry::CameraModel cam{400.0, 420.0, 320.0, 240.0, 640, 480};
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int done = 0;
  while (done < 1000) {
    const auto fp = geometry::camera_extrinsics({u(rng), u(rng), 1.0 + 0.5 * (u(rng) + 1.0)}, std::numbers::pi * u(rng),
                                                0.15 + 0.35 * (u(rng) + 1.0));
    const double yaw = std::numbers::pi * u(rng);
    const Eigen::Vector3d fwd(std::cos(yaw), std::sin(yaw), 0.0);
    const Eigen::Vector3d fp_center = fp.origin_in_source();
    const auto bev = geometry::camera_extrinsics(fp_center + 2.5 * fwd + Eigen::Vector3d(0.3 * u(rng), 0.3 * u(rng), 2.0 + u(rng)),
                                                 yaw, 0.9 + 0.6 * u(rng));
    // ground point seen by the first-person camera
    const Eigen::Vector2d px(320.0 + 300.0 * u(rng), 300.0 + 170.0 * u(rng));
    const auto plane = geometry::ground_plane_in_camera(fp);
    const auto hit = geometry::ray_plane_intersection(cam, px, plane);
    if (!hit) continue;
    const Eigen::Vector3d world = fp.inverse().apply(*hit);
    const auto direct = geometry::project_point(cam, bev, world);
    const auto fp_px = geometry::project_point(cam, fp, world);
    if (!direct || !fp_px) continue;
    const auto H = geometry::bev_homography(geometry::relative_extrinsics(fp, bev), plane);
    const auto warped = geometry::warp_point(*fp_px, H, cam);
    worst = std::max(worst, (warped - *direct).norm());
    ++done;
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-6 && dt < 5.0, "max pixel error " + fmt(worst)};
}

// ---------------------------------------------------------------- 4
Outcome criterion_eq2() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  auto random_spectrum = [&](std::size_t bins) {
    signals::AmplitudeSpectrum s;
    for (auto& axis : s.per_axis) {
      axis.resize(bins);
      for (double& v : axis) v = u(rng);
    }
    return s;
  };
  double worst = 0.0;
  bool linear = true;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t bins = 1 + static_cast<std::size_t>(rng() % 129);
    cost::ClassSpectralStats st;
    st.k = static_cast<int>(rng() % 3);
    st.mean_spectrum = random_spectrum(bins);
    st.count = 1;
    st.omega = 0.5 + u(rng);
    const auto a = random_spectrum(bins);
    double oracle = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      double dot = 0.0;
      for (std::size_t b = 0; b < bins; ++b) dot += st.mean_spectrum.per_axis[d][b] * a.per_axis[d][b];
      oracle += dot;
    }
    oracle *= st.omega;
    const double got = cost::traversal_cost(a, st).value;
    worst = std::max(worst, std::abs(got - oracle) / std::max(1.0, std::abs(oracle)));
    for (double c : {0.25, 0.5, 2.0, 8.0}) {
      auto scaled = a;
      for (auto& axis : scaled.per_axis)
        for (double& v : axis) v *= c;
      if (cost::traversal_cost(scaled, st).value != c * got) linear = false;
    }
  }
  return {worst <= 1e-12 && linear, "max rel error " + fmt(worst) + (linear ? ", scaling exact" : ", scaling inexact")};
}

// ---------------------------------------------------------------- 5
Outcome criterion_loss() {
  const bool values = learning::smooth_l1(0.0) == 0.0 && learning::smooth_l1(0.5) == 0.125 &&
                      learning::smooth_l1(2.0) == 1.5 && learning::smooth_l1(-2.0) == 1.5;
  const std::vector<double> p{1.0, 2.0, 3.0}, t{1.5, 2.0, 1.0};
  const bool beta_one = learning::loss(p, t, 0.3, 5.0, 1.0).total == 0.25 + 4.0;
  const bool beta_zero = learning::loss(p, p, 0.5, 0.0, 0.0).total == 0.125 && learning::loss(p, p, 2.0, 0.0, 0.0).total == 1.5;

  learning::TrainConfig cfg;
  cfg.seed = 55;
  const bool schedule = cfg.beta(1) == 1.0 && cfg.beta(40) == 1.0 && cfg.beta(41) == 0.4 && cfg.beta(150) == 0.4 &&
                        cfg.cost_decoder_start_epoch == 41;

  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<learning::TrainSample> data(96);
  for (auto& s : data) {
    for (double& v : s.feature.vector) v = u(rng);
    for (auto& axis : s.spectrum.per_axis) {
      axis.resize(17);
      for (double& v : axis) v = u(rng);
    }
    s.cost = u(rng);
  }
  auto model = learning::make_regressor(51, cfg);
  const nn::Dense head0 = model.cost_head;
  const auto early = learning::train_from(model, data, 1, 40);
  const bool frozen = early.model.cost_head == head0 && !(early.model.enc1 == model.enc1);
  const auto late = learning::train_from(early.model, data, 41, 41);
  const bool joins = !(late.model.cost_head == head0);
  bool logged = true;
  for (const auto& row : early.log) logged = logged && row.beta == 1.0 && row.loss == row.l2;
  logged = logged && late.log.front().beta == 0.4;

  const bool ok = values && beta_one && beta_zero && schedule && frozen && joins && logged;
  std::string d = std::string("values ") + (values ? "ok" : "bad") + ", beta=1 " + (beta_one ? "ok" : "bad") +
                  ", beta=0 " + (beta_zero ? "ok" : "bad") + ", schedule " + (schedule ? "ok" : "bad") +
                  ", cost head frozen through 40 " + (frozen ? "yes" : "no") + ", updated at 41 " + (joins ? "yes" : "no");
  return {ok, d};
}

// ---------------------------------------------------------------- 6
Outcome criterion_gradients() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int draw = 0; draw < 20; ++draw) {
    learning::TrainConfig cfg;
    cfg.seed = rng();
    const int bins = 9;
    auto model = learning::make_regressor(3 * bins, cfg);
    for (int i = 0; i < model.input.mean.size(); ++i) {
      model.input.mean[i] = 0.3 * u(rng);
      model.input.scale[i] = 0.5 + 0.5 * (u(rng) + 1.0);
    }
    for (nn::Dense* l : {&model.enc1, &model.enc2, &model.spectrum_head, &model.cost_head}) l->b.setRandom();
    std::vector<learning::TrainSample> batch(5);
    for (auto& s : batch) {
      for (double& v : s.feature.vector) v = u(rng);
      for (auto& axis : s.spectrum.per_axis) {
        axis.resize(bins);
        for (double& v : axis) v = u(rng);
      }
      s.cost = 2.0 * u(rng);
    }
    const double beta = draw % 2 == 0 ? 0.4 : 0.5 * (u(rng) + 1.0);
    learning::RegressorGradients grads(model);
    learning::batch_loss(model, batch, beta, &grads);

    struct Pair {
      double* param;
      const double* grad;
      Eigen::Index size;
    };
    std::vector<Pair> all = {
        {model.enc1.W.data(), grads.enc1.W.data(), model.enc1.W.size()},
        {model.enc1.b.data(), grads.enc1.b.data(), model.enc1.b.size()},
        {model.enc2.W.data(), grads.enc2.W.data(), model.enc2.W.size()},
        {model.enc2.b.data(), grads.enc2.b.data(), model.enc2.b.size()},
        {model.spectrum_head.W.data(), grads.spectrum_head.W.data(), model.spectrum_head.W.size()},
        {model.spectrum_head.b.data(), grads.spectrum_head.b.data(), model.spectrum_head.b.size()},
        {model.cost_head.W.data(), grads.cost_head.W.data(), model.cost_head.W.size()},
        {model.cost_head.b.data(), grads.cost_head.b.data(), model.cost_head.b.size()},
    };
    const double h = 1e-5;
    for (const auto& t : all) {
      for (int rep = 0; rep < 24; ++rep) {
        const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(t.size));
        const double saved = t.param[i];
        t.param[i] = saved + h;
        const double up = learning::batch_loss(model, batch, beta).total;
        t.param[i] = saved - h;
        const double down = learning::batch_loss(model, batch, beta).total;
        t.param[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = t.grad[i];
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
        ++checked;
      }
    }
  }
  return {worst <= 1e-4, "max relative error " + fmt(worst) + " over " + std::to_string(checked) + " coordinates"};
}

// ---------------------------------------------------------------- 9
Outcome criterion_metrics() {
  const std::vector<int> a{0, 0, 1, 1}, b{1, 1, 0, 0};
  const std::vector<int> y{0, 0, 0, 1}, c{0, 1, 2, 2};
  const bool nmi_ok = features::nmi(a, a) == 1.0 && std::abs(features::nmi(a, b) - 1.0) < 1e-15;
  const bool acc_ok = features::cluster_accuracy(a, a) == 1.0 && features::cluster_accuracy(a, b) == 1.0 &&
                      features::cluster_accuracy(y, c) == 0.75;
  std::mt19937_64 rng(909);
  std::vector<int> p(10000), q(10000);
  for (auto& v : p) v = static_cast<int>(rng() % 3);
  for (auto& v : q) v = static_cast<int>(rng() % 3);
  const double indep = features::nmi(p, q);
  const std::vector<double> x{1, 2, 3, 4}, z{1, 3, 2, 4}, rev{4, 3, 2, 1};
  const double s08 = eval::spearman(x, z);
  const bool sp_ok = eval::spearman(x, x) == 1.0 && eval::spearman(x, rev) == -1.0 && std::abs(s08 - 0.8) < 1e-12;
  const bool ok = nmi_ok && acc_ok && indep <= 0.05 && sp_ok;
  return {ok, "accuracy example " + fmt(features::cluster_accuracy(y, c)) + ", spearman example " + fmt(s08) +
                  ", independent nmi " + fmt(indep)};
}

// ---------------------------------------------------------------- shared pipeline
struct Fixture {
  pipeline::PipelineConfig config;
  sim::WorldMap world;
  pipeline::SimulationResult sim;
  pipeline::LabelResult labels;
  double sim_seconds = 0.0;
  double label_seconds = 0.0;
  bool ready = false;
  learning::RegressorModel model;
  bool model_ready = false;
};

Fixture& fixture() {
  static Fixture f;
  if (f.ready) return f;
  f.config.seed = 11;
  f.world = sim::default_world();
  const auto path = sim::lawnmower_path(f.world, 4.0, 8.0);
  auto t0 = Clock::now();
  f.sim = pipeline::simulate(f.config, f.world, path);
  f.sim_seconds = seconds_since(t0);
  t0 = Clock::now();
  f.labels = pipeline::label_dataset(f.sim.dataset, f.config);
  f.label_seconds = seconds_since(t0);
  f.ready = true;
  return f;
}

Outcome criterion_clustering() {
  const auto& f = fixture();
  const std::size_t n = f.labels.window_ids.size();
  const bool ok = n >= 600 && f.labels.accuracy >= 0.9 && f.labels.nmi >= 0.7 && f.label_seconds < 60.0;
  return {ok, std::to_string(n) + " windows, accuracy " + fmt(f.labels.accuracy) + ", nmi " + fmt(f.labels.nmi) +
                  ", clustering stage " + fmt(f.label_seconds) + " s, simulation " + fmt(f.sim_seconds) + " s"};
}

Outcome criterion_learning() {
  const auto t0 = Clock::now();
  auto& f = fixture();
  auto samples = pipeline::training_samples(f.sim.dataset, f.labels.record_features, f.labels.record_labels);
  std::mt19937_64 rng(707);
  std::shuffle(samples.begin(), samples.end(), rng);
  samples.resize(std::min<std::size_t>(samples.size(), 4000));
  const std::size_t n_train = samples.size() * 4 / 5;
  const std::span<const learning::TrainSample> train(samples.data(), n_train);
  const std::span<const learning::TrainSample> test(samples.data() + n_train, samples.size() - n_train);

  const auto result = pipeline::train_regressor(train, f.config);
  learning::TrainConfig untrained_cfg = f.config.train;
  untrained_cfg.seed = f.config.train_seed();
  auto untrained = learning::make_regressor(result.model.spectrum_dim(), untrained_cfg);
  untrained.input = result.model.input;

  std::vector<double> predicted, labeled;
  for (const auto& s : test) {
    predicted.push_back(learning::predict(result.model, s.feature).cost);
    labeled.push_back(s.cost);
  }
  const double rho = eval::spearman(predicted, labeled);
  const double mse = learning::spectrum_mse(result.model, test);
  const double mse0 = learning::spectrum_mse(untrained, test);
  f.model = result.model;
  f.model_ready = true;
  const double dt = seconds_since(t0);
  const bool ok = samples.size() >= 2000 && rho >= 0.8 && mse <= 0.5 * mse0 && dt <= 300.0;
  return {ok, std::to_string(samples.size()) + " patches, held-out spearman " + fmt(rho) + ", spectrum mse " + fmt(mse) +
                  " vs untrained " + fmt(mse0)};
}

// ---------------------------------------------------------------- 8
Outcome criterion_comfort() {
  const auto t0 = Clock::now();
  auto& f = fixture();
  if (!f.model_ready) return {false, "no trained model available"};
  const auto world = sim::corridor_world();
  const auto& rig = f.config.sim.rig;
  const auto image = sim::render_view(world, rig, {0.0, 0.0}, 0.0, f.config.sim_seed());
  const auto calib = rig.calibration();
  planning::CostmapOptions opt;
  opt.patch = f.config.grid.patch;
  opt.splat = f.config.grid.splat;
  const auto map = planning::build_costmap(image, f.model, calib.camera, calib.extrinsics, calib.plane,
                                           f.config.grid.spec, opt);
  const auto library = planning::make_library(f.config.library);
  const auto chosen = planning::plan(map, {20.0, 0.0}, library, f.config.scoring);
  std::size_t straight = 0;
  for (std::size_t i = 0; i < library.size(); ++i)
    if (library[i].curvature == 0.0) straight = i;

  auto drive_arc = [&](const planning::TrajectoryCandidate& arc, const std::string& name) {
    std::vector<Eigen::Vector2d> path;
    for (const auto& p : arc.poses) path.emplace_back(p.x, p.y);
    sim::DriveOptions o;
    o.seed = f.config.sim_seed();
    o.render_images = false;
    const auto drive = sim::simulate_drive(world, path, o);
    return eval::pmi_report(drive.log, name, f.config.pmi);
  };
  auto reports = eval::normalize_pmi({drive_arc(chosen.trajectory, "rca"), drive_arc(library[straight], "straight")});
  bool ok = true;
  std::string d = "curvature " + fmt(chosen.trajectory.curvature);
  for (auto axis : {eval::MotionAxis::z, eval::MotionAxis::roll, eval::MotionAxis::pitch}) {
    const auto a = static_cast<std::size_t>(axis);
    ok = ok && reports[0].axes[a].mu < reports[1].axes[a].mu && reports[0].normalized[a] < 1.0;
    d += std::string(", ") + eval::axis_name(axis) + " " + fmt(reports[0].axes[a].mu) + " vs " +
         fmt(reports[1].axes[a].mu) + " (norm " + fmt(reports[0].normalized[a]) + ")";
  }
  const double dt = seconds_since(t0);
  return {ok && dt <= 120.0, d};
}

// ---------------------------------------------------------------- 10
int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + RCA_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

Outcome criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / ("rca_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::string> artifacts[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path d = root / ("run" + std::to_string(run));
    fs::create_directories(d);
    const std::string q = "\"";
    const std::vector<std::string> steps = {
        "--seed 3 --out " + q + (d / "ds").string() + q + " simulate",
        "--seed 3 --out " + q + (d / "labels").string() + q + " label --dataset " + q + (d / "ds").string() + q,
        "--seed 3 --out " + q + (d / "model").string() + q + " train --labels " + q + (d / "labels").string() + q,
        "--seed 3 --out " + q + (d / "costmap").string() + q + " predict --model " + q +
            (d / "model" / "model.json").string() + q + " --image " + q + (d / "ds" / "images" / "00040.ppm").string() +
            q + " --calibration " + q + (d / "ds" / "calibration.json").string() + q,
        "--seed 3 --out " + q + (d / "plan").string() + q + " plan --costmap " + q +
            (d / "costmap" / "costmap.pgm").string() + q + " --goal 6,1",
    };
    for (const auto& s : steps)
      if (run_cli(s, d / "cli.log") != 0) return {false, "CLI step failed: " + s};
    for (const fs::path p : {d / "ds" / "manifest.json", d / "model" / "model.json", d / "costmap" / "costmap.pgm",
                             d / "plan" / "trajectory.csv"})
      artifacts[run].push_back(read_text_file(p));
  }
  bool same = true;
  for (std::size_t i = 0; i < artifacts[0].size(); ++i) same = same && artifacts[0][i] == artifacts[1][i];
  fs::remove_all(root);
  return {same, same ? "manifest, model, costmap and trajectory byte-identical" : "artifacts differ between runs"};
}

}  // namespace

int main() {
  report(1, "fft_matches_naive_dft", criterion_fft);
  report(2, "homography_point_transfer", criterion_homography);
  report(3, "clustering_recovers_terrain_classes", criterion_clustering);
  report(4, "traversal_cost_exact", criterion_eq2);
  report(5, "loss_values_and_schedule", criterion_loss);
  report(6, "backprop_matches_finite_differences", criterion_gradients);
  report(7, "learned_cost_ranks_held_out_patches", criterion_learning);
  report(8, "planned_path_is_more_comfortable", criterion_comfort);
  report(9, "metric_examples", criterion_metrics);
  report(10, "pipeline_is_deterministic", criterion_determinism);
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
