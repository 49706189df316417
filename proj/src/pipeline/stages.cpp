#include "rca/pipeline/stages.hpp"

#include <map>
#include <sstream>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"
#include "rca/eval/comfort.hpp"
#include "rca/features/metrics.hpp"
#include "rca/geometry/calibration.hpp"
#include "rca/planning/costmap.hpp"
#include "rca/planning/planner.hpp"

namespace rca::pipeline {

namespace fs = std::filesystem;

namespace {

void write_run_json(const fs::path& out, const std::string& command, const PipelineConfig& config,
                    const nlohmann::json& inputs) {
  const nlohmann::json run = {{"command", command}, {"config", to_json(config)}, {"inputs", inputs}};
  write_text_file(out / "run.json", run.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

sim::DriveOptions drive_options(const PipelineConfig& c) {
  sim::DriveOptions o;
  o.speed = c.sim.speed;
  o.state_rate = c.sim.state_rate;
  o.image_rate = c.sim.image_rate;
  o.seed = c.sim_seed();
  o.rig = c.sim.rig;
  return o;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

SimulationResult simulate(const PipelineConfig& config, const sim::WorldMap& world,
                          const std::vector<Eigen::Vector2d>& path) {
  config.validate();
  SimulationResult r;
  r.drive = sim::simulate_drive(world, path, drive_options(config));
  r.dataset = sim::export_dataset(r.drive, world, config.sim.rig, config.footprints);
  return r;
}

LabelResult label_dataset(const sim::Dataset& dataset, const PipelineConfig& config) {
  config.validate();
  LabelResult r;
  r.record_features.reserve(dataset.records.size());
  for (const auto& rec : dataset.records) r.record_features.push_back(features::texture_feature(rec.patch));

  std::map<int, std::vector<std::size_t>> by_window;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const int w = dataset.records[i].window_id;
    if (w < 0 || w >= static_cast<int>(dataset.windows.size()))
      throw ValidationError("label: record references an unknown window");
    by_window[w].push_back(i);
  }
  const int k = config.clustering.k;
  if (static_cast<int>(by_window.size()) < k)
    throw ValidationError("label: k = " + std::to_string(k) + " exceeds the number of labeled windows (" +
                          std::to_string(by_window.size()) + ")");

  std::vector<signals::AmplitudeSpectrum> spectra;
  std::vector<features::TextureFeature> visual;
  for (const auto& [w, recs] : by_window) {
    features::TextureFeature mean;
    for (std::size_t i : recs)
      for (std::size_t d = 0; d < features::kTextureDim; ++d) mean.vector[d] += r.record_features[i].vector[d];
    for (double& v : mean.vector) v /= static_cast<double>(recs.size());
    const auto& win = dataset.windows[static_cast<std::size_t>(w)];
    r.window_ids.push_back(w);
    r.window_gt.push_back(win.gt_class);
    spectra.push_back(win.spectrum);
    visual.push_back(mean);
  }

  features::EncoderConfig ecfg = config.encoder;
  ecfg.seed = config.encoder_seed();
  ecfg.visual_clusters = std::min<int>(ecfg.visual_clusters, static_cast<int>(visual.size()));
  auto trained = features::train_spectrum_encoder(spectra, visual, ecfg);
  r.encoder = std::move(trained.encoder);
  const auto embeddings = r.encoder.embed(spectra);

  features::KMeansOptions kopt;
  kopt.seed = config.cluster_seed();
  kopt.restarts = config.clustering.restarts;
  kopt.max_iter = config.clustering.max_iter;
  kopt.tol = config.clustering.tol;
  r.clusters = features::cluster_states(embeddings, k, config.clustering.pca_dims, kopt);
  r.window_cluster = r.clusters.assignments;

  r.stats = cost::assign_weights(cost::class_means(spectra, r.window_cluster), config.cost_weights);

  std::map<int, cost::CostLabel> window_cost;
  for (std::size_t i = 0; i < r.window_ids.size(); ++i) {
    const auto& st = r.stats[static_cast<std::size_t>(r.window_cluster[i])];
    window_cost[r.window_ids[i]] = cost::traversal_cost(spectra[i], st);
  }
  std::vector<cost::CostLabel> raw;
  raw.reserve(dataset.records.size());
  for (const auto& rec : dataset.records) raw.push_back(window_cost.at(rec.window_id));
  r.record_labels = cost::normalize_costs(raw, &r.bounds);

  r.nmi = features::nmi(r.window_gt, r.window_cluster);
  r.accuracy = features::cluster_accuracy(r.window_gt, r.window_cluster);
  return r;
}

std::vector<learning::TrainSample> training_samples(const sim::Dataset& dataset,
                                                    const std::vector<features::TextureFeature>& features,
                                                    const std::vector<cost::CostLabel>& labels) {
  if (features.size() != dataset.records.size() || labels.size() != dataset.records.size())
    throw ValidationError("train: features, labels and records are not aligned");
  std::vector<learning::TrainSample> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    learning::TrainSample s;
    s.feature = features[i];
    s.spectrum = dataset.windows.at(static_cast<std::size_t>(dataset.records[i].window_id)).spectrum;
    s.cost = labels[i].normalized;
    out.push_back(std::move(s));
  }
  return out;
}

learning::TrainResult train_regressor(std::span<const learning::TrainSample> samples, const PipelineConfig& config) {
  learning::TrainConfig t = config.train;
  t.seed = config.train_seed();
  return learning::train(samples, t);
}

std::string format_labeled_csv(const sim::Dataset& dataset, const std::vector<cost::CostLabel>& labels) {
  if (labels.size() != dataset.records.size()) throw ValidationError("label: record/label count mismatch");
  std::ostringstream out;
  out << "patch_path,class_id,cost,cost_normalized\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << dataset.records[i].patch_path << ',' << labels[i].class_id << ',' << format_double(labels[i].value) << ','
        << format_double(labels[i].normalized) << '\n';
  return out.str();
}

std::vector<cost::CostLabel> parse_labeled_csv(const std::string& csv, const sim::Dataset& dataset) {
  const auto lines = lines_of(csv);
  if (lines.empty() || lines[0] != "patch_path,class_id,cost,cost_normalized")
    throw ValidationError("labeled.csv: missing or unexpected header");
  if (lines.size() - 1 != dataset.records.size())
    throw ValidationError("labeled.csv: row count differs from the dataset records");
  std::vector<cost::CostLabel> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 4) throw ValidationError("labeled.csv: wrong field count on line " + std::to_string(i + 1));
    if (f[0] != dataset.records[i - 1].patch_path)
      throw ValidationError("labeled.csv: patch order differs from the dataset");
    cost::CostLabel l;
    l.class_id = static_cast<int>(parse_int(f[1]));
    l.value = parse_double(f[2]);
    l.normalized = parse_double(f[3]);
    out.push_back(l);
  }
  return out;
}

nlohmann::json run_simulate(const PipelineConfig& config, const std::optional<fs::path>& world_path,
                            const std::optional<fs::path>& waypoints_path, const fs::path& out) {
  const sim::WorldMap world = world_path ? sim::read_world(*world_path) : sim::default_world();
  const auto path = waypoints_path ? sim::read_waypoints(*waypoints_path) : sim::default_path();
  const auto r = simulate(config, world, path);
  fs::create_directories(out);
  sim::DatasetProvenance prov;
  prov.seed = config.sim_seed();
  prov.params = to_json(config);
  sim::write_dataset(out, r.dataset, r.drive, world, prov);
  write_run_json(out, "simulate", config,
                 {{"world", world_path ? world_path->string() : "default"},
                  {"waypoints", waypoints_path ? waypoints_path->string() : "default"}});
  return {{"states", r.drive.log.size()},
          {"images", r.drive.frames.size()},
          {"windows", r.dataset.windows.size()},
          {"records", r.dataset.records.size()},
          {"skipped_images", r.dataset.skipped_images}};
}

nlohmann::json run_label(const PipelineConfig& config, const fs::path& dataset_dir, const fs::path& out) {
  const sim::Dataset ds = sim::read_dataset(dataset_dir);
  const LabelResult r = label_dataset(ds, config);
  fs::create_directories(out);
  write_text_file(out / "labeled.csv", format_labeled_csv(ds, r.record_labels));

  nlohmann::json classes = nlohmann::json::array();
  for (const auto& s : r.stats) classes.push_back(cost::to_json(s));
  const nlohmann::json labels = {{"format", "rca-labels/1"},
                                 {"dataset", fs::proximate(dataset_dir, out).generic_string()},
                                 {"k", config.clustering.k},
                                 {"weights", config.cost_weights},
                                 {"bounds", {{"min", r.bounds.min}, {"max", r.bounds.max}}},
                                 {"classes", classes},
                                 {"metrics", {{"nmi", r.nmi}, {"accuracy", r.accuracy}}}};
  write_text_file(out / "labels.json", labels.dump(2) + "\n");
  write_text_file(out / "cluster_model.json", features::to_json(r.clusters).dump() + "\n");
  write_text_file(out / "encoder.json", features::to_json(r.encoder).dump() + "\n");
  std::ostringstream metrics;
  metrics << "metric,value\n"
          << "nmi," << format_double(r.nmi) << "\naccuracy," << format_double(r.accuracy) << "\nwindows,"
          << r.window_ids.size() << "\nrecords," << ds.records.size() << '\n';
  write_text_file(out / "metrics.csv", metrics.str());
  write_run_json(out, "label", config, {{"dataset", dataset_dir.string()}});
  return {{"records", ds.records.size()}, {"windows", r.window_ids.size()}, {"nmi", r.nmi}, {"accuracy", r.accuracy}};
}

nlohmann::json run_train(const PipelineConfig& config, const fs::path& labels_dir, const fs::path& out) {
  const nlohmann::json labels = read_json(labels_dir / "labels.json");
  fs::path dataset_dir;
  try {
    if (labels.at("format").get<std::string>() != "rca-labels/1") throw ValidationError("labels.json: unsupported format");
    dataset_dir = labels_dir / labels.at("dataset").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("labels.json: ") + e.what());
  }
  const sim::Dataset ds = sim::read_dataset(dataset_dir);
  const auto record_labels = parse_labeled_csv(read_text_file(labels_dir / "labeled.csv"), ds);
  std::vector<features::TextureFeature> feats;
  feats.reserve(ds.records.size());
  for (const auto& rec : ds.records) feats.push_back(features::texture_feature(rec.patch));
  const auto samples = training_samples(ds, feats, record_labels);
  const auto result = train_regressor(samples, config);

  fs::create_directories(out);
  write_text_file(out / "model.json", learning::to_json(result.model).dump() + "\n");
  write_text_file(out / "train_log.csv", learning::format_train_log(result.log));
  write_run_json(out, "train", config, {{"labels", labels_dir.string()}});
  return {{"samples", samples.size()},
          {"epochs", result.log.size()},
          {"first_loss", result.log.front().loss},
          {"final_loss", result.log.back().loss},
          {"spectrum_mse", learning::spectrum_mse(result.model, samples)}};
}

nlohmann::json run_predict(const PipelineConfig& config, const fs::path& model_path, const fs::path& image_path,
                           const fs::path& calibration_path, const fs::path& out) {
  const auto model = learning::regressor_from_json(read_json(model_path));
  const auto calib = geometry::read_calibration(calibration_path);
  const auto image = geometry::read_pnm(image_path);
  planning::CostmapOptions opt;
  opt.patch = config.grid.patch;
  opt.splat = config.grid.splat;
  const auto map = planning::build_costmap(image, model, calib.camera, calib.extrinsics, calib.plane,
                                           config.grid.spec, opt);
  fs::create_directories(out);
  planning::write_costmap(out / "costmap.pgm", map);
  write_run_json(out, "predict", config,
                 {{"model", model_path.string()}, {"image", image_path.string()}, {"calibration", calibration_path.string()}});
  return {{"known_cells", map.known_count()}, {"cells", map.cells.size()}};
}

nlohmann::json run_plan(const PipelineConfig& config, const fs::path& costmap_path, const Eigen::Vector2d& goal,
                        const fs::path& out) {
  const auto map = planning::read_costmap(costmap_path);
  const auto library = planning::make_library(config.library);
  const auto result = planning::plan(map, goal, library, config.scoring);
  fs::create_directories(out);
  write_text_file(out / "trajectory.csv", planning::format_trajectory_csv(result.trajectory));
  nlohmann::json candidates = nlohmann::json::array();
  for (std::size_t i = 0; i < library.size(); ++i)
    candidates.push_back({{"curvature", library[i].curvature}, {"score", result.scores[i]}});
  const nlohmann::json plan = {{"goal", {goal.x(), goal.y()}},
                               {"selected", result.index},
                               {"curvature", result.trajectory.curvature},
                               {"candidates", candidates}};
  write_text_file(out / "plan.json", plan.dump(2) + "\n");
  write_run_json(out, "plan", config, {{"costmap", costmap_path.string()}, {"goal", {goal.x(), goal.y()}}});
  return {{"selected", result.index},
          {"curvature", result.trajectory.curvature},
          {"score", result.scores[result.index]}};
}

nlohmann::json run_eval(const PipelineConfig& config, const std::vector<std::pair<std::string, fs::path>>& runs,
                        const fs::path& out) {
  if (runs.empty()) throw ValidationError("eval: no runs given");
  std::vector<std::string> order;
  std::map<std::string, std::vector<eval::PmiReport>> grouped;
  for (const auto& [name, path] : runs) {
    if (name.empty() || name.find(',') != std::string::npos)
      throw ValidationError("eval: run names must be non-empty and free of commas");
    const auto log = signals::read_state_log(path);
    if (!grouped.count(name)) order.push_back(name);
    grouped[name].push_back(eval::pmi_report(log, name, config.pmi));
  }
  std::vector<eval::PmiReport> reports;
  for (const auto& name : order) reports.push_back(eval::average_reports(grouped[name], name));
  reports = eval::normalize_pmi(std::move(reports));

  fs::create_directories(out);
  write_text_file(out / "pmi.csv", eval::format_pmi_csv(reports));
  write_text_file(out / "pmi_chart.csv", eval::format_pmi_chart_csv(reports));
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& [name, path] : runs) inputs.push_back({{"run", name}, {"log", path.string()}});
  write_run_json(out, "eval", config, {{"runs", inputs}});
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& r : reports) {
    nlohmann::json axes = nlohmann::json::object();
    for (std::size_t a = 0; a < eval::kMotionAxes; ++a)
      axes[eval::axis_name(static_cast<eval::MotionAxis>(a))] = r.normalized[a];
    summary[r.run] = axes;
  }
  return summary;
}

}  // namespace rca::pipeline
