#include "rca/pipeline/config.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

namespace rca::pipeline {

namespace {

// Reads optional keys from one JSON object and rejects anything not read.
class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ValidationError("config: '" + name_ + "' must be an object");
  }

  template <typename T>
  Section& get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("config: '" + name_ + "." + key + "' has the wrong type");
    }
    return *this;
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const nlohmann::json& at(const char* key) const { return j_.at(key); }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ValidationError("config: unknown key '" + name_ + "." + key + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

const char* splat_name(planning::SplatMode m) { return m == planning::SplatMode::kCenter ? "center" : "footprint"; }

}  // namespace

void PipelineConfig::validate() const {
  footprints.validate();
  if (clustering.k < 2) throw ValidationError("config: clustering.k must be >= 2");
  if (clustering.pca_dims < 1 || clustering.restarts < 1 || clustering.max_iter < 1 || !(clustering.tol >= 0.0))
    throw ValidationError("config: invalid clustering parameters");
  if (encoder.hidden < 1 || encoder.embedding < 1 || !(encoder.lr > 0.0) || !(encoder.weight_decay >= 0.0) ||
      encoder.epochs < 1 || encoder.batch < 1 || !(encoder.margin >= 0.0) || !(encoder.triplet_weight >= 0.0) ||
      encoder.visual_clusters < 2)
    throw ValidationError("config: invalid encoder parameters");
  if (cost_weights.size() != static_cast<std::size_t>(clustering.k))
    throw ValidationError("config: cost.weights needs one entry per cluster");
  for (double w : cost_weights)
    if (!(w > 0.0)) throw ValidationError("config: cost.weights must be positive");
  train.validate();
  grid.spec.validate();
  if (grid.patch < 2) throw ValidationError("config: grid.patch must be >= 2");
  if (library.count < 1 || !(library.max_curvature >= 0.0) || !(library.arc_length > 0.0) || !(library.ds > 0.0))
    throw ValidationError("config: invalid planner library");
  if (!(scoring.unknown_cost >= 0.0) || !(scoring.goal_weight >= 0.0))
    throw ValidationError("config: planner costs must be >= 0");
  pmi.validate();
  if (!(sim.speed > 0.0) || !(sim.state_rate > 0.0) || !(sim.image_rate > 0.0) || sim.image_rate > sim.state_rate)
    throw ValidationError("config: invalid sim rates");
  sim.rig.camera.validate();
  if (!(sim.rig.height > 0.0)) throw ValidationError("config: sim.camera_height must be positive");
  const int half = sim.rig.camera.height - sim.rig.camera.height / 2;
  if (footprints.patch_w > sim.rig.camera.width || footprints.patch_h > sim.rig.camera.height || grid.patch > half)
    throw ValidationError("config: patch sizes exceed the camera image");
}

nlohmann::json to_json(const PipelineConfig& c) {
  const auto& cam = c.sim.rig.camera;
  nlohmann::json train = learning::to_json(c.train);
  train.erase("seed");
  return {
      {"seed", c.seed},
      {"signals", {{"window", c.footprints.window}, {"stride", c.footprints.stride}, {"hann", c.footprints.hann}}},
      {"footprints",
       {{"theta", c.footprints.theta},
        {"m", c.footprints.m},
        {"patch_w", c.footprints.patch_w},
        {"patch_h", c.footprints.patch_h},
        {"horizon_s", c.footprints.horizon_s},
        {"bev", c.footprints.bev},
        {"bev_height", c.footprints.bev_height},
        {"bev_ahead", c.footprints.bev_ahead}}},
      {"clustering",
       {{"k", c.clustering.k},
        {"pca_dims", c.clustering.pca_dims},
        {"restarts", c.clustering.restarts},
        {"max_iter", c.clustering.max_iter},
        {"tol", c.clustering.tol}}},
      {"encoder",
       {{"hidden", c.encoder.hidden},
        {"embedding", c.encoder.embedding},
        {"lr", c.encoder.lr},
        {"weight_decay", c.encoder.weight_decay},
        {"epochs", c.encoder.epochs},
        {"batch", c.encoder.batch},
        {"margin", c.encoder.margin},
        {"triplet_weight", c.encoder.triplet_weight},
        {"visual_clusters", c.encoder.visual_clusters}}},
      {"cost", {{"weights", c.cost_weights}}},
      {"train", train},
      {"grid",
       {{"origin", {c.grid.spec.origin.x(), c.grid.spec.origin.y()}},
        {"resolution", c.grid.spec.resolution},
        {"width", c.grid.spec.width},
        {"height", c.grid.spec.height},
        {"patch", c.grid.patch},
        {"splat", splat_name(c.grid.splat)}}},
      {"planner",
       {{"count", c.library.count},
        {"max_curvature", c.library.max_curvature},
        {"arc_length", c.library.arc_length},
        {"ds", c.library.ds},
        {"unknown_cost", c.scoring.unknown_cost},
        {"goal_weight", c.scoring.goal_weight}}},
      {"pmi", {{"w_a", c.pmi.w_a}, {"w_j", c.pmi.w_j}, {"w_aj", c.pmi.w_aj}}},
      {"sim",
       {{"speed", c.sim.speed},
        {"state_rate", c.sim.state_rate},
        {"image_rate", c.sim.image_rate},
        {"camera_height", c.sim.rig.height},
        {"camera_pitch", c.sim.rig.pitch},
        {"camera",
         {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx}, {"cy", cam.cy}, {"width", cam.width}, {"height", cam.height}}}}}};
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  Section root(j, "config");
  root.get("seed", c.seed);

  if (root.has("signals")) {
    Section s(root.at("signals"), "signals");
    s.get("window", c.footprints.window).get("stride", c.footprints.stride).get("hann", c.footprints.hann);
    s.finish();
  }
  if (root.has("footprints")) {
    Section s(root.at("footprints"), "footprints");
    auto& f = c.footprints;
    s.get("theta", f.theta).get("m", f.m).get("patch_w", f.patch_w).get("patch_h", f.patch_h);
    s.get("horizon_s", f.horizon_s).get("bev", f.bev).get("bev_height", f.bev_height).get("bev_ahead", f.bev_ahead);
    s.finish();
  }
  if (root.has("clustering")) {
    Section s(root.at("clustering"), "clustering");
    auto& k = c.clustering;
    s.get("k", k.k).get("pca_dims", k.pca_dims).get("restarts", k.restarts).get("max_iter", k.max_iter).get("tol", k.tol);
    s.finish();
  }
  if (root.has("encoder")) {
    Section s(root.at("encoder"), "encoder");
    auto& e = c.encoder;
    s.get("hidden", e.hidden).get("embedding", e.embedding).get("lr", e.lr).get("weight_decay", e.weight_decay);
    s.get("epochs", e.epochs).get("batch", e.batch).get("margin", e.margin).get("triplet_weight", e.triplet_weight);
    s.get("visual_clusters", e.visual_clusters);
    s.finish();
  }
  if (root.has("cost")) {
    Section s(root.at("cost"), "cost");
    s.get("weights", c.cost_weights);
    s.finish();
  } else if (c.clustering.k != 3) {
    c.cost_weights.clear();
    for (int i = 0; i < c.clustering.k; ++i) c.cost_weights.push_back(static_cast<double>(1 << std::min(i, 30)));
  }
  if (root.has("train")) {
    Section s(root.at("train"), "train");
    auto& t = c.train;
    s.get("lr", t.lr).get("weight_decay", t.weight_decay).get("epochs", t.epochs).get("batch", t.batch);
    s.get("beta_early", t.beta_early).get("beta_late", t.beta_late).get("beta_switch_epoch", t.beta_switch_epoch);
    s.get("cost_decoder_start_epoch", t.cost_decoder_start_epoch).get("hidden", t.hidden).get("latent", t.latent);
    s.finish();
  }
  if (root.has("grid")) {
    Section s(root.at("grid"), "grid");
    std::vector<double> origin{c.grid.spec.origin.x(), c.grid.spec.origin.y()};
    std::string splat = splat_name(c.grid.splat);
    s.get("origin", origin).get("resolution", c.grid.spec.resolution).get("width", c.grid.spec.width);
    s.get("height", c.grid.spec.height).get("patch", c.grid.patch).get("splat", splat);
    s.finish();
    if (origin.size() != 2) throw ValidationError("config: grid.origin needs two values");
    c.grid.spec.origin = {origin[0], origin[1]};
    if (splat == "center")
      c.grid.splat = planning::SplatMode::kCenter;
    else if (splat == "footprint")
      c.grid.splat = planning::SplatMode::kFootprint;
    else
      throw ValidationError("config: grid.splat must be 'center' or 'footprint'");
  }
  if (root.has("planner")) {
    Section s(root.at("planner"), "planner");
    s.get("count", c.library.count).get("max_curvature", c.library.max_curvature);
    s.get("arc_length", c.library.arc_length).get("ds", c.library.ds);
    s.get("unknown_cost", c.scoring.unknown_cost).get("goal_weight", c.scoring.goal_weight);
    s.finish();
  }
  if (root.has("pmi")) {
    Section s(root.at("pmi"), "pmi");
    s.get("w_a", c.pmi.w_a).get("w_j", c.pmi.w_j).get("w_aj", c.pmi.w_aj);
    s.finish();
  }
  if (root.has("sim")) {
    Section s(root.at("sim"), "sim");
    s.get("speed", c.sim.speed).get("state_rate", c.sim.state_rate).get("image_rate", c.sim.image_rate);
    s.get("camera_height", c.sim.rig.height).get("camera_pitch", c.sim.rig.pitch);
    if (s.has("camera")) {
      Section cs(s.at("camera"), "sim.camera");
      auto& cam = c.sim.rig.camera;
      cs.get("fx", cam.fx).get("fy", cam.fy).get("cx", cam.cx).get("cy", cam.cy);
      cs.get("width", cam.width).get("height", cam.height);
      cs.finish();
    }
    s.finish();
  }
  root.finish();

  c.encoder.seed = c.encoder_seed();
  c.train.seed = c.train_seed();
  c.validate();
  return c;
}

PipelineConfig read_config(const std::filesystem::path& path) {
  try {
    return config_from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
}

}  // namespace rca::pipeline
