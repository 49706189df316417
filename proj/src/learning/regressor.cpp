#include "rca/learning/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

namespace rca::learning {

namespace {

nn::Matrix feature_matrix(std::span<const TrainSample> samples) {
  nn::Matrix x(static_cast<int>(features::kTextureDim), static_cast<int>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t k = 0; k < features::kTextureDim; ++k)
      x(static_cast<int>(k), static_cast<int>(i)) = samples[i].feature.vector[k];
  return x;
}

struct Forward {
  nn::Matrix x, h1, z, spectrum, cost;
};

Forward run_forward(const RegressorModel& m, const nn::Matrix& raw) {
  Forward f;
  f.x = m.input.apply(raw);
  f.h1 = nn::tanh(m.enc1.forward(f.x));
  f.z = nn::tanh(m.enc2.forward(f.h1));
  f.spectrum = m.spectrum_head.forward(f.z);
  f.cost = m.cost_head.forward(f.z);
  return f;
}

void check_sample(const RegressorModel& m, const TrainSample& s) {
  if (static_cast<int>(s.spectrum.bins() * signals::kAxes) != m.spectrum_dim())
    throw ValidationError("regressor: spectrum length does not match the model");
  for (const auto& axis : s.spectrum.per_axis)
    if (axis.size() != s.spectrum.bins()) throw ValidationError("regressor: ragged spectrum");
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("train: lr must be positive");
  if (!(weight_decay >= 0.0)) throw ValidationError("train: weight_decay must be >= 0");
  if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
  if (batch < 1) throw ValidationError("train: batch must be >= 1");
  if (!(beta_early >= 0.0 && beta_early <= 1.0) || !(beta_late >= 0.0 && beta_late <= 1.0))
    throw ValidationError("train: beta must lie in [0, 1]");
  if (beta_switch_epoch < 1 || cost_decoder_start_epoch < 1)
    throw ValidationError("train: schedule epochs must be >= 1");
  if (hidden < 1 || latent < 1) throw ValidationError("train: layer widths must be >= 1");
}

std::size_t RegressorModel::parameter_count() const {
  return enc1.parameter_count() + enc2.parameter_count() + spectrum_head.parameter_count() +
         cost_head.parameter_count();
}

bool RegressorModel::all_finite() const {
  for (const nn::Dense* l : {&enc1, &enc2, &spectrum_head, &cost_head})
    if (!l->W.allFinite() || !l->b.allFinite()) return false;
  return input.mean.allFinite() && input.scale.allFinite();
}

RegressorModel zero_regressor(int spectrum_dim, const TrainConfig& config) {
  if (spectrum_dim < 1) throw ValidationError("regressor: spectrum_dim must be >= 1");
  RegressorModel m;
  m.config = config;
  m.input = nn::Standardizer::identity(static_cast<int>(features::kTextureDim));
  m.enc1 = nn::Dense(static_cast<int>(features::kTextureDim), config.hidden);
  m.enc2 = nn::Dense(config.hidden, config.latent);
  m.spectrum_head = nn::Dense(config.latent, spectrum_dim);
  m.cost_head = nn::Dense(config.latent, 1);
  return m;
}

RegressorModel make_regressor(int spectrum_dim, const TrainConfig& config) {
  config.validate();
  RegressorModel m = zero_regressor(spectrum_dim, config);
  std::mt19937_64 rng(config.seed);
  m.enc1.init_xavier(rng);
  m.enc2.init_xavier(rng);
  m.spectrum_head.init_xavier(rng);
  m.cost_head.init_xavier(rng);
  return m;
}

nn::Matrix forward_costs(const RegressorModel& model, const nn::Matrix& features) {
  if (features.rows() != model.feature_dim())
    throw ValidationError("predict: feature dimension does not match the model");
  return run_forward(model, features).cost;
}

Prediction predict(const RegressorModel& model, const features::TextureFeature& feature) {
  if (model.feature_dim() != static_cast<int>(features::kTextureDim))
    throw ValidationError("predict: feature dimension does not match the model");
  nn::Matrix x(static_cast<int>(features::kTextureDim), 1);
  for (std::size_t k = 0; k < features::kTextureDim; ++k) x(static_cast<int>(k), 0) = feature.vector[k];
  const Forward f = run_forward(model, x);
  Prediction p;
  p.spectrum.assign(f.spectrum.data(), f.spectrum.data() + f.spectrum.size());
  p.cost = std::clamp(f.cost(0, 0), 0.0, 1.0);
  return p;
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1_derivative(double x) {
  if (std::abs(x) < 1.0) return x;
  return x > 0.0 ? 1.0 : -1.0;
}

LossTerms loss(std::span<const double> pred_spectrum, std::span<const double> true_spectrum,
               double pred_cost, double true_cost, double beta) {
  if (pred_spectrum.size() != true_spectrum.size())
    throw ValidationError("loss: spectrum lengths differ");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("loss: beta must lie in [0, 1]");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::isfinite(pred_cost) || !std::isfinite(true_cost) ||
      !std::all_of(pred_spectrum.begin(), pred_spectrum.end(), finite) ||
      !std::all_of(true_spectrum.begin(), true_spectrum.end(), finite))
    throw ValidationError("loss: non-finite input");
  LossTerms t;
  for (std::size_t i = 0; i < pred_spectrum.size(); ++i) {
    const double r = pred_spectrum[i] - true_spectrum[i];
    t.l2 += r * r;
  }
  t.smooth_l1 = smooth_l1(pred_cost - true_cost);
  t.total = beta * t.l2 + (1.0 - beta) * t.smooth_l1;
  return t;
}

LossTerms batch_loss(const RegressorModel& model, std::span<const TrainSample> batch, double beta,
                     RegressorGradients* grads) {
  if (batch.empty()) throw ValidationError("batch_loss: empty batch");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("batch_loss: beta must lie in [0, 1]");
  for (const auto& s : batch) check_sample(model, s);

  const int n = static_cast<int>(batch.size());
  const Forward f = run_forward(model, feature_matrix(batch));
  const int d = model.spectrum_dim();

  nn::Matrix target(d, n);
  for (int i = 0; i < n; ++i) {
    const auto flat = batch[static_cast<std::size_t>(i)].spectrum.concatenated();
    for (int k = 0; k < d; ++k) target(k, i) = flat[static_cast<std::size_t>(k)];
  }
  const nn::Matrix residual = f.spectrum - target;

  LossTerms mean;
  nn::Matrix dcost(1, n);
  for (int i = 0; i < n; ++i) {
    const double l2 = residual.col(i).squaredNorm();
    const double x = f.cost(0, i) - batch[static_cast<std::size_t>(i)].cost;
    const double sl1 = smooth_l1(x);
    mean.l2 += l2;
    mean.smooth_l1 += sl1;
    mean.total += beta * l2 + (1.0 - beta) * sl1;
    dcost(0, i) = (1.0 - beta) * smooth_l1_derivative(x) / n;
  }
  mean.l2 /= n;
  mean.smooth_l1 /= n;
  mean.total /= n;

  if (grads != nullptr) {
    grads->enc1.zero();
    grads->enc2.zero();
    grads->spectrum_head.zero();
    grads->cost_head.zero();
    const nn::Matrix dspec = (2.0 * beta / n) * residual;
    nn::Matrix dz = nn::backward(model.spectrum_head, f.z, dspec, grads->spectrum_head);
    dz += nn::backward(model.cost_head, f.z, dcost, grads->cost_head);
    const nn::Matrix dh1 = nn::backward(model.enc2, f.h1, nn::tanh_backward(f.z, dz), grads->enc2);
    nn::backward(model.enc1, f.x, nn::tanh_backward(f.h1, dh1), grads->enc1);
  }
  return mean;
}

TrainResult train(std::span<const TrainSample> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw ValidationError("train: empty dataset");
  config.validate();
  const int spectrum_dim = static_cast<int>(dataset.front().spectrum.bins() * signals::kAxes);
  RegressorModel model = make_regressor(spectrum_dim, config);
  model.input = nn::Standardizer::fit(feature_matrix(dataset), 1e-9);
  return train_from(std::move(model), dataset, 1, config.epochs);
}

TrainResult train_from(RegressorModel model, std::span<const TrainSample> dataset, int first_epoch,
                       int last_epoch) {
  if (dataset.empty()) throw ValidationError("train: empty dataset");
  const TrainConfig& config = model.config;
  config.validate();
  for (const auto& s : dataset) check_sample(model, s);

  nn::Adam opt1(model.enc1), opt2(model.enc2), opt_spec(model.spectrum_head), opt_cost(model.cost_head);
  nn::AdamConfig adam;
  adam.lr = config.lr;
  adam.weight_decay = config.weight_decay;

  // Seed offset keeps shuffling independent from weight initialisation.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainSample> batch;
  RegressorGradients grads(model);

  TrainResult result;
  for (int epoch = first_epoch; epoch <= last_epoch; ++epoch) {
    const double beta = config.beta(epoch);
    const bool cost_active = epoch >= config.cost_decoder_start_epoch;
    std::shuffle(order.begin(), order.end(), rng);

    EpochLog row;
    row.epoch = epoch;
    row.beta = beta;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(dataset[order[i]]);
      const LossTerms t = batch_loss(model, batch, beta, &grads);
      if (!std::isfinite(t.total))
        throw NumericError("train: loss became non-finite at epoch " + std::to_string(epoch));
      const double w = static_cast<double>(end - start);
      row.loss += t.total * w;
      row.l2 += t.l2 * w;
      row.smooth_l1 += t.smooth_l1 * w;

      opt1.step(model.enc1, grads.enc1, adam);
      opt2.step(model.enc2, grads.enc2, adam);
      opt_spec.step(model.spectrum_head, grads.spectrum_head, adam);
      if (cost_active) opt_cost.step(model.cost_head, grads.cost_head, adam);
    }
    const double n = static_cast<double>(dataset.size());
    row.loss /= n;
    row.l2 /= n;
    row.smooth_l1 /= n;
    result.log.push_back(row);
    if (!model.all_finite())
      throw NumericError("train: parameters became non-finite at epoch " + std::to_string(epoch));
  }
  result.model = std::move(model);
  return result;
}

double spectrum_mse(const RegressorModel& model, std::span<const TrainSample> eval_set) {
  if (eval_set.empty()) throw ValidationError("spectrum_mse: empty evaluation set");
  for (const auto& s : eval_set) check_sample(model, s);
  const Forward f = run_forward(model, feature_matrix(eval_set));
  const std::size_t bins = eval_set.front().spectrum.bins();
  double total = 0.0;
  for (std::size_t i = 0; i < eval_set.size(); ++i) {
    double sample = 0.0;
    for (std::size_t a = 0; a < signals::kAxes; ++a) {
      double axis = 0.0;
      for (std::size_t b = 0; b < bins; ++b) {
        const double r = f.spectrum(static_cast<int>(a * bins + b), static_cast<int>(i)) -
                         eval_set[i].spectrum.per_axis[a][b];
        axis += r * r;
      }
      sample += axis / static_cast<double>(bins);
    }
    total += sample / static_cast<double>(signals::kAxes);
  }
  return total / static_cast<double>(eval_set.size());
}

std::string format_train_log(std::span<const EpochLog> log) {
  std::ostringstream out;
  out << "epoch,beta,loss,l2_term,smooth_l1_term\n";
  for (const auto& r : log)
    out << r.epoch << ',' << format_double(r.beta) << ',' << format_double(r.loss) << ','
        << format_double(r.l2) << ',' << format_double(r.smooth_l1) << '\n';
  return out.str();
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"epochs", c.epochs},
          {"batch", c.batch},
          {"beta_early", c.beta_early},
          {"beta_late", c.beta_late},
          {"beta_switch_epoch", c.beta_switch_epoch},
          {"cost_decoder_start_epoch", c.cost_decoder_start_epoch},
          {"hidden", c.hidden},
          {"latent", c.latent},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  static const char* known[] = {"lr",     "weight_decay", "epochs",    "batch",
                                "beta_early", "beta_late", "beta_switch_epoch",
                                "cost_decoder_start_epoch", "hidden", "latent", "seed"};
  if (!j.is_object()) throw ValidationError("train config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known))
      throw ValidationError("train config: unknown key '" + key + "'");
  TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.epochs = j.value("epochs", c.epochs);
  c.batch = j.value("batch", c.batch);
  c.beta_early = j.value("beta_early", c.beta_early);
  c.beta_late = j.value("beta_late", c.beta_late);
  c.beta_switch_epoch = j.value("beta_switch_epoch", c.beta_switch_epoch);
  c.cost_decoder_start_epoch = j.value("cost_decoder_start_epoch", c.cost_decoder_start_epoch);
  c.hidden = j.value("hidden", c.hidden);
  c.latent = j.value("latent", c.latent);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json to_json(const RegressorModel& m) {
  return {{"format", "rca-regressor/1"},
          {"seed", m.config.seed},
          {"config", to_json(m.config)},
          {"input", nn::to_json(m.input)},
          {"encoder", {nn::to_json(m.enc1), nn::to_json(m.enc2)}},
          {"spectrum_decoder", nn::to_json(m.spectrum_head)},
          {"cost_decoder", nn::to_json(m.cost_head)}};
}

RegressorModel regressor_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "rca-regressor/1")
      throw ValidationError("model: unsupported format");
    RegressorModel m;
    m.config = train_config_from_json(j.at("config"));
    m.input = nn::standardizer_from_json(j.at("input"));
    const auto& enc = j.at("encoder");
    if (!enc.is_array() || enc.size() != 2) throw ValidationError("model: encoder must have two layers");
    m.enc1 = nn::dense_from_json(enc[0]);
    m.enc2 = nn::dense_from_json(enc[1]);
    m.spectrum_head = nn::dense_from_json(j.at("spectrum_decoder"));
    m.cost_head = nn::dense_from_json(j.at("cost_decoder"));
    if (m.enc1.in() != static_cast<int>(features::kTextureDim) || m.enc2.in() != m.enc1.out() ||
        m.spectrum_head.in() != m.enc2.out() || m.cost_head.in() != m.enc2.out() ||
        m.cost_head.out() != 1 || m.input.mean.size() != m.enc1.in() ||
        m.input.scale.size() != m.enc1.in())
      throw ValidationError("model: inconsistent layer shapes");
    if (!m.all_finite()) throw ValidationError("model: non-finite parameters");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model: malformed JSON: ") + e.what());
  }
}

}  // namespace rca::learning
