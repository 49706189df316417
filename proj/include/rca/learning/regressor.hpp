#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rca/features/texture.hpp"
#include "rca/learning/nn.hpp"
#include "rca/signals/spectrum.hpp"

namespace rca::learning {

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 1e-5;
  int epochs = 150;
  int batch = 64;
  double beta_early = 1.0;
  double beta_late = 0.4;
  int beta_switch_epoch = 41;  // first epoch using beta_late
  int cost_decoder_start_epoch = 41;
  int hidden = 64;
  int latent = 32;
  std::uint64_t seed = 0;

  double beta(int epoch) const { return epoch < beta_switch_epoch ? beta_early : beta_late; }
  void validate() const;
};

// feature -> hidden -> latent (tanh, tanh); latent -> spectrum (linear);
// latent -> cost (linear). Features are standardized with statistics fitted
// on the training set.
struct RegressorModel {
  nn::Standardizer input;
  nn::Dense enc1, enc2, spectrum_head, cost_head;
  TrainConfig config;

  int feature_dim() const { return enc1.in(); }
  int spectrum_dim() const { return spectrum_head.out(); }
  std::size_t parameter_count() const;
  bool all_finite() const;
};

RegressorModel make_regressor(int spectrum_dim, const TrainConfig& config);
RegressorModel zero_regressor(int spectrum_dim, const TrainConfig& config = {});

struct TrainSample {
  features::TextureFeature feature;
  signals::AmplitudeSpectrum spectrum;
  double cost = 0.0;  // normalized label
};

struct Prediction {
  std::vector<double> spectrum;
  double cost = 0.0;  // clamped to [0, 1]
};

Prediction predict(const RegressorModel& model, const features::TextureFeature& feature);
// Unclamped cost head output for a batch of features (one per column).
nn::Matrix forward_costs(const RegressorModel& model, const nn::Matrix& features);

double smooth_l1(double x);
double smooth_l1_derivative(double x);

struct LossTerms {
  double total = 0.0;
  double l2 = 0.0;
  double smooth_l1 = 0.0;
};

// beta * ||pred - true||^2 + (1 - beta) * smooth_l1(pred_cost - true_cost).
LossTerms loss(std::span<const double> pred_spectrum, std::span<const double> true_spectrum,
               double pred_cost, double true_cost, double beta);

struct RegressorGradients {
  nn::DenseGrad enc1, enc2, spectrum_head, cost_head;
  explicit RegressorGradients(const RegressorModel& m)
      : enc1(m.enc1), enc2(m.enc2), spectrum_head(m.spectrum_head), cost_head(m.cost_head) {}
};

// Mean loss over the batch; when `grads` is given it receives d(mean loss)/d(params).
LossTerms batch_loss(const RegressorModel& model, std::span<const TrainSample> batch, double beta,
                     RegressorGradients* grads = nullptr);

struct EpochLog {
  int epoch = 0;
  double beta = 0.0;
  double loss = 0.0;
  double l2 = 0.0;
  double smooth_l1 = 0.0;
};

struct TrainResult {
  RegressorModel model;
  std::vector<EpochLog> log;
};

// Mini-batch Adam with decoupled weight decay. The cost head is frozen
// (no optimizer step at all) before cost_decoder_start_epoch.
TrainResult train(std::span<const TrainSample> dataset, const TrainConfig& config);

// Continues training an existing model for the epochs [first_epoch, last_epoch].
TrainResult train_from(RegressorModel model, std::span<const TrainSample> dataset, int first_epoch,
                       int last_epoch);

// (1/3) sum_d mean_bins (A - A_hat)^2, averaged over the evaluation set.
double spectrum_mse(const RegressorModel& model, std::span<const TrainSample> eval_set);

std::string format_train_log(std::span<const EpochLog> log);

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RegressorModel& model);
RegressorModel regressor_from_json(const nlohmann::json& j);

}  // namespace rca::learning
