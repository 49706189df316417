#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "rca/features/texture.hpp"
#include "rca/learning/nn.hpp"
#include "rca/signals/spectrum.hpp"

namespace rca::features {

struct SpectrumEmbedding {
  std::vector<double> vector;
};

struct EncoderConfig {
  int hidden = 64;
  int embedding = 32;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  int epochs = 120;
  int batch = 64;
  double margin = 0.4;           // triplet margin (alpha)
  double triplet_weight = 20.0;  // gamma
  int visual_clusters = 3;       // k-means on visual features, used to pick negatives
  std::uint64_t seed = 0;
};

// spectrum -> hidden -> embedding (tanh, tanh) with a mirrored decoder
// embedding -> hidden -> spectrum (tanh, linear). Inputs are standardized
// per bin; the decoder reconstructs the standardized spectrum.
struct SpectrumEncoder {
  nn::Standardizer input;
  nn::Dense enc1, enc2, dec1, dec2;

  int input_dim() const { return enc1.in(); }
  int embedding_dim() const { return enc2.out(); }

  SpectrumEmbedding embed(const signals::AmplitudeSpectrum& spectrum) const;
  std::vector<SpectrumEmbedding> embed(std::span<const signals::AmplitudeSpectrum> spectra) const;
};

struct EncoderEpochLog {
  int epoch = 0;
  double loss = 0.0;
  double reconstruction = 0.0;
  double triplet = 0.0;
};

struct EncoderTrainResult {
  SpectrumEncoder encoder;
  std::vector<EncoderEpochLog> log;
  std::vector<int> visual_clusters;
};

// Reconstruction squared error + gamma * max(0, d(a,p) - d(a,n) + alpha).
// The positive is the sample with the nearest visual feature; the negative is
// drawn from a different visual cluster. Anchors without such a negative, or
// whose negative has an identical spectrum, contribute no triplet term.
EncoderTrainResult train_spectrum_encoder(std::span<const signals::AmplitudeSpectrum> spectra,
                                          std::span<const TextureFeature> visual_features,
                                          const EncoderConfig& config);

nlohmann::json to_json(const SpectrumEncoder& encoder);
SpectrumEncoder spectrum_encoder_from_json(const nlohmann::json& j);

}  // namespace rca::features
