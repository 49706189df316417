#include "rca/features/spectrum_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "rca/common/error.hpp"
#include "rca/features/clustering.hpp"

namespace rca::features {

using nn::Matrix;
using nn::Vector;

namespace {

Matrix spectra_matrix(std::span<const signals::AmplitudeSpectrum> spectra) {
  const auto dim = static_cast<Eigen::Index>(spectra.front().concatenated().size());
  Matrix x(dim, static_cast<Eigen::Index>(spectra.size()));
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const auto v = spectra[i].concatenated();
    if (static_cast<Eigen::Index>(v.size()) != dim) {
      throw ValidationError("spectrum encoder: spectra differ in length");
    }
    x.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Vector>(v.data(), dim);
  }
  return x;
}

Matrix encode(const SpectrumEncoder& e, const Matrix& x_std, Matrix* hidden) {
  Matrix h = nn::tanh(e.enc1.forward(x_std));
  Matrix z = nn::tanh(e.enc2.forward(h));
  if (hidden) *hidden = std::move(h);
  return z;
}

struct Grads {
  nn::DenseGrad enc1, enc2, dec1, dec2;
  explicit Grads(const SpectrumEncoder& e) : enc1(e.enc1), enc2(e.enc2), dec1(e.dec1), dec2(e.dec2) {}
  void zero() {
    enc1.zero();
    enc2.zero();
    dec1.zero();
    dec2.zero();
  }
};

void encoder_backward(const SpectrumEncoder& e, const Matrix& x, const Matrix& h, const Matrix& z,
                      const Matrix& dz, Grads& g) {
  const Matrix dpre2 = nn::tanh_backward(z, dz);
  const Matrix dh = nn::backward(e.enc2, h, dpre2, g.enc2);
  const Matrix dpre1 = nn::tanh_backward(h, dh);
  nn::backward(e.enc1, x, dpre1, g.enc1);
}

std::vector<std::size_t> nearest_visual_neighbors(const Matrix& vis) {
  const auto n = vis.cols();
  std::vector<std::size_t> nearest(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = i;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (vis.col(i) - vis.col(j)).squaredNorm();
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    nearest[static_cast<std::size_t>(i)] = static_cast<std::size_t>(arg);
  }
  return nearest;
}

}  // namespace

SpectrumEmbedding SpectrumEncoder::embed(const signals::AmplitudeSpectrum& spectrum) const {
  const auto v = spectrum.concatenated();
  if (static_cast<int>(v.size()) != input_dim()) {
    throw ValidationError("spectrum encoder: expected " + std::to_string(input_dim()) +
                          " bins, got " + std::to_string(v.size()));
  }
  Matrix x = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  const Matrix z = encode(*this, input.apply(x), nullptr);
  return {std::vector<double>(z.data(), z.data() + z.size())};
}

std::vector<SpectrumEmbedding> SpectrumEncoder::embed(
    std::span<const signals::AmplitudeSpectrum> spectra) const {
  std::vector<SpectrumEmbedding> out;
  out.reserve(spectra.size());
  for (const auto& s : spectra) out.push_back(embed(s));
  return out;
}

EncoderTrainResult train_spectrum_encoder(std::span<const signals::AmplitudeSpectrum> spectra,
                                          std::span<const TextureFeature> visual_features,
                                          const EncoderConfig& config) {
  if (spectra.size() != visual_features.size()) {
    throw ValidationError("spectrum encoder: spectra and visual features are not aligned");
  }
  if (spectra.size() < 3) throw ValidationError("spectrum encoder: need at least 3 samples");
  if (config.hidden < 1 || config.embedding < 1 || config.batch < 1 || config.epochs < 0) {
    throw ValidationError("spectrum encoder: invalid configuration");
  }

  const Matrix raw = spectra_matrix(spectra);
  if (!raw.allFinite()) throw ValidationError("spectrum encoder: non-finite spectra");
  const auto n = static_cast<std::size_t>(raw.cols());
  const int dim = static_cast<int>(raw.rows());

  std::mt19937_64 rng(config.seed);
  EncoderTrainResult result;
  SpectrumEncoder& e = result.encoder;
  e.input = nn::Standardizer::fit(raw);
  e.enc1 = nn::Dense(dim, config.hidden);
  e.enc2 = nn::Dense(config.hidden, config.embedding);
  e.dec1 = nn::Dense(config.embedding, config.hidden);
  e.dec2 = nn::Dense(config.hidden, dim);
  for (auto* layer : {&e.enc1, &e.enc2, &e.dec1, &e.dec2}) layer->init_xavier(rng);
  const Matrix x_all = e.input.apply(raw);

  // Visual structure: nearest neighbor positives, cluster-based negatives.
  Matrix vis(static_cast<Eigen::Index>(kTextureDim), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < kTextureDim; ++d) {
      vis(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = visual_features[i].vector[d];
    }
  }
  vis = nn::Standardizer::fit(vis).apply(vis);
  const auto positive = nearest_visual_neighbors(vis);
  std::vector<int> vis_cluster(n, 0);
  const Matrix vis_rows = vis.transpose();
  if (config.visual_clusters >= 2 &&
      count_distinct_rows(vis_rows) >= static_cast<std::size_t>(config.visual_clusters)) {
    KMeansOptions opt;
    opt.seed = rng();
    vis_cluster = kmeans(vis_rows, config.visual_clusters, opt).labels;
  }
  result.visual_clusters = vis_cluster;
  const int n_vis = *std::max_element(vis_cluster.begin(), vis_cluster.end()) + 1;
  std::vector<std::vector<std::size_t>> outside(static_cast<std::size_t>(n_vis));
  for (int c = 0; c < n_vis; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      if (vis_cluster[i] != c) outside[static_cast<std::size_t>(c)].push_back(i);
    }
  }

  nn::AdamConfig adam_cfg{config.lr, 0.9, 0.999, 1e-8, config.weight_decay};
  nn::Adam a1(e.enc1), a2(e.enc2), a3(e.dec1), a4(e.dec2);
  Grads g(e);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<long> negative(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& pool = outside[static_cast<std::size_t>(vis_cluster[i])];
      if (pool.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const std::size_t j = pool[pick(rng)];
      if (x_all.col(static_cast<Eigen::Index>(j)) != x_all.col(static_cast<Eigen::Index>(i))) {
        negative[i] = static_cast<long>(j);
      }
    }

    double sum_rec = 0.0, sum_tri = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const auto b = static_cast<Eigen::Index>(end - start);
      Matrix xa(dim, b), xp(dim, b), xn(dim, b);
      std::vector<char> has_neg(static_cast<std::size_t>(b), 0);
      for (Eigen::Index k = 0; k < b; ++k) {
        const std::size_t i = order[start + static_cast<std::size_t>(k)];
        xa.col(k) = x_all.col(static_cast<Eigen::Index>(i));
        xp.col(k) = x_all.col(static_cast<Eigen::Index>(positive[i]));
        if (negative[i] >= 0) {
          xn.col(k) = x_all.col(negative[i]);
          has_neg[static_cast<std::size_t>(k)] = 1;
        } else {
          xn.col(k) = xa.col(k);
        }
      }

      Matrix ha, hp, hn;
      const Matrix za = encode(e, xa, &ha);
      const Matrix zp = encode(e, xp, &hp);
      const Matrix zn = encode(e, xn, &hn);
      const Matrix g1 = nn::tanh(e.dec1.forward(za));
      const Matrix recon = e.dec2.forward(g1);
      const Matrix resid = recon - xa;

      const double inv_b = 1.0 / static_cast<double>(b);
      Matrix dza = Matrix::Zero(za.rows(), b), dzp = Matrix::Zero(za.rows(), b),
             dzn = Matrix::Zero(za.rows(), b);
      for (Eigen::Index k = 0; k < b; ++k) {
        sum_rec += resid.col(k).squaredNorm();
        if (!has_neg[static_cast<std::size_t>(k)]) continue;
        const Vector ap = za.col(k) - zp.col(k);
        const Vector an = za.col(k) - zn.col(k);
        const double d_ap = ap.norm(), d_an = an.norm();
        const double hinge = d_ap - d_an + config.margin;
        if (hinge <= 0.0) continue;
        sum_tri += hinge;
        const double w = config.triplet_weight * inv_b;
        if (d_ap > 1e-12) {
          dza.col(k) += w * ap / d_ap;
          dzp.col(k) -= w * ap / d_ap;
        }
        if (d_an > 1e-12) {
          dza.col(k) -= w * an / d_an;
          dzn.col(k) += w * an / d_an;
        }
      }

      g.zero();
      const Matrix drecon = 2.0 * inv_b * resid;
      const Matrix dg1 = nn::backward(e.dec2, g1, drecon, g.dec2);
      dza += nn::backward(e.dec1, za, nn::tanh_backward(g1, dg1), g.dec1);
      encoder_backward(e, xa, ha, za, dza, g);
      encoder_backward(e, xp, hp, zp, dzp, g);
      encoder_backward(e, xn, hn, zn, dzn, g);

      a1.step(e.enc1, g.enc1, adam_cfg);
      a2.step(e.enc2, g.enc2, adam_cfg);
      a3.step(e.dec1, g.dec1, adam_cfg);
      a4.step(e.dec2, g.dec2, adam_cfg);
    }

    EncoderEpochLog entry;
    entry.epoch = epoch;
    entry.reconstruction = sum_rec / static_cast<double>(n);
    entry.triplet = sum_tri / static_cast<double>(n);
    entry.loss = entry.reconstruction + config.triplet_weight * entry.triplet;
    if (!std::isfinite(entry.loss)) {
      throw NumericError("spectrum encoder: loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.log.push_back(entry);
  }
  return result;
}

nlohmann::json to_json(const SpectrumEncoder& e) {
  return {{"input", nn::to_json(e.input)},
          {"enc1", nn::to_json(e.enc1)},
          {"enc2", nn::to_json(e.enc2)},
          {"dec1", nn::to_json(e.dec1)},
          {"dec2", nn::to_json(e.dec2)}};
}

SpectrumEncoder spectrum_encoder_from_json(const nlohmann::json& j) {
  try {
    SpectrumEncoder e;
    e.input = nn::standardizer_from_json(j.at("input"));
    e.enc1 = nn::dense_from_json(j.at("enc1"));
    e.enc2 = nn::dense_from_json(j.at("enc2"));
    e.dec1 = nn::dense_from_json(j.at("dec1"));
    e.dec2 = nn::dense_from_json(j.at("dec2"));
    if (e.enc1.out() != e.enc2.in() || e.enc2.out() != e.dec1.in() || e.dec1.out() != e.dec2.in() ||
        e.dec2.out() != e.enc1.in() || e.input.mean.size() != e.enc1.in()) {
      throw ValidationError("spectrum encoder: inconsistent layer shapes");
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("spectrum encoder: ") + ex.what());
  }
}

}  // namespace rca::features
