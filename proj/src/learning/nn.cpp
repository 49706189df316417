#include "rca/learning/nn.hpp"

#include <cmath>

#include "rca/common/error.hpp"

namespace rca::nn {

void Dense::init_xavier(std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in() + out()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index c = 0; c < W.cols(); ++c) {
    for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, c) = dist(rng);
  }
  b.setZero();
}

Matrix Dense::forward(const Matrix& x) const {
  Matrix y = W * x;
  y.colwise() += b;
  return y;
}

Matrix backward(const Dense& layer, const Matrix& x, const Matrix& dy, DenseGrad& grad) {
  grad.W.noalias() += dy * x.transpose();
  grad.b += dy.rowwise().sum();
  return layer.W.transpose() * dy;
}

Matrix tanh(const Matrix& x) { return x.array().tanh().matrix(); }

Matrix tanh_backward(const Matrix& y, const Matrix& dy) {
  return (dy.array() * (1.0 - y.array().square())).matrix();
}

Adam::Adam(const Dense& layer)
    : mW_(Matrix::Zero(layer.W.rows(), layer.W.cols())),
      vW_(Matrix::Zero(layer.W.rows(), layer.W.cols())),
      mb_(Vector::Zero(layer.b.size())),
      vb_(Vector::Zero(layer.b.size())) {}

void Adam::step(Dense& layer, const DenseGrad& grad, const AdamConfig& c) {
  ++steps_;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(steps_));

  mW_ = c.beta1 * mW_ + (1.0 - c.beta1) * grad.W;
  vW_ = c.beta2 * vW_ + (1.0 - c.beta2) * grad.W.cwiseProduct(grad.W);
  mb_ = c.beta1 * mb_ + (1.0 - c.beta1) * grad.b;
  vb_ = c.beta2 * vb_ + (1.0 - c.beta2) * grad.b.cwiseProduct(grad.b);

  const double decay = 1.0 - c.lr * c.weight_decay;
  layer.W *= decay;
  layer.b *= decay;
  layer.W.array() -= c.lr * (mW_.array() / bc1) / ((vW_.array() / bc2).sqrt() + c.eps);
  layer.b.array() -= c.lr * (mb_.array() / bc1) / ((vb_.array() / bc2).sqrt() + c.eps);
}

Standardizer Standardizer::fit(const Matrix& x, double floor) {
  Standardizer s;
  const double n = static_cast<double>(x.cols());
  s.mean = x.rowwise().sum() / n;
  s.scale = Vector::Ones(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double var = (x.row(r).array() - s.mean(r)).square().sum() / n;
    const double sd = std::sqrt(var);
    s.scale(r) = sd > floor ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(int dim) {
  return {Vector::Zero(dim), Vector::Ones(dim)};
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.rows() != mean.size()) throw ValidationError("standardizer: dimension mismatch");
  return ((x.colwise() - mean).array().colwise() / scale.array()).matrix();
}

nlohmann::json to_json(const Dense& layer) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(layer.W.size()));
  for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.W.cols(); ++c) w.push_back(layer.W(r, c));
  }
  return {{"in", layer.in()},
          {"out", layer.out()},
          {"weights", w},
          {"bias", std::vector<double>(layer.b.data(), layer.b.data() + layer.b.size())}};
}

Dense dense_from_json(const nlohmann::json& j) {
  const int in = j.at("in").get<int>();
  const int out = j.at("out").get<int>();
  const auto w = j.at("weights").get<std::vector<double>>();
  const auto b = j.at("bias").get<std::vector<double>>();
  if (in <= 0 || out <= 0 || w.size() != static_cast<std::size_t>(in) * out ||
      b.size() != static_cast<std::size_t>(out)) {
    throw ValidationError("dense layer: shape does not match stored weights");
  }
  Dense layer(in, out);
  for (int r = 0; r < out; ++r) {
    for (int c = 0; c < in; ++c) layer.W(r, c) = w[static_cast<std::size_t>(r) * in + c];
  }
  for (int r = 0; r < out; ++r) layer.b(r) = b[static_cast<std::size_t>(r)];
  if (!layer.W.allFinite() || !layer.b.allFinite()) throw ValidationError("dense layer: non-finite");
  return layer;
}

nlohmann::json to_json(const Standardizer& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto scale = j.at("scale").get<std::vector<double>>();
  if (mean.size() != scale.size()) throw ValidationError("standardizer: size mismatch");
  Standardizer s;
  s.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.scale = Eigen::Map<const Vector>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  return s;
}

}  // namespace rca::nn
