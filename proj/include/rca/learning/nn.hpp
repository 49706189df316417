#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "json.hpp"

namespace rca::nn {

// Column-major batches: one sample per column.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dense {
  Matrix W;
  Vector b;

  Dense() = default;
  Dense(int in, int out) : W(Matrix::Zero(out, in)), b(Vector::Zero(out)) {}

  int in() const { return static_cast<int>(W.cols()); }
  int out() const { return static_cast<int>(W.rows()); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(W.size() + b.size()); }

  // Glorot-uniform weights, zero bias.
  void init_xavier(std::mt19937_64& rng);
  Matrix forward(const Matrix& x) const;
  bool operator==(const Dense& o) const { return W == o.W && b == o.b; }
};

struct DenseGrad {
  Matrix W;
  Vector b;

  explicit DenseGrad(const Dense& layer)
      : W(Matrix::Zero(layer.W.rows(), layer.W.cols())), b(Vector::Zero(layer.b.size())) {}
  void zero() {
    W.setZero();
    b.setZero();
  }
};

// y = W x + b. Accumulates parameter gradients and returns dL/dx.
Matrix backward(const Dense& layer, const Matrix& x, const Matrix& dy, DenseGrad& grad);

Matrix tanh(const Matrix& x);
// dL/dx given the activation output y = tanh(x).
Matrix tanh_backward(const Matrix& y, const Matrix& dy);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
};

// Per-layer Adam moments with their own step counter.
class Adam {
 public:
  explicit Adam(const Dense& layer);
  void step(Dense& layer, const DenseGrad& grad, const AdamConfig& config);
  long steps() const { return steps_; }

 private:
  Matrix mW_, vW_;
  Vector mb_, vb_;
  long steps_ = 0;
};

// Per-feature affine normalization (x - mean) / scale.
struct Standardizer {
  Vector mean;
  Vector scale;

  // Fits on columns of `x`; scales below `floor` are replaced by 1.
  static Standardizer fit(const Matrix& x, double floor = 1e-12);
  static Standardizer identity(int dim);
  Matrix apply(const Matrix& x) const;
};

nlohmann::json to_json(const Dense& layer);
Dense dense_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace rca::nn
