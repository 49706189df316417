#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "rca/features/spectrum_encoder.hpp"

namespace rca::features {

struct KMeansOptions {
  std::uint64_t seed = 0;
  int restarts = 5;
  int max_iter = 100;
  double tol = 1e-8;  // stop when every centroid moves less than this
};

struct KMeansResult {
  Eigen::MatrixXd centroids;  // k x dim
  std::vector<int> labels;
  double inertia = 0.0;
};

// k-means++ seeding and Lloyd iterations on the rows of `points`; the best of
// `restarts` runs by inertia is kept. Nearest-centroid ties go to the lowest
// index. Throws ValidationError when fewer than k distinct points exist.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options);

int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::VectorXd& x);
std::size_t count_distinct_rows(const Eigen::MatrixXd& points);

struct Pca {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;  // dims x input_dim, rows are components by decreasing variance

  Eigen::MatrixXd project(const Eigen::MatrixXd& rows) const;
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
};

// Components are sign-normalized so their largest-magnitude entry is positive.
Pca fit_pca(const Eigen::MatrixXd& rows, int dims);

struct ClusterModel {
  int k = 0;
  std::uint64_t seed = 0;
  Pca pca;
  Eigen::MatrixXd centroids;  // k x pca dims
  std::vector<int> assignments;
  double inertia = 0.0;

  int assign(const SpectrumEmbedding& embedding) const;
};

// PCA to min(pca_dims, embedding dim) then k-means.
ClusterModel cluster_states(std::span<const SpectrumEmbedding> embeddings, int k, int pca_dims,
                            const KMeansOptions& options = {});

nlohmann::json to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const nlohmann::json& j);

}  // namespace rca::features
