#include "rca/features/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "rca/common/error.hpp"

namespace rca::features {

namespace {

struct Run {
  Eigen::MatrixXd centroids;
  std::vector<int> labels;
  double inertia = 0.0;
};

Eigen::MatrixXd plus_plus_seed(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
  const auto n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centroids.row(0) = points.row(pick(rng));

  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = (points.row(i) - centroids.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0.0) {
          chosen = i;
          break;
        }
      }
      // Rounding at the tail: fall back to the last point with nonzero weight.
      if (!(d2(chosen) > 0.0)) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2(i) > 0.0) {
            chosen = i;
            break;
          }
        }
      }
    }
    centroids.row(c) = points.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), (points.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

double assign_all(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                  std::vector<int>& labels, Eigen::VectorXd& dist2) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist2(i) = best_d;
    inertia += best_d;
  }
  return inertia;
}

Run lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centroids, const KMeansOptions& opt) {
  const auto n = points.rows();
  const auto k = centroids.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd dist2(n);

  for (int it = 0; it < opt.max_iter; ++it) {
    assign_all(points, centroids, labels, dist2);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    Eigen::MatrixXd next = centroids;
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        next.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it to the worst-served point.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!taken[static_cast<std::size_t>(i)] && dist2(i) > far_d) {
          far_d = dist2(i);
          far = i;
        }
      }
      taken[static_cast<std::size_t>(far)] = 1;
      next.row(c) = points.row(far);
    }
    const double shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(next);
    if (shift < opt.tol) break;
  }

  Run run;
  run.labels.assign(static_cast<std::size_t>(n), 0);
  run.inertia = assign_all(points, centroids, run.labels, dist2);
  run.centroids = std::move(centroids);
  return run;
}

}  // namespace

std::size_t count_distinct_rows(const Eigen::MatrixXd& points) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(points.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  std::size_t distinct = idx.empty() ? 0 : 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (less(idx[i - 1], idx[i])) ++distinct;
  }
  return distinct;
}

int nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::VectorXd& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options) {
  if (k < 1) throw ValidationError("kmeans: k must be >= 1");
  if (points.rows() < k) {
    throw ValidationError("kmeans: " + std::to_string(points.rows()) + " samples for k = " +
                          std::to_string(k));
  }
  if (!points.allFinite()) throw ValidationError("kmeans: non-finite input");
  if (count_distinct_rows(points) < static_cast<std::size_t>(k)) {
    throw ValidationError("kmeans: fewer than k distinct points");
  }
  if (options.restarts < 1 || options.max_iter < 1) {
    throw ValidationError("kmeans: restarts and max_iter must be >= 1");
  }

  std::mt19937_64 rng(options.seed);
  Run best;
  bool have = false;
  for (int r = 0; r < options.restarts; ++r) {
    Run run = lloyd(points, plus_plus_seed(points, k, rng), options);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      if (best.centroids.row(a) == best.centroids.row(b)) {
        throw NumericError("kmeans: coincident centroids");
      }
    }
  }
  return {std::move(best.centroids), std::move(best.labels), best.inertia};
}

Eigen::MatrixXd Pca::project(const Eigen::MatrixXd& rows) const {
  return (rows.rowwise() - mean.transpose()) * basis.transpose();
}

Eigen::VectorXd Pca::project(const Eigen::VectorXd& x) const { return basis * (x - mean); }

Pca fit_pca(const Eigen::MatrixXd& rows, int dims) {
  if (rows.rows() < 1 || rows.cols() < 1) throw ValidationError("pca: empty input");
  if (dims < 1) throw ValidationError("pca: dims must be >= 1");
  dims = std::min<int>(dims, static_cast<int>(rows.cols()));

  Pca pca;
  pca.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - pca.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(rows.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca: eigen decomposition failed");

  const auto d = rows.cols();
  pca.basis.resize(dims, d);
  for (int i = 0; i < dims; ++i) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - i);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    pca.basis.row(i) = v.transpose();
  }
  return pca;
}

int ClusterModel::assign(const SpectrumEmbedding& embedding) const {
  Eigen::Map<const Eigen::VectorXd> x(embedding.vector.data(),
                                      static_cast<Eigen::Index>(embedding.vector.size()));
  if (x.size() != pca.mean.size()) throw ValidationError("cluster model: dimension mismatch");
  return nearest_centroid(centroids, pca.project(Eigen::VectorXd(x)));
}

ClusterModel cluster_states(std::span<const SpectrumEmbedding> embeddings, int k, int pca_dims,
                            const KMeansOptions& options) {
  if (k < 2) throw ValidationError("cluster_states: k must be >= 2");
  if (embeddings.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("cluster_states: " + std::to_string(embeddings.size()) +
                          " samples for k = " + std::to_string(k));
  }
  const auto dim = static_cast<Eigen::Index>(embeddings.front().vector.size());
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(embeddings.size()), dim);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (static_cast<Eigen::Index>(embeddings[i].vector.size()) != dim) {
      throw ValidationError("cluster_states: embeddings differ in dimension");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      rows(static_cast<Eigen::Index>(i), c) = embeddings[i].vector[static_cast<std::size_t>(c)];
    }
  }

  ClusterModel model;
  model.k = k;
  model.seed = options.seed;
  model.pca = fit_pca(rows, pca_dims);
  auto result = kmeans(model.pca.project(rows), k, options);
  model.centroids = std::move(result.centroids);
  model.assignments = std::move(result.labels);
  model.inertia = result.inertia;
  return model;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw ValidationError("ragged matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const ClusterModel& model) {
  return {{"k", model.k},
          {"seed", model.seed},
          {"inertia", model.inertia},
          {"pca_mean", std::vector<double>(model.pca.mean.data(),
                                           model.pca.mean.data() + model.pca.mean.size())},
          {"pca_basis", matrix_json(model.pca.basis)},
          {"centroids", matrix_json(model.centroids)},
          {"assignments", model.assignments}};
}

ClusterModel cluster_model_from_json(const nlohmann::json& j) {
  try {
    ClusterModel m;
    m.k = j.at("k").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.inertia = j.at("inertia").get<double>();
    const auto mean = j.at("pca_mean").get<std::vector<double>>();
    m.pca.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    m.pca.basis = matrix_from_json(j.at("pca_basis"));
    m.centroids = matrix_from_json(j.at("centroids"));
    m.assignments = j.at("assignments").get<std::vector<int>>();
    if (m.k < 2 || m.centroids.rows() != m.k || m.pca.basis.cols() != m.pca.mean.size() ||
        m.centroids.cols() != m.pca.basis.rows()) {
      throw ValidationError("cluster model: inconsistent shapes");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("cluster model: ") + e.what());
  }
}

}  // namespace rca::features
