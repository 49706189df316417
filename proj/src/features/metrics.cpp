#include "rca/features/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "rca/common/error.hpp"

namespace rca::features {

namespace {

void check(std::span<const int> y, std::span<const int> c) {
  if (y.size() != c.size()) throw ValidationError("label lists differ in length");
  if (y.empty()) throw ValidationError("label lists are empty");
}

template <typename Key>
double entropy(const std::map<Key, std::size_t>& counts, double n) {
  double h = 0.0;
  for (const auto& [key, count] : counts) {
    const double p = static_cast<double>(count) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double nmi(std::span<const int> labels_y, std::span<const int> labels_c) {
  check(labels_y, labels_c);
  std::map<int, std::size_t> cy, cc;
  std::map<std::pair<int, int>, std::size_t> joint;
  for (std::size_t i = 0; i < labels_y.size(); ++i) {
    ++cy[labels_y[i]];
    ++cc[labels_c[i]];
    ++joint[{labels_y[i], labels_c[i]}];
  }
  const double n = static_cast<double>(labels_y.size());
  const double hy = entropy(cy, n);
  const double hc = entropy(cc, n);
  if (cy.size() == 1 && cc.size() == 1) return 1.0;
  if (cy.size() == 1 || cc.size() == 1) return 0.0;
  const double mutual = hy + hc - entropy(joint, n);
  return std::clamp(2.0 * mutual / (hy + hc), 0.0, 1.0);
}

double cluster_accuracy(std::span<const int> labels_y, std::span<const int> labels_c) {
  check(labels_y, labels_c);
  std::map<int, std::map<int, std::size_t>> overlap;  // predicted -> truth -> count
  for (std::size_t i = 0; i < labels_y.size(); ++i) ++overlap[labels_c[i]][labels_y[i]];
  std::size_t matched = 0;
  for (const auto& [cluster, truth] : overlap) {
    std::size_t best = 0;
    for (const auto& [label, count] : truth) best = std::max(best, count);
    matched += best;
  }
  return static_cast<double>(matched) / static_cast<double>(labels_y.size());
}

}  // namespace rca::features
