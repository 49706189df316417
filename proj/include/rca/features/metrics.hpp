#pragma once

#include <span>

namespace rca::features {

// 2 I(Y, C) / (H(Y) + H(C)) with natural logs. Both partitions constant -> 1;
// exactly one constant -> 0.
double nmi(std::span<const int> labels_y, std::span<const int> labels_c);

// (1/N) * sum over predicted clusters of the largest overlap with any
// ground-truth cluster.
double cluster_accuracy(std::span<const int> labels_y, std::span<const int> labels_c);

}  // namespace rca::features
