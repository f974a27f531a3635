#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "edgerec/ingest/matrix.hpp"

namespace edgerec::ingest {

struct DensityScores {
  std::vector<std::size_t> users;  // per matrix row
  std::vector<std::size_t> items;  // per matrix column
};

/// For each node of the bipartite graph induced by the known mask, the number
/// of distinct other nodes on its own side reachable in exactly two hops.
DensityScores density_score(const InteractionMatrix& matrix);

/// Row and column orders by descending score; ties keep original order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> density_order(
    const InteractionMatrix& matrix);

/// Matrix permuted so the densest rows and columns sit in the top-left corner.
InteractionMatrix density_sort(const InteractionMatrix& matrix);

/// Largest k such that the top-left k x k corner of a density-sorted matrix
/// has a known fraction of at least `label_density`. Returns 0 when none does.
std::size_t dense_corner_size(const InteractionMatrix& sorted, double label_density);

}  // namespace edgerec::ingest
