#include "edgerec/ingest/density.hpp"

#include <algorithm>
#include <numeric>

namespace edgerec::ingest {

namespace {

// Distinct same-side nodes two hops away, using a stamp array instead of a set.
std::vector<std::size_t> two_hop_counts(const std::vector<std::vector<std::size_t>>& own,
                                        const std::vector<std::vector<std::size_t>>& other) {
  std::vector<std::size_t> counts(own.size(), 0);
  std::vector<std::size_t> stamp(own.size(), 0);
  for (std::size_t node = 0; node < own.size(); ++node) {
    std::size_t mark = node + 1;
    stamp[node] = mark;
    std::size_t count = 0;
    for (std::size_t mid : own[node]) {
      for (std::size_t far : other[mid]) {
        if (stamp[far] != mark) {
          stamp[far] = mark;
          ++count;
        }
      }
    }
    counts[node] = count;
  }
  return counts;
}

std::vector<std::size_t> order_by_score(const std::vector<std::size_t>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

DensityScores density_score(const InteractionMatrix& matrix) {
  std::vector<std::vector<std::size_t>> user_items(matrix.rows), item_users(matrix.cols);
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    for (std::size_t c = 0; c < matrix.cols; ++c) {
      if (matrix.is_known(r, c)) {
        user_items[r].push_back(c);
        item_users[c].push_back(r);
      }
    }
  }
  return {two_hop_counts(user_items, item_users), two_hop_counts(item_users, user_items)};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> density_order(
    const InteractionMatrix& matrix) {
  auto scores = density_score(matrix);
  return {order_by_score(scores.users), order_by_score(scores.items)};
}

InteractionMatrix density_sort(const InteractionMatrix& matrix) {
  auto [rows, cols] = density_order(matrix);
  return permute_matrix(matrix, rows, cols);
}

std::size_t dense_corner_size(const InteractionMatrix& sorted, double label_density) {
  std::size_t limit = std::min(sorted.rows, sorted.cols);
  std::size_t known = 0;
  std::size_t best = 0;
  for (std::size_t k = 1; k <= limit; ++k) {
    std::size_t edge = k - 1;
    for (std::size_t c = 0; c < k; ++c) known += sorted.is_known(edge, c);
    for (std::size_t r = 0; r < edge; ++r) known += sorted.is_known(r, edge);
    if (static_cast<double>(known) >= label_density * static_cast<double>(k * k)) best = k;
  }
  return best;
}

}  // namespace edgerec::ingest
