#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace edgerec::eval {

struct TopKMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double ndcg = 0.0;
  double mrr = 0.0;
  double hitrate = 0.0;
};

/// Metrics of the first k entries of `ranked` against `relevant`.
/// ParameterError when `relevant` is empty or k is 0.
TopKMetrics topk_metrics(std::span<const std::size_t> ranked, std::span<const std::size_t> relevant, std::size_t k);

/// Candidates ordered by descending score; equal scores keep ascending index order.
std::vector<std::size_t> rank_by_score(std::span<const double> scores, std::span<const std::size_t> candidates);

}  // namespace edgerec::eval
