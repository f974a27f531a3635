#include "edgerec/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "edgerec/common/error.hpp"

namespace edgerec::eval {

TopKMetrics topk_metrics(std::span<const std::size_t> ranked, std::span<const std::size_t> relevant, std::size_t k) {
  if (relevant.empty()) throw ParameterError("topk_metrics needs a nonempty relevant set");
  if (k == 0) throw ParameterError("k must be at least 1");
  std::unordered_set<std::size_t> rel(relevant.begin(), relevant.end());
  TopKMetrics out;
  std::size_t hits = 0;
  double dcg = 0.0;
  const std::size_t depth = std::min(k, ranked.size());
  for (std::size_t r = 0; r < depth; ++r) {
    if (!rel.count(ranked[r])) continue;
    ++hits;
    dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    if (out.mrr == 0.0) out.mrr = 1.0 / static_cast<double>(r + 1);
  }
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, rel.size()); ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  out.precision = static_cast<double>(hits) / static_cast<double>(k);
  out.recall = static_cast<double>(hits) / static_cast<double>(rel.size());
  out.ndcg = dcg / idcg;
  out.hitrate = hits > 0 ? 1.0 : 0.0;
  return out;
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores, std::span<const std::size_t> candidates) {
  std::vector<std::size_t> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

}  // namespace edgerec::eval
