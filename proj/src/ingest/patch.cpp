#include "edgerec/ingest/patch.hpp"

#include <algorithm>
#include <numeric>

#include "edgerec/common/error.hpp"

namespace edgerec::ingest {

namespace {

std::vector<std::size_t> draw_without_replacement(std::size_t population, std::size_t count, Rng& rng) {
  std::vector<std::size_t> pool(population);
  std::iota(pool.begin(), pool.end(), 0);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

Patch sample_patch(const InteractionMatrix& matrix, const PatchRequest& request, Rng& rng) {
  std::size_t region_rows = request.region_rows ? request.region_rows : matrix.rows;
  std::size_t region_cols = request.region_cols ? request.region_cols : matrix.cols;
  if (region_rows > matrix.rows || region_cols > matrix.cols) {
    throw ParameterError("sampling region exceeds the matrix");
  }
  if (request.n < 1 || request.m < 1) throw ParameterError("patch dimensions must be at least 1");
  if (request.n > region_rows || request.m > region_cols) {
    throw ParameterError("patch " + std::to_string(request.n) + "x" + std::to_string(request.m) +
                         " does not fit the " + std::to_string(region_rows) + "x" +
                         std::to_string(region_cols) + " sampling region");
  }
  if (!(request.min_density >= 0.0 && request.min_density <= 1.0)) {
    throw ParameterError("min_density must lie in [0, 1]");
  }

  double best = -1.0;
  int attempts = std::max(1, request.max_retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto rows = draw_without_replacement(region_rows, request.n, rng);
    auto cols = draw_without_replacement(region_cols, request.m, rng);
    Patch patch = extract_patch(matrix, std::move(rows), std::move(cols));
    double density = patch.density();
    if (density >= request.min_density) return patch;
    best = std::max(best, density);
  }
  throw DensityInfeasibleError("no " + std::to_string(request.n) + "x" + std::to_string(request.m) +
                                   " patch reached density " + std::to_string(request.min_density) +
                                   " in " + std::to_string(attempts) +
                                   " draws; best density found " + std::to_string(best),
                               best);
}

}  // namespace edgerec::ingest
