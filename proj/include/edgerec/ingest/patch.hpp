#pragma once

#include <cstddef>

#include "edgerec/common/rng.hpp"
#include "edgerec/ingest/matrix.hpp"

namespace edgerec::ingest {

struct PatchRequest {
  std::size_t n = 50;
  std::size_t m = 50;
  double min_density = 0.0;
  /// Draw only from the top-left region_rows x region_cols corner (0 = whole axis).
  std::size_t region_rows = 0;
  std::size_t region_cols = 0;
  int max_retries = 1000;
};

/// Uniform rows and columns without replacement, rejection-resampled until
/// the known fraction reaches `min_density`. Indices come back sorted.
/// Throws DensityInfeasibleError (carrying the best density seen) after
/// `max_retries` rejected draws.
Patch sample_patch(const InteractionMatrix& matrix, const PatchRequest& request, Rng& rng);

}  // namespace edgerec::ingest
