#pragma once

#include <filesystem>
#include <vector>

#include "edgerec/ingest/dataset.hpp"
#include "edgerec/ingest/features.hpp"
#include "edgerec/ingest/matrix.hpp"
#include "edgerec/xform/scaler.hpp"

namespace edgerec::ingest {

/// Everything downstream stages need from an ingest run.
struct IngestedData {
  InteractionMatrix train_matrix;
  FeatureTable features;
  std::vector<RatingRecord> test_records;
  xform::RatingScaler scaler = xform::RatingScaler::linear(1.0, 5.0);
  std::vector<std::int64_t> user_raw_ids;
  std::vector<std::int64_t> item_raw_ids;
};

/// Writes `manifest.json` plus `arrays.bin` (little-endian IEEE-754 float64
/// and uint8 arrays at the byte offsets listed in the manifest) into `dir`.
void save_cache(const IngestedData& data, const std::filesystem::path& dir);
IngestedData load_cache(const std::filesystem::path& dir);

}  // namespace edgerec::ingest
