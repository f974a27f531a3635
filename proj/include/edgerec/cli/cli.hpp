#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "edgerec/ingest/cache.hpp"
#include "edgerec/xform/scaler.hpp"

namespace edgerec::cli {

/// Entry point of the `edge-rec` tool. Returns 0 on success, 1 on a usage
/// error and 2 on a runtime error.
int run_cli(int argc, char** argv);

/// Parse, time-split, scale and featurize a MovieLens dataset. With `scaler`
/// set, that scaler is used instead of fitting one from the train split.
ingest::IngestedData ingest_dataset(const std::string& name, const std::filesystem::path& dir,
                                    double test_fraction, xform::TransformMode mode,
                                    const std::optional<xform::RatingScaler>& scaler = std::nullopt);

/// git blob hash (SHA-1 of "blob <size>\0<content>") of a file, as hex.
std::string content_hash(const std::filesystem::path& path);

}  // namespace edgerec::cli
