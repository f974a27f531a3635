#pragma once

#include <filesystem>

#include "edgerec/ingest/dataset.hpp"

namespace edgerec::ingest {

/// The four-user, three-movie rating graph used throughout the docs and tests:
///
///            TGM   TTN   AVG
///      342   5.0   2.5   3.0
///      254   ---   1.0   4.0
///      436   ---   ---   4.5
///      974   1.5   ---   3.5
///
/// Users keep their raw ids; movies are raw ids 1, 2, 3 in column order.
RatingDataset fixture_dataset();

/// Writes the fixture as ML-100k files (u.data, u.user, u.item) into `dir`.
void write_fixture_ml100k(const std::filesystem::path& dir);

/// Writes any ML-100k-format dataset back out as u.data / u.user / u.item.
void write_ml100k(const RatingDataset& dataset, const std::filesystem::path& dir);

}  // namespace edgerec::ingest
