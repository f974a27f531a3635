#pragma once

#include <string>
#include <vector>

#include "edgerec/ingest/dataset.hpp"
#include "edgerec/ingest/matrix.hpp"

namespace edgerec::ingest {

/// Numeric conditioning features, one row per dataset user / item index.
struct FeatureTable {
  DenseMatrix user_features;
  DenseMatrix item_features;
  std::vector<std::string> user_columns;
  std::vector<std::string> item_columns;
};

/// ML-100k users: [age/100, gender one-hot (M, F), occupation one-hot (21)].
/// ML-100k items: [genre flags (19), release year scaled to [0, 1]].
/// ML-1M uses the same layout with its own occupation codes and 18 genres.
/// Generic datasets parse every attribute field as a real.
/// Missing attributes leave their sub-block zero; unknown labels throw ParseError.
FeatureTable featurize(const RatingDataset& dataset);

const std::vector<std::string>& ml100k_occupations();
const std::vector<std::string>& ml100k_genres();
const std::vector<std::string>& ml1m_genres();

}  // namespace edgerec::ingest
