#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <json.hpp>

#include "edgerec/diffusion/schedule.hpp"
#include "edgerec/eval/metrics.hpp"
#include "edgerec/gdit/model.hpp"
#include "edgerec/ingest/dataset.hpp"
#include "edgerec/ingest/features.hpp"
#include "edgerec/ingest/patch.hpp"
#include "edgerec/xform/scaler.hpp"

namespace edgerec::eval {

struct EvalConfig {
  std::vector<std::size_t> k_values{1, 5, 10, 20, 50};
  std::size_t num_patches = 10;
  ingest::PatchRequest patch;
  double relevance_threshold = 4.0;
  std::uint64_t seed = 0;
  /// Nonzero: predictions come from one tiled pass over the whole eligible
  /// region with tiles of this size, instead of per-patch inpainting.
  std::size_t tile_n = 0;
  std::size_t tile_m = 0;
  std::size_t threads = 1;

  void validate() const;
};

nlohmann::json to_json(const EvalConfig& config);
EvalConfig eval_config_from_json(const nlohmann::json& j);

/// One (patch, user) pair with a nonempty relevant set.
struct UserEval {
  std::size_t patch = 0;
  std::size_t user = 0;         // dataset user index
  std::size_t candidates = 0;
  std::size_t relevant = 0;
  std::vector<TopKMetrics> at_k;  // aligned with EvalReport::k_values
};

struct PatchEval {
  std::vector<std::size_t> users;  // dataset user indices
  std::vector<std::size_t> items;  // dataset item indices
  double density = 0.0;
  std::size_t users_evaluated = 0;
  std::vector<TopKMetrics> mean_at_k;
};

struct EvalReport {
  std::vector<std::size_t> k_values;
  std::vector<TopKMetrics> mean_at_k;
  std::size_t n_users = 0;
  std::vector<PatchEval> patches;
  std::vector<UserEval> users;
};

/// Completed values (diffusion space, n x m) for one evaluation patch.
using Predictor = std::function<ingest::DenseMatrix(const ingest::Patch& patch, std::size_t index)>;

/// Samples `num_patches` patches, asks `predict` for each and scores every
/// patch user's ranking of its non-train-known items against test ratings
/// at or above the relevance threshold. Error when no user is evaluable.
EvalReport evaluate_predictions(const ingest::InteractionMatrix& train_matrix,
                                const std::vector<ingest::RatingRecord>& test_records, const EvalConfig& config,
                                const Predictor& predict);

/// evaluate_predictions with inpainting (or tiled sampling when the config
/// sets a tile) from `model`.
template <typename Real>
EvalReport evaluate_model(const gdit::GDiTModel<Real>& model, const ingest::InteractionMatrix& train_matrix,
                          const ingest::FeatureTable& features, const std::vector<ingest::RatingRecord>& test_records,
                          const diffusion::NoiseSchedule& schedule, const xform::RatingScaler& scaler,
                          const EvalConfig& config);

struct BaselineComparison {
  double model_mean = 0.0;
  double random_mean = 0.0;
  double mean_difference = 0.0;
  double lower_95 = 0.0;
};

/// Precision@k against a uniformly random ranking of the same candidates,
/// whose expectation is min(k, C) R / (C k). `lower_95` is the 2.5th
/// percentile of the bootstrapped mean paired difference.
BaselineComparison compare_to_random(const EvalReport& report, std::size_t k, std::size_t resamples,
                                     std::uint64_t seed);

void write_metrics_csv(const EvalReport& report, const std::filesystem::path& path);
nlohmann::json report_to_json(const EvalReport& report);

}  // namespace edgerec::eval
