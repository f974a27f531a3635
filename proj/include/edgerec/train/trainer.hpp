#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "edgerec/common/rng.hpp"
#include "edgerec/diffusion/schedule.hpp"
#include "edgerec/gdit/model.hpp"
#include "edgerec/ingest/features.hpp"
#include "edgerec/ingest/patch.hpp"
#include "edgerec/train/checkpoint.hpp"
#include "edgerec/train/loss.hpp"
#include "edgerec/train/optimizer.hpp"

namespace edgerec::train {

struct TrainConfig {
  std::uint64_t iterations = 10000;
  std::size_t batch_size = 16;
  ingest::PatchRequest patch;
  double learning_rate = 1e-4;
  double weight_decay = 0.0;
  double bpr_weight = 0.1;
  std::size_t bpr_pairs_per_user = 4;
  bool mask_unknown_in_loss = false;
  std::uint64_t seed = 0;
  std::uint64_t checkpoint_every = 1000;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// A patch with the feature rows of its users and items.
template <typename Real>
struct PatchExample {
  ingest::Patch patch;
  numeric::Tensor<Real> user_features;  // [n, d_user_in]
  numeric::Tensor<Real> item_features;  // [m, d_item_in]
};

template <typename Real>
PatchExample<Real> make_example(ingest::Patch patch, const ingest::InteractionMatrix& matrix,
                                const ingest::FeatureTable& features);

struct StepLoss {
  double total = 0.0;
  double mse = 0.0;
  double bpr = 0.0;
  std::vector<int> timesteps;
};

/// One optimizer update on the batch mean of per-patch losses. Each patch
/// draws its own t uniformly from 1..T and its own Gaussian noise.
/// NumericalError (naming the iteration and timesteps) on a non-finite loss.
template <typename Real>
StepLoss train_step(gdit::GDiTModel<Real>& model, AdamW<Real>& optimizer,
                    const std::vector<PatchExample<Real>>& batch, const diffusion::NoiseSchedule& schedule,
                    const LossConfig& loss, Rng& rng, std::uint64_t iteration = 0);

struct TrainingInputs {
  const ingest::InteractionMatrix& matrix;
  const ingest::FeatureTable& features;
  const xform::RatingScaler& scaler;
};

struct TrainOutputs {
  /// Receives checkpoint-<iter>.bin files, final.bin and loss.csv when set.
  std::optional<std::filesystem::path> directory;
  std::function<void(std::uint64_t, const StepLoss&)> on_step;
};

/// Samples fresh patch batches for `config.iterations` steps and returns the
/// final checkpoint.
template <typename Real>
Checkpoint run_training(const TrainingInputs& inputs, const gdit::GDiTConfig& model_config,
                        const diffusion::NoiseSchedule& schedule, const TrainConfig& config,
                        const TrainOutputs& outputs = {});

template <typename Real>
Checkpoint run_training(gdit::GDiTModel<Real>& model, const TrainingInputs& inputs,
                        const diffusion::NoiseSchedule& schedule, const TrainConfig& config,
                        const TrainOutputs& outputs = {});

}  // namespace edgerec::train
