#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgerec/diffusion/schedule.hpp"
#include "edgerec/gdit/model.hpp"
#include "edgerec/xform/scaler.hpp"

namespace edgerec::train {

/// Model parameters plus everything needed to sample from them.
/// Tensors are held in double; `dtype` records the precision they were
/// trained in ("float32" or "float64") and the on-disk width.
struct Checkpoint {
  gdit::GDiTConfig model_config;
  std::string dtype = "float64";
  std::vector<std::string> names;
  std::vector<numeric::Tensor<double>> tensors;
  diffusion::NoiseSchedule schedule = diffusion::NoiseSchedule::linear(1000, 1e-4, 0.02);
  xform::RatingScaler scaler = xform::RatingScaler::linear(1.0, 5.0);
  std::uint64_t iteration = 0;
  std::string rng_state;
  nlohmann::json train_config = nlohmann::json::object();
};

template <typename Real>
Checkpoint make_checkpoint(gdit::GDiTModel<Real>& model, const diffusion::NoiseSchedule& schedule,
                           const xform::RatingScaler& scaler, std::uint64_t iteration,
                           const std::string& rng_state = {});

/// Copies the checkpoint's tensors into `model`. ConfigMismatchError when the
/// model configuration, names or shapes differ.
template <typename Real>
void load_parameters(const Checkpoint& ckpt, gdit::GDiTModel<Real>& model);

template <typename Real>
gdit::GDiTModel<Real> model_from_checkpoint(const Checkpoint& ckpt);

/// Layout: uint64 LE header length, JSON header, LE IEEE-754 payload.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// CheckpointError on a bad magic/version or a header/payload mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace edgerec::train
