#include "edgerec/train/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "edgerec/common/error.hpp"
#include "edgerec/numeric/ops.hpp"

namespace edgerec::train {

void TrainConfig::validate() const {
  if (iterations < 1) throw ParameterError("iterations must be at least 1");
  if (batch_size < 1) throw ParameterError("batch size must be at least 1");
  if (patch.n < 1 || patch.m < 1) throw ParameterError("patch dimensions must be positive");
  if (bpr_weight < 0) throw ParameterError("BPR weight must be non-negative");
  if (learning_rate < 0 || weight_decay < 0) throw ParameterError("learning rate and weight decay must be non-negative");
  if (patch.min_density < 0 || patch.min_density > 1) throw ParameterError("min density must lie in [0, 1]");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"iterations", c.iterations},
          {"batch_size", c.batch_size},
          {"patch_n", c.patch.n},
          {"patch_m", c.patch.m},
          {"min_density", c.patch.min_density},
          {"region_rows", c.patch.region_rows},
          {"region_cols", c.patch.region_cols},
          {"max_retries", c.patch.max_retries},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"bpr_weight", c.bpr_weight},
          {"bpr_pairs_per_user", c.bpr_pairs_per_user},
          {"mask_unknown_in_loss", c.mask_unknown_in_loss},
          {"seed", c.seed},
          {"checkpoint_every", c.checkpoint_every}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.iterations = j.value("iterations", c.iterations);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.patch.n = j.value("patch_n", c.patch.n);
  c.patch.m = j.value("patch_m", c.patch.m);
  c.patch.min_density = j.value("min_density", c.patch.min_density);
  c.patch.region_rows = j.value("region_rows", c.patch.region_rows);
  c.patch.region_cols = j.value("region_cols", c.patch.region_cols);
  c.patch.max_retries = j.value("max_retries", c.patch.max_retries);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.bpr_weight = j.value("bpr_weight", c.bpr_weight);
  c.bpr_pairs_per_user = j.value("bpr_pairs_per_user", c.bpr_pairs_per_user);
  c.mask_unknown_in_loss = j.value("mask_unknown_in_loss", c.mask_unknown_in_loss);
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  return c;
}

template <typename Real>
PatchExample<Real> make_example(ingest::Patch patch, const ingest::InteractionMatrix& matrix,
                                const ingest::FeatureTable& features) {
  const auto& uf = features.user_features;
  const auto& itf = features.item_features;
  PatchExample<Real> ex;
  ex.user_features = numeric::Tensor<Real>(numeric::Shape{patch.n, uf.cols});
  ex.item_features = numeric::Tensor<Real>(numeric::Shape{patch.m, itf.cols});
  for (std::size_t r = 0; r < patch.n; ++r) {
    const std::size_t user = matrix.row_ids[patch.user_rows[r]];
    for (std::size_t c = 0; c < uf.cols; ++c) ex.user_features[r * uf.cols + c] = static_cast<Real>(uf.at(user, c));
  }
  for (std::size_t r = 0; r < patch.m; ++r) {
    const std::size_t item = matrix.col_ids[patch.item_cols[r]];
    for (std::size_t c = 0; c < itf.cols; ++c) ex.item_features[r * itf.cols + c] = static_cast<Real>(itf.at(item, c));
  }
  ex.patch = std::move(patch);
  return ex;
}

template <typename Real>
StepLoss train_step(gdit::GDiTModel<Real>& model, AdamW<Real>& optimizer,
                    const std::vector<PatchExample<Real>>& batch, const diffusion::NoiseSchedule& schedule,
                    const LossConfig& loss, Rng& rng, std::uint64_t iteration) {
  if (batch.empty()) throw ParameterError("training batch is empty");
  optimizer.zero_grad();
  StepLoss result;
  const Real weight = Real(1) / static_cast<Real>(batch.size());
  std::uniform_int_distribution<int> pick_t(1, schedule.steps());
  for (const auto& ex : batch) {
    const auto& patch = ex.patch;
    const int t = pick_t(rng);
    result.timesteps.push_back(t);
    const double ab = schedule.alpha_bar(t);
    numeric::Tensor<Real> eps(numeric::Shape{patch.n, patch.m});
    numeric::Tensor<Real> x_t(eps.shape());
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const double e = standard_normal(rng);
      eps[k] = static_cast<Real>(e);
      x_t[k] = static_cast<Real>(diffusion::forward_sample_at(patch.values[k], ab, e));
    }
    auto eps_hat = model.forward(x_t, t, ex.user_features, ex.item_features);
    auto pairs = sample_bpr_pairs(patch, loss.bpr_pairs_per_user, rng);
    auto terms = diffusion_loss(eps, eps_hat, x_t, t, patch, schedule, pairs, loss);
    const double value = static_cast<double>(terms.total.value().item());
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << "non-finite loss at iteration " << iteration << " (timesteps";
      for (int s : result.timesteps) msg << ' ' << s;
      msg << ")";
      throw NumericalError(msg.str());
    }
    numeric::scale(terms.total, weight).backward();
    result.total += value / static_cast<double>(batch.size());
    result.mse += terms.mse / static_cast<double>(batch.size());
    result.bpr += terms.bpr / static_cast<double>(batch.size());
  }
  optimizer.step();
  return result;
}

template <typename Real>
Checkpoint run_training(gdit::GDiTModel<Real>& model, const TrainingInputs& inputs,
                        const diffusion::NoiseSchedule& schedule, const TrainConfig& config,
                        const TrainOutputs& outputs) {
  config.validate();
  LossConfig loss;
  loss.bpr_weight = config.bpr_weight;
  loss.bpr_pairs_per_user = config.bpr_pairs_per_user;
  loss.mask_unknown = config.mask_unknown_in_loss;
  std::tie(loss.value_lo, loss.value_hi) = inputs.scaler.value_range();

  AdamW<Real> optimizer(model.parameters(), {config.learning_rate, config.weight_decay});
  Rng rng = derive_rng(config.seed, {stream::train});

  std::ofstream csv;
  if (outputs.directory) {
    std::filesystem::create_directories(*outputs.directory);
    csv.open(*outputs.directory / "loss.csv");
    if (!csv) throw Error("cannot write " + (*outputs.directory / "loss.csv").string());
    csv << "iteration,total,mse,bpr\n" << std::setprecision(9);
  }

  auto snapshot = [&](std::uint64_t iteration) {
    auto ckpt = make_checkpoint(model, schedule, inputs.scaler, iteration, serialize_rng(rng));
    ckpt.train_config = to_json(config);
    return ckpt;
  };

  for (std::uint64_t it = 1; it <= config.iterations; ++it) {
    std::vector<PatchExample<Real>> batch;
    batch.reserve(config.batch_size);
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      batch.push_back(make_example<Real>(ingest::sample_patch(inputs.matrix, config.patch, rng), inputs.matrix,
                                         inputs.features));
    }
    auto step = train_step(model, optimizer, batch, schedule, loss, rng, it);
    if (csv.is_open()) csv << it << ',' << step.total << ',' << step.mse << ',' << step.bpr << '\n';
    if (outputs.on_step) outputs.on_step(it, step);
    if (outputs.directory && config.checkpoint_every > 0 && it % config.checkpoint_every == 0 &&
        it != config.iterations) {
      std::ostringstream name;
      name << "checkpoint-" << std::setw(6) << std::setfill('0') << it << ".bin";
      save_checkpoint(snapshot(it), *outputs.directory / name.str());
    }
  }
  auto final = snapshot(config.iterations);
  if (outputs.directory) save_checkpoint(final, *outputs.directory / "final.bin");
  return final;
}

template <typename Real>
Checkpoint run_training(const TrainingInputs& inputs, const gdit::GDiTConfig& model_config,
                        const diffusion::NoiseSchedule& schedule, const TrainConfig& config,
                        const TrainOutputs& outputs) {
  Rng init = derive_rng(config.seed, {stream::init});
  gdit::GDiTModel<Real> model(model_config, init);
  return run_training(model, inputs, schedule, config, outputs);
}

#define EDGEREC_INSTANTIATE_TRAIN(Real)                                                                      \
  template PatchExample<Real> make_example<Real>(ingest::Patch, const ingest::InteractionMatrix&,           \
                                                 const ingest::FeatureTable&);                               \
  template StepLoss train_step<Real>(gdit::GDiTModel<Real>&, AdamW<Real>&,                                   \
                                     const std::vector<PatchExample<Real>>&, const diffusion::NoiseSchedule&, \
                                     const LossConfig&, Rng&, std::uint64_t);                                \
  template Checkpoint run_training<Real>(gdit::GDiTModel<Real>&, const TrainingInputs&,                     \
                                         const diffusion::NoiseSchedule&, const TrainConfig&,                \
                                         const TrainOutputs&);                                               \
  template Checkpoint run_training<Real>(const TrainingInputs&, const gdit::GDiTConfig&,                    \
                                         const diffusion::NoiseSchedule&, const TrainConfig&,                \
                                         const TrainOutputs&);

EDGEREC_INSTANTIATE_TRAIN(float)
EDGEREC_INSTANTIATE_TRAIN(double)

}  // namespace edgerec::train
