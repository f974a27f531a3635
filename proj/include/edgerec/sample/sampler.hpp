#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "edgerec/common/rng.hpp"
#include "edgerec/diffusion/schedule.hpp"
#include "edgerec/gdit/model.hpp"
#include "edgerec/ingest/matrix.hpp"
#include "edgerec/xform/scaler.hpp"

namespace edgerec::sample {

struct SampleConfig {
  std::uint64_t seed = 0;
  bool clamp_x0 = true;
  /// Clamp range for x0 estimates and the final output.
  double value_lo = -1.0;
  double value_hi = 1.0;
  /// Tile size for tiled_sample.
  std::size_t tile_n = 64;
  std::size_t tile_m = 64;
  /// Worker threads for the tiles of one step.
  std::size_t threads = 1;
};

/// One ancestral step: x0 estimate from eps_hat (clamped when configured),
/// then mean + sqrt(beta_tilde_t) z. At t = 1 the mean is returned as is.
std::vector<double> reverse_step(std::span<const double> x_t, int t, std::span<const double> eps_hat,
                                 const diffusion::NoiseSchedule& schedule, Rng& rng,
                                 const SampleConfig& config = {});

/// Rows and columns of one tile, each sorted ascending.
struct Tile {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

/// Regular grid of tile_n x tile_m tiles shifted by random cyclic offsets;
/// tiles that run past the edge wrap around. The offset is 0 along an axis
/// the tile spans completely.
std::vector<Tile> random_tiling(std::size_t rows, std::size_t cols, std::size_t tile_n, std::size_t tile_m,
                                Rng& rng);

/// True when every cell of the region lies in exactly one tile.
bool is_partition(const std::vector<Tile>& tiles, std::size_t rows, std::size_t cols);

/// Pure generation from x_T ~ N(0, I): n = user_features rows, m = item_features rows.
template <typename Real>
ingest::DenseMatrix generate_patch(const gdit::GDiTModel<Real>& model, const numeric::Tensor<Real>& user_features,
                                   const numeric::Tensor<Real>& item_features,
                                   const diffusion::NoiseSchedule& schedule, const SampleConfig& config);

/// Reverse diffusion where known cells are replaced after every step by a
/// fresh forward draw of their known values (exactly the known values at the end).
template <typename Real>
ingest::DenseMatrix inpaint_patch(const gdit::GDiTModel<Real>& model, const ingest::DenseMatrix& known_values,
                                  std::span<const std::uint8_t> known, const numeric::Tensor<Real>& user_features,
                                  const numeric::Tensor<Real>& item_features,
                                  const diffusion::NoiseSchedule& schedule, const SampleConfig& config);

using TilingObserver = std::function<void(int t, const std::vector<Tile>&)>;

/// Inpainting over a region larger than the model's patches: each step
/// re-tiles the region at random and denoises every tile with its own rows
/// of the feature tables.
template <typename Real>
ingest::DenseMatrix tiled_sample(const gdit::GDiTModel<Real>& model, const ingest::DenseMatrix& known_values,
                                 std::span<const std::uint8_t> known, const numeric::Tensor<Real>& user_features,
                                 const numeric::Tensor<Real>& item_features,
                                 const diffusion::NoiseSchedule& schedule, const SampleConfig& config,
                                 const TilingObserver& observer = {});

/// CSV `user_id,item_id,predicted_rating` on the original rating scale.
void write_predictions(const std::filesystem::path& path, const ingest::DenseMatrix& values,
                       std::span<const std::int64_t> user_ids, std::span<const std::int64_t> item_ids,
                       const xform::RatingScaler& scaler);

}  // namespace edgerec::sample
