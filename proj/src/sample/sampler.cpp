#include "edgerec/sample/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <thread>

#include "edgerec/common/error.hpp"
#include "edgerec/numeric/ops.hpp"

namespace edgerec::sample {

using numeric::Shape;
using numeric::Tensor;

std::vector<double> reverse_step(std::span<const double> x_t, int t, std::span<const double> eps_hat,
                                 const diffusion::NoiseSchedule& schedule, Rng& rng, const SampleConfig& config) {
  if (x_t.size() != eps_hat.size()) throw ShapeError("reverse_step: x_t and eps_hat differ in size");
  if (t < 1 || t > schedule.steps()) throw ParameterError("reverse_step: t out of range");
  const double ab = schedule.alpha_bar(t);
  const double root_ab = std::sqrt(ab);
  const double root_one_minus = std::sqrt(1.0 - ab);
  std::vector<double> x0(x_t.size());
  for (std::size_t k = 0; k < x0.size(); ++k) {
    double v = (x_t[k] - root_one_minus * eps_hat[k]) / root_ab;
    x0[k] = config.clamp_x0 ? std::clamp(v, config.value_lo, config.value_hi) : v;
  }
  auto post = diffusion::posterior_params(x0, x_t, t, schedule);
  if (t == 1) return post.mean;
  const double sd = std::sqrt(post.variance);
  for (auto& v : post.mean) v += sd * standard_normal(rng);
  return post.mean;
}

std::vector<Tile> random_tiling(std::size_t rows, std::size_t cols, std::size_t tile_n, std::size_t tile_m,
                                Rng& rng) {
  if (tile_n == 0 || tile_m == 0) throw ParameterError("tile dimensions must be positive");
  if (tile_n > rows || tile_m > cols) {
    throw ParameterError("tile " + std::to_string(tile_n) + "x" + std::to_string(tile_m) + " exceeds region " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  auto chunks = [&](std::size_t len, std::size_t size) {
    std::size_t offset = 0;
    if (size < len) offset = std::uniform_int_distribution<std::size_t>(0, len - 1)(rng);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < len; start += size) {
      std::vector<std::size_t> chunk;
      for (std::size_t k = start; k < std::min(len, start + size); ++k) chunk.push_back((offset + k) % len);
      std::sort(chunk.begin(), chunk.end());
      out.push_back(std::move(chunk));
    }
    return out;
  };
  auto row_chunks = chunks(rows, tile_n);
  auto col_chunks = chunks(cols, tile_m);
  std::vector<Tile> tiles;
  for (const auto& r : row_chunks) {
    for (const auto& c : col_chunks) tiles.push_back({r, c});
  }
  return tiles;
}

bool is_partition(const std::vector<Tile>& tiles, std::size_t rows, std::size_t cols) {
  std::vector<int> hits(rows * cols, 0);
  for (const auto& tile : tiles) {
    for (auto r : tile.rows) {
      for (auto c : tile.cols) {
        if (r >= rows || c >= cols) return false;
        ++hits[r * cols + c];
      }
    }
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

namespace {

template <typename Real>
Tensor<Real> select_rows(const Tensor<Real>& table, const std::vector<std::size_t>& rows) {
  const std::size_t width = table.shape()[1];
  Tensor<Real> out(Shape{rows.size(), width});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(table.ptr() + rows[r] * width, width, out.ptr() + r * width);
  }
  return out;
}

// eps_hat for the sub-matrix of `x` (row-major, `cols` wide) at the tile's rows and columns.
template <typename Real>
std::vector<double> predict_noise(const gdit::GDiTModel<Real>& model, const std::vector<double>& x, std::size_t cols,
                                  const Tile& tile, int t, const Tensor<Real>& users, const Tensor<Real>& items) {
  numeric::NoGradGuard no_grad;
  Tensor<Real> x_t(Shape{tile.rows.size(), tile.cols.size()});
  std::size_t k = 0;
  for (auto r : tile.rows) {
    for (auto c : tile.cols) x_t[k++] = static_cast<Real>(x[r * cols + c]);
  }
  auto eps = model.forward(x_t, t, select_rows(users, tile.rows), select_rows(items, tile.cols));
  const auto& v = eps.value();
  return std::vector<double>(v.data().begin(), v.data().end());
}

std::vector<double> prior_draw(std::size_t count, std::uint64_t seed) {
  Rng rng = derive_rng(seed, {stream::prior});
  std::vector<double> x(count);
  for (auto& v : x) v = standard_normal(rng);
  return x;
}

// Known cells take a fresh draw from q(x_s | x_0); at s = 0 they take x_0 itself.
void overwrite_known(std::vector<double>& x, const ingest::DenseMatrix& known_values,
                     std::span<const std::uint8_t> known, int s, const diffusion::NoiseSchedule& schedule,
                     std::uint64_t seed) {
  if (s == 0) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (known[k]) x[k] = known_values.data[k];
    }
    return;
  }
  Rng rng = derive_rng(seed, {stream::overwrite, static_cast<std::uint64_t>(s)});
  const double ab = schedule.alpha_bar(s);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (known[k]) x[k] = diffusion::forward_sample_at(known_values.data[k], ab, standard_normal(rng));
  }
}

ingest::DenseMatrix finish(std::vector<double> x, std::size_t rows, std::size_t cols,
                           const ingest::DenseMatrix& known_values, std::span<const std::uint8_t> known,
                           const SampleConfig& config) {
  ingest::DenseMatrix out(rows, cols);
  for (std::size_t k = 0; k < x.size(); ++k) {
    out.data[k] = known[k] ? known_values.data[k] : std::clamp(x[k], config.value_lo, config.value_hi);
  }
  return out;
}

template <typename Real>
void check_inputs(const ingest::DenseMatrix& known_values, std::span<const std::uint8_t> known,
                  const Tensor<Real>& users, const Tensor<Real>& items) {
  if (known.size() != known_values.rows * known_values.cols || known_values.data.size() != known.size()) {
    throw ShapeError("known mask does not match the value matrix");
  }
  if (users.rank() != 2 || items.rank() != 2 || users.shape()[0] != known_values.rows ||
      items.shape()[0] != known_values.cols) {
    throw ShapeError("feature tables must have one row per region row and column");
  }
}

}  // namespace

template <typename Real>
ingest::DenseMatrix inpaint_patch(const gdit::GDiTModel<Real>& model, const ingest::DenseMatrix& known_values,
                                  std::span<const std::uint8_t> known, const Tensor<Real>& user_features,
                                  const Tensor<Real>& item_features, const diffusion::NoiseSchedule& schedule,
                                  const SampleConfig& config) {
  check_inputs(known_values, known, user_features, item_features);
  const std::size_t n = known_values.rows, m = known_values.cols;
  Tile whole;
  for (std::size_t r = 0; r < n; ++r) whole.rows.push_back(r);
  for (std::size_t c = 0; c < m; ++c) whole.cols.push_back(c);

  auto x = prior_draw(n * m, config.seed);
  for (int t = schedule.steps(); t >= 1; --t) {
    auto eps = predict_noise(model, x, m, whole, t, user_features, item_features);
    Rng rng = derive_rng(config.seed, {stream::reverse, static_cast<std::uint64_t>(t), 0});
    x = reverse_step(x, t, eps, schedule, rng, config);
    overwrite_known(x, known_values, known, t - 1, schedule, config.seed);
  }
  return finish(std::move(x), n, m, known_values, known, config);
}

template <typename Real>
ingest::DenseMatrix generate_patch(const gdit::GDiTModel<Real>& model, const Tensor<Real>& user_features,
                                   const Tensor<Real>& item_features, const diffusion::NoiseSchedule& schedule,
                                   const SampleConfig& config) {
  if (user_features.rank() != 2 || item_features.rank() != 2) throw ShapeError("feature tables must be matrices");
  ingest::DenseMatrix none(user_features.shape()[0], item_features.shape()[0]);
  std::vector<std::uint8_t> mask(none.data.size(), 0);
  return inpaint_patch(model, none, mask, user_features, item_features, schedule, config);
}

template <typename Real>
ingest::DenseMatrix tiled_sample(const gdit::GDiTModel<Real>& model, const ingest::DenseMatrix& known_values,
                                 std::span<const std::uint8_t> known, const Tensor<Real>& user_features,
                                 const Tensor<Real>& item_features, const diffusion::NoiseSchedule& schedule,
                                 const SampleConfig& config, const TilingObserver& observer) {
  check_inputs(known_values, known, user_features, item_features);
  const std::size_t rows = known_values.rows, cols = known_values.cols;
  if (config.tile_n > rows || config.tile_m > cols) {
    throw ParameterError("tile " + std::to_string(config.tile_n) + "x" + std::to_string(config.tile_m) +
                         " is larger than the region " + std::to_string(rows) + "x" + std::to_string(cols));
  }

  auto x = prior_draw(rows * cols, config.seed);
  for (int t = schedule.steps(); t >= 1; --t) {
    Rng tiling_rng = derive_rng(config.seed, {stream::tiling, static_cast<std::uint64_t>(t)});
    auto tiles = random_tiling(rows, cols, config.tile_n, config.tile_m, tiling_rng);
    if (observer) observer(t, tiles);

    std::vector<double> next(x.size());
    auto run_tile = [&](std::size_t k) {
      const auto& tile = tiles[k];
      auto eps = predict_noise(model, x, cols, tile, t, user_features, item_features);
      std::vector<double> local;
      local.reserve(eps.size());
      for (auto r : tile.rows) {
        for (auto c : tile.cols) local.push_back(x[r * cols + c]);
      }
      Rng rng = derive_rng(config.seed, {stream::reverse, static_cast<std::uint64_t>(t), k});
      auto stepped = reverse_step(local, t, eps, schedule, rng, config);
      std::size_t i = 0;
      for (auto r : tile.rows) {
        for (auto c : tile.cols) next[r * cols + c] = stepped[i++];
      }
    };

    const std::size_t workers = std::min(std::max<std::size_t>(config.threads, 1), tiles.size());
    if (workers == 1) {
      for (std::size_t k = 0; k < tiles.size(); ++k) run_tile(k);
    } else {
      std::atomic<std::size_t> cursor{0};
      std::vector<std::thread> pool;
      std::exception_ptr failure;
      std::mutex failure_mutex;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          try {
            for (std::size_t k = cursor++; k < tiles.size(); k = cursor++) run_tile(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      if (failure) std::rethrow_exception(failure);
    }
    x = std::move(next);
    overwrite_known(x, known_values, known, t - 1, schedule, config.seed);
  }
  return finish(std::move(x), rows, cols, known_values, known, config);
}

void write_predictions(const std::filesystem::path& path, const ingest::DenseMatrix& values,
                       std::span<const std::int64_t> user_ids, std::span<const std::int64_t> item_ids,
                       const xform::RatingScaler& scaler) {
  if (user_ids.size() != values.rows || item_ids.size() != values.cols) {
    throw ShapeError("id lists do not match the prediction matrix");
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "user_id,item_id,predicted_rating\n" << std::setprecision(6);
  for (std::size_t r = 0; r < values.rows; ++r) {
    for (std::size_t c = 0; c < values.cols; ++c) {
      out << user_ids[r] << ',' << item_ids[c] << ',' << scaler.unscale(values.at(r, c)) << '\n';
    }
  }
}

#define EDGEREC_INSTANTIATE_SAMPLER(Real)                                                                    \
  template ingest::DenseMatrix generate_patch<Real>(const gdit::GDiTModel<Real>&, const Tensor<Real>&,        \
                                                    const Tensor<Real>&, const diffusion::NoiseSchedule&,     \
                                                    const SampleConfig&);                                     \
  template ingest::DenseMatrix inpaint_patch<Real>(const gdit::GDiTModel<Real>&, const ingest::DenseMatrix&,  \
                                                   std::span<const std::uint8_t>, const Tensor<Real>&,        \
                                                   const Tensor<Real>&, const diffusion::NoiseSchedule&,      \
                                                   const SampleConfig&);                                      \
  template ingest::DenseMatrix tiled_sample<Real>(const gdit::GDiTModel<Real>&, const ingest::DenseMatrix&,   \
                                                  std::span<const std::uint8_t>, const Tensor<Real>&,         \
                                                  const Tensor<Real>&, const diffusion::NoiseSchedule&,       \
                                                  const SampleConfig&, const TilingObserver&);

EDGEREC_INSTANTIATE_SAMPLER(float)
EDGEREC_INSTANTIATE_SAMPLER(double)

}  // namespace edgerec::sample
