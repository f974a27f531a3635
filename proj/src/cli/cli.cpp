#include "edgerec/cli/cli.hpp"

#include <boost/uuid/detail/sha1.hpp>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include "edgerec/cli/gradient_suite.hpp"
#include "edgerec/common/error.hpp"
#include "edgerec/eval/evaluator.hpp"
#include "edgerec/ingest/density.hpp"
#include "edgerec/ingest/fixture.hpp"
#include "edgerec/sample/sampler.hpp"
#include "edgerec/train/trainer.hpp"

namespace edgerec::cli {

using nlohmann::json;
namespace fs = std::filesystem;

ingest::IngestedData ingest_dataset(const std::string& name, const fs::path& dir, double test_fraction,
                                    xform::TransformMode mode, const std::optional<xform::RatingScaler>& scaler) {
  auto dataset = ingest::load_movielens(name, dir);
  auto [train_set, test_set] = ingest::time_split(dataset, test_fraction);
  ingest::IngestedData data;
  if (scaler) {
    data.scaler = *scaler;
  } else if (mode == xform::TransformMode::quantile) {
    std::vector<double> ratings;
    for (const auto& r : train_set.records) ratings.push_back(r.rating);
    data.scaler = xform::RatingScaler::quantile(dataset.rating_scale.first, dataset.rating_scale.second,
                                                xform::fit_quantile(ratings));
  } else {
    data.scaler = xform::RatingScaler::linear(dataset.rating_scale.first, dataset.rating_scale.second);
  }
  data.train_matrix = ingest::build_matrix(train_set, data.scaler);
  data.features = ingest::featurize(dataset);
  data.test_records = std::move(test_set.records);
  data.user_raw_ids = dataset.user_raw_ids;
  data.item_raw_ids = dataset.item_raw_ids;
  return data;
}

std::string content_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string header = "blob " + std::to_string(content.size());
  header.push_back('\0');
  boost::uuids::detail::sha1 sha;
  sha.process_bytes(header.data(), header.size());
  sha.process_bytes(content.data(), content.size());
  boost::uuids::detail::sha1::digest_type digest;
  sha.get_digest(digest);
  std::ostringstream out;
  for (unsigned word : digest) out << std::hex << std::setw(8) << std::setfill('0') << word;
  return out.str();
}

namespace {

std::string utc_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& text, const char* what) {
  auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    auto n = std::stoul(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    auto m = std::stoul(text.substr(x + 1), &used);
    if (used != text.size() - x - 1 || n == 0 || m == 0) throw std::invalid_argument(text);
    return {n, m};
  } catch (const std::exception&) {
    throw CLI::ValidationError(what, "expected NxM with positive N and M, got '" + text + "'");
  }
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    try {
      out.push_back(std::stoul(token));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--k", "expected a comma-separated list of integers, got '" + text + "'");
    }
  }
  return out;
}

// Options whose values may also come from a --config JSON file. Flags given
// on the command line win over the file.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON file with option values (flags override it)");
  }

  template <typename T>
  CLI::Option* add(const std::string& flag, const std::string& key, T& value, const std::string& help) {
    auto* opt = app_->add_option(flag, value, help)->capture_default_str();
    entries_.push_back({opt, key, [&value, key](const json& j) { value = j.at(key).get<T>(); },
                        [&value] { return json(value); }});
    return opt;
  }

  CLI::Option* flag(const std::string& flag, const std::string& key, bool& value, const std::string& help) {
    auto* opt = app_->add_flag(flag, value, help);
    entries_.push_back({opt, key, [&value, key](const json& j) { value = j.at(key).get<bool>(); },
                        [&value] { return json(value); }});
    return opt;
  }

  void apply_config_file() {
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + config_path_);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ValidationError("--config", e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = false;
      for (auto& e : entries_) known = known || e.key == it.key();
      if (!known) throw CLI::ValidationError("--config", "unknown key '" + it.key() + "'");
    }
    for (auto& e : entries_) {
      if (e.option->count() == 0 && j.contains(e.key)) {
        try {
          e.apply(j);
        } catch (const json::exception&) {
          throw CLI::ValidationError("--config", "bad value for '" + e.key + "'");
        }
      }
    }
  }

  json resolved() const {
    json j = json::object();
    for (const auto& e : entries_) j[e.key] = e.get();
    return j;
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::string key;
    std::function<void(const json&)> apply;
    std::function<json()> get;
  };
  CLI::App* app_;
  std::string config_path_;
  std::vector<Entry> entries_;
};

std::string default_data_dir() {
  const char* env = std::getenv("EDGE_REC_DATA_DIR");
  return env ? env : "";
}

std::size_t default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct DataOptions {
  std::string cache;
  std::string dataset = "ml-100k";
  std::string data_dir = default_data_dir();
  double test_fraction = 0.1;
  std::string transform = "linear";
  double label_density = 0.0;

  void add_to(Options& o, bool with_transform) {
    o.add("--cache", "cache", cache, "ingest cache directory (instead of --dataset/--data-dir)");
    o.add("--dataset", "dataset", dataset, "ml-100k or ml-1m");
    o.add("--data-dir", "data_dir", data_dir, "raw dataset directory (default: $EDGE_REC_DATA_DIR)");
    o.add("--test-fraction", "test_fraction", test_fraction, "held-out fraction of the time-ordered records");
    if (with_transform) {
      o.add("--transform", "transform", transform, "rating transform: linear or quantile")
          ->check(CLI::IsMember({"linear", "quantile"}));
    }
    o.add("--label-density", "label_density", label_density,
          "restrict patches to the largest density-sorted corner with this known fraction (0 = whole matrix)");
  }

  std::vector<fs::path> input_files() const {
    if (!cache.empty()) return {fs::path(cache) / "manifest.json", fs::path(cache) / "arrays.bin"};
    fs::path dir(data_dir);
    if (dataset == "ml-1m") return {dir / "ratings.dat", dir / "users.dat", dir / "movies.dat"};
    return {dir / "u.data", dir / "u.user", dir / "u.item"};
  }

  ingest::IngestedData load(const std::optional<xform::RatingScaler>& scaler) const {
    if (!cache.empty()) {
      auto data = ingest::load_cache(cache);
      if (scaler && xform::to_json(*scaler) != xform::to_json(data.scaler)) {
        throw ConfigMismatchError("the cache was scaled differently from the checkpoint");
      }
      return data;
    }
    if (data_dir.empty()) throw ParameterError("no data: pass --cache or --data-dir (or set EDGE_REC_DATA_DIR)");
    return ingest_dataset(dataset, data_dir, test_fraction, xform::parse_transform_mode(transform), scaler);
  }

  /// Sorts the matrix by density and returns the dense corner's size when a
  /// label density is configured.
  std::pair<std::size_t, std::size_t> restrict(ingest::InteractionMatrix& matrix) const {
    if (label_density <= 0.0) return {0, 0};
    matrix = ingest::density_sort(matrix);
    std::size_t k = ingest::dense_corner_size(matrix, label_density);
    if (k == 0) throw DensityInfeasibleError("no corner reaches label density " + std::to_string(label_density), 0.0);
    return {k, k};
  }
};

class Manifest {
 public:
  Manifest(std::string command, int argc, char** argv) : started_(utc_now()) {
    j_["command"] = std::move(command);
    j_["argv"] = std::vector<std::string>(argv, argv + argc);
    j_["started_at"] = started_;
    j_["inputs"] = json::object();
  }
  void config(json c) { j_["config"] = std::move(c); }
  void seed(std::uint64_t s) { j_["seed"] = s; }
  void input(const fs::path& p) {
    if (fs::exists(p)) j_["inputs"][p.string()] = content_hash(p);
  }
  void write(const fs::path& path) {
    j_["finished_at"] = utc_now();
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j_.dump(2) << '\n';
  }

 private:
  std::string started_;
  json j_;
};

fs::path resolve_checkpoint(const std::string& text) {
  fs::path p(text);
  if (fs::is_directory(p)) return p / "final.bin";
  if (!fs::exists(p) && fs::exists(fs::path(text + ".bin"))) return text + ".bin";
  return p;
}

template <typename Real>
void train_with(const ingest::IngestedData& data, const gdit::GDiTConfig& model_config,
                const diffusion::NoiseSchedule& schedule, const train::TrainConfig& config, const fs::path& out) {
  train::TrainingInputs inputs{data.train_matrix, data.features, data.scaler};
  train::TrainOutputs outputs;
  outputs.directory = out;
  const std::uint64_t every = std::max<std::uint64_t>(1, config.iterations / 20);
  outputs.on_step = [&](std::uint64_t it, const train::StepLoss& loss) {
    if (it % every == 0 || it == 1) {
      std::cerr << "iter " << it << "/" << config.iterations << "  loss " << loss.total << "  mse " << loss.mse
                << "  bpr " << loss.bpr << '\n';
    }
  };
  train::run_training<Real>(inputs, model_config, schedule, config, outputs);
}

int cmd_train(Options& opts, DataOptions& data_opts, const json& extra, int argc, char** argv,
              train::TrainConfig config, gdit::GDiTConfig model_config, const std::string& patch,
              const std::string& precision, const std::string& schedule_kind, int steps, double beta_start,
              double beta_end, const std::string& out) {
  Manifest manifest("train", argc, argv);
  for (const auto& f : data_opts.input_files()) manifest.input(f);
  auto data = data_opts.load(std::nullopt);
  std::tie(config.patch.n, config.patch.m) = parse_dims(patch, "--patch");
  std::tie(config.patch.region_rows, config.patch.region_cols) = data_opts.restrict(data.train_matrix);
  model_config.d_user_in = data.features.user_features.cols;
  model_config.d_item_in = data.features.item_features.cols;
  auto schedule = schedule_kind == "cosine" ? diffusion::NoiseSchedule::cosine(steps)
                                            : diffusion::NoiseSchedule::linear(steps, beta_start, beta_end);

  json resolved = opts.resolved();
  resolved.update(extra);
  resolved["model"] = gdit::to_json(model_config);
  resolved["train"] = train::to_json(config);
  manifest.config(resolved);
  manifest.seed(config.seed);

  if (precision == "double") {
    train_with<double>(data, model_config, schedule, config, out);
  } else {
    train_with<float>(data, model_config, schedule, config, out);
  }
  manifest.write(fs::path(out) / "manifest.json");
  std::cout << "wrote " << (fs::path(out) / "final.bin").string() << '\n';
  return 0;
}

template <typename Real>
int sample_with(const train::Checkpoint& ckpt, ingest::IngestedData& data, const DataOptions& data_opts,
                const std::string& patch_text, const std::string& tile_text, double min_density, std::uint64_t seed,
                std::size_t threads, const fs::path& out) {
  auto model = train::model_from_checkpoint<Real>(ckpt);
  auto region = data_opts.restrict(data.train_matrix);
  sample::SampleConfig sc;
  sc.seed = seed;
  sc.threads = threads;
  std::tie(sc.value_lo, sc.value_hi) = ckpt.scaler.value_range();

  ingest::Patch patch;
  if (!tile_text.empty()) {
    std::tie(sc.tile_n, sc.tile_m) = parse_dims(tile_text, "--tile");
    const std::size_t rows = region.first ? region.first : data.train_matrix.rows;
    const std::size_t cols = region.second ? region.second : data.train_matrix.cols;
    std::vector<std::size_t> r(rows), c(cols);
    for (std::size_t i = 0; i < rows; ++i) r[i] = i;
    for (std::size_t i = 0; i < cols; ++i) c[i] = i;
    patch = ingest::extract_patch(data.train_matrix, r, c);
  } else {
    ingest::PatchRequest req;
    std::tie(req.n, req.m) = parse_dims(patch_text, "--patch");
    req.min_density = min_density;
    std::tie(req.region_rows, req.region_cols) = region;
    Rng rng = derive_rng(seed, {stream::eval});
    patch = ingest::sample_patch(data.train_matrix, req, rng);
  }
  auto ex = train::make_example<Real>(patch, data.train_matrix, data.features);
  ingest::DenseMatrix known(patch.n, patch.m);
  known.data = patch.values;
  auto result = tile_text.empty()
                    ? sample::inpaint_patch(model, known, patch.known, ex.user_features, ex.item_features,
                                            ckpt.schedule, sc)
                    : sample::tiled_sample(model, known, patch.known, ex.user_features, ex.item_features,
                                           ckpt.schedule, sc);
  std::vector<std::int64_t> users, items;
  for (auto r : patch.user_rows) users.push_back(data.user_raw_ids[data.train_matrix.row_ids[r]]);
  for (auto c : patch.item_cols) items.push_back(data.item_raw_ids[data.train_matrix.col_ids[c]]);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  sample::write_predictions(out, result, users, items, ckpt.scaler);
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

template <typename Real>
eval::EvalReport evaluate_with(const train::Checkpoint& ckpt, const ingest::IngestedData& data,
                               const eval::EvalConfig& config) {
  auto model = train::model_from_checkpoint<Real>(ckpt);
  return eval::evaluate_model(model, data.train_matrix, data.features, data.test_records, ckpt.schedule,
                              ckpt.scaler, config);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Diffusion over user-item interaction matrices: ingest, train, sample, evaluate."};
  app.name("edge-rec");
  app.require_subcommand(1);

  // fixture
  auto* fixture_cmd = app.add_subcommand("fixture", "write the four-user toy rating graph as ML-100k files");
  std::string fixture_out = "fixture";
  fixture_cmd->add_option("--out", fixture_out, "output directory")->capture_default_str();

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "parse, split, scale and cache a dataset");
  Options ingest_opts(ingest_cmd);
  DataOptions ingest_data;
  std::string ingest_out = "cache";
  ingest_opts.add("--dataset", "dataset", ingest_data.dataset, "ml-100k or ml-1m");
  ingest_opts.add("--data-dir", "data_dir", ingest_data.data_dir, "raw dataset directory (default: $EDGE_REC_DATA_DIR)");
  ingest_opts.add("--test-fraction", "test_fraction", ingest_data.test_fraction, "held-out fraction");
  ingest_opts.add("--transform", "transform", ingest_data.transform, "linear or quantile")
      ->check(CLI::IsMember({"linear", "quantile"}));
  ingest_opts.add("--out", "out", ingest_out, "cache directory");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a denoiser on random patches");
  Options train_opts(train_cmd);
  DataOptions train_data;
  train_data.add_to(train_opts, true);
  train::TrainConfig tc;
  gdit::GDiTConfig mc;
  std::string train_patch = "50x50", train_precision = "single", train_out = "ckpt", schedule_kind = "linear";
  int steps = 1000;
  double beta_start = 1e-4, beta_end = 0.02;
  train_opts.add("--iters", "iterations", tc.iterations, "optimizer steps");
  train_opts.add("--batch", "batch_size", tc.batch_size, "patches per step");
  train_opts.add("--patch", "patch", train_patch, "patch size NxM");
  train_opts.add("--min-density", "min_density", tc.patch.min_density, "minimum known fraction per patch");
  train_opts.add("--lr", "learning_rate", tc.learning_rate, "AdamW learning rate");
  train_opts.add("--weight-decay", "weight_decay", tc.weight_decay, "decoupled weight decay");
  train_opts.add("--bpr-weight", "bpr_weight", tc.bpr_weight, "weight of the BPR term");
  train_opts.add("--bpr-pairs", "bpr_pairs_per_user", tc.bpr_pairs_per_user, "BPR pairs per patch user");
  train_opts.flag("--mask-unknown", "mask_unknown", tc.mask_unknown_in_loss, "exclude unknown cells from the loss");
  train_opts.add("--seed", "seed", tc.seed, "random seed");
  train_opts.add("--checkpoint-every", "checkpoint_every", tc.checkpoint_every, "iterations between checkpoints");
  train_opts.add("--d-model", "d_model", mc.d_model, "model width");
  train_opts.add("--heads", "n_heads", mc.n_heads, "attention heads");
  train_opts.add("--blocks", "n_blocks", mc.n_blocks, "GDiT blocks");
  train_opts.add("--mlp-ratio", "mlp_ratio", mc.mlp_ratio, "MLP expansion");
  train_opts.add("--steps", "steps", steps, "diffusion steps T");
  train_opts.add("--schedule", "schedule", schedule_kind, "noise schedule: linear or cosine")
      ->check(CLI::IsMember({"linear", "cosine"}));
  train_opts.add("--beta-start", "beta_start", beta_start, "first beta of the linear schedule");
  train_opts.add("--beta-end", "beta_end", beta_end, "last beta of the linear schedule");
  train_opts.add("--precision", "precision", train_precision, "single or double")
      ->check(CLI::IsMember({"single", "double"}));
  train_opts.add("--out", "out", train_out, "output directory");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "complete a patch (or a tiled region) from a checkpoint");
  Options sample_opts(sample_cmd);
  DataOptions sample_data;
  sample_data.add_to(sample_opts, false);
  std::string sample_ckpt, sample_patch = "50x50", sample_tile, sample_out = "predictions.csv",
                           sample_precision = "single";
  double sample_min_density = 0.0;
  std::uint64_t sample_seed = 0;
  std::size_t sample_threads = default_threads();
  sample_opts.add("--ckpt", "ckpt", sample_ckpt, "checkpoint file or training output directory")->required();
  sample_opts.add("--patch", "patch", sample_patch, "patch size NxM");
  sample_opts.add("--tile", "tile", sample_tile, "tile size NxM: denoise the whole region with random tiles");
  sample_opts.add("--min-density", "min_density", sample_min_density, "minimum known fraction of the patch");
  sample_opts.add("--seed", "seed", sample_seed, "random seed");
  sample_opts.add("--precision", "precision", sample_precision, "single or double")
      ->check(CLI::IsMember({"single", "double"}));
  sample_opts.add("--threads", "threads", sample_threads, "worker threads");
  sample_opts.add("--out", "out", sample_out, "predictions CSV");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "top-K metrics of inpainted patches against test ratings");
  Options eval_opts(eval_cmd);
  DataOptions eval_data;
  eval_data.add_to(eval_opts, false);
  eval::EvalConfig ec;
  std::string eval_ckpt, eval_patch = "50x50", eval_tile, eval_k = "1,5,10,20,50", eval_out = "eval",
                         eval_precision = "single";
  ec.threads = default_threads();
  eval_opts.add("--ckpt", "ckpt", eval_ckpt, "checkpoint file or training output directory")->required();
  eval_opts.add("--patch", "patch", eval_patch, "patch size NxM");
  eval_opts.add("--num-patches", "num_patches", ec.num_patches, "patches to evaluate");
  eval_opts.add("--k", "k", eval_k, "comma-separated cutoffs");
  eval_opts.add("--min-density", "min_density", ec.patch.min_density, "minimum known fraction per patch");
  eval_opts.add("--threshold", "relevance_threshold", ec.relevance_threshold, "relevant test rating threshold");
  eval_opts.add("--tile", "tile", eval_tile, "tile size NxM: predict with one tiled pass over the region");
  eval_opts.add("--seed", "seed", ec.seed, "random seed");
  eval_opts.add("--precision", "precision", eval_precision, "single or double")
      ->check(CLI::IsMember({"single", "double"}));
  eval_opts.add("--threads", "threads", ec.threads, "worker threads");
  eval_opts.add("--out", "out", eval_out, "output directory");

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference checks of every differentiable component");
  std::uint64_t grad_seed = 7;
  grad_cmd->add_option("--seed", grad_seed, "random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (ingest_cmd->parsed()) ingest_opts.apply_config_file();
    if (train_cmd->parsed()) train_opts.apply_config_file();
    if (sample_cmd->parsed()) sample_opts.apply_config_file();
    if (eval_cmd->parsed()) eval_opts.apply_config_file();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << "\n" << app.help();
    return 1;
  }

  try {
    if (fixture_cmd->parsed()) {
      ingest::write_fixture_ml100k(fixture_out);
      std::cout << "wrote " << fixture_out << "/u.data, u.user, u.item\n";
      return 0;
    }

    if (ingest_cmd->parsed()) {
      Manifest manifest("ingest", argc, argv);
      for (const auto& f : ingest_data.input_files()) manifest.input(f);
      manifest.config(ingest_opts.resolved());
      if (ingest_data.data_dir.empty()) throw ParameterError("no data: pass --data-dir or set EDGE_REC_DATA_DIR");
      auto data = ingest_dataset(ingest_data.dataset, ingest_data.data_dir, ingest_data.test_fraction,
                                 xform::parse_transform_mode(ingest_data.transform));
      ingest::save_cache(data, ingest_out);
      manifest.write(fs::path(ingest_out) / "run.json");
      std::cout << "cached " << data.train_matrix.rows << " users x " << data.train_matrix.cols << " items, "
                << data.train_matrix.known_count() << " train / " << data.test_records.size() << " test ratings in "
                << ingest_out << '\n';
      return 0;
    }

    if (train_cmd->parsed()) {
      tc.validate();
      mc.validate();
      return cmd_train(train_opts, train_data, json::object(), argc, argv, tc, mc, train_patch, train_precision,
                       schedule_kind, steps, beta_start, beta_end, train_out);
    }

    if (sample_cmd->parsed()) {
      auto ckpt_path = resolve_checkpoint(sample_ckpt);
      Manifest manifest("sample", argc, argv);
      manifest.input(ckpt_path);
      for (const auto& f : sample_data.input_files()) manifest.input(f);
      manifest.config(sample_opts.resolved());
      manifest.seed(sample_seed);
      auto ckpt = train::load_checkpoint(ckpt_path);
      auto data = sample_data.load(ckpt.scaler);
      int rc = sample_precision == "double"
                   ? sample_with<double>(ckpt, data, sample_data, sample_patch, sample_tile, sample_min_density,
                                         sample_seed, sample_threads, sample_out)
                   : sample_with<float>(ckpt, data, sample_data, sample_patch, sample_tile, sample_min_density,
                                        sample_seed, sample_threads, sample_out);
      manifest.write(fs::path(sample_out).string() + ".manifest.json");
      return rc;
    }

    if (eval_cmd->parsed()) {
      auto ckpt_path = resolve_checkpoint(eval_ckpt);
      Manifest manifest("evaluate", argc, argv);
      manifest.input(ckpt_path);
      for (const auto& f : eval_data.input_files()) manifest.input(f);
      std::tie(ec.patch.n, ec.patch.m) = parse_dims(eval_patch, "--patch");
      if (!eval_tile.empty()) std::tie(ec.tile_n, ec.tile_m) = parse_dims(eval_tile, "--tile");
      ec.k_values = parse_list(eval_k);
      ec.validate();
      auto ckpt = train::load_checkpoint(ckpt_path);
      auto data = eval_data.load(ckpt.scaler);
      std::tie(ec.patch.region_rows, ec.patch.region_cols) = eval_data.restrict(data.train_matrix);
      json resolved = eval_opts.resolved();
      resolved["eval"] = eval::to_json(ec);
      manifest.config(resolved);
      manifest.seed(ec.seed);

      auto report = eval_precision == "double" ? evaluate_with<double>(ckpt, data, ec)
                                               : evaluate_with<float>(ckpt, data, ec);
      fs::create_directories(eval_out);
      eval::write_metrics_csv(report, fs::path(eval_out) / "metrics.csv");
      std::ofstream(fs::path(eval_out) / "report.json") << eval::report_to_json(report).dump(2) << '\n';
      manifest.write(fs::path(eval_out) / "manifest.json");
      std::cout << "k  precision  recall  ndcg  mrr  hitrate  (" << report.n_users << " users)\n";
      for (std::size_t k = 0; k < report.k_values.size(); ++k) {
        const auto& m = report.mean_at_k[k];
        std::cout << report.k_values[k] << "  " << m.precision << "  " << m.recall << "  " << m.ndcg << "  " << m.mrr
                  << "  " << m.hitrate << '\n';
      }
      return 0;
    }

    if (grad_cmd->parsed()) {
      auto results = run_gradient_suite(grad_seed);
      bool ok = true;
      for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(22) << r.name << " double "
                  << std::scientific << std::setprecision(2) << r.error_double << "  single " << r.error_single
                  << std::defaultfloat << '\n';
        ok = ok && r.passed;
      }
      return ok ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "edge-rec: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace edgerec::cli
