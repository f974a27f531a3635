#include "edgerec/eval/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <thread>

#include "edgerec/common/error.hpp"
#include "edgerec/sample/sampler.hpp"
#include "edgerec/train/trainer.hpp"

namespace edgerec::eval {

void EvalConfig::validate() const {
  if (k_values.empty()) throw ParameterError("at least one k is required");
  for (auto k : k_values) {
    if (k < 1) throw ParameterError("every k must be at least 1");
  }
  if (num_patches < 1) throw ParameterError("num_patches must be at least 1");
  if ((tile_n == 0) != (tile_m == 0)) throw ParameterError("tile needs both dimensions");
}

nlohmann::json to_json(const EvalConfig& c) {
  return {{"k_values", c.k_values},
          {"num_patches", c.num_patches},
          {"patch_n", c.patch.n},
          {"patch_m", c.patch.m},
          {"min_density", c.patch.min_density},
          {"region_rows", c.patch.region_rows},
          {"region_cols", c.patch.region_cols},
          {"max_retries", c.patch.max_retries},
          {"relevance_threshold", c.relevance_threshold},
          {"seed", c.seed},
          {"tile_n", c.tile_n},
          {"tile_m", c.tile_m}};
}

EvalConfig eval_config_from_json(const nlohmann::json& j) {
  EvalConfig c;
  c.k_values = j.value("k_values", c.k_values);
  c.num_patches = j.value("num_patches", c.num_patches);
  c.patch.n = j.value("patch_n", c.patch.n);
  c.patch.m = j.value("patch_m", c.patch.m);
  c.patch.min_density = j.value("min_density", c.patch.min_density);
  c.patch.region_rows = j.value("region_rows", c.patch.region_rows);
  c.patch.region_cols = j.value("region_cols", c.patch.region_cols);
  c.patch.max_retries = j.value("max_retries", c.patch.max_retries);
  c.relevance_threshold = j.value("relevance_threshold", c.relevance_threshold);
  c.seed = j.value("seed", c.seed);
  c.tile_n = j.value("tile_n", c.tile_n);
  c.tile_m = j.value("tile_m", c.tile_m);
  return c;
}

namespace {

std::vector<ingest::Patch> draw_patches(const ingest::InteractionMatrix& matrix, const EvalConfig& config) {
  std::vector<ingest::Patch> patches;
  for (std::size_t p = 0; p < config.num_patches; ++p) {
    Rng rng = derive_rng(config.seed, {stream::eval, p});
    patches.push_back(ingest::sample_patch(matrix, config.patch, rng));
  }
  return patches;
}

template <typename F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = cursor++; i < count; i = cursor++) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

TopKMetrics& operator+=(TopKMetrics& a, const TopKMetrics& b) {
  a.precision += b.precision;
  a.recall += b.recall;
  a.ndcg += b.ndcg;
  a.mrr += b.mrr;
  a.hitrate += b.hitrate;
  return a;
}

TopKMetrics divided(TopKMetrics a, double n) {
  if (n > 0) {
    a.precision /= n;
    a.recall /= n;
    a.ndcg /= n;
    a.mrr /= n;
    a.hitrate /= n;
  }
  return a;
}

nlohmann::json metrics_json(const TopKMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"ndcg", m.ndcg}, {"mrr", m.mrr}, {"hitrate", m.hitrate}};
}

EvalReport score(const ingest::InteractionMatrix& matrix, const std::vector<ingest::RatingRecord>& test_records,
                 const EvalConfig& config, const std::vector<ingest::Patch>& patches,
                 const std::vector<ingest::DenseMatrix>& predictions) {
  std::map<std::pair<std::size_t, std::size_t>, double> test;
  for (const auto& r : test_records) test[{r.user_id, r.item_id}] = r.rating;

  EvalReport report;
  report.k_values = config.k_values;
  report.mean_at_k.assign(config.k_values.size(), {});
  for (std::size_t p = 0; p < patches.size(); ++p) {
    const auto& patch = patches[p];
    const auto& pred = predictions[p];
    if (pred.rows != patch.n || pred.cols != patch.m) throw ShapeError("prediction does not match its patch");
    PatchEval pe;
    pe.density = patch.density();
    pe.mean_at_k.assign(config.k_values.size(), {});
    for (auto r : patch.user_rows) pe.users.push_back(matrix.row_ids[r]);
    for (auto c : patch.item_cols) pe.items.push_back(matrix.col_ids[c]);

    for (std::size_t u = 0; u < patch.n; ++u) {
      std::vector<std::size_t> candidates, relevant;
      for (std::size_t i = 0; i < patch.m; ++i) {
        if (patch.known[u * patch.m + i]) continue;
        candidates.push_back(i);
        auto it = test.find({pe.users[u], pe.items[i]});
        if (it != test.end() && it->second >= config.relevance_threshold) relevant.push_back(i);
      }
      if (relevant.empty()) continue;
      std::span<const double> row(pred.data.data() + u * patch.m, patch.m);
      auto ranked = rank_by_score(row, candidates);
      UserEval ue{p, pe.users[u], candidates.size(), relevant.size(), {}};
      for (std::size_t k = 0; k < config.k_values.size(); ++k) {
        ue.at_k.push_back(topk_metrics(ranked, relevant, config.k_values[k]));
        pe.mean_at_k[k] += ue.at_k.back();
        report.mean_at_k[k] += ue.at_k.back();
      }
      ++pe.users_evaluated;
      report.users.push_back(std::move(ue));
    }
    for (auto& m : pe.mean_at_k) m = divided(m, static_cast<double>(pe.users_evaluated));
    report.patches.push_back(std::move(pe));
  }
  report.n_users = report.users.size();
  if (report.n_users == 0) {
    throw Error("no patch user has a relevant test item among its candidates; "
                "try larger patches or a lower relevance threshold");
  }
  for (auto& m : report.mean_at_k) m = divided(m, static_cast<double>(report.n_users));
  return report;
}

}  // namespace

EvalReport evaluate_predictions(const ingest::InteractionMatrix& train_matrix,
                                const std::vector<ingest::RatingRecord>& test_records, const EvalConfig& config,
                                const Predictor& predict) {
  config.validate();
  auto patches = draw_patches(train_matrix, config);
  std::vector<ingest::DenseMatrix> predictions(patches.size());
  parallel_for(patches.size(), config.threads, [&](std::size_t p) { predictions[p] = predict(patches[p], p); });
  return score(train_matrix, test_records, config, patches, predictions);
}

template <typename Real>
EvalReport evaluate_model(const gdit::GDiTModel<Real>& model, const ingest::InteractionMatrix& train_matrix,
                          const ingest::FeatureTable& features, const std::vector<ingest::RatingRecord>& test_records,
                          const diffusion::NoiseSchedule& schedule, const xform::RatingScaler& scaler,
                          const EvalConfig& config) {
  config.validate();
  sample::SampleConfig sc;
  std::tie(sc.value_lo, sc.value_hi) = scaler.value_range();
  sc.threads = config.threads;

  if (config.tile_n == 0) {
    EvalConfig per_patch = config;
    return evaluate_predictions(train_matrix, test_records, per_patch, [&](const ingest::Patch& patch, std::size_t p) {
      auto ex = train::make_example<Real>(patch, train_matrix, features);
      ingest::DenseMatrix known(patch.n, patch.m);
      known.data = patch.values;
      sample::SampleConfig local = sc;
      local.threads = 1;
      local.seed = derive_rng(config.seed, {stream::eval, p, 1})();
      return sample::inpaint_patch(model, known, patch.known, ex.user_features, ex.item_features, schedule, local);
    });
  }

  // One tiled pass over the eligible region; patches read their cells from it.
  const std::size_t rows = config.patch.region_rows ? config.patch.region_rows : train_matrix.rows;
  const std::size_t cols = config.patch.region_cols ? config.patch.region_cols : train_matrix.cols;
  std::vector<std::size_t> row_index(rows), col_index(cols);
  for (std::size_t r = 0; r < rows; ++r) row_index[r] = r;
  for (std::size_t c = 0; c < cols; ++c) col_index[c] = c;
  auto region = ingest::extract_patch(train_matrix, row_index, col_index);
  auto ex = train::make_example<Real>(region, train_matrix, features);
  ingest::DenseMatrix known(rows, cols);
  known.data = region.values;
  sc.tile_n = config.tile_n;
  sc.tile_m = config.tile_m;
  sc.seed = derive_rng(config.seed, {stream::eval, 0, 2})();
  auto full = sample::tiled_sample(model, known, region.known, ex.user_features, ex.item_features, schedule, sc);

  EvalConfig serial = config;
  serial.threads = 1;
  return evaluate_predictions(train_matrix, test_records, serial, [&](const ingest::Patch& patch, std::size_t) {
    ingest::DenseMatrix out(patch.n, patch.m);
    for (std::size_t r = 0; r < patch.n; ++r) {
      for (std::size_t c = 0; c < patch.m; ++c) out.at(r, c) = full.at(patch.user_rows[r], patch.item_cols[c]);
    }
    return out;
  });
}

BaselineComparison compare_to_random(const EvalReport& report, std::size_t k, std::size_t resamples,
                                     std::uint64_t seed) {
  auto pos = std::find(report.k_values.begin(), report.k_values.end(), k);
  if (pos == report.k_values.end()) throw ParameterError("k=" + std::to_string(k) + " was not evaluated");
  const std::size_t slot = static_cast<std::size_t>(pos - report.k_values.begin());
  const std::size_t n = report.users.size();
  if (n == 0 || resamples == 0) throw ParameterError("baseline comparison needs users and resamples");

  std::vector<double> diff(n);
  BaselineComparison out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = report.users[i];
    const double c = static_cast<double>(u.candidates);
    const double expected = static_cast<double>(std::min(k, u.candidates)) * static_cast<double>(u.relevant) /
                            (c * static_cast<double>(k));
    out.model_mean += u.at_k[slot].precision;
    out.random_mean += expected;
    diff[i] = u.at_k[slot].precision - expected;
  }
  out.model_mean /= static_cast<double>(n);
  out.random_mean /= static_cast<double>(n);
  out.mean_difference = out.model_mean - out.random_mean;

  Rng rng = derive_rng(seed, {stream::eval, 99});
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += diff[pick(rng)];
    m = total / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  out.lower_95 = means[static_cast<std::size_t>(0.025 * static_cast<double>(resamples - 1))];
  return out;
}

void write_metrics_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "k,precision,recall,ndcg,mrr,hitrate,n_users\n" << std::setprecision(9);
  for (std::size_t k = 0; k < report.k_values.size(); ++k) {
    const auto& m = report.mean_at_k[k];
    out << report.k_values[k] << ',' << m.precision << ',' << m.recall << ',' << m.ndcg << ',' << m.mrr << ','
        << m.hitrate << ',' << report.n_users << '\n';
  }
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["k_values"] = report.k_values;
  j["n_users"] = report.n_users;
  nlohmann::json mean = nlohmann::json::array();
  for (const auto& m : report.mean_at_k) mean.push_back(metrics_json(m));
  j["mean"] = mean;
  nlohmann::json patches = nlohmann::json::array();
  for (const auto& p : report.patches) {
    nlohmann::json pj;
    pj["users"] = p.users;
    pj["items"] = p.items;
    pj["density"] = p.density;
    pj["users_evaluated"] = p.users_evaluated;
    nlohmann::json pm = nlohmann::json::array();
    for (const auto& m : p.mean_at_k) pm.push_back(metrics_json(m));
    pj["mean"] = pm;
    patches.push_back(pj);
  }
  j["patches"] = patches;
  return j;
}

template EvalReport evaluate_model<float>(const gdit::GDiTModel<float>&, const ingest::InteractionMatrix&,
                                          const ingest::FeatureTable&, const std::vector<ingest::RatingRecord>&,
                                          const diffusion::NoiseSchedule&, const xform::RatingScaler&,
                                          const EvalConfig&);
template EvalReport evaluate_model<double>(const gdit::GDiTModel<double>&, const ingest::InteractionMatrix&,
                                           const ingest::FeatureTable&, const std::vector<ingest::RatingRecord>&,
                                           const diffusion::NoiseSchedule&, const xform::RatingScaler&,
                                           const EvalConfig&);

}  // namespace edgerec::eval
