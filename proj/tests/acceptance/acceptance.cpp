// One PASS/FAIL/SKIPPED line per acceptance criterion. Arguments select
// criteria by number; none runs all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles/attention_oracle.hpp"
#include "edgerec/cli/cli.hpp"
#include "edgerec/cli/gradient_suite.hpp"
#include "edgerec/common/rng.hpp"
#include "edgerec/diffusion/schedule.hpp"
#include "edgerec/eval/evaluator.hpp"
#include "edgerec/gdit/model.hpp"
#include "edgerec/ingest/density.hpp"
#include "edgerec/ingest/features.hpp"
#include "edgerec/ingest/matrix.hpp"
#include "edgerec/sample/sampler.hpp"
#include "edgerec/train/checkpoint.hpp"
#include "edgerec/train/trainer.hpp"

using namespace edgerec;
namespace fs = std::filesystem;
using numeric::Shape;
using numeric::Tensor;
using numeric::Var;

namespace {

enum class Status { pass, fail, skipped, warn };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;  // 0: no budget
  std::function<Outcome()> run;
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

template <typename Real>
Tensor<Real> random_tensor(Shape shape, Rng& rng, double sd = 1.0) {
  Tensor<Real> t(shape);
  std::normal_distribution<double> n(0.0, sd);
  for (auto& v : t.storage()) v = static_cast<Real>(n(rng));
  return t;
}

template <typename Real>
double max_abs_diff(const Tensor<Real>& a, const oracle::Mat& b) {
  if (a.size() != b.v.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b.v[i]));
  return worst;
}

Outcome rcsa_oracle() {
  Rng rng(101);
  const std::size_t d = 16, heads = 4;
  double worst_self = 0.0, worst_cross = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 8, m = 1 + rng() % 12;
    auto p = gdit::make_axial_attention<float>(d, rng);
    auto x = random_tensor<float>({n, m, d}, rng);
    auto u = random_tensor<float>({n, d}, rng), it = random_tensor<float>({m, d}, rng);
    auto self = gdit::rcsa_self(Var<float>::constant(x), p, heads).value();
    worst_self = std::max(worst_self, max_abs_diff(self, oracle::rcsa(oracle::from_tensor(x, n * m, d), n, m, p, heads)));
    auto cross = gdit::rcs_cross(Var<float>::constant(x), Var<float>::constant(u), Var<float>::constant(it), p, heads)
                     .value();
    auto ref = oracle::cross(oracle::from_tensor(x, n * m, d), oracle::from_tensor(u, n, d),
                             oracle::from_tensor(it, m, d), p, heads);
    worst_cross = std::max(worst_cross, max_abs_diff(cross, ref));
  }
  bool ok = worst_self <= 1e-5 && worst_cross <= 1e-5;
  return {ok ? Status::pass : Status::fail,
          "max |diff| self " + fmt(worst_self) + ", cross " + fmt(worst_cross) + " (tol 1e-5)"};
}

Outcome gradient_suite() {
  auto results = cli::run_gradient_suite(7);
  double worst_double = 0.0, worst_single = 0.0;
  std::string failed;
  for (const auto& r : results) {
    worst_double = std::max(worst_double, r.error_double);
    worst_single = std::max(worst_single, r.error_single);
    if (!r.passed) failed += " " + r.name;
  }
  std::string detail = std::to_string(results.size()) + " cases, worst double " + fmt(worst_double) + ", single " +
                       fmt(worst_single);
  if (!failed.empty()) return {Status::fail, detail + "; failing:" + failed};
  return {Status::pass, detail};
}

Outcome forward_statistics() {
  auto s = diffusion::NoiseSchedule::linear(1000, 1e-4, 0.02);
  int t = 1;
  for (int k = 1; k <= s.steps(); ++k)
    if (std::abs(s.alpha_bar(k) - 0.5) < std::abs(s.alpha_bar(t) - 0.5)) t = k;
  const double ab = s.alpha_bar(t), x0 = 0.7;
  Rng rng = derive_rng(3, {stream::prior});
  const int draws = 100000;
  std::vector<double> xs(draws);
  for (auto& x : xs) x = diffusion::forward_sample_at(x0, ab, standard_normal(rng));
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / draws;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= draws - 1;
  const double want_mean = std::sqrt(ab) * x0, want_var = 1.0 - ab;
  const double mean_err = std::abs(mean - want_mean) / want_mean, var_err = std::abs(var - want_var) / want_var;
  bool ok = mean_err <= 0.01 && var_err <= 0.02;
  return {ok ? Status::pass : Status::fail, "t=" + std::to_string(t) + " abar=" + fmt(ab, 4) + ", mean rel err " +
                                                fmt(mean_err) + ", var rel err " + fmt(var_err)};
}

Outcome exact_identities() {
  std::vector<std::string> failures;
  auto s = diffusion::NoiseSchedule::linear(1000, 1e-4, 0.02);
  Rng rng(404);

  double worst_ulps = 0.0;
  for (int trial = 0; trial < 20000; ++trial) {
    const int t = 1 + static_cast<int>(rng() % 1000);
    std::vector<double> x0{std::uniform_real_distribution<double>(-1.0, 1.0)(rng)}, eps{standard_normal(rng)};
    auto back = diffusion::predict_x0(diffusion::forward_sample(x0, t, eps, s), eps, t, s, false)[0];
    // One ulp of the largest intermediate, x_t / sqrt(abar).
    const double scale = std::max({std::abs(x0[0]), std::abs(eps[0]), 1.0}) / std::sqrt(s.alpha_bar(t));
    worst_ulps = std::max(worst_ulps, std::abs(back - x0[0]) / (std::numeric_limits<double>::epsilon() * scale));
  }
  if (worst_ulps > 4.0) failures.push_back("predict_x0 identity " + fmt(worst_ulps) + " ulp");

  if (s.beta_tilde(1) != 0.0) failures.push_back("posterior variance at t=1 is nonzero");
  bool recurrence = s.alpha_bar(0) == 1.0;
  for (int t = 1; t <= s.steps(); ++t) recurrence = recurrence && s.alpha_bar(t) == s.alpha_bar(t - 1) * s.alpha(t);
  if (!recurrence) failures.push_back("alpha_bar recurrence");

  gdit::GDiTConfig mc;
  mc.d_model = 16;
  mc.d_user_in = 3;
  mc.d_item_in = 2;
  for (bool single : {false, true}) {
    auto dir = fs::temp_directory_path() / ("edgerec_acceptance_ckpt_" + std::to_string(rng()));
    fs::create_directories(dir);
    train::Checkpoint ckpt;
    if (single) {
      gdit::GDiTModel<float> model(mc, rng);
      ckpt = train::make_checkpoint(model, s, xform::RatingScaler::linear(1.0, 5.0), 7);
    } else {
      gdit::GDiTModel<double> model(mc, rng);
      ckpt = train::make_checkpoint(model, s, xform::RatingScaler::linear(1.0, 5.0), 7);
    }
    train::save_checkpoint(ckpt, dir / "c.bin");
    auto back = train::load_checkpoint(dir / "c.bin");
    bool same = back.names == ckpt.names && back.tensors.size() == ckpt.tensors.size() &&
                back.schedule.betas() == ckpt.schedule.betas();
    for (std::size_t k = 0; same && k < ckpt.tensors.size(); ++k)
      same = back.tensors[k].shape() == ckpt.tensors[k].shape() &&
             std::memcmp(back.tensors[k].storage().data(), ckpt.tensors[k].storage().data(),
                         ckpt.tensors[k].size() * sizeof(double)) == 0;
    if (!same) failures.push_back(std::string("checkpoint round trip (") + (single ? "float32" : "float64") + ")");
    fs::remove_all(dir);
  }

  gdit::GDiTConfig small;
  small.d_model = 8;
  small.n_heads = 2;
  small.mlp_ratio = 1;
  gdit::GDiTModel<double> model(small, rng);
  for (auto& b : model.blocks)
    for (auto& v : b.modulation.weight.mutable_value().storage()) v = 0.3 * standard_normal(rng);
  for (auto& v : model.output.weight.mutable_value().storage()) v = 0.3 * standard_normal(rng);
  auto short_schedule = diffusion::NoiseSchedule::linear(50, 1e-4, 0.05);
  const std::size_t n = 9, m = 11;
  ingest::DenseMatrix known_values(n, m);
  std::vector<std::uint8_t> mask(n * m, 0);
  for (std::size_t k = 0; k < n * m; ++k)
    if (rng() % 5 < 2) {
      mask[k] = 1;
      known_values.data[k] = static_cast<double>(1 + rng() % 5 - 3) / 2.0;
    }
  auto users = random_tensor<double>({n, 1}, rng), items = random_tensor<double>({m, 1}, rng);
  sample::SampleConfig sc;
  sc.seed = 31;
  auto exact = [&](const ingest::DenseMatrix& out) {
    for (std::size_t k = 0; k < n * m; ++k)
      if (mask[k] && std::memcmp(&out.data[k], &known_values.data[k], sizeof(double)) != 0) return false;
    return true;
  };
  if (!exact(sample::inpaint_patch(model, known_values, mask, users, items, short_schedule, sc)))
    failures.push_back("inpainted known cells");
  sc.tile_n = 4;
  sc.tile_m = 3;
  int steps = 0;
  bool partitions = true;
  auto tiled = sample::tiled_sample(model, known_values, mask, users, items, short_schedule, sc,
                                    [&](int, const std::vector<sample::Tile>& tiles) {
                                      ++steps;
                                      partitions = partitions && sample::is_partition(tiles, n, m);
                                    });
  if (!exact(tiled)) failures.push_back("tiled known cells");
  if (!partitions || steps != short_schedule.steps()) failures.push_back("tiling partition");

  std::string detail = "identity worst " + fmt(worst_ulps) + " ulp; beta_tilde_1, recurrence, checkpoint, "
                       "inpainting and tiling checked";
  if (failures.empty()) return {Status::pass, detail};
  std::string joined;
  for (const auto& f : failures) joined += (joined.empty() ? "" : ", ") + f;
  return {Status::fail, "failed: " + joined};
}

eval::TopKMetrics brute_force(const std::vector<std::size_t>& ranked, const std::vector<std::size_t>& relevant,
                              std::size_t k) {
  std::set<std::size_t> rel(relevant.begin(), relevant.end());
  double hits = 0, dcg = 0, first = 0, idcg = 0;
  for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
    if (!rel.count(ranked[r])) continue;
    hits += 1;
    dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    if (first == 0) first = static_cast<double>(r + 1);
  }
  for (std::size_t r = 0; r < std::min(k, rel.size()); ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return {hits / static_cast<double>(k), hits / static_cast<double>(rel.size()), dcg / idcg,
          first > 0 ? 1.0 / first : 0.0, hits > 0 ? 1.0 : 0.0};
}

double metric_gap(const eval::TopKMetrics& a, const eval::TopKMetrics& b) {
  return std::max({std::abs(a.precision - b.precision), std::abs(a.recall - b.recall), std::abs(a.ndcg - b.ndcg),
                   std::abs(a.mrr - b.mrr), std::abs(a.hitrate - b.hitrate)});
}

Outcome metrics_oracle() {
  std::vector<std::size_t> ranked{0, 1, 2}, relevant{0, 2};
  auto ex = eval::topk_metrics(ranked, relevant, 2);
  eval::TopKMetrics expected{0.5, 0.5, 1.0 / (1.0 + 1.0 / std::log2(3.0)), 1.0, 1.0};
  double example_gap = metric_gap(ex, expected);
  bool ok = example_gap <= 1e-12 && std::abs(ex.ndcg - 0.613147) < 5e-7;

  Rng rng(505);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t pool = 1 + rng() % 60;
    std::vector<std::size_t> items(pool);
    std::iota(items.begin(), items.end(), 0);
    std::shuffle(items.begin(), items.end(), rng);
    std::vector<std::size_t> r(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(1 + rng() % pool));
    std::shuffle(items.begin(), items.end(), rng);
    std::vector<std::size_t> rel(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(1 + rng() % pool));
    const std::size_t k = 1 + rng() % 60;
    worst = std::max(worst, metric_gap(eval::topk_metrics(r, rel, k), brute_force(r, rel, k)));
  }
  ok = ok && worst <= 1e-12;
  return {ok ? Status::pass : Status::fail, "worked example NDCG " + fmt(ex.ndcg, 7) + ", worst gap over 1000 " +
                                                "instances " + fmt(worst)};
}

// Rank-1 ratings 1 + 4 a_u b_i with the factors as side features; 10% of
// cells are held out of training.
Outcome desk_scale_learning() {
  const std::size_t n = 20, m = 20;
  Rng rng(606);
  std::uniform_real_distribution<double> factor(0.3, 1.0);
  std::vector<double> a(n), b(m);
  for (auto& v : a) v = factor(rng);
  for (auto& v : b) v = factor(rng);

  ingest::RatingDataset ds;
  ds.format = ingest::DatasetFormat::generic;
  ds.rating_scale = {1.0, 5.0};
  ds.num_users = n;
  ds.num_items = m;
  for (std::size_t u = 0; u < n; ++u) {
    ds.user_raw_ids.push_back(static_cast<std::int64_t>(u + 1));
    ds.user_attrs.push_back({fmt(a[u], 17)});
  }
  for (std::size_t i = 0; i < m; ++i) {
    ds.item_raw_ids.push_back(static_cast<std::int64_t>(i + 1));
    ds.item_attrs.push_back({fmt(b[i], 17)});
  }
  std::vector<std::size_t> cells(n * m);
  std::iota(cells.begin(), cells.end(), 0);
  std::shuffle(cells.begin(), cells.end(), rng);
  const std::set<std::size_t> held(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(n * m / 10));
  for (std::size_t k = 0; k < n * m; ++k)
    if (!held.count(k)) ds.records.push_back({k / m, k % m, 1.0 + 4.0 * a[k / m] * b[k % m], 0});

  const auto scaler = xform::RatingScaler::linear(1.0, 5.0);
  auto matrix = ingest::build_matrix(ds, scaler);
  auto features = ingest::featurize(ds);

  gdit::GDiTConfig mc;
  mc.d_model = 64;
  mc.n_blocks = 1;
  mc.d_user_in = features.user_features.cols;
  mc.d_item_in = features.item_features.cols;
  train::TrainConfig tc;
  tc.iterations = 5000;
  tc.batch_size = 4;
  tc.patch.n = n;
  tc.patch.m = m;
  tc.learning_rate = 1e-3;
  tc.bpr_weight = 0.0;
  tc.mask_unknown_in_loss = true;
  tc.seed = 6;
  auto schedule = diffusion::NoiseSchedule::linear(1000, 1e-4, 0.02);

  std::vector<double> mse;
  train::TrainOutputs outputs;
  outputs.on_step = [&](std::uint64_t it, const train::StepLoss& step) {
    mse.push_back(step.mse);
    if (it % 500 == 0) std::cerr << "  [6] iteration " << it << " mse " << step.mse << '\n';
  };
  Rng init = derive_rng(tc.seed, {stream::init});
  gdit::GDiTModel<float> model(mc, init);
  train::run_training(model, train::TrainingInputs{matrix, features, scaler}, schedule, tc, outputs);

  const double first = std::accumulate(mse.begin(), mse.begin() + 100, 0.0) / 100.0;
  const double last = std::accumulate(mse.end() - 100, mse.end(), 0.0) / 100.0;

  // Rows and columns of `matrix` follow dataset order here.
  auto ex = train::make_example<float>(ingest::extract_patch(matrix, [&] {
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), 0);
    return r;
  }(), [&] {
    std::vector<std::size_t> c(m);
    std::iota(c.begin(), c.end(), 0);
    return c;
  }()), matrix, features);
  ingest::DenseMatrix known(n, m);
  known.data = ex.patch.values;
  sample::SampleConfig sc;
  sc.seed = 66;
  auto completed = sample::inpaint_patch(model, known, ex.patch.known, ex.user_features, ex.item_features, schedule, sc);
  double sq_model = 0.0, sq_zero = 0.0;
  for (std::size_t k : held) {
    const std::size_t r = k / m, c = k % m;
    const double truth = scaler.scale(1.0 + 4.0 * a[matrix.row_ids[r]] * b[matrix.col_ids[c]]);
    sq_model += (completed.at(r, c) - truth) * (completed.at(r, c) - truth);
    sq_zero += truth * truth;
  }
  const double rmse = std::sqrt(sq_model / held.size()), rmse_zero = std::sqrt(sq_zero / held.size());
  bool ok = last < 0.5 * first && rmse < rmse_zero;
  return {ok ? Status::pass : Status::fail, "mse first-100 " + fmt(first) + " -> last-100 " + fmt(last) +
                                                " (ratio " + fmt(last / first) + "); held-out RMSE " + fmt(rmse) +
                                                " vs predict-0 " + fmt(rmse_zero)};
}

// Criteria 7 and 8 share one trained model.
struct Ml100kRun {
  bool attempted = false;
  std::string skip_reason;
  ingest::IngestedData data;
  std::size_t corner = 0;
  train::Checkpoint ckpt;
  eval::EvalReport report;
  bool baseline_ok = false;
};

Ml100kRun& ml100k_run() {
  static Ml100kRun run;
  if (run.attempted) return run;
  run.attempted = true;
  const char* dir = std::getenv("EDGE_REC_ML100K_DIR");
  if (!dir || !*dir) {
    run.skip_reason = "set EDGE_REC_ML100K_DIR to an ml-100k directory to run";
    return run;
  }
  run.data = cli::ingest_dataset("ml-100k", dir, 0.1, xform::TransformMode::linear);
  run.data.train_matrix = ingest::density_sort(run.data.train_matrix);
  run.corner = ingest::dense_corner_size(run.data.train_matrix, 0.7);
  if (run.corner < 50) {
    run.skip_reason = "no 50x50 corner reaches density 0.7";
    return run;
  }

  gdit::GDiTConfig mc;
  mc.n_blocks = 1;
  mc.d_user_in = run.data.features.user_features.cols;
  mc.d_item_in = run.data.features.item_features.cols;
  train::TrainConfig tc;
  tc.iterations = 10000;
  tc.batch_size = 16;
  tc.patch = {50, 50, 0.7, run.corner, run.corner, 1000};
  tc.seed = 7;
  auto schedule = diffusion::NoiseSchedule::linear(1000, 1e-4, 0.02);
  train::TrainOutputs outputs;
  outputs.on_step = [](std::uint64_t it, const train::StepLoss& step) {
    if (it % 500 == 0) std::cerr << "  [7] iteration " << it << " loss " << step.total << '\n';
  };
  run.ckpt = train::run_training<float>(train::TrainingInputs{run.data.train_matrix, run.data.features,
                                                              run.data.scaler},
                                        mc, schedule, tc, outputs);
  return run;
}

eval::EvalConfig ml100k_eval_config(const Ml100kRun& run, std::size_t size) {
  eval::EvalConfig ec;
  ec.patch = {size, size, 0.0, run.corner, run.corner, 1000};
  ec.num_patches = 10;
  ec.seed = 8;
  return ec;
}

Outcome ml100k_smoke() {
  auto& run = ml100k_run();
  if (!run.skip_reason.empty()) return {Status::skipped, run.skip_reason};
  auto model = train::model_from_checkpoint<float>(run.ckpt);
  run.report = eval::evaluate_model(model, run.data.train_matrix, run.data.features, run.data.test_records,
                                    run.ckpt.schedule, run.ckpt.scaler, ml100k_eval_config(run, 50));
  std::vector<std::string> failures;
  bool bounded = true, monotone = true;
  for (const auto& u : run.report.users) {
    for (std::size_t k = 0; k < u.at_k.size(); ++k) {
      const auto& m = u.at_k[k];
      for (double v : {m.precision, m.recall, m.ndcg, m.mrr, m.hitrate}) bounded = bounded && v >= 0.0 && v <= 1.0;
      if (k > 0) {
        const auto& p = u.at_k[k - 1];
        monotone = monotone && m.recall >= p.recall && m.hitrate >= p.hitrate && m.mrr >= p.mrr;
      }
    }
  }
  if (!bounded) failures.push_back("metric outside [0,1]");
  if (!monotone) failures.push_back("recall/hitrate/MRR decrease in k");
  auto cmp = eval::compare_to_random(run.report, 10, 2000, 9);
  run.baseline_ok = cmp.lower_95 > 0.0;
  if (!run.baseline_ok) failures.push_back("Precision@10 not above random");
  std::string detail = std::to_string(run.report.n_users) + " users, P@10 " + fmt(cmp.model_mean) + " vs random " +
                       fmt(cmp.random_mean) + " (95% lower bound of difference " + fmt(cmp.lower_95) + ")";
  if (failures.empty()) return {Status::pass, detail};
  return {Status::fail, detail + "; " + failures.front()};
}

Outcome tiled_consistency() {
  auto& run = ml100k_run();
  if (!run.skip_reason.empty()) return {Status::skipped, run.skip_reason};
  if (run.corner < 64) return {Status::skipped, "dense corner smaller than 64x64"};
  auto model = train::model_from_checkpoint<float>(run.ckpt);
  auto patch_cfg = ml100k_eval_config(run, 64);
  patch_cfg.k_values = {10};
  auto tiled_cfg = patch_cfg;
  tiled_cfg.tile_n = 64;
  tiled_cfg.tile_m = 64;
  auto patches = eval::evaluate_model(model, run.data.train_matrix, run.data.features, run.data.test_records,
                                      run.ckpt.schedule, run.ckpt.scaler, patch_cfg);
  auto tiled = eval::evaluate_model(model, run.data.train_matrix, run.data.features, run.data.test_records,
                                    run.ckpt.schedule, run.ckpt.scaler, tiled_cfg);
  const double gap = std::abs(tiled.mean_at_k[0].ndcg - patches.mean_at_k[0].ndcg);
  std::string detail = "NDCG@10 tiled " + fmt(tiled.mean_at_k[0].ndcg) + " vs patches " +
                       fmt(patches.mean_at_k[0].ndcg) + " (gap " + fmt(gap) + ", tol 0.15)";
  if (gap <= 0.15) return {Status::pass, detail};
  // Soft gate: an undertrained model only earns a warning.
  if (!run.baseline_ok) return {Status::warn, detail + "; model did not beat random ranking"};
  return {Status::fail, detail};
}

const char* label(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::skipped: return "SKIPPED";
    case Status::warn: return "WARN";
  }
  return "FAIL";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria{
      {1, "RCSA oracle equivalence", 10, rcsa_oracle},
      {2, "gradient suite", 60, gradient_suite},
      {3, "forward-process statistics", 5, forward_statistics},
      {4, "exact identities", 0, exact_identities},
      {5, "metrics oracle", 5, metrics_oracle},
      {6, "desk-scale learning", 900, desk_scale_learning},
      {7, "ML-100k protocol smoke", 0, ml100k_smoke},
      {8, "tiled vs patch consistency", 0, tiled_consistency},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {Status::fail, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.status == Status::pass && c.budget_seconds > 0 && seconds > c.budget_seconds) {
      out.status = Status::fail;
      out.detail += "; over the " + fmt(c.budget_seconds) + " s budget";
    }
    if (out.status == Status::fail) ++failures;
    std::cout << "criterion " << c.number << " [" << c.name << "]: " << label(out.status) << " (" << fmt(seconds)
              << " s) " << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
