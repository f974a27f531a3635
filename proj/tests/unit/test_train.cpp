#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "edgerec/common/error.hpp"
#include "edgerec/diffusion/schedule.hpp"
#include "edgerec/ingest/features.hpp"
#include "edgerec/ingest/fixture.hpp"
#include "edgerec/train/checkpoint.hpp"
#include "edgerec/train/loss.hpp"
#include "edgerec/train/trainer.hpp"
#include "helpers.hpp"

using namespace edgerec;
using namespace edgerec::train;
using numeric::Shape;
using numeric::Tensor;
using numeric::Var;

namespace {

Tensor<double> random_tensor(Shape shape, Rng& rng) {
  Tensor<double> t(shape);
  for (auto& v : t.storage()) v = standard_normal(rng);
  return t;
}

ingest::Patch random_patch(std::size_t n, std::size_t m, Rng& rng) {
  ingest::Patch p;
  p.n = n;
  p.m = m;
  std::uniform_int_distribution<int> level(1, 5);
  std::bernoulli_distribution coin(0.6);
  for (std::size_t k = 0; k < n * m; ++k) {
    bool known = coin(rng);
    p.known.push_back(known);
    p.values.push_back(known ? (level(rng) - 3) / 2.0 : 0.0);
  }
  for (std::size_t r = 0; r < n; ++r) p.user_rows.push_back(r);
  for (std::size_t c = 0; c < m; ++c) p.item_cols.push_back(c);
  return p;
}

gdit::GDiTConfig small_config() {
  gdit::GDiTConfig c;
  c.d_model = 16;
  c.n_heads = 2;
  return c;
}

struct FixtureData {
  ingest::InteractionMatrix matrix;
  ingest::FeatureTable features;
  xform::RatingScaler scaler = xform::RatingScaler::linear(1.0, 5.0);
};

FixtureData fixture_data() {
  FixtureData d;
  auto ds = ingest::fixture_dataset();
  d.matrix = ingest::build_matrix(ds, d.scaler);
  d.features = ingest::featurize(ds);
  return d;
}

gdit::GDiTConfig fixture_config(const FixtureData& d) {
  auto c = small_config();
  c.d_user_in = d.features.user_features.cols;
  c.d_item_in = d.features.item_features.cols;
  return c;
}

}  // namespace

TEST_CASE("loss examples") {
  auto schedule = diffusion::NoiseSchedule::from_betas({0.19});
  ingest::Patch patch;
  patch.n = 1;
  patch.m = 2;
  patch.values = {1.0, 0.0};
  patch.known = {1, 1};
  LossConfig cfg;
  cfg.bpr_weight = 0.5;
  // x0_hat = x_t / sqrt(0.81) when eps_hat = 0, so the margin is 1.
  Tensor<double> x_t(Shape{1, 2}, std::vector<double>{0.45, -0.45});
  Tensor<double> zero(Shape{1, 2});
  std::vector<BprPair> pairs{{0, 0, 1}};
  auto terms = diffusion_loss(zero, Var<double>::constant(zero), x_t, 1, patch, schedule, pairs, cfg);
  CHECK(terms.mse == 0.0);
  CHECK(terms.bpr == doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-14));
  CHECK(terms.bpr == doctest::Approx(0.313262).epsilon(1e-6));
  CHECK(terms.total.value().item() == doctest::Approx(0.5 * 0.313262).epsilon(1e-6));

  cfg.bpr_weight = 0.0;
  Tensor<double> eps(Shape{1, 2}, std::vector<double>{0.3, -1.2});
  auto off = diffusion_loss(eps, Var<double>::constant(zero), x_t, 1, patch, schedule, pairs, cfg);
  CHECK(off.total.value().item() == off.mse);
  CHECK(off.mse == doctest::Approx((0.09 + 1.44) / 2));

  cfg.bpr_weight = 1.0;
  auto none = diffusion_loss(eps, Var<double>::constant(eps), x_t, 1, patch, schedule, {}, cfg);
  CHECK(none.bpr == 0.0);
  CHECK(none.total.value().item() == 0.0);

  CHECK_THROWS_AS(diffusion_loss(eps, Var<double>::constant(Tensor<double>(Shape{2, 1})), x_t, 1, patch, schedule,
                                 pairs, cfg),
                  ShapeError);
}

TEST_CASE("unregularized loss is the naive mean of squared residuals") {
  Rng rng(3);
  auto schedule = diffusion::NoiseSchedule::linear(1000, 1e-4, 0.02);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 1 + rng() % 9, m = 1 + rng() % 9;
    auto patch = random_patch(n, m, rng);
    auto eps = random_tensor({n, m}, rng), hat = random_tensor({n, m}, rng), xt = random_tensor({n, m}, rng);
    LossConfig cfg;
    cfg.bpr_weight = 0.0;
    double total = 0.0, masked = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < m; ++c) {
        double e = hat[r * m + c] - eps[r * m + c];
        total += e * e;
        if (patch.known[r * m + c]) {
          masked += e * e;
          ++count;
        }
      }
    auto full = diffusion_loss(eps, Var<double>::constant(hat), xt, 500, patch, schedule, {}, cfg);
    CHECK(full.total.value().item() == doctest::Approx(total / (n * m)).epsilon(1e-14));
    cfg.mask_unknown = true;
    auto only = diffusion_loss(eps, Var<double>::constant(hat), xt, 500, patch, schedule, {}, cfg);
    CHECK(only.mse == doctest::Approx(count ? masked / count : 0.0).epsilon(1e-14));
  }
}

TEST_CASE("BPR pairs are known, strictly ordered and capped per row") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto patch = random_patch(1 + rng() % 6, 1 + rng() % 8, rng);
    auto pairs = sample_bpr_pairs(patch, 3, rng);
    std::vector<std::size_t> per_row(patch.n, 0);
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    for (auto& p : pairs) {
      CHECK(patch.known[p.row * patch.m + p.pos]);
      CHECK(patch.known[p.row * patch.m + p.neg]);
      CHECK(patch.values[p.row * patch.m + p.pos] > patch.values[p.row * patch.m + p.neg]);
      CHECK(seen.insert({p.row, p.pos, p.neg}).second);
      ++per_row[p.row];
    }
    for (std::size_t r = 0; r < patch.n; ++r) {
      std::size_t available = 0;
      for (std::size_t a = 0; a < patch.m; ++a)
        for (std::size_t b = 0; b < patch.m; ++b)
          if (patch.known[r * patch.m + a] && patch.known[r * patch.m + b] &&
              patch.values[r * patch.m + a] > patch.values[r * patch.m + b])
            ++available;
      CHECK(per_row[r] == std::min<std::size_t>(available, 3));
    }
  }
}

TEST_CASE("AdamW update") {
  auto p = Var<double>::leaf(Tensor<double>(Shape{3}, std::vector<double>{1.0, -2.0, 0.5}));
  auto before = p.value();
  AdamWConfig cfg;
  cfg.learning_rate = 0.0;
  AdamW<double> frozen({p}, cfg);
  sum(mul(p, p)).backward();
  frozen.step();
  CHECK(p.value().storage() == before.storage());

  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.01;
  AdamW<double> opt({p}, cfg);
  opt.step();
  // First bias-corrected step: m_hat = g, v_hat = g^2.
  std::vector<double> g{2.0, -4.0, 1.0};
  for (std::size_t i = 0; i < 3; ++i) {
    double expect = before[i] - 0.1 * 0.01 * before[i] - 0.1 * g[i] / (std::abs(g[i]) + 1e-8);
    CHECK(p.value()[i] == doctest::Approx(expect).epsilon(1e-14));
  }
  CHECK(opt.steps() == 1);
  opt.zero_grad();
  CHECK(p.grad().storage() == std::vector<double>(3, 0.0));
}

TEST_CASE("training is bitwise deterministic in double precision") {
  auto data = fixture_data();
  TrainConfig cfg;
  cfg.iterations = 10;
  cfg.batch_size = 2;
  cfg.patch.n = 3;
  cfg.patch.m = 3;
  cfg.seed = 5;
  cfg.learning_rate = 1e-3;
  auto schedule = diffusion::NoiseSchedule::linear(100, 1e-4, 0.02);
  TrainingInputs in{data.matrix, data.features, data.scaler};
  auto a = run_training<double>(in, fixture_config(data), schedule, cfg);
  auto b = run_training<double>(in, fixture_config(data), schedule, cfg);
  REQUIRE(a.tensors.size() == b.tensors.size());
  for (std::size_t k = 0; k < a.tensors.size(); ++k) CHECK(a.tensors[k].storage() == b.tensors[k].storage());
  cfg.seed = 6;
  auto c = run_training<double>(in, fixture_config(data), schedule, cfg);
  CHECK(c.tensors[0].storage() != a.tensors[0].storage());
}

TEST_CASE("a fixed patch's loss falls over 100 steps") {
  Rng rng(7);
  auto schedule = diffusion::NoiseSchedule::linear(1000, 1e-4, 0.02);
  PatchExample<double> ex;
  ex.patch = random_patch(8, 8, rng);
  ex.user_features = Tensor<double>(Shape{8, 1});
  ex.item_features = Tensor<double>(Shape{8, 1});
  Rng init(8);
  gdit::GDiTModel<double> model(small_config(), init);
  AdamWConfig opt_cfg;
  opt_cfg.learning_rate = 2e-3;
  AdamW<double> opt(model.parameters(), opt_cfg);
  LossConfig loss;

  // Fixed (t, eps) draws so both evaluations see the same objective.
  std::vector<std::pair<int, Tensor<double>>> probes;
  for (int i = 0; i < 32; ++i) probes.push_back({1 + static_cast<int>(rng() % 1000), random_tensor({8, 8}, rng)});
  auto evaluate = [&] {
    numeric::NoGradGuard guard;
    double total = 0.0;
    for (auto& [t, eps] : probes) {
      auto xt = diffusion::forward_sample(ex.patch.values, t, eps.storage(), schedule);
      Tensor<double> x(Shape{8, 8}, xt);
      auto hat = model.forward(x, t, ex.user_features, ex.item_features);
      total += diffusion_loss(eps, hat, x, t, ex.patch, schedule, {}, loss).mse;
    }
    return total / probes.size();
  };
  double before = evaluate();
  std::vector<PatchExample<double>> batch(4, ex);
  for (int step = 0; step < 100; ++step) train_step(model, opt, batch, schedule, loss, rng, step);
  double after = evaluate();
  CHECK(after < before);
}

TEST_CASE("checkpoint round trip") {
  Rng rng(9);
  gdit::GDiTModel<double> model(small_config(), rng);
  auto schedule = diffusion::NoiseSchedule::cosine(50);
  std::vector<double> ratings{1, 2, 3, 3, 4, 5};
  auto scaler = xform::RatingScaler::quantile(1.0, 5.0, xform::fit_quantile(ratings));
  auto ckpt = make_checkpoint(model, schedule, scaler, 42, serialize_rng(rng));
  auto dir = testing::temp_dir("ckpt");
  save_checkpoint(ckpt, dir / "a.bin");
  auto back = load_checkpoint(dir / "a.bin");
  CHECK(back.model_config == ckpt.model_config);
  CHECK(back.names == ckpt.names);
  for (std::size_t k = 0; k < ckpt.tensors.size(); ++k) {
    CHECK(back.tensors[k].shape() == ckpt.tensors[k].shape());
    CHECK(back.tensors[k].storage() == ckpt.tensors[k].storage());
  }
  CHECK(back.schedule.betas() == schedule.betas());
  CHECK(back.schedule.kind() == "cosine");
  CHECK(back.scaler.quantile_map()->gaussian_values == scaler.quantile_map()->gaussian_values);
  CHECK(back.iteration == 42);
  CHECK(back.rng_state == ckpt.rng_state);

  std::set<std::string> unique(back.names.begin(), back.names.end());
  CHECK(unique.size() == back.names.size());

  auto restored = model_from_checkpoint<double>(back);
  auto x = random_tensor({3, 3}, rng);
  Tensor<double> u(Shape{3, 1}), i(Shape{3, 1});
  CHECK(restored.forward(x, 5, u, i).value().storage() == model.forward(x, 5, u, i).value().storage());

  gdit::GDiTModel<float> single(small_config(), rng);
  auto fck = make_checkpoint(single, schedule, scaler, 1);
  CHECK(fck.dtype == "float32");
  save_checkpoint(fck, dir / "f.bin");
  auto fback = model_from_checkpoint<float>(load_checkpoint(dir / "f.bin"));
  auto want = single.named_parameters(), got = fback.named_parameters();
  for (std::size_t k = 0; k < want.size(); ++k) CHECK(got[k].second.value().storage() == want[k].second.value().storage());
}

TEST_CASE("checkpoint errors") {
  Rng rng(10);
  gdit::GDiTModel<double> model(small_config(), rng);
  auto ckpt = make_checkpoint(model, diffusion::NoiseSchedule::linear(10, 1e-4, 0.02), xform::RatingScaler::linear(1, 5), 0);
  auto dir = testing::temp_dir("ckpt_err");
  save_checkpoint(ckpt, dir / "a.bin");
  auto size = std::filesystem::file_size(dir / "a.bin");
  std::filesystem::resize_file(dir / "a.bin", size - 8);
  try {
    load_checkpoint(dir / "a.bin");
    FAIL("expected a truncation error");
  } catch (const CheckpointError& e) {
    CHECK(std::string(e.what()).find(ckpt.names.back()) != std::string::npos);
  }

  testing::write_file(dir / "junk.bin", "not a checkpoint");
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.bin"), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), CheckpointError);

  gdit::GDiTConfig wide;
  wide.d_model = 64;
  gdit::GDiTModel<double> big(wide, rng);
  auto big_ckpt = make_checkpoint(big, diffusion::NoiseSchedule::linear(10, 1e-4, 0.02), xform::RatingScaler::linear(1, 5), 0);
  gdit::GDiTConfig narrow;
  narrow.d_model = 32;
  gdit::GDiTModel<double> small(narrow, rng);
  CHECK_THROWS_AS(load_parameters(big_ckpt, small), ConfigMismatchError);
}

TEST_CASE("one iteration writes one final checkpoint") {
  auto data = fixture_data();
  TrainConfig cfg;
  cfg.iterations = 1;
  cfg.batch_size = 2;
  cfg.patch.n = 2;
  cfg.patch.m = 2;
  auto dir = testing::temp_dir("train1");
  TrainOutputs out;
  out.directory = dir;
  int updates = 0;
  out.on_step = [&](std::uint64_t, const StepLoss& l) {
    ++updates;
    CHECK(l.timesteps.size() == 2);
  };
  TrainingInputs in{data.matrix, data.features, data.scaler};
  auto ckpt = run_training<float>(in, fixture_config(data), diffusion::NoiseSchedule::linear(100, 1e-4, 0.02), cfg, out);
  CHECK(updates == 1);
  CHECK(ckpt.iteration == 1);
  CHECK(std::filesystem::exists(dir / "final.bin"));
  std::size_t bins = 0;
  for (auto& e : std::filesystem::directory_iterator(dir)) bins += e.path().extension() == ".bin";
  CHECK(bins == 1);
  std::ifstream csv(dir / "loss.csv");
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "iteration,total,mse,bpr");
  CHECK(row.rfind("1,", 0) == 0);
  CHECK_FALSE(std::getline(csv, extra));
}

TEST_CASE("train config validation and json") {
  TrainConfig cfg;
  CHECK(cfg.iterations == 10000);
  CHECK(cfg.batch_size == 16);
  CHECK(cfg.patch.n == 50);
  CHECK_NOTHROW(cfg.validate());
  auto back = train_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = {};
  cfg.bpr_weight = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}
