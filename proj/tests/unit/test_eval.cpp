#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "edgerec/common/error.hpp"
#include "edgerec/eval/evaluator.hpp"
#include "edgerec/ingest/matrix.hpp"
#include "helpers.hpp"

using namespace edgerec;
using namespace edgerec::eval;

namespace {

// Direct evaluation of each metric's definition.
TopKMetrics brute_force(const std::vector<std::size_t>& ranked, const std::vector<std::size_t>& relevant, std::size_t k) {
  std::set<std::size_t> rel(relevant.begin(), relevant.end());
  const std::size_t cut = std::min(k, ranked.size());
  double hits = 0, dcg = 0, first = 0;
  for (std::size_t r = 0; r < cut; ++r) {
    if (!rel.count(ranked[r])) continue;
    hits += 1;
    dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    if (first == 0) first = static_cast<double>(r + 1);
  }
  double idcg = 0;
  for (std::size_t r = 0; r < std::min(k, rel.size()); ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  TopKMetrics m;
  m.precision = hits / static_cast<double>(k);
  m.recall = hits / static_cast<double>(rel.size());
  m.ndcg = dcg / idcg;
  m.mrr = first > 0 ? 1.0 / first : 0.0;
  m.hitrate = hits > 0 ? 1.0 : 0.0;
  return m;
}

void check_close(const TopKMetrics& a, const TopKMetrics& b, double tol) {
  CHECK(std::abs(a.precision - b.precision) <= tol);
  CHECK(std::abs(a.recall - b.recall) <= tol);
  CHECK(std::abs(a.ndcg - b.ndcg) <= tol);
  CHECK(std::abs(a.mrr - b.mrr) <= tol);
  CHECK(std::abs(a.hitrate - b.hitrate) <= tol);
}

struct Synthetic {
  ingest::RatingDataset train, test;
  ingest::InteractionMatrix matrix;
};

Synthetic synthetic(std::uint64_t seed) {
  ingest::RatingDataset ds;
  ds.format = ingest::DatasetFormat::generic;
  ds.rating_scale = {1.0, 5.0};
  ds.num_users = 30;
  ds.num_items = 20;
  Rng rng(seed);
  std::uniform_int_distribution<int> rating(1, 5);
  std::bernoulli_distribution rated(0.5);
  for (std::size_t u = 0; u < ds.num_users; ++u) {
    ds.user_raw_ids.push_back(static_cast<std::int64_t>(u + 1));
    ds.user_attrs.push_back({std::to_string(u % 7)});
  }
  for (std::size_t i = 0; i < ds.num_items; ++i) {
    ds.item_raw_ids.push_back(static_cast<std::int64_t>(i + 1));
    ds.item_attrs.push_back({std::to_string(i % 5)});
  }
  std::int64_t ts = 0;
  for (std::size_t u = 0; u < ds.num_users; ++u)
    for (std::size_t i = 0; i < ds.num_items; ++i)
      if (rated(rng)) ds.records.push_back({u, i, static_cast<double>(rating(rng)), static_cast<std::int64_t>(rng() % 100000) + ts++});
  Synthetic s;
  std::tie(s.train, s.test) = ingest::time_split(ds, 0.4);
  s.matrix = ingest::build_matrix(s.train, xform::RatingScaler::linear(1.0, 5.0));
  return s;
}

EvalConfig small_config() {
  EvalConfig c;
  c.k_values = {1, 3, 5, 10};
  c.num_patches = 6;
  c.patch.n = 10;
  c.patch.m = 10;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("topk metrics worked example") {
  std::vector<std::size_t> ranked{7, 3, 9}, relevant{7, 9};
  auto m = topk_metrics(ranked, relevant, 2);
  CHECK(m.precision == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.recall == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.ndcg == doctest::Approx(1.0 / 1.6309297535714575).epsilon(1e-12));
  CHECK(m.ndcg == doctest::Approx(0.613147).epsilon(1e-6));
  CHECK(m.mrr == 1.0);
  CHECK(m.hitrate == 1.0);

  std::vector<std::size_t> ideal{1, 2, 3, 4}, rel_all{1, 2, 3, 4, 5};
  auto best = topk_metrics(ideal, rel_all, 3);
  CHECK(best.precision == 1.0);
  CHECK(best.ndcg == doctest::Approx(1.0).epsilon(1e-15));

  std::vector<std::size_t> miss{1, 2, 3}, far{3};
  auto none = topk_metrics(miss, far, 2);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.ndcg == 0.0);
  CHECK(none.mrr == 0.0);
  CHECK(none.hitrate == 0.0);

  std::vector<std::size_t> empty;
  CHECK_THROWS_AS(topk_metrics(ranked, empty, 2), ParameterError);
  CHECK_THROWS_AS(topk_metrics(ranked, relevant, 0), ParameterError);
}

TEST_CASE("topk metrics match a brute-force oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t pool = 1 + rng() % 40;
    std::vector<std::size_t> items(pool);
    std::iota(items.begin(), items.end(), 100);
    std::shuffle(items.begin(), items.end(), rng);
    std::vector<std::size_t> ranked(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(1 + rng() % pool));
    std::shuffle(items.begin(), items.end(), rng);
    std::vector<std::size_t> relevant(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(1 + rng() % pool));
    std::size_t k = 1 + rng() % 50;
    check_close(topk_metrics(ranked, relevant, k), brute_force(ranked, relevant, k), 1e-12);

    TopKMetrics previous;
    for (std::size_t kk = 1; kk <= ranked.size() + 2; ++kk) {
      auto m = topk_metrics(ranked, relevant, kk);
      CHECK(m.recall >= previous.recall);
      CHECK(m.hitrate >= previous.hitrate);
      CHECK(m.mrr >= previous.mrr);
      CHECK(m.ndcg >= 0.0);
      CHECK(m.ndcg <= 1.0 + 1e-12);
      CHECK(m.precision <= 1.0);
      previous = m;
    }
  }
}

TEST_CASE("rank by score is descending with index tie-break") {
  std::vector<double> scores{0.1, 0.5, 0.5, -1.0, 0.5};
  std::vector<std::size_t> candidates{4, 0, 2, 1, 3};
  CHECK(rank_by_score(scores, candidates) == std::vector<std::size_t>{1, 2, 4, 0, 3});
}

TEST_CASE("oracle predictions reach the upper bound") {
  auto s = synthetic(5);
  std::map<std::pair<std::size_t, std::size_t>, double> test;
  for (const auto& r : s.test.records) test[{r.user_id, r.item_id}] = r.rating;
  auto cfg = small_config();
  auto report = evaluate_predictions(s.matrix, s.test.records, cfg, [&](const ingest::Patch& p, std::size_t) {
    ingest::DenseMatrix out(p.n, p.m);
    for (std::size_t u = 0; u < p.n; ++u)
      for (std::size_t i = 0; i < p.m; ++i) {
        auto it = test.find({s.matrix.row_ids[p.user_rows[u]], s.matrix.col_ids[p.item_cols[i]]});
        out.at(u, i) = it == test.end() ? -2.0 : (it->second - 3.0) / 2.0;
      }
    return out;
  });
  REQUIRE(report.n_users > 0);
  for (const auto& u : report.users) {
    CHECK(u.at_k[0].precision == 1.0);
    for (const auto& m : u.at_k) {
      CHECK(m.ndcg == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(m.mrr == 1.0);
    }
  }
  CHECK(report.mean_at_k[0].precision == 1.0);
}

TEST_CASE("constant predictions rank in patch order") {
  auto s = synthetic(6);
  auto cfg = small_config();
  auto report = evaluate_predictions(s.matrix, s.test.records, cfg, [](const ingest::Patch& p, std::size_t) {
    ingest::DenseMatrix out(p.n, p.m);
    std::fill(out.data.begin(), out.data.end(), 0.25);
    return out;
  });

  std::map<std::pair<std::size_t, std::size_t>, double> test;
  for (const auto& r : s.test.records) test[{r.user_id, r.item_id}] = r.rating;
  std::map<std::size_t, std::size_t> row_of, col_of;
  for (std::size_t r = 0; r < s.matrix.rows; ++r) row_of[s.matrix.row_ids[r]] = r;
  for (std::size_t c = 0; c < s.matrix.cols; ++c) col_of[s.matrix.col_ids[c]] = c;

  std::vector<TopKMetrics> totals(cfg.k_values.size());
  std::size_t evaluated = 0, cursor = 0;
  for (std::size_t p = 0; p < report.patches.size(); ++p) {
    const auto& pe = report.patches[p];
    for (auto user : pe.users) {
      std::vector<std::size_t> ranked, relevant;
      for (std::size_t i = 0; i < pe.items.size(); ++i) {
        if (s.matrix.is_known(row_of.at(user), col_of.at(pe.items[i]))) continue;
        ranked.push_back(i);
        auto it = test.find({user, pe.items[i]});
        if (it != test.end() && it->second >= 4.0) relevant.push_back(i);
      }
      if (relevant.empty()) continue;
      REQUIRE(cursor < report.users.size());
      const auto& ue = report.users[cursor++];
      CHECK(ue.user == user);
      CHECK(ue.candidates == ranked.size());
      for (std::size_t k = 0; k < cfg.k_values.size(); ++k) {
        auto expect = brute_force(ranked, relevant, cfg.k_values[k]);
        check_close(ue.at_k[k], expect, 1e-12);
        totals[k].precision += expect.precision;
        totals[k].ndcg += expect.ndcg;
      }
      ++evaluated;
    }
  }
  CHECK(evaluated == report.n_users);
  for (std::size_t k = 0; k < cfg.k_values.size(); ++k) {
    CHECK(report.mean_at_k[k].precision == doctest::Approx(totals[k].precision / evaluated).epsilon(1e-12));
    CHECK(report.mean_at_k[k].ndcg == doctest::Approx(totals[k].ndcg / evaluated).epsilon(1e-12));
  }
}

TEST_CASE("evaluation errors") {
  auto s = synthetic(7);
  auto cfg = small_config();
  cfg.relevance_threshold = 6.0;
  auto constant = [](const ingest::Patch& p, std::size_t) { return ingest::DenseMatrix(p.n, p.m); };
  CHECK_THROWS_AS(evaluate_predictions(s.matrix, s.test.records, cfg, constant), Error);
  cfg = small_config();
  cfg.k_values = {0};
  CHECK_THROWS_AS(evaluate_predictions(s.matrix, s.test.records, cfg, constant), ParameterError);
  cfg = small_config();
  CHECK_THROWS_AS(evaluate_predictions(s.matrix, s.test.records, cfg,
                                       [](const ingest::Patch&, std::size_t) { return ingest::DenseMatrix(1, 1); }),
                  ShapeError);
}

TEST_CASE("model evaluation is deterministic") {
  auto s = synthetic(8);
  auto features = ingest::featurize(s.train);
  gdit::GDiTConfig mc;
  mc.d_model = 8;
  mc.n_heads = 2;
  mc.mlp_ratio = 1;
  mc.d_user_in = features.user_features.cols;
  mc.d_item_in = features.item_features.cols;
  Rng init(1);
  gdit::GDiTModel<double> model(mc, init);
  for (auto& v : model.output.weight.mutable_value().storage()) v = 0.3 * standard_normal(init);
  auto schedule = diffusion::NoiseSchedule::linear(20, 1e-4, 0.1);
  auto scaler = xform::RatingScaler::linear(1.0, 5.0);
  auto cfg = small_config();
  cfg.num_patches = 3;
  auto a = evaluate_model(model, s.matrix, features, s.test.records, schedule, scaler, cfg);
  auto b = evaluate_model(model, s.matrix, features, s.test.records, schedule, scaler, cfg);
  CHECK(report_to_json(a) == report_to_json(b));
  cfg.threads = 3;
  CHECK(report_to_json(evaluate_model(model, s.matrix, features, s.test.records, schedule, scaler, cfg)) ==
        report_to_json(a));
  for (const auto& m : a.mean_at_k) {
    for (double v : {m.precision, m.recall, m.ndcg, m.mrr, m.hitrate}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }

  cfg.threads = 1;
  cfg.tile_n = 4;
  cfg.tile_m = 4;
  auto tiled = evaluate_model(model, s.matrix, features, s.test.records, schedule, scaler, cfg);
  CHECK(report_to_json(tiled) ==
        report_to_json(evaluate_model(model, s.matrix, features, s.test.records, schedule, scaler, cfg)));
}

TEST_CASE("comparison against a random ranking") {
  EvalReport report;
  report.k_values = {2};
  // 4 candidates with 1 relevant: a random top-2 has expected precision 1/4.
  for (int i = 0; i < 10; ++i) {
    UserEval u;
    u.candidates = 4;
    u.relevant = 1;
    TopKMetrics m;
    m.precision = i < 6 ? 0.5 : 0.0;
    u.at_k = {m};
    report.users.push_back(u);
  }
  report.n_users = 10;
  auto cmp = compare_to_random(report, 2, 2000, 1);
  CHECK(cmp.model_mean == doctest::Approx(0.3));
  CHECK(cmp.random_mean == doctest::Approx(0.25));
  CHECK(cmp.mean_difference == doctest::Approx(0.05));
  CHECK(cmp.lower_95 < cmp.mean_difference);
  CHECK(cmp.lower_95 >= -0.25);
  CHECK_THROWS_AS(compare_to_random(report, 5, 10, 1), ParameterError);
}

TEST_CASE("metrics csv layout") {
  EvalReport report;
  report.k_values = {1, 5};
  report.mean_at_k = {{1.0, 0.5, 0.75, 1.0, 1.0}, {0.2, 1.0, 0.5, 0.5, 1.0}};
  report.n_users = 3;
  auto dir = testing::temp_dir("metrics");
  write_metrics_csv(report, dir / "metrics.csv");
  std::ifstream in(dir / "metrics.csv");
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "k,precision,recall,ndcg,mrr,hitrate,n_users");
  CHECK(first == "1,1,0.5,0.75,1,1,3");
  CHECK(second == "5,0.2,1,0.5,0.5,1,3");
}
