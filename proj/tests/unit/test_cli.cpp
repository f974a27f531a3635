#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "edgerec/cli/cli.hpp"
#include "helpers.hpp"

using edgerec::cli::content_hash;
using edgerec::cli::run_cli;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "edge-rec");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> tiny_train(const std::filesystem::path& data, const std::filesystem::path& out) {
  return {"train", "--data-dir", data.string(), "--test-fraction", "0.2", "--iters", "3", "--batch", "2",
          "--patch", "2x2", "--d-model", "8", "--heads", "2", "--blocks", "1", "--mlp-ratio", "1",
          "--steps", "20", "--precision", "double", "--out", out.string()};
}

}  // namespace

TEST_CASE("git blob content hash") {
  auto dir = testing::temp_dir("hash");
  testing::write_file(dir / "hello.txt", "hello\n");
  CHECK(content_hash(dir / "hello.txt") == "ce013625030ba8dba906f756967f9e9ca394464a");
  testing::write_file(dir / "empty.txt", "");
  CHECK(content_hash(dir / "empty.txt") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}) == 1);
  CHECK(run({"bogus"}) == 1);
  CHECK(run({"train", "--no-such-flag"}) == 1);
  CHECK(run({"train", "--precision", "half"}) == 1);
}

TEST_CASE("runtime errors exit with 2") {
  auto dir = testing::temp_dir("missing");
  CHECK(run({"ingest", "--data-dir", (dir / "nothing").string(), "--out", (dir / "cache").string()}) == 2);
}

TEST_CASE("gradcheck passes") { CHECK(run({"gradcheck"}) == 0); }

TEST_CASE("fixture, ingest, train, sample and evaluate") {
  auto dir = testing::temp_dir("pipeline");
  REQUIRE(run({"fixture", "--out", (dir / "fx").string()}) == 0);
  for (const char* f : {"u.data", "u.user", "u.item"}) CHECK(std::filesystem::exists(dir / "fx" / f));

  REQUIRE(run({"ingest", "--data-dir", (dir / "fx").string(), "--test-fraction", "0.2", "--out",
               (dir / "cache").string()}) == 0);
  CHECK(std::filesystem::exists(dir / "cache" / "run.json"));

  REQUIRE(run(tiny_train(dir / "fx", dir / "a")) == 0);
  CHECK(std::filesystem::exists(dir / "a" / "final.bin"));
  auto manifest = read_json(dir / "a" / "manifest.json");
  CHECK(manifest["command"] == "train");
  CHECK(manifest["config"]["train"]["iterations"] == 3);
  CHECK(manifest["inputs"].size() == 3);

  // Same run description, same outputs.
  REQUIRE(run(tiny_train(dir / "fx", dir / "b")) == 0);
  CHECK(content_hash(dir / "a" / "loss.csv") == content_hash(dir / "b" / "loss.csv"));
  CHECK(content_hash(dir / "a" / "final.bin") == content_hash(dir / "b" / "final.bin"));

  REQUIRE(run({"sample", "--ckpt", (dir / "a").string(), "--cache", (dir / "cache").string(), "--patch", "4x3",
               "--precision", "double", "--seed", "5", "--out", (dir / "pred.csv").string()}) == 0);
  auto csv = read_text(dir / "pred.csv");
  CHECK(csv.rfind("user_id,item_id,predicted_rating\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  CHECK(std::filesystem::exists(dir / "pred.csv.manifest.json"));

  int rc = run({"evaluate", "--ckpt", (dir / "a" / "final.bin").string(), "--cache", (dir / "cache").string(),
                "--patch", "4x3", "--num-patches", "2", "--k", "1,2", "--threshold", "1", "--precision", "double",
                "--out", (dir / "eval").string()});
  CHECK(rc == 0);
  CHECK(read_text(dir / "eval" / "metrics.csv").rfind("k,precision,recall,ndcg,mrr,hitrate,n_users\n", 0) == 0);
}

TEST_CASE("flags override the config file") {
  auto dir = testing::temp_dir("precedence");
  REQUIRE(run({"fixture", "--out", (dir / "fx").string()}) == 0);
  testing::write_file(dir / "cfg.json", R"({"iterations": 4, "batch_size": 3, "seed": 9})");
  auto args = tiny_train(dir / "fx", dir / "out");
  args.push_back("--config");
  args.push_back((dir / "cfg.json").string());
  REQUIRE(run(args) == 0);
  auto train = read_json(dir / "out" / "manifest.json")["config"]["train"];
  CHECK(train["iterations"] == 3);
  CHECK(train["batch_size"] == 2);
  CHECK(train["seed"] == 9);
}
