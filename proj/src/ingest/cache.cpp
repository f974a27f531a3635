#include "edgerec/ingest/cache.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "edgerec/common/binary_io.hpp"
#include "edgerec/common/error.hpp"

namespace edgerec::ingest {

namespace {

constexpr int kCacheVersion = 1;

class ArrayWriter {
 public:
  template <typename T>
  void add(const std::string& name, const char* dtype, std::vector<std::size_t> shape,
           std::span<const T> values) {
    std::size_t offset = payload_.size();
    append_le<T>(payload_, values);
    index_.push_back({{"name", name},
                      {"dtype", dtype},
                      {"shape", shape},
                      {"offset", offset},
                      {"bytes", payload_.size() - offset}});
  }
  const std::string& payload() const { return payload_; }
  const nlohmann::json& index() const { return index_; }

 private:
  std::string payload_;
  nlohmann::json index_ = nlohmann::json::array();
};

template <typename T>
std::vector<T> read_array(const nlohmann::json& manifest, const std::string& payload,
                          const std::string& name) {
  for (const auto& entry : manifest.at("arrays")) {
    if (entry.at("name") != name) continue;
    auto offset = entry.at("offset").get<std::size_t>();
    auto bytes = entry.at("bytes").get<std::size_t>();
    if (offset + bytes > payload.size() || bytes % sizeof(T) != 0) {
      throw IntegrityError("cache array '" + name + "' exceeds the payload");
    }
    return read_le<T>(payload.data() + offset, bytes / sizeof(T));
  }
  throw IntegrityError("cache is missing array '" + name + "'");
}

}  // namespace

void save_cache(const IngestedData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& m = data.train_matrix;
  ArrayWriter w;
  w.add<double>("values", "f64", {m.rows, m.cols}, m.values);
  w.add<std::uint8_t>("known", "u8", {m.rows, m.cols}, m.known);
  const auto& uf = data.features.user_features;
  const auto& itf = data.features.item_features;
  w.add<double>("user_features", "f64", {uf.rows, uf.cols}, uf.data);
  w.add<double>("item_features", "f64", {itf.rows, itf.cols}, itf.data);

  std::vector<std::int64_t> users, items, stamps;
  std::vector<double> ratings;
  for (const auto& r : data.test_records) {
    users.push_back(static_cast<std::int64_t>(r.user_id));
    items.push_back(static_cast<std::int64_t>(r.item_id));
    ratings.push_back(r.rating);
    stamps.push_back(r.timestamp);
  }
  std::size_t n_test = data.test_records.size();
  w.add<std::int64_t>("test_user", "i64", {n_test}, users);
  w.add<std::int64_t>("test_item", "i64", {n_test}, items);
  w.add<double>("test_rating", "f64", {n_test}, ratings);
  w.add<std::int64_t>("test_timestamp", "i64", {n_test}, stamps);

  nlohmann::json manifest;
  manifest["format"] = "edge-rec-cache";
  manifest["version"] = kCacheVersion;
  manifest["rows"] = m.rows;
  manifest["cols"] = m.cols;
  manifest["known_count"] = m.known_count();
  manifest["test_records"] = n_test;
  manifest["scaler"] = xform::to_json(data.scaler);
  manifest["row_ids"] = m.row_ids;
  manifest["col_ids"] = m.col_ids;
  manifest["user_raw_ids"] = data.user_raw_ids;
  manifest["item_raw_ids"] = data.item_raw_ids;
  manifest["user_columns"] = data.features.user_columns;
  manifest["item_columns"] = data.features.item_columns;
  manifest["arrays"] = w.index();

  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
  std::ofstream bin(dir / "arrays.bin", std::ios::binary);
  bin.write(w.payload().data(), static_cast<std::streamsize>(w.payload().size()));
  if (!bin) throw IntegrityError("failed writing " + (dir / "arrays.bin").string());
}

IngestedData load_cache(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw ParseError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("cache manifest: ") + e.what());
  }
  if (manifest.value("format", "") != "edge-rec-cache" || manifest.value("version", 0) != kCacheVersion) {
    throw IntegrityError("unsupported cache format or version");
  }
  std::ifstream bin(dir / "arrays.bin", std::ios::binary);
  if (!bin) throw ParseError("cannot open " + (dir / "arrays.bin").string());
  std::string payload((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

  IngestedData data;
  auto& m = data.train_matrix;
  m.rows = manifest.at("rows").get<std::size_t>();
  m.cols = manifest.at("cols").get<std::size_t>();
  m.values = read_array<double>(manifest, payload, "values");
  m.known = read_array<std::uint8_t>(manifest, payload, "known");
  m.row_ids = manifest.at("row_ids").get<std::vector<std::size_t>>();
  m.col_ids = manifest.at("col_ids").get<std::vector<std::size_t>>();
  if (m.values.size() != m.rows * m.cols || m.known.size() != m.values.size()) {
    throw IntegrityError("cache matrix arrays do not match the declared shape");
  }

  data.features.user_columns = manifest.at("user_columns").get<std::vector<std::string>>();
  data.features.item_columns = manifest.at("item_columns").get<std::vector<std::string>>();
  auto shape_of = [&](const std::string& name) {
    for (const auto& e : manifest.at("arrays"))
      if (e.at("name") == name) return e.at("shape").get<std::vector<std::size_t>>();
    throw IntegrityError("cache is missing array '" + name + "'");
  };
  auto us = shape_of("user_features");
  auto is = shape_of("item_features");
  data.features.user_features = DenseMatrix(us.at(0), us.at(1));
  data.features.user_features.data = read_array<double>(manifest, payload, "user_features");
  data.features.item_features = DenseMatrix(is.at(0), is.at(1));
  data.features.item_features.data = read_array<double>(manifest, payload, "item_features");

  auto users = read_array<std::int64_t>(manifest, payload, "test_user");
  auto items = read_array<std::int64_t>(manifest, payload, "test_item");
  auto ratings = read_array<double>(manifest, payload, "test_rating");
  auto stamps = read_array<std::int64_t>(manifest, payload, "test_timestamp");
  for (std::size_t i = 0; i < users.size(); ++i) {
    data.test_records.push_back({static_cast<std::size_t>(users[i]), static_cast<std::size_t>(items[i]),
                                 ratings[i], stamps[i]});
  }
  data.scaler = xform::scaler_from_json(manifest.at("scaler"));
  data.user_raw_ids = manifest.at("user_raw_ids").get<std::vector<std::int64_t>>();
  data.item_raw_ids = manifest.at("item_raw_ids").get<std::vector<std::int64_t>>();
  return data;
}

}  // namespace edgerec::ingest
