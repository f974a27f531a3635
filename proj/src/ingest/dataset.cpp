#include "edgerec/ingest/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "edgerec/common/error.hpp"

namespace edgerec::ingest {

namespace {

struct Line {
  std::string text;
  std::size_t number;
};

std::vector<Line> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    lines.push_back({std::move(text), number});
  }
  return lines;
}

std::vector<std::string> split(const std::string& text, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + sep.size();
  }
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.filename().string() + ":" + std::to_string(line);
}

std::int64_t parse_int(const std::string& token, const std::filesystem::path& path, std::size_t line) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(where(path, line) + ": expected integer, got '" + token + "'");
  }
  return value;
}

double parse_real(const std::string& token, const std::filesystem::path& path, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(where(path, line) + ": expected number, got '" + token + "'");
  }
  return value;
}

// Reads an attribute table keyed by its first column.
void read_attributes(const std::filesystem::path& path, const std::string& sep,
                     std::vector<std::int64_t>& raw_ids,
                     std::vector<std::vector<std::string>>& attrs,
                     std::unordered_map<std::int64_t, std::size_t>& index) {
  for (const auto& line : read_lines(path)) {
    auto fields = split(line.text, sep);
    std::int64_t id = parse_int(fields.front(), path, line.number);
    if (id < 0) throw IntegrityError(where(path, line.number) + ": negative id");
    if (!index.emplace(id, raw_ids.size()).second) {
      throw IntegrityError(where(path, line.number) + ": duplicate id " + std::to_string(id));
    }
    raw_ids.push_back(id);
    attrs.emplace_back(fields.begin() + 1, fields.end());
  }
}

struct PairHash {
  std::size_t operator()(const std::pair<std::size_t, std::size_t>& p) const {
    return std::hash<std::size_t>()(p.first * 0x9E3779B97F4A7C15ull ^ p.second);
  }
};

RatingDataset parse_movielens(DatasetFormat format, const std::string& sep,
                              const std::filesystem::path& ratings_path,
                              const std::filesystem::path& users_path,
                              const std::filesystem::path& items_path) {
  RatingDataset ds;
  ds.format = format;
  ds.rating_scale = {1.0, 5.0};
  std::unordered_map<std::int64_t, std::size_t> user_index, item_index;
  read_attributes(users_path, sep, ds.user_raw_ids, ds.user_attrs, user_index);
  read_attributes(items_path, sep, ds.item_raw_ids, ds.item_attrs, item_index);
  ds.num_users = ds.user_raw_ids.size();
  ds.num_items = ds.item_raw_ids.size();

  const std::string rating_sep = format == DatasetFormat::ml100k ? "\t" : sep;
  std::unordered_map<std::pair<std::size_t, std::size_t>, std::size_t, PairHash> seen;
  for (const auto& line : read_lines(ratings_path)) {
    auto fields = split(line.text, rating_sep);
    if (fields.size() != 4) {
      throw ParseError(where(ratings_path, line.number) + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    }
    std::int64_t user = parse_int(fields[0], ratings_path, line.number);
    std::int64_t item = parse_int(fields[1], ratings_path, line.number);
    double rating = parse_real(fields[2], ratings_path, line.number);
    std::int64_t ts = parse_int(fields[3], ratings_path, line.number);

    auto u = user_index.find(user);
    auto i = item_index.find(item);
    if (u == user_index.end() || i == item_index.end()) {
      throw IntegrityError(where(ratings_path, line.number) + ": id out of declared range (user " +
                           std::to_string(user) + ", item " + std::to_string(item) + ")");
    }
    if (rating < ds.rating_scale.first || rating > ds.rating_scale.second) {
      throw IntegrityError(where(ratings_path, line.number) + ": rating " + fields[2] +
                           " outside the rating scale");
    }
    RatingRecord rec{u->second, i->second, rating, ts};
    auto [it, inserted] = seen.emplace(std::make_pair(rec.user_id, rec.item_id), ds.records.size());
    if (inserted) {
      ds.records.push_back(rec);
    } else if (ts >= ds.records[it->second].timestamp) {
      ds.records[it->second] = rec;
    }
  }
  return ds;
}

}  // namespace

RatingDataset RatingDataset::with_records(std::vector<RatingRecord> recs) const {
  RatingDataset out;
  out.format = format;
  out.records = std::move(recs);
  out.num_users = num_users;
  out.num_items = num_items;
  out.user_raw_ids = user_raw_ids;
  out.item_raw_ids = item_raw_ids;
  out.user_attrs = user_attrs;
  out.item_attrs = item_attrs;
  out.rating_scale = rating_scale;
  return out;
}

std::size_t RatingDataset::user_index(std::int64_t raw_id) const {
  auto it = std::find(user_raw_ids.begin(), user_raw_ids.end(), raw_id);
  if (it == user_raw_ids.end()) throw IntegrityError("unknown user id " + std::to_string(raw_id));
  return static_cast<std::size_t>(it - user_raw_ids.begin());
}

std::size_t RatingDataset::item_index(std::int64_t raw_id) const {
  auto it = std::find(item_raw_ids.begin(), item_raw_ids.end(), raw_id);
  if (it == item_raw_ids.end()) throw IntegrityError("unknown item id " + std::to_string(raw_id));
  return static_cast<std::size_t>(it - item_raw_ids.begin());
}

RatingDataset parse_ml100k(const std::filesystem::path& data_path,
                           const std::filesystem::path& user_path,
                           const std::filesystem::path& item_path) {
  return parse_movielens(DatasetFormat::ml100k, "|", data_path, user_path, item_path);
}

RatingDataset parse_ml1m(const std::filesystem::path& ratings_path,
                         const std::filesystem::path& users_path,
                         const std::filesystem::path& movies_path) {
  return parse_movielens(DatasetFormat::ml1m, "::", ratings_path, users_path, movies_path);
}

RatingDataset load_movielens(const std::string& name, const std::filesystem::path& dir) {
  if (name == "ml-100k") return parse_ml100k(dir / "u.data", dir / "u.user", dir / "u.item");
  if (name == "ml-1m") return parse_ml1m(dir / "ratings.dat", dir / "users.dat", dir / "movies.dat");
  throw ParameterError("unknown dataset '" + name + "' (expected ml-100k or ml-1m)");
}

std::pair<RatingDataset, RatingDataset> time_split(const RatingDataset& dataset,
                                                   double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ParameterError("test fraction must lie in (0, 1)");
  }
  const std::size_t total = dataset.records.size();
  if (total < 2) throw ParameterError("time split needs at least two records");

  std::vector<RatingRecord> ordered = dataset.records;
  std::sort(ordered.begin(), ordered.end(), [](const RatingRecord& a, const RatingRecord& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.item_id < b.item_id;
  });
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(total)));
  n_test = std::clamp<std::size_t>(n_test, 1, total - 1);
  std::size_t n_train = total - n_test;

  std::vector<RatingRecord> train(ordered.begin(), ordered.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<RatingRecord> test(ordered.begin() + static_cast<std::ptrdiff_t>(n_train), ordered.end());
  return {dataset.with_records(std::move(train)), dataset.with_records(std::move(test))};
}

std::string to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::ml100k: return "ml-100k";
    case DatasetFormat::ml1m: return "ml-1m";
    case DatasetFormat::generic: return "generic";
  }
  return "generic";
}

DatasetFormat parse_dataset_format(const std::string& text) {
  if (text == "ml-100k") return DatasetFormat::ml100k;
  if (text == "ml-1m") return DatasetFormat::ml1m;
  if (text == "generic") return DatasetFormat::generic;
  throw ParameterError("unknown dataset format '" + text + "'");
}

}  // namespace edgerec::ingest
