#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace edgerec::ingest {

struct RatingRecord {
  std::size_t user_id = 0;  // dense index into the dataset's user table
  std::size_t item_id = 0;  // dense index into the dataset's item table
  double rating = 0.0;
  std::int64_t timestamp = 0;

  bool operator==(const RatingRecord&) const = default;
};

/// Which attribute encoding `featurize` applies.
enum class DatasetFormat { ml100k, ml1m, generic };

/// Ratings plus raw attribute tables. Ids in records are dense indices;
/// `user_raw_ids` / `item_raw_ids` map them back to the file ids.
struct RatingDataset {
  DatasetFormat format = DatasetFormat::generic;
  std::vector<RatingRecord> records;
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<std::int64_t> user_raw_ids;
  std::vector<std::int64_t> item_raw_ids;
  /// Raw attribute fields per dense id, excluding the id column.
  std::vector<std::vector<std::string>> user_attrs;
  std::vector<std::vector<std::string>> item_attrs;
  std::pair<double, double> rating_scale{1.0, 5.0};

  /// Same tables, no records.
  RatingDataset with_records(std::vector<RatingRecord> recs) const;
  std::size_t user_index(std::int64_t raw_id) const;
  std::size_t item_index(std::int64_t raw_id) const;
};

/// ML-100k: `u.data` (tab separated), `u.user` and `u.item` (pipe separated).
RatingDataset parse_ml100k(const std::filesystem::path& data_path,
                           const std::filesystem::path& user_path,
                           const std::filesystem::path& item_path);

/// ML-1M: `ratings.dat`, `users.dat`, `movies.dat` ("::" separated).
RatingDataset parse_ml1m(const std::filesystem::path& ratings_path,
                         const std::filesystem::path& users_path,
                         const std::filesystem::path& movies_path);

/// Loads the standard file names for `name` ("ml-100k" or "ml-1m") from `dir`.
RatingDataset load_movielens(const std::string& name, const std::filesystem::path& dir);

/// Global time-ordered split: the earliest (1 - f) share of records trains,
/// the rest tests. Ties on timestamp are ordered by (user_id, item_id).
std::pair<RatingDataset, RatingDataset> time_split(const RatingDataset& dataset,
                                                   double test_fraction);

std::string to_string(DatasetFormat format);
DatasetFormat parse_dataset_format(const std::string& text);

}  // namespace edgerec::ingest
