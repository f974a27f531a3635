#include "edgerec/ingest/fixture.hpp"

#include <charconv>
#include <fstream>

#include "edgerec/common/error.hpp"

namespace edgerec::ingest {

namespace {

std::vector<std::string> genre_flags(std::initializer_list<int> on) {
  std::vector<std::string> flags(19, "0");
  for (int g : on) flags[static_cast<std::size_t>(g)] = "1";
  return flags;
}

std::vector<std::string> item_row(const std::string& title, const std::string& date,
                                  std::initializer_list<int> genres) {
  std::vector<std::string> row{title, date, "", ""};
  auto flags = genre_flags(genres);
  row.insert(row.end(), flags.begin(), flags.end());
  return row;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string join(std::int64_t id, const std::vector<std::string>& fields) {
  std::string line = std::to_string(id);
  for (const auto& f : fields) line += "|" + f;
  return line;
}

}  // namespace

RatingDataset fixture_dataset() {
  RatingDataset ds;
  ds.format = DatasetFormat::ml100k;
  ds.rating_scale = {1.0, 5.0};
  ds.user_raw_ids = {342, 254, 436, 974};
  ds.user_attrs = {{"34", "F", "educator", "15213"},
                   {"27", "M", "engineer", "15217"},
                   {"52", "F", "writer", "15232"},
                   {"19", "M", "student", "15213"}};
  ds.item_raw_ids = {1, 2, 3};
  // Genre indices: 1 Action, 2 Adventure, 6 Crime, 8 Drama, 14 Romance, 15 Sci-Fi.
  ds.item_attrs = {item_row("The Godfather (1972)", "24-Mar-1972", {6, 8}),
                   item_row("Titanic (1997)", "19-Dec-1997", {8, 14}),
                   item_row("Avatar (2009)", "18-Dec-2009", {1, 2, 15})};
  ds.num_users = 4;
  ds.num_items = 3;

  const double kUnrated = 0.0;
  const double grid[4][3] = {{5.0, 2.5, 3.0},
                             {kUnrated, 1.0, 4.0},
                             {kUnrated, kUnrated, 4.5},
                             {1.5, kUnrated, 3.5}};
  std::int64_t ts = 881250000;
  for (std::size_t u = 0; u < 4; ++u) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (grid[u][i] == kUnrated) continue;
      ds.records.push_back({u, i, grid[u][i], ts});
      ts += 3600;
    }
  }
  return ds;
}

void write_ml100k(const RatingDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream data(dir / "u.data");
  for (const auto& r : dataset.records) {
    data << dataset.user_raw_ids.at(r.user_id) << '\t' << dataset.item_raw_ids.at(r.item_id) << '\t'
         << format_number(r.rating) << '\t' << r.timestamp << '\n';
  }
  std::ofstream users(dir / "u.user");
  for (std::size_t u = 0; u < dataset.num_users; ++u) {
    users << join(dataset.user_raw_ids.at(u), u < dataset.user_attrs.size() ? dataset.user_attrs[u]
                                                                              : std::vector<std::string>{})
          << '\n';
  }
  std::ofstream items(dir / "u.item");
  for (std::size_t i = 0; i < dataset.num_items; ++i) {
    items << join(dataset.item_raw_ids.at(i), i < dataset.item_attrs.size() ? dataset.item_attrs[i]
                                                                              : std::vector<std::string>{})
          << '\n';
  }
  if (!data || !users || !items) throw IntegrityError("failed writing dataset files to " + dir.string());
}

void write_fixture_ml100k(const std::filesystem::path& dir) { write_ml100k(fixture_dataset(), dir); }

}  // namespace edgerec::ingest
