#include "edgerec/ingest/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

#include "edgerec/common/error.hpp"

namespace edgerec::ingest {

const std::vector<std::string>& ml100k_occupations() {
  static const std::vector<std::string> names{
      "administrator", "artist",    "doctor",    "educator",   "engineer", "entertainment",
      "executive",     "healthcare", "homemaker", "lawyer",     "librarian", "marketing",
      "none",          "other",     "programmer", "retired",   "salesman", "scientist",
      "student",       "technician", "writer"};
  return names;
}

const std::vector<std::string>& ml100k_genres() {
  static const std::vector<std::string> names{
      "unknown", "Action",  "Adventure", "Animation", "Children's", "Comedy",  "Crime",
      "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",     "Musical", "Mystery",
      "Romance", "Sci-Fi",  "Thriller",  "War",       "Western"};
  return names;
}

const std::vector<std::string>& ml1m_genres() {
  static const std::vector<std::string> names{
      "Action", "Adventure", "Animation", "Children's", "Comedy",  "Crime",
      "Documentary", "Drama", "Fantasy", "Film-Noir",  "Horror",  "Musical",
      "Mystery", "Romance", "Sci-Fi",   "Thriller",   "War",     "Western"};
  return names;
}

namespace {

const std::vector<std::string>& ml1m_occupations() {
  static const std::vector<std::string> names{
      "other",          "academic/educator", "artist",           "clerical/admin",
      "college/grad student", "customer service", "doctor/health care", "executive/managerial",
      "farmer",         "homemaker",         "K-12 student",     "lawyer",
      "programmer",     "retired",           "sales/marketing",  "scientist",
      "self-employed",  "technician/engineer", "tradesman/craftsman", "unemployed",
      "writer"};
  return names;
}

std::optional<double> to_real(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::size_t label_index(const std::vector<std::string>& labels, const std::string& label,
                        const char* what) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ParseError(std::string("unknown ") + what + " label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

std::vector<std::string> user_columns(const std::vector<std::string>& occupations) {
  std::vector<std::string> cols{"age/100", "gender=M", "gender=F"};
  for (const auto& o : occupations) cols.push_back("occupation=" + o);
  return cols;
}

std::vector<std::string> item_columns(const std::vector<std::string>& genres) {
  std::vector<std::string> cols;
  for (const auto& g : genres) cols.push_back("genre=" + g);
  cols.push_back("year (min-max scaled)");
  return cols;
}

void encode_gender(const std::string& g, double* row) {
  if (g.empty()) return;
  if (g == "M") {
    row[0] = 1.0;
  } else if (g == "F") {
    row[1] = 1.0;
  } else {
    throw ParseError("unknown gender label '" + g + "'");
  }
}

// Min-max scales the collected years into the last column; missing years stay 0.
void fill_years(DenseMatrix& items, const std::vector<std::optional<int>>& years) {
  std::optional<int> lo, hi;
  for (const auto& y : years) {
    if (!y) continue;
    lo = lo ? std::min(*lo, *y) : *y;
    hi = hi ? std::max(*hi, *y) : *y;
  }
  std::size_t col = items.cols - 1;
  for (std::size_t i = 0; i < years.size(); ++i) {
    if (!years[i] || *hi == *lo) continue;
    items.at(i, col) = static_cast<double>(*years[i] - *lo) / static_cast<double>(*hi - *lo);
  }
}

std::optional<int> year_from_date(const std::string& date) {
  // "01-Jan-1995"
  if (date.size() < 4) return std::nullopt;
  auto y = to_real(date.substr(date.size() - 4));
  if (!y) return std::nullopt;
  return static_cast<int>(*y);
}

std::optional<int> year_from_title(const std::string& title) {
  // "Toy Story (1995)"
  auto close = title.rfind(')');
  auto open = title.rfind('(');
  if (close == std::string::npos || open == std::string::npos || close != open + 5) return std::nullopt;
  auto y = to_real(title.substr(open + 1, 4));
  if (!y) return std::nullopt;
  return static_cast<int>(*y);
}

FeatureTable featurize_ml100k(const RatingDataset& ds) {
  const auto& occupations = ml100k_occupations();
  const auto& genres = ml100k_genres();
  FeatureTable table;
  table.user_columns = user_columns(occupations);
  table.item_columns = item_columns(genres);
  table.user_features = DenseMatrix(ds.num_users, table.user_columns.size());
  table.item_features = DenseMatrix(ds.num_items, table.item_columns.size());

  for (std::size_t u = 0; u < ds.num_users && u < ds.user_attrs.size(); ++u) {
    const auto& a = ds.user_attrs[u];
    double* row = &table.user_features.at(u, 0);
    if (a.size() > 0) {
      if (auto age = to_real(a[0])) row[0] = *age / 100.0;
    }
    if (a.size() > 1) encode_gender(a[1], row + 1);
    if (a.size() > 2 && !a[2].empty()) row[3 + label_index(occupations, a[2], "occupation")] = 1.0;
  }

  std::vector<std::optional<int>> years(ds.num_items);
  for (std::size_t i = 0; i < ds.num_items && i < ds.item_attrs.size(); ++i) {
    const auto& a = ds.item_attrs[i];
    if (a.empty()) continue;
    if (a.size() > 1) years[i] = year_from_date(a[1]);
    if (a.size() < 4 + genres.size()) continue;
    for (std::size_t g = 0; g < genres.size(); ++g) {
      const auto& flag = a[4 + g];
      if (flag == "1") {
        table.item_features.at(i, g) = 1.0;
      } else if (flag != "0" && !flag.empty()) {
        throw ParseError("genre flag for '" + genres[g] + "' must be 0 or 1, got '" + flag + "'");
      }
    }
  }
  fill_years(table.item_features, years);
  return table;
}

FeatureTable featurize_ml1m(const RatingDataset& ds) {
  const auto& occupations = ml1m_occupations();
  const auto& genres = ml1m_genres();
  FeatureTable table;
  table.user_columns = user_columns(occupations);
  table.item_columns = item_columns(genres);
  table.user_features = DenseMatrix(ds.num_users, table.user_columns.size());
  table.item_features = DenseMatrix(ds.num_items, table.item_columns.size());

  // users.dat: Gender::Age::Occupation::Zip
  for (std::size_t u = 0; u < ds.num_users && u < ds.user_attrs.size(); ++u) {
    const auto& a = ds.user_attrs[u];
    double* row = &table.user_features.at(u, 0);
    if (a.size() > 0) encode_gender(a[0], row + 1);
    if (a.size() > 1) {
      if (auto age = to_real(a[1])) row[0] = *age / 100.0;
    }
    if (a.size() > 2 && !a[2].empty()) {
      auto code = to_real(a[2]);
      if (!code || *code < 0 || *code >= static_cast<double>(occupations.size())) {
        throw ParseError("unknown occupation label '" + a[2] + "'");
      }
      row[3 + static_cast<std::size_t>(*code)] = 1.0;
    }
  }

  // movies.dat: Title::Genre|Genre
  std::vector<std::optional<int>> years(ds.num_items);
  for (std::size_t i = 0; i < ds.num_items && i < ds.item_attrs.size(); ++i) {
    const auto& a = ds.item_attrs[i];
    if (a.empty()) continue;
    years[i] = year_from_title(a.front());
    if (a.size() < 2 || a.back().empty()) continue;
    std::size_t start = 0;
    const std::string& list = a.back();
    while (start <= list.size()) {
      std::size_t bar = list.find('|', start);
      std::string genre = list.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
      table.item_features.at(i, label_index(genres, genre, "genre")) = 1.0;
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
  }
  fill_years(table.item_features, years);
  return table;
}

DenseMatrix numeric_attributes(const std::vector<std::vector<std::string>>& attrs, std::size_t count,
                               const char* side) {
  std::size_t width = 0;
  for (const auto& row : attrs) width = std::max(width, row.size());
  // Attribute-free datasets still get one all-zero column.
  DenseMatrix out(count, std::max<std::size_t>(width, 1));
  for (std::size_t r = 0; r < count && r < attrs.size(); ++r) {
    if (attrs[r].empty()) continue;
    if (attrs[r].size() != width) {
      throw IntegrityError(std::string(side) + " attribute rows differ in width");
    }
    for (std::size_t c = 0; c < width; ++c) {
      auto v = to_real(attrs[r][c]);
      if (!v) throw ParseError(std::string(side) + " attribute '" + attrs[r][c] + "' is not a finite number");
      out.at(r, c) = *v;
    }
  }
  return out;
}

}  // namespace

FeatureTable featurize(const RatingDataset& dataset) {
  switch (dataset.format) {
    case DatasetFormat::ml100k: return featurize_ml100k(dataset);
    case DatasetFormat::ml1m: return featurize_ml1m(dataset);
    case DatasetFormat::generic: break;
  }
  FeatureTable table;
  table.user_features = numeric_attributes(dataset.user_attrs, dataset.num_users, "user");
  table.item_features = numeric_attributes(dataset.item_attrs, dataset.num_items, "item");
  for (std::size_t c = 0; c < table.user_features.cols; ++c) table.user_columns.push_back("attr" + std::to_string(c));
  for (std::size_t c = 0; c < table.item_features.cols; ++c) table.item_columns.push_back("attr" + std::to_string(c));
  return table;
}

}  // namespace edgerec::ingest
