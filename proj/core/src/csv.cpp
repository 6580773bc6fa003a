#include "colrec/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

namespace colrec {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::runtime_error("ratings csv line " + std::to_string(line) + ": " + what);
}

Index intern(std::unordered_map<std::string, Index>& ids, std::vector<std::string>& names,
             std::string_view key) {
  auto [it, inserted] = ids.try_emplace(std::string(key), names.size());
  if (inserted) names.emplace_back(key);
  return it->second;
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<RatingRecord> read_rating_records(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(1, "missing header");
  ++line_no;
  std::string_view header = trim(line);
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  if (header != "user,item,rating") fail(line_no, "expected header 'user,item,rating'");

  std::vector<RatingRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
      fail(line_no, "expected three comma-separated fields");
    }
    const std::string_view user = trim(row.substr(0, c1));
    const std::string_view item = trim(row.substr(c1 + 1, c2 - c1 - 1));
    const std::string rating_text(trim(row.substr(c2 + 1)));
    if (user.empty() || item.empty()) fail(line_no, "empty identifier");

    double rating = 0.0;
    std::size_t consumed = 0;
    try {
      rating = std::stod(rating_text, &consumed);
    } catch (const std::exception&) {
      fail(line_no, "unparseable rating '" + rating_text + "'");
    }
    if (consumed != rating_text.size()) fail(line_no, "unparseable rating '" + rating_text + "'");
    if (!(rating >= 0.0) || !std::isfinite(rating)) fail(line_no, "rating must be finite and nonnegative");
    records.push_back({std::string(user), std::string(item), rating, line_no});
  }
  if (records.empty()) fail(line_no, "no ratings");
  return records;
}

RatingsTable read_ratings_csv(std::istream& in) {
  std::unordered_map<std::string, Index> user_index;
  std::unordered_map<std::string, Index> item_index;
  RatingsTable table;
  std::map<std::pair<Index, Index>, double> entries;

  for (const RatingRecord& rec : read_rating_records(in)) {
    const Index u = intern(user_index, table.user_ids, rec.user);
    const Index i = intern(item_index, table.item_ids, rec.item);
    if (!entries.emplace(std::make_pair(u, i), rec.rating).second) {
      fail(rec.line, "duplicate pair (" + rec.user + ", " + rec.item + ")");
    }
  }

  Matrix values = Matrix::Zero(static_cast<Eigen::Index>(table.user_ids.size()),
                               static_cast<Eigen::Index>(table.item_ids.size()));
  for (const auto& [key, v] : entries) {
    values(static_cast<Eigen::Index>(key.first), static_cast<Eigen::Index>(key.second)) = v;
  }
  table.ratings = RatingsMatrix(std::move(values));
  return table;
}

RatingsTable read_ratings_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ratings csv '" + path + "'");
  return read_ratings_csv(in);
}

void write_ratings_csv(std::ostream& out, const RatingsTable& table, bool include_zeros) {
  const RatingsMatrix& r = table.ratings;
  if (table.user_ids.size() != r.users() || table.item_ids.size() != r.items()) {
    throw std::invalid_argument("ratings table ids do not match matrix shape");
  }
  std::set<std::pair<Index, Index>> emit;
  std::vector<bool> item_seen(r.items(), false);
  for (Index u = 0; u < r.users(); ++u) {
    bool user_seen = false;
    for (Index i = 0; i < r.items(); ++i) {
      if (include_zeros || r(u, i) != 0.0) {
        emit.emplace(u, i);
        user_seen = item_seen[i] = true;
      }
    }
    if (!user_seen) {
      emit.emplace(u, 0);
      item_seen[0] = true;
    }
  }
  for (Index i = 0; i < r.items(); ++i) {
    if (!item_seen[i]) emit.emplace(0, i);
  }

  out << "user,item,rating\n";
  for (const auto& [u, i] : emit) {
    out << table.user_ids[u] << ',' << table.item_ids[i] << ',' << format_exact(r(u, i)) << '\n';
  }
}

RatingsTable with_index_ids(RatingsMatrix ratings) {
  RatingsTable t;
  for (Index u = 0; u < ratings.users(); ++u) t.user_ids.push_back(std::to_string(u));
  for (Index i = 0; i < ratings.items(); ++i) t.item_ids.push_back(std::to_string(i));
  t.ratings = std::move(ratings);
  return t;
}

}  // namespace colrec
