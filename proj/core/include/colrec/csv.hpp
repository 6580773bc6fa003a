#pragma once

#include "colrec/matrix.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace colrec {

/// Ratings loaded from `user,item,rating` CSV. Identifiers receive dense
/// indices in first-seen order; pairs absent from the file are zero.
struct RatingsTable {
  RatingsMatrix ratings;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
};

struct RatingRecord {
  std::string user;
  std::string item;
  double rating = 0.0;
  std::size_t line = 0;
};

/// Parsed rows in file order. Validates the header, field count and ratings
/// (finite, nonnegative) but not uniqueness.
std::vector<RatingRecord> read_rating_records(std::istream& in);

/// Throws std::runtime_error with the offending line number on a missing or
/// wrong header, malformed rows, negative ratings and duplicate (user,item) pairs.
RatingsTable read_ratings_csv(std::istream& in);
RatingsTable read_ratings_csv_file(const std::string& path);

/// Row-major export. With `include_zeros` every cell is written, so reading the
/// file back reproduces the same dense indices. Otherwise only positive ratings
/// are written (plus one zero for any user or item that would vanish); the
/// id -> rating map survives but dense item order may change.
/// Values carry 17 significant digits so parsing is exact.
void write_ratings_csv(std::ostream& out, const RatingsTable& table, bool include_zeros = false);

/// Ids are the decimal row/column indices.
RatingsTable with_index_ids(RatingsMatrix ratings);

}  // namespace colrec
