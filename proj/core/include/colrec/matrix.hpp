#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace colrec {

using Index = std::size_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<Index>;

/// Relative threshold used for numeric rank: sigma_j counts iff sigma_j > kRankTolerance * sigma_1.
inline constexpr double kRankTolerance = 1e-10;

/// Open interval (lo, hi). Callers receive std::nullopt instead of an empty interval.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo < x && x < hi; }
  double width() const { return hi - lo; }
};

/// Dense users x items grid of ratings.
///
/// Ratings reported by users (true or revealed) are validated nonnegative on
/// construction. Estimates produced by truncation may hold negative entries;
/// those are built with `estimate()` and carry `is_estimate() == true`.
class RatingsMatrix {
 public:
  RatingsMatrix() = default;

  /// Validated construction. Throws std::invalid_argument on empty shape,
  /// non-finite values or negative entries.
  explicit RatingsMatrix(Matrix values);

  static RatingsMatrix zeros(Index users, Index items);
  static RatingsMatrix from_rows(const std::vector<std::vector<double>>& rows);

  /// Wraps a learner estimate; the nonnegativity invariant is relaxed.
  static RatingsMatrix estimate(Matrix values);

  Index users() const { return static_cast<Index>(values_.rows()); }
  Index items() const { return static_cast<Index>(values_.cols()); }
  double operator()(Index u, Index i) const { return values_(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(i)); }

  const Matrix& values() const { return values_; }
  bool is_estimate() const { return estimate_; }

  /// Copy with one entry replaced (value must respect the nonnegativity invariant).
  RatingsMatrix with_entry(Index u, Index i, double value) const;
  RatingsMatrix with_column(Index i, const Vector& column) const;

  bool operator==(const RatingsMatrix& other) const {
    return estimate_ == other.estimate_ && values_.rows() == other.values_.rows() &&
           values_.cols() == other.values_.cols() && values_ == other.values_;
  }

 private:
  Matrix values_;
  bool estimate_ = false;
};

/// Majority/minority partition of users and items.
class GroupPartition {
 public:
  GroupPartition() = default;

  /// Complements are computed against [0, users) and [0, items). Indices are
  /// sorted and deduplicated; out-of-range indices throw std::invalid_argument.
  static GroupPartition from_majority(Index users, Index items, IndexList majority_users,
                                      IndexList majority_items);

  /// Majority users are [0, m_bar), majority items are [0, n_bar).
  static GroupPartition leading_blocks(Index users, Index items, Index m_bar, Index n_bar);

  const IndexList& majority_users() const { return majority_users_; }
  const IndexList& minority_users() const { return minority_users_; }
  const IndexList& majority_items() const { return majority_items_; }
  const IndexList& minority_items() const { return minority_items_; }
  Index m_bar() const { return majority_users_.size(); }
  Index n_bar() const { return majority_items_.size(); }
  Index users() const { return users_; }
  Index items() const { return items_; }

  bool is_majority_user(Index u) const { return user_is_majority_.at(u); }
  bool is_majority_item(Index i) const { return item_is_majority_.at(i); }

  /// Empty string when the partition is a valid majority-minority split of `r`,
  /// otherwise a description of the first violation found.
  std::string violation(const RatingsMatrix& r) const;
  void validate(const RatingsMatrix& r) const;

 private:
  Index users_ = 0;
  Index items_ = 0;
  IndexList majority_users_;
  IndexList minority_users_;
  IndexList majority_items_;
  IndexList minority_items_;
  std::vector<bool> user_is_majority_;
  std::vector<bool> item_is_majority_;
};

struct SpectralSummary {
  Vector singular_values;  // descending
  Index numeric_rank = 0;

  /// sigma_j with 1-based j; zero past the stored spectrum.
  double sigma(Index j) const;
};

/// Thin SVD factors: values == U * diag(sigma) * V^T.
struct SvdFactors {
  Matrix u;
  Vector sigma;
  Matrix v;
};

SvdFactors decompose(const Matrix& values);
SpectralSummary spectral(const Matrix& values);
inline SpectralSummary spectral(const RatingsMatrix& r) { return spectral(r.values()); }
Index numeric_rank(const Vector& singular_values);
Index numeric_rank(const Matrix& values);

/// max over columns of the column sum (no absolute values).
double matrix_l1_norm(const RatingsMatrix& r);
/// sigma_1.
double spectral_norm(const RatingsMatrix& r);

Matrix submatrix(const Matrix& values, std::span<const Index> rows, std::span<const Index> cols);
Matrix majority_block(const RatingsMatrix& r, const GroupPartition& p);
Matrix minority_block(const RatingsMatrix& r, const GroupPartition& p);

/// G(R) = (sigma_1(R_min), sigma_kmaj(R_maj)); nullopt when the endpoints do not leave room.
std::optional<Interval> singular_value_gap(const RatingsMatrix& r, const GroupPartition& p);

struct BlockOrdering {
  RatingsMatrix matrix;
  IndexList row_perm;  // row_perm[new_row] = original row
  IndexList col_perm;  // col_perm[new_col] = original column
  GroupPartition partition;  // partition in the reordered index space
};

/// Majority users/items first, each group keeping its original relative order.
BlockOrdering reorder_to_blocks(const RatingsMatrix& r, const GroupPartition& p);
RatingsMatrix permute(const RatingsMatrix& r, std::span<const Index> row_perm, std::span<const Index> col_perm);
IndexList invert_permutation(std::span<const Index> perm);

struct PickyItem {
  Index item = 0;
  IndexList users;
};

/// Minority items whose raters rate nothing else.
std::vector<PickyItem> find_picky_items(const RatingsMatrix& r, const GroupPartition& p);

}  // namespace colrec
