#include "colrec/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace colrec {

namespace {

Eigen::Index to_eigen(Index i) { return static_cast<Eigen::Index>(i); }

void check_shape(const Matrix& values) {
  if (values.rows() < 1 || values.cols() < 1) {
    throw std::invalid_argument("ratings matrix needs at least one user and one item");
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("ratings matrix contains non-finite values");
  }
}

IndexList complement(const IndexList& sorted, Index size) {
  IndexList out;
  out.reserve(size - sorted.size());
  auto it = sorted.begin();
  for (Index k = 0; k < size; ++k) {
    if (it != sorted.end() && *it == k) {
      ++it;
    } else {
      out.push_back(k);
    }
  }
  return out;
}

IndexList normalize(IndexList xs, Index size, const char* what) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (!xs.empty() && xs.back() >= size) {
    std::ostringstream os;
    os << what << " index " << xs.back() << " out of range [0, " << size << ")";
    throw std::invalid_argument(os.str());
  }
  return xs;
}

}  // namespace

RatingsMatrix::RatingsMatrix(Matrix values) : values_(std::move(values)) {
  check_shape(values_);
  if ((values_.array() < 0.0).any()) {
    throw std::invalid_argument("ratings must be nonnegative");
  }
}

RatingsMatrix RatingsMatrix::zeros(Index users, Index items) {
  return RatingsMatrix(Matrix::Zero(to_eigen(users), to_eigen(items)));
}

RatingsMatrix RatingsMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("ratings matrix needs at least one user and one item");
  }
  Matrix values(to_eigen(rows.size()), to_eigen(rows.front().size()));
  for (Index u = 0; u < rows.size(); ++u) {
    if (rows[u].size() != rows.front().size()) {
      throw std::invalid_argument("ragged ratings rows");
    }
    for (Index i = 0; i < rows[u].size(); ++i) {
      values(to_eigen(u), to_eigen(i)) = rows[u][i];
    }
  }
  return RatingsMatrix(std::move(values));
}

RatingsMatrix RatingsMatrix::estimate(Matrix values) {
  check_shape(values);
  RatingsMatrix r;
  r.values_ = std::move(values);
  r.estimate_ = true;
  return r;
}

RatingsMatrix RatingsMatrix::with_entry(Index u, Index i, double value) const {
  if (u >= users() || i >= items()) {
    throw std::out_of_range("rating index out of range");
  }
  Matrix next = values_;
  next(to_eigen(u), to_eigen(i)) = value;
  return estimate_ ? estimate(std::move(next)) : RatingsMatrix(std::move(next));
}

RatingsMatrix RatingsMatrix::with_column(Index i, const Vector& column) const {
  if (i >= items() || column.size() != values_.rows()) {
    throw std::invalid_argument("replacement column does not fit the matrix");
  }
  Matrix next = values_;
  next.col(to_eigen(i)) = column;
  return estimate_ ? estimate(std::move(next)) : RatingsMatrix(std::move(next));
}

GroupPartition GroupPartition::from_majority(Index users, Index items, IndexList majority_users,
                                             IndexList majority_items) {
  GroupPartition p;
  p.users_ = users;
  p.items_ = items;
  p.majority_users_ = normalize(std::move(majority_users), users, "user");
  p.majority_items_ = normalize(std::move(majority_items), items, "item");
  p.minority_users_ = complement(p.majority_users_, users);
  p.minority_items_ = complement(p.majority_items_, items);
  p.user_is_majority_.assign(users, false);
  p.item_is_majority_.assign(items, false);
  for (Index u : p.majority_users_) p.user_is_majority_[u] = true;
  for (Index i : p.majority_items_) p.item_is_majority_[i] = true;
  return p;
}

GroupPartition GroupPartition::leading_blocks(Index users, Index items, Index m_bar, Index n_bar) {
  if (m_bar > users || n_bar > items) {
    throw std::invalid_argument("leading block larger than the matrix");
  }
  IndexList mu(m_bar);
  IndexList mi(n_bar);
  std::iota(mu.begin(), mu.end(), Index{0});
  std::iota(mi.begin(), mi.end(), Index{0});
  return from_majority(users, items, std::move(mu), std::move(mi));
}

std::string GroupPartition::violation(const RatingsMatrix& r) const {
  std::ostringstream os;
  if (r.users() != users_ || r.items() != items_) {
    os << "partition shape " << users_ << "x" << items_ << " does not match matrix " << r.users()
       << "x" << r.items();
    return os.str();
  }
  for (Index u = 0; u < users_; ++u) {
    bool any_positive = false;
    for (Index i = 0; i < items_; ++i) {
      const double v = r(u, i);
      if (v > 0.0) any_positive = true;
      if (v != 0.0 && user_is_majority_[u] != item_is_majority_[i]) {
        os << "cross-block rating at (" << u << ", " << i << ")";
        return os.str();
      }
    }
    if (!any_positive) {
      os << "user " << u << " has no positive rating";
      return os.str();
    }
  }
  return {};
}

void GroupPartition::validate(const RatingsMatrix& r) const {
  if (auto why = violation(r); !why.empty()) {
    throw std::invalid_argument("invalid majority-minority partition: " + why);
  }
}

double SpectralSummary::sigma(Index j) const {
  if (j == 0) throw std::invalid_argument("singular values are 1-indexed");
  return j <= static_cast<Index>(singular_values.size()) ? singular_values(to_eigen(j - 1)) : 0.0;
}

SvdFactors decompose(const Matrix& values) {
  if (values.size() == 0) {
    return {Matrix(values.rows(), 0), Vector(0), Matrix(values.cols(), 0)};
  }
  Eigen::BDCSVD<Matrix> svd(values, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw std::runtime_error("singular value decomposition failed");
  }
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Index numeric_rank(const Vector& singular_values) {
  if (singular_values.size() == 0 || singular_values(0) <= 0.0) return 0;
  const double cutoff = kRankTolerance * singular_values(0);
  Index rank = 0;
  for (Eigen::Index j = 0; j < singular_values.size(); ++j) {
    if (singular_values(j) > cutoff) ++rank;
  }
  return rank;
}

SpectralSummary spectral(const Matrix& values) {
  if (values.size() == 0) return {};
  Eigen::BDCSVD<Matrix> svd(values);
  if (svd.info() != Eigen::Success) {
    throw std::runtime_error("singular value decomposition failed");
  }
  SpectralSummary s;
  s.singular_values = svd.singularValues();
  s.numeric_rank = numeric_rank(s.singular_values);
  return s;
}

Index numeric_rank(const Matrix& values) { return spectral(values).numeric_rank; }

double matrix_l1_norm(const RatingsMatrix& r) { return r.values().colwise().sum().maxCoeff(); }

double spectral_norm(const RatingsMatrix& r) { return spectral(r).sigma(1); }

Matrix submatrix(const Matrix& values, std::span<const Index> rows, std::span<const Index> cols) {
  Matrix out(to_eigen(rows.size()), to_eigen(cols.size()));
  for (Index a = 0; a < rows.size(); ++a) {
    for (Index b = 0; b < cols.size(); ++b) {
      out(to_eigen(a), to_eigen(b)) = values(to_eigen(rows[a]), to_eigen(cols[b]));
    }
  }
  return out;
}

Matrix majority_block(const RatingsMatrix& r, const GroupPartition& p) {
  return submatrix(r.values(), p.majority_users(), p.majority_items());
}

Matrix minority_block(const RatingsMatrix& r, const GroupPartition& p) {
  return submatrix(r.values(), p.minority_users(), p.minority_items());
}

std::optional<Interval> singular_value_gap(const RatingsMatrix& r, const GroupPartition& p) {
  p.validate(r);
  const SpectralSummary maj = spectral(majority_block(r, p));
  if (maj.numeric_rank == 0) {
    throw std::invalid_argument("majority block has rank zero");
  }
  const SpectralSummary min = spectral(minority_block(r, p));
  const Interval gap{min.sigma(1), maj.sigma(maj.numeric_rank)};
  if (!(gap.lo < gap.hi)) return std::nullopt;
  return gap;
}

RatingsMatrix permute(const RatingsMatrix& r, std::span<const Index> row_perm, std::span<const Index> col_perm) {
  if (row_perm.size() != r.users() || col_perm.size() != r.items()) {
    throw std::invalid_argument("permutation size mismatch");
  }
  Matrix out = submatrix(r.values(), row_perm, col_perm);
  return r.is_estimate() ? RatingsMatrix::estimate(std::move(out)) : RatingsMatrix(std::move(out));
}

IndexList invert_permutation(std::span<const Index> perm) {
  IndexList inv(perm.size(), perm.size());
  for (Index k = 0; k < perm.size(); ++k) {
    if (perm[k] >= perm.size() || inv[perm[k]] != perm.size()) {
      throw std::invalid_argument("not a permutation");
    }
    inv[perm[k]] = k;
  }
  return inv;
}

BlockOrdering reorder_to_blocks(const RatingsMatrix& r, const GroupPartition& p) {
  p.validate(r);
  IndexList rows = p.majority_users();
  rows.insert(rows.end(), p.minority_users().begin(), p.minority_users().end());
  IndexList cols = p.majority_items();
  cols.insert(cols.end(), p.minority_items().begin(), p.minority_items().end());
  RatingsMatrix reordered = permute(r, rows, cols);
  GroupPartition blocks = GroupPartition::leading_blocks(r.users(), r.items(), p.m_bar(), p.n_bar());
  return {std::move(reordered), std::move(rows), std::move(cols), std::move(blocks)};
}

std::vector<PickyItem> find_picky_items(const RatingsMatrix& r, const GroupPartition& p) {
  p.validate(r);
  std::vector<PickyItem> out;
  for (Index item : p.minority_items()) {
    PickyItem candidate{item, {}};
    bool picky = true;
    for (Index u = 0; u < r.users() && picky; ++u) {
      if (!(r(u, item) > 0.0)) continue;
      candidate.users.push_back(u);
      for (Index i = 0; i < r.items(); ++i) {
        if (i != item && r(u, i) != 0.0) {
          picky = false;
          break;
        }
      }
    }
    if (picky && !candidate.users.empty()) out.push_back(std::move(candidate));
  }
  return out;
}

}  // namespace colrec
