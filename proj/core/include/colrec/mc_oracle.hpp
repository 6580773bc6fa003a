#pragma once

#include "colrec/matrix.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <utility>
#include <vector>

namespace colrec {

/// Revealed (user, item) pairs, kept sorted and unique.
class ObservedSet {
 public:
  using Pair = std::pair<Index, Index>;

  ObservedSet() = default;
  /// Throws std::invalid_argument on duplicates or pairs outside [0, users) x [0, items).
  ObservedSet(Index users, Index items, std::vector<Pair> pairs);

  static ObservedSet everything(Index users, Index items);

  Index users() const { return users_; }
  Index items() const { return items_; }
  const std::vector<Pair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool contains(Index u, Index i) const;

 private:
  Index users_ = 0;
  Index items_ = 0;
  std::vector<Pair> pairs_;
};

/// R~(t): entries of R* on the observed set, everything else unknown.
class PartialMatrix {
 public:
  PartialMatrix() = default;
  PartialMatrix(const RatingsMatrix& r_star, const ObservedSet& omega);
  /// Builds from explicit known values; `known` and `values` share a shape.
  PartialMatrix(Matrix values, Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> known);

  Index users() const { return static_cast<Index>(values_.rows()); }
  Index items() const { return static_cast<Index>(values_.cols()); }
  bool known(Index u, Index i) const { return known_(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(i)); }
  /// Only meaningful where known(u, i).
  double value(Index u, Index i) const { return values_(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(i)); }
  ObservedSet observed() const;

  /// True when X agrees with every known entry exactly.
  bool feasible(const Matrix& x) const;

 private:
  Matrix values_;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> known_;
};

/// Ratings CSV whose user and item ids are 1-based integer indices; listed pairs are the observed ones.
PartialMatrix read_partial_csv(std::istream& in, Index users, Index items);

/// rounds * per_round distinct pairs drawn uniformly without replacement.
/// Throws std::invalid_argument when more pairs are requested than exist.
ObservedSet explore(const RatingsMatrix& r_star, Index rounds, Index per_round, std::uint64_t seed);

/// q distinct items per user, drawn uniformly and independently across users.
ObservedSet explore_per_user(Index users, Index items, Index q, std::uint64_t seed);

/// Every observed minority-block entry of R* is zero.
bool omega_satisfies_prop22(const ObservedSet& omega, const RatingsMatrix& r_star, const GroupPartition& p);

/// Completion with every non-majority block zero. Unknown majority entries come
/// from `majority_fill` (rows/cols in partition order) when given, otherwise 0.
/// No rank minimisation is attempted: the result is only as low-rank as the fill.
/// Throws std::invalid_argument when an observed off-majority entry is nonzero
/// or the fill disagrees with a known entry.
Matrix sparsest_majority_completion(const PartialMatrix& partial, const GroupPartition& p,
                                    const std::optional<Matrix>& majority_fill = std::nullopt);

/// X with the off-majority blocks (both cross blocks and the minority block) zeroed.
Matrix reduce_solution(const Matrix& x, const GroupPartition& p);

}  // namespace colrec
