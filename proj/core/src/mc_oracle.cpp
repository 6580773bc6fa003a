#include "colrec/mc_oracle.hpp"

#include "colrec/csv.hpp"
#include "rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace colrec {

namespace {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

Eigen::Index ei(Index v) { return static_cast<Eigen::Index>(v); }

Index parse_id(const std::string& text, Index limit, std::size_t line, const char* what) {
  std::size_t consumed = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != text.size() || text.empty() || text.front() == '-' || v < 1 || v > limit) {
    throw std::runtime_error("partial csv line " + std::to_string(line) + ": " + what + " id '" +
                             text + "' is not in 1.." + std::to_string(limit));
  }
  return static_cast<Index>(v - 1);
}

}  // namespace

ObservedSet::ObservedSet(Index users, Index items, std::vector<Pair> pairs)
    : users_(users), items_(items), pairs_(std::move(pairs)) {
  for (const auto& [u, i] : pairs_) {
    if (u >= users_ || i >= items_) throw std::invalid_argument("observed pair out of range");
  }
  std::sort(pairs_.begin(), pairs_.end());
  if (std::adjacent_find(pairs_.begin(), pairs_.end()) != pairs_.end()) {
    throw std::invalid_argument("observed set contains a duplicate pair");
  }
}

ObservedSet ObservedSet::everything(Index users, Index items) {
  std::vector<Pair> pairs;
  pairs.reserve(users * items);
  for (Index u = 0; u < users; ++u)
    for (Index i = 0; i < items; ++i) pairs.emplace_back(u, i);
  return ObservedSet(users, items, std::move(pairs));
}

bool ObservedSet::contains(Index u, Index i) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), Pair{u, i});
}

PartialMatrix::PartialMatrix(const RatingsMatrix& r_star, const ObservedSet& omega) {
  if (omega.users() != r_star.users() || omega.items() != r_star.items()) {
    throw std::invalid_argument("observed set shape does not match ratings");
  }
  values_ = Matrix::Zero(ei(r_star.users()), ei(r_star.items()));
  known_ = BoolMatrix::Constant(values_.rows(), values_.cols(), false);
  for (const auto& [u, i] : omega.pairs()) {
    values_(ei(u), ei(i)) = r_star(u, i);
    known_(ei(u), ei(i)) = true;
  }
}

PartialMatrix::PartialMatrix(Matrix values, BoolMatrix known)
    : values_(std::move(values)), known_(std::move(known)) {
  if (values_.rows() != known_.rows() || values_.cols() != known_.cols()) {
    throw std::invalid_argument("partial matrix values and mask differ in shape");
  }
  for (Eigen::Index u = 0; u < values_.rows(); ++u)
    for (Eigen::Index i = 0; i < values_.cols(); ++i)
      if (!known_(u, i)) values_(u, i) = 0.0;
}

ObservedSet PartialMatrix::observed() const {
  std::vector<ObservedSet::Pair> pairs;
  for (Index u = 0; u < users(); ++u)
    for (Index i = 0; i < items(); ++i)
      if (known(u, i)) pairs.emplace_back(u, i);
  return ObservedSet(users(), items(), std::move(pairs));
}

bool PartialMatrix::feasible(const Matrix& x) const {
  if (x.rows() != values_.rows() || x.cols() != values_.cols()) return false;
  for (Eigen::Index u = 0; u < x.rows(); ++u)
    for (Eigen::Index i = 0; i < x.cols(); ++i)
      if (known_(u, i) && x(u, i) != values_(u, i)) return false;
  return true;
}

PartialMatrix read_partial_csv(std::istream& in, Index users, Index items) {
  if (users == 0 || items == 0) throw std::invalid_argument("partial matrix needs a nonempty shape");
  Matrix values = Matrix::Zero(ei(users), ei(items));
  BoolMatrix known = BoolMatrix::Constant(ei(users), ei(items), false);
  for (const RatingRecord& rec : read_rating_records(in)) {
    const Index u = parse_id(rec.user, users, rec.line, "user");
    const Index i = parse_id(rec.item, items, rec.line, "item");
    if (known(ei(u), ei(i))) {
      throw std::runtime_error("partial csv line " + std::to_string(rec.line) + ": duplicate pair");
    }
    known(ei(u), ei(i)) = true;
    values(ei(u), ei(i)) = rec.rating;
  }
  return PartialMatrix(std::move(values), std::move(known));
}

ObservedSet explore(const RatingsMatrix& r_star, Index rounds, Index per_round, std::uint64_t seed) {
  const Index total = r_star.users() * r_star.items();
  const Index want = rounds * per_round;
  if (per_round != 0 && want / per_round != rounds) throw std::invalid_argument("exploration budget overflows");
  if (want > total) throw std::invalid_argument("exploration asks for more pairs than exist");
  std::vector<Index> cells(total);
  std::iota(cells.begin(), cells.end(), Index{0});
  auto gen = detail::make_engine({seed, 0x6578706c6f7265});
  for (Index k = 0; k < want; ++k) {
    std::swap(cells[k], cells[k + detail::uniform_below(gen, total - k)]);
  }
  std::vector<ObservedSet::Pair> pairs;
  pairs.reserve(want);
  for (Index k = 0; k < want; ++k) pairs.emplace_back(cells[k] / r_star.items(), cells[k] % r_star.items());
  return ObservedSet(r_star.users(), r_star.items(), std::move(pairs));
}

ObservedSet explore_per_user(Index users, Index items, Index q, std::uint64_t seed) {
  if (q > items) throw std::invalid_argument("per-user exploration asks for more items than exist");
  std::vector<ObservedSet::Pair> pairs;
  pairs.reserve(users * q);
  std::vector<Index> cols(items);
  auto gen = detail::make_engine({seed, 0x70657275736572});
  for (Index u = 0; u < users; ++u) {
    std::iota(cols.begin(), cols.end(), Index{0});
    for (Index k = 0; k < q; ++k) {
      std::swap(cols[k], cols[k + detail::uniform_below(gen, items - k)]);
      pairs.emplace_back(u, cols[k]);
    }
  }
  return ObservedSet(users, items, std::move(pairs));
}

bool omega_satisfies_prop22(const ObservedSet& omega, const RatingsMatrix& r_star, const GroupPartition& p) {
  for (const auto& [u, i] : omega.pairs()) {
    if (!p.is_majority_user(u) && !p.is_majority_item(i) && r_star(u, i) != 0.0) return false;
  }
  return true;
}

Matrix sparsest_majority_completion(const PartialMatrix& partial, const GroupPartition& p,
                                    const std::optional<Matrix>& majority_fill) {
  const IndexList& mu = p.majority_users();
  const IndexList& mi = p.majority_items();
  if (majority_fill && (majority_fill->rows() != ei(mu.size()) || majority_fill->cols() != ei(mi.size()))) {
    throw std::invalid_argument("majority fill has the wrong shape");
  }
  Matrix x = Matrix::Zero(ei(partial.users()), ei(partial.items()));
  for (Index u = 0; u < partial.users(); ++u) {
    for (Index i = 0; i < partial.items(); ++i) {
      if (partial.known(u, i) && !(p.is_majority_user(u) && p.is_majority_item(i)) &&
          partial.value(u, i) != 0.0) {
        throw std::invalid_argument("observed entry outside the majority block is nonzero");
      }
    }
  }
  for (std::size_t a = 0; a < mu.size(); ++a) {
    for (std::size_t b = 0; b < mi.size(); ++b) {
      const Index u = mu[a];
      const Index i = mi[b];
      const double fill = majority_fill ? (*majority_fill)(ei(a), ei(b)) : 0.0;
      if (partial.known(u, i)) {
        if (majority_fill && fill != partial.value(u, i)) {
          throw std::invalid_argument("majority fill disagrees with an observed entry");
        }
        x(ei(u), ei(i)) = partial.value(u, i);
      } else {
        x(ei(u), ei(i)) = fill;
      }
    }
  }
  return x;
}

Matrix reduce_solution(const Matrix& x, const GroupPartition& p) {
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index u : p.majority_users())
    for (Index i : p.majority_items()) out(ei(u), ei(i)) = x(ei(u), ei(i));
  return out;
}

}  // namespace colrec
