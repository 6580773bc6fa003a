#include "colrec/learner.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace colrec {

namespace {

Eigen::Index to_eigen(Index i) { return static_cast<Eigen::Index>(i); }

double tie_tolerance(double scale) { return kTieTolerance * std::max(1.0, std::abs(scale)); }

void check_rank_argument(const SpectralSummary& s, Index k) {
  if (k < 1 || k > s.numeric_rank) {
    throw std::invalid_argument("rank " + std::to_string(k) + " outside [1, " +
                                std::to_string(s.numeric_rank) + "]");
  }
}

IndexList pick(IndexList pool, Index count, const TieBreak& tb, Index user) {
  if (count >= pool.size()) return pool;
  if (tb.mode == TieBreak::Mode::lexicographic) {
    pool.resize(count);
    return pool;
  }
  std::mt19937_64 gen = detail::make_engine({tb.seed, static_cast<std::uint64_t>(user)});
  for (Index a = 0; a < count; ++a) {
    const Index b = a + static_cast<Index>(detail::uniform_below(gen, pool.size() - a));
    std::swap(pool[a], pool[b]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Splits `items` (ordered by score descending) into those above the score of the
// `slots`-th entry and those tied with it.
struct Boundary {
  IndexList above;
  IndexList tied;
};

template <typename Score>
Boundary boundary_split(IndexList items, Index slots, Score score, double tol) {
  std::stable_sort(items.begin(), items.end(), [&](Index a, Index b) { return score(a) > score(b); });
  const double pivot = score(items[slots - 1]);
  Boundary out;
  for (Index i : items) {
    const double s = score(i);
    if (s > pivot + tol) {
      out.above.push_back(i);
    } else if (std::abs(s - pivot) <= tol) {
      out.tied.push_back(i);
    }
  }
  std::sort(out.above.begin(), out.above.end());
  std::sort(out.tied.begin(), out.tied.end());
  return out;
}

IndexList merged(IndexList a, const IndexList& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

double tvr(const SpectralSummary& s, Index k) {
  check_rank_argument(s, k);
  const auto head = s.singular_values.head(to_eigen(k)).sum();
  const auto total = s.singular_values.head(to_eigen(s.numeric_rank)).sum();
  return head / total;
}

double tvr(const RatingsMatrix& r, Index k) { return tvr(spectral(r), k); }

Index choose_rank(const SpectralSummary& s, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  if (s.numeric_rank == 0) throw std::invalid_argument("zero matrix has no admissible rank");
  const double tol = tie_tolerance(s.sigma(1));
  for (Index k = 1; k < s.numeric_rank; ++k) {
    if (s.sigma(k + 1) - tol <= alpha) return k;
  }
  return s.numeric_rank;
}

Index choose_rank(const RatingsMatrix& r, double alpha) { return choose_rank(spectral(r), alpha); }

RatingsMatrix truncate(const RatingsMatrix& r, Index k) {
  const SvdFactors f = decompose(r.values());
  SpectralSummary s{f.sigma, numeric_rank(f.sigma)};
  check_rank_argument(s, k);
  const auto kk = to_eigen(k);
  Matrix approx = f.u.leftCols(kk) * f.sigma.head(kk).asDiagonal() * f.v.leftCols(kk).transpose();
  return RatingsMatrix::estimate(std::move(approx));
}

LearnerModel fit_learner(const RatingsMatrix& revealed, double alpha) {
  LearnerModel model;
  model.alpha = alpha;
  model.revealed_spectrum = spectral(revealed);
  model.chosen_rank = choose_rank(model.revealed_spectrum, alpha);
  model.truncated = truncate(revealed, model.chosen_rank);
  return model;
}

RecommendationOutcome recommend(const RatingsMatrix& r_hat, Index k_items, TieBreak tie_break,
                                std::optional<double> sigma1) {
  const Index n = r_hat.items();
  if (k_items < 1 || k_items > n) {
    throw std::invalid_argument("k_items must lie in [1, " + std::to_string(n) + "]");
  }
  const Matrix& values = r_hat.values();
  const double value_tol = tie_tolerance(sigma1 ? *sigma1 : spectral(r_hat).sigma(1));

  RecommendationOutcome out;
  out.k_items = k_items;
  out.popularity = values.cwiseAbs().colwise().sum().transpose();
  const double pop_tol = tie_tolerance(out.popularity.maxCoeff());

  IndexList all(n);
  std::iota(all.begin(), all.end(), Index{0});

  out.users.resize(r_hat.users());
  for (Index u = 0; u < r_hat.users(); ++u) {
    const auto row = values.row(to_eigen(u));
    auto value = [&](Index i) { return row(to_eigen(i)); };
    auto pop = [&](Index i) { return out.popularity(to_eigen(i)); };

    const Boundary by_value = boundary_split(all, k_items, value, value_tol);
    const Index open = k_items - by_value.above.size();
    const Boundary by_pop = boundary_split(by_value.tied, open, pop, pop_tol);
    const Index pop_open = open - by_pop.above.size();

    UserRecommendation& rec = out.users[u];
    rec.tie_set = merged(by_value.above, by_value.tied);
    const IndexList fixed = merged(by_value.above, by_pop.above);
    rec.pop_tie_set = merged(fixed, by_pop.tied);
    rec.chosen = merged(fixed, pick(by_pop.tied, pop_open, tie_break, u));
    rec.negative_row = row.maxCoeff() < -value_tol;
  }
  return out;
}

WelfareReport social_welfare(const RatingsMatrix& r_star, const RecommendationOutcome& outcome) {
  if (outcome.users.size() != r_star.users() || outcome.popularity.size() != to_eigen(r_star.items())) {
    throw std::invalid_argument("recommendation outcome is not dimensioned for R*");
  }
  WelfareReport w;
  w.per_user_welfare.reserve(r_star.users());
  for (Index u = 0; u < r_star.users(); ++u) {
    double total = 0.0;
    for (Index i : outcome.users[u].chosen) total += r_star(u, i);
    w.per_user_welfare.push_back(total);
  }
  w.social_welfare = std::accumulate(w.per_user_welfare.begin(), w.per_user_welfare.end(), 0.0);
  w.u_ben = w.social_welfare;
  return w;
}

WelfareReport social_welfare(const RatingsMatrix& r_star, const RatingsMatrix& r_tilde,
                             const RecommendationOutcome& outcome) {
  WelfareReport w = social_welfare(r_star, outcome);
  w.u_en = utility_en(r_tilde);
  return w;
}

double utility_ben(const RatingsMatrix& r_star, const RecommendationOutcome& outcome) {
  return social_welfare(r_star, outcome).social_welfare;
}

// Neumaier summation: the total stays within a few ulps however many entries there are.
double utility_en(const RatingsMatrix& r_tilde) {
  const Matrix& v = r_tilde.values();
  double sum = 0.0, carry = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double x = std::abs(v(i, j));
      const double t = sum + x;
      carry += std::abs(sum) >= x ? (sum - t) + x : (x - t) + sum;
      sum = t;
    }
  }
  return sum + carry;
}

double best_k_sum(const RatingsMatrix& r, Index u, Index k) {
  if (k < 1 || k > r.items()) throw std::invalid_argument("k out of range");
  std::vector<double> row(r.items());
  for (Index i = 0; i < r.items(); ++i) row[i] = r(u, i);
  std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end(), std::greater<>());
  return std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
}

double kappa_k(const RatingsMatrix& r_star, const GroupPartition& p, Index k) {
  if (k < 1 || k > r_star.items()) throw std::invalid_argument("k out of range");
  if (p.majority_users().empty()) throw std::invalid_argument("no majority users");
  double kappa = std::numeric_limits<double>::infinity();
  std::vector<double> row(r_star.items());
  for (Index u : p.majority_users()) {
    for (Index i = 0; i < r_star.items(); ++i) row[i] = r_star(u, i);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end(), std::greater<>());
    kappa = std::min(kappa, row[k - 1]);
  }
  return kappa;
}

}  // namespace colrec
