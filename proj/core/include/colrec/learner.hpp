#pragma once

#include "colrec/matrix.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace colrec {

/// Fraction of singular-value mass kept by a rank-k truncation: sum_{j<=k} sigma_j / sum_{j<=rank} sigma_j.
double tvr(const SpectralSummary& spectrum, Index k);
double tvr(const RatingsMatrix& r, Index k);

/// Minimal k >= 1 with sigma_{k+1} <= alpha (sigma past the rank is zero).
/// A singular value within the tie tolerance of alpha counts as equal.
Index choose_rank(const SpectralSummary& spectrum, double alpha);
Index choose_rank(const RatingsMatrix& r, double alpha);

/// Best rank-k Frobenius approximation, held as an estimate (entries may be negative).
RatingsMatrix truncate(const RatingsMatrix& r, Index k);

/// The alpha-loss tolerant learner after its learning phase.
struct LearnerModel {
  double alpha = 0.0;
  Index chosen_rank = 0;
  RatingsMatrix truncated;
  SpectralSummary revealed_spectrum;
};

LearnerModel fit_learner(const RatingsMatrix& revealed, double alpha);

/// Two values tie iff |a - b| <= kTieTolerance * max(1, scale).
inline constexpr double kTieTolerance = 1e-9;

struct TieBreak {
  enum class Mode { seeded, lexicographic };
  Mode mode = Mode::seeded;
  std::uint64_t seed = 0;

  static TieBreak seeded(std::uint64_t seed) { return {Mode::seeded, seed}; }
  /// Always picks the smallest indices; used for golden tests.
  static TieBreak lexicographic() { return {Mode::lexicographic, 0}; }
};

struct UserRecommendation {
  IndexList tie_set;      // items belonging to at least one k-set maximizing the estimated row sum
  IndexList pop_tie_set;  // items belonging to at least one of those sets with maximal popularity
  IndexList chosen;       // sorted, k items
  bool negative_row = false;  // every estimated rating < 0; outside the model's assumptions
};

struct RecommendationOutcome {
  Index k_items = 1;
  std::vector<UserRecommendation> users;
  Vector popularity;  // column L1 norms of |R_hat|

  /// Top-1 convenience: the single chosen item of user u.
  Index top(Index u) const { return users.at(u).chosen.front(); }
};

/// Recommendation phase: each user gets a k-set maximizing the estimated row sum,
/// ties broken toward the most popular columns, then uniformly at random.
/// `sigma1` sets the tie scale; computed from `r_hat` when absent.
RecommendationOutcome recommend(const RatingsMatrix& r_hat, Index k_items, TieBreak tie_break,
                                std::optional<double> sigma1 = std::nullopt);

struct WelfareReport {
  double social_welfare = 0.0;
  std::vector<double> per_user_welfare;
  double u_ben = 0.0;
  std::optional<double> u_en;
};

WelfareReport social_welfare(const RatingsMatrix& r_star, const RecommendationOutcome& outcome);
/// Also fills the engagement utility of the revealed matrix.
WelfareReport social_welfare(const RatingsMatrix& r_star, const RatingsMatrix& r_tilde,
                             const RecommendationOutcome& outcome);

/// Personalization-accuracy utility: social welfare measured on R*.
double utility_ben(const RatingsMatrix& r_star, const RecommendationOutcome& outcome);
/// Engagement utility: sum of |r~_{u,i}|.
double utility_en(const RatingsMatrix& r_tilde);

/// min over majority users of the k-th largest rating in the user's row.
double kappa_k(const RatingsMatrix& r_star, const GroupPartition& p, Index k);

/// Sum of the k largest entries of row u.
double best_k_sum(const RatingsMatrix& r, Index u, Index k);

}  // namespace colrec
