#pragma once

#include "colrec/learner.hpp"
#include "colrec/matrix.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace colrec {

/// Majority users in `collective` report `eta` for the minority item `target_item`.
struct CollectiveStrategy {
  Index target_item = 0;
  IndexList collective;
  double eta = 0.0;
};

/// Throws std::invalid_argument unless the target is a minority item, the
/// collective is a nonempty set of majority users and eta > 0.
void validate_strategy(const CollectiveStrategy& s, const GroupPartition& p);

/// R~: R* with r~_{u,i*} = eta for every u in the collective.
RatingsMatrix apply_uprating(const RatingsMatrix& r_star, const GroupPartition& p,
                             const CollectiveStrategy& s);

/// AV = max over the first n_bar items of the collective's column sums.
double aggregate_value(const RatingsMatrix& r, const IndexList& collective, Index n_bar);
/// Same, maximised over the partition's majority items.
double aggregate_value(const RatingsMatrix& r, const IndexList& collective, const GroupPartition& p);

/// Parameters the collective needs to pick eta. Counts are held as reals so
/// that misspecified estimates can be represented.
struct FinderInputs {
  double sigma_kmaj = 0.0;    // smallest nonzero singular value of the majority block
  double alpha = 0.0;
  double n_bar = 0.0;
  double picky_col_sq = 0.0;  // squared l2 norm of the target column
  double av = 0.0;
  double kappa = 0.0;
  double coll_size = 0.0;
};

/// Reads every field off R*. `kappa` is kappa_k(R*, p, k_items).
FinderInputs finder_inputs(const RatingsMatrix& r_star, const GroupPartition& p,
                           const CollectiveStrategy& s, double alpha, Index k_items = 1);

/// f(z; eta) = min(sigma^2, eta^2 |U| + s) - eta sqrt(n_bar) AV - alpha^2.
double sufficiency_slack(const FinderInputs& z, double eta);

/// G(R, U, eta) = (sigma_1(R_min), sqrt(min(sigma^2, eta^2 |U| + s) - eta sqrt(n_bar) AV)).
/// nullopt when the radicand is negative or the interval is empty.
std::optional<Interval> sufficient_gap(const FinderInputs& z, double sigma1_min, double eta);
std::optional<Interval> sufficient_gap(const RatingsMatrix& r_star, const GroupPartition& p,
                                       const CollectiveStrategy& s);

struct ConditionCheck {
  bool eta_in_range = false;         // 0 < eta < kappa
  bool alpha_below_upper = false;    // alpha^2 < min{...} - eta sqrt(n_bar) AV
  bool alpha_above_minority = false; // alpha > sigma_1(R_min)
  double slack = 0.0;                // f(z; eta)

  bool verdict() const { return eta_in_range && alpha_below_upper && alpha_above_minority; }
};

ConditionCheck check_sufficient_conditions(const FinderInputs& z, double sigma1_min, double eta);

/// Closed-form search for an eta meeting the sufficient conditions; 0 when none is found.
/// Throws std::invalid_argument when AV <= 0 or the collective size is below 1.
double find_eta(const FinderInputs& z);

/// L(R; eta) = sqrt(4 l2^2 + eta l1^2 / 4 + eta^2 n + max{4 l2^2, 1 + eta^4}).
double lipschitz_bound(double eta, double l1_norm, double l2_norm, Index n);

/// f(z_hat; eta_hat) / L. Throws std::invalid_argument when eta_hat <= 0 and
/// std::domain_error when f <= 0.
double robustness_margin(const FinderInputs& z_hat, double eta_hat, double l1_norm, double l2_norm,
                         Index n);

/// 0 < eta < kappa and f(z; eta) > 0: the sufficient conditions that depend on z.
bool eta_effective(const FinderInputs& z, double eta);

/// z + offset over (sigma_kmaj, alpha, n_bar, picky_col_sq, av, coll_size); kappa is held fixed.
FinderInputs perturb_inputs(const FinderInputs& z, const std::array<double, 6>& offset);

/// `count` points drawn uniformly from the open 6-ball of `radius` around z.
std::vector<FinderInputs> random_perturbations(const FinderInputs& z, double radius, Index count,
                                               std::uint64_t seed);

struct UserOutcomeDiff {
  Index user = 0;
  IndexList truthful_items;
  IndexList collective_items;
  double truthful_welfare = 0.0;
  double collective_welfare = 0.0;
};

/// One truthful and one collective pass through the learner, plus the condition check.
struct SufficiencyReport {
  FinderInputs inputs;
  double sigma1_min = 0.0;
  std::optional<Interval> gap_interval;
  ConditionCheck conditions;

  LearnerModel truthful_model;
  LearnerModel collective_model;
  RecommendationOutcome truthful_outcome;
  RecommendationOutcome collective_outcome;
  WelfareReport truthful_welfare;
  WelfareReport collective_welfare;

  double sw_before = 0.0;
  double sw_after = 0.0;
  double rho = 0.0;  // sw_after / sw_before
  std::vector<UserOutcomeDiff> diffs;

  bool verdict() const { return conditions.verdict(); }
};

SufficiencyReport evaluate_collective(const RatingsMatrix& r_star, const GroupPartition& p,
                                      const CollectiveStrategy& s, double alpha, Index k_items,
                                      TieBreak tie_break);

/// Largest singular value of the minority block (0 when it is empty).
double minority_sigma1(const RatingsMatrix& r, const GroupPartition& p);

}  // namespace colrec
