#pragma once

#include "colrec/matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Popular items are the first n_bar columns (indices 0 .. n_bar-1). The item a
// general collective manipulates is the first unpopular one, index n_bar.

namespace colrec {

/// Throws std::invalid_argument unless 0 < n_bar < n and all entries lie in [0, 1].
void validate_split(const RatingsMatrix& r, Index n_bar);

/// R'(n_bar): columns past n_bar zeroed.
RatingsMatrix popular_prefs(const RatingsMatrix& r, Index n_bar);

/// Largest (resp. smallest) L1 norm over the columns n_bar .. n-1; 0 when there are none.
double unpopular_kappa(const RatingsMatrix& r, Index n_bar);
double unpopular_kappa_lower(const RatingsMatrix& r, Index n_bar);

/// Items attaining the row maximum exactly.
IndexList top_items(const RatingsMatrix& r, Index u);

struct UserClass {
  bool majority = false;  // some top item is popular
  bool minority = false;  // some top item is unpopular
};

std::vector<UserClass> classify_users(const RatingsMatrix& r, Index n_bar);

/// sigma_{n_bar}(R'(n_bar)).
double popular_sigma(const RatingsMatrix& r, Index n_bar);

/// 2^{5/2} kappa n^{3/2} / sigma^2.
double ratings_gap(double kappa, Index n, double sigma);

struct ClassMembershipReport {
  Index n_bar = 0;
  double kappa = 0.0;
  double kappa_lower = 0.0;
  double popular_sigma = 0.0;
  std::optional<double> delta_gap;  // empty when popular_sigma is 0
  std::vector<UserClass> user_classes;
  IndexList majority_users;
  IndexList minority_users;
  // Indexed like majority_users / minority_users.
  std::vector<bool> assumption_f3;
  std::vector<bool> assumption_f4;
  double f3_margin = 0.0;  // smallest (top - Delta) - second best over majority users
  double f4_margin = 0.0;  // smallest best-popular - Delta over minority users
  bool exclusive = false;          // no user is in both classes
  bool has_minority = false;
  bool necessary_sigma = false;    // 2^{5/4} n^{3/4} sqrt(kappa) < popular_sigma
  bool in_class = false;
  std::string reason;              // why in_class is false; empty otherwise

  bool groups_assumption() const { return exclusive && has_minority; }
};

ClassMembershipReport class_membership(const RatingsMatrix& r, Index n_bar);

struct SingularBoundsCheck {
  double sigma_nbar = 0.0;
  double sigma_next = 0.0;
  double lower_bound = 0.0;  // 2^{5/4} n^{3/4} sqrt(kappa)
  double upper_bound = 0.0;  // sqrt((n - n_bar) kappa)
  bool lower_holds = false;  // sigma_nbar >= lower_bound
  bool upper_holds = false;  // sigma_next <= upper_bound
};

SingularBoundsCheck singular_bounds_check(const RatingsMatrix& r, Index n_bar);

/// (sqrt((n - n_bar) kappa), 2^{5/4} n^{3/4} sqrt(kappa)); nullopt when kappa is 0.
std::optional<Interval> gap_interval_F(const RatingsMatrix& r, Index n_bar);

/// ||Pi* - I_{n,n_bar}||_F where Pi* projects onto the top n_bar right singular vectors.
/// Throws std::invalid_argument when rank(R) < n_bar.
double projection_gap(const RatingsMatrix& r, Index n_bar);

/// Delta / (2 sqrt(n)), the bound projection_gap is expected to respect.
double projection_gap_bound(const RatingsMatrix& r, Index n_bar);

/// Minority users whose top items include item n_bar.
IndexList switch_users(const RatingsMatrix& r, Index n_bar);

/// Feasible delta values [lo, hi) for the "manipulated item is sufficiently liked" assumption.
struct DeltaInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool holds() const { return hi > lo; }
};

/// Throws std::invalid_argument when there are no switch users.
DeltaInterval delta_interval(const RatingsMatrix& r, Index n_bar);

/// sqrt(min(r~'r~, sigma_{n_bar}(R*'(n_bar))^2) - ||r~' A(n_bar)||_2).
/// Throws std::domain_error when the radicand is negative.
double sigma_hat(const RatingsMatrix& r_star, Index n_bar, const Vector& r_tilde);

/// Replaces column n_bar with r_tilde; minority users must keep their true rating.
RatingsMatrix apply_general_strategy(const RatingsMatrix& r_star, Index n_bar, const Vector& r_tilde);

struct GeneralSufficiencyReport {
  // Preconditions.
  bool in_class = false;
  bool groups_assumption = false;
  bool item_liked = false;         // delta interval nonempty
  bool alpha_in_gap = false;       // alpha inside gap_interval_F(R*)
  bool strategy_feasible = false;  // r~ in [0,1]^m, minority entries untouched
  std::string precondition_failure;

  std::optional<double> sigma_hat;
  std::optional<double> collective_gap;  // Delta(r~; R*, n_bar)
  double kappa_next = 0.0;               // kappa over columns n_bar+1 .. n-1
  IndexList switch_users;

  // The five conditions.
  bool alpha_below_sigma_hat = false;
  bool collective_below_top = false;
  bool majority_stay = false;
  bool switch_join = false;
  bool others_stay = false;
  // Minimum slack of each condition, for spotting near-boundary instances.
  double margin_alpha = 0.0;
  double margin_collective = 0.0;
  double margin_majority = 0.0;
  double margin_switch = 0.0;
  double margin_others = 0.0;

  /// alpha > sqrt((n - n_bar - 1) kappa_next); used by the argument but not listed.
  bool derived_alpha_bound = false;

  bool preconditions() const {
    return in_class && groups_assumption && item_liked && alpha_in_gap && strategy_feasible;
  }
  bool conditions() const {
    return alpha_below_sigma_hat && collective_below_top && majority_stay && switch_join && others_stay;
  }
  bool verdict() const { return preconditions() && conditions(); }
};

GeneralSufficiencyReport check_general_sufficiency(const RatingsMatrix& r_star, Index n_bar,
                                                   const Vector& r_tilde, double alpha);

struct NoLargerNbarCheck {
  bool premise = false;  // kappa_lower > (n - n_bar) kappa / (4 sqrt(2) n sqrt(n))
  std::vector<Index> larger_in_class;  // every n_bar' > n_bar still in the class
  /// nullopt when the premise fails.
  std::optional<bool> all_larger_fail;
};

/// n_bar' = n is never in the class (there are no unpopular items).
NoLargerNbarCheck no_larger_nbar_check(const RatingsMatrix& r, Index n_bar);

struct PopGapSpec {
  Index n_bar = 4;
  Index n_unpopular = 2;
  Index group_min = 800;   // majority users per popular item
  Index group_max = 1500;
  Index switch_users = 2;  // minority users topping item n_bar
  Index other_minority = 1;  // minority users per remaining unpopular item
  double majority_off_max = 0.3;  // off-top popular ratings of majority users
};

struct PopGapInstance {
  RatingsMatrix ratings;
  Index n_bar = 0;
  IndexList majority_users;
  IndexList switch_users;
  IndexList other_minority;
};

/// Constructs an in-class instance. Throws std::runtime_error when no
/// in-class draw is found within a fixed number of attempts.
PopGapInstance generate_popgap(const PopGapSpec& spec, std::uint64_t seed);

/// r~ for column n_bar: a random `fraction` of majority users rate `value`,
/// everyone else keeps r*_{u, n_bar}.
Vector draw_general_strategy(const PopGapInstance& inst, double fraction, double value,
                             std::uint64_t seed);

}  // namespace colrec
