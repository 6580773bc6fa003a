#include "colrec/popularity_gap.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace colrec {

namespace {

Eigen::Index to_eigen(Index i) { return static_cast<Eigen::Index>(i); }

const double kTwoPow52 = std::pow(2.0, 2.5);
const double kTwoPow54 = std::pow(2.0, 1.25);

double row_max(const RatingsMatrix& r, Index u) { return r.values().row(to_eigen(u)).maxCoeff(); }

// Largest rating outside the user's top items; nullopt when every item is a top item.
std::optional<double> second_best(const RatingsMatrix& r, Index u) {
  const double top = row_max(r, u);
  std::optional<double> best;
  for (Index i = 0; i < r.items(); ++i) {
    const double v = r(u, i);
    if (v != top && (!best || v > *best)) best = v;
  }
  return best;
}

double max_over_prefix(const RatingsMatrix& r, Index u, Index count) {
  return r.values().row(to_eigen(u)).head(to_eigen(count)).maxCoeff();
}

double min_over_prefix(const RatingsMatrix& r, Index u, Index count) {
  return r.values().row(to_eigen(u)).head(to_eigen(count)).minCoeff();
}

double column_l1(const RatingsMatrix& r, Index i) { return r.values().col(to_eigen(i)).sum(); }

}  // namespace

void validate_split(const RatingsMatrix& r, Index n_bar) {
  if (n_bar == 0 || n_bar >= r.items()) {
    throw std::invalid_argument("n_bar must satisfy 0 < n_bar < n");
  }
  if ((r.values().array() < 0.0).any() || (r.values().array() > 1.0).any()) {
    throw std::invalid_argument("popularity-gap matrices need entries in [0, 1]");
  }
}

RatingsMatrix popular_prefs(const RatingsMatrix& r, Index n_bar) {
  validate_split(r, n_bar);
  Matrix values = r.values();
  values.rightCols(to_eigen(r.items() - n_bar)).setZero();
  return RatingsMatrix(std::move(values));
}

double unpopular_kappa(const RatingsMatrix& r, Index n_bar) {
  double k = 0.0;
  for (Index i = n_bar; i < r.items(); ++i) k = std::max(k, column_l1(r, i));
  return k;
}

double unpopular_kappa_lower(const RatingsMatrix& r, Index n_bar) {
  if (n_bar >= r.items()) return 0.0;
  double k = std::numeric_limits<double>::infinity();
  for (Index i = n_bar; i < r.items(); ++i) k = std::min(k, column_l1(r, i));
  return k;
}

IndexList top_items(const RatingsMatrix& r, Index u) {
  const double top = row_max(r, u);
  IndexList out;
  for (Index i = 0; i < r.items(); ++i) {
    if (r(u, i) == top) out.push_back(i);
  }
  return out;
}

std::vector<UserClass> classify_users(const RatingsMatrix& r, Index n_bar) {
  validate_split(r, n_bar);
  std::vector<UserClass> out(r.users());
  for (Index u = 0; u < r.users(); ++u) {
    for (Index i : top_items(r, u)) {
      (i < n_bar ? out[u].majority : out[u].minority) = true;
    }
  }
  return out;
}

double popular_sigma(const RatingsMatrix& r, Index n_bar) {
  return spectral(Matrix(r.values().leftCols(to_eigen(n_bar)))).sigma(n_bar);
}

double ratings_gap(double kappa, Index n, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("ratings gap needs a positive singular value");
  return kTwoPow52 * kappa * std::pow(static_cast<double>(n), 1.5) / (sigma * sigma);
}

ClassMembershipReport class_membership(const RatingsMatrix& r, Index n_bar) {
  validate_split(r, n_bar);
  ClassMembershipReport rep;
  rep.n_bar = n_bar;
  rep.kappa = unpopular_kappa(r, n_bar);
  rep.kappa_lower = unpopular_kappa_lower(r, n_bar);
  rep.popular_sigma = popular_sigma(r, n_bar);
  rep.user_classes = classify_users(r, n_bar);
  rep.exclusive = true;
  for (Index u = 0; u < r.users(); ++u) {
    const UserClass c = rep.user_classes[u];
    if (c.majority) rep.majority_users.push_back(u);
    if (c.minority) rep.minority_users.push_back(u);
    if (c.majority && c.minority) rep.exclusive = false;
  }
  rep.has_minority = !rep.minority_users.empty();
  rep.necessary_sigma =
      kTwoPow54 * std::pow(static_cast<double>(r.items()), 0.75) * std::sqrt(rep.kappa) < rep.popular_sigma;

  if (!(rep.popular_sigma > 0.0)) {
    rep.assumption_f3.assign(rep.majority_users.size(), false);
    rep.assumption_f4.assign(rep.minority_users.size(), false);
    rep.reason = "sigma_nbar of the popular block is zero; the ratings gap is undefined";
    return rep;
  }
  const double delta = ratings_gap(rep.kappa, r.items(), rep.popular_sigma);
  rep.delta_gap = delta;

  rep.f3_margin = std::numeric_limits<double>::infinity();
  for (Index u : rep.majority_users) {
    const auto second = second_best(r, u);
    const double margin = second ? (row_max(r, u) - delta) - *second : -std::numeric_limits<double>::infinity();
    rep.assumption_f3.push_back(margin > 0.0);
    rep.f3_margin = std::min(rep.f3_margin, margin);
  }
  rep.f4_margin = std::numeric_limits<double>::infinity();
  for (Index u : rep.minority_users) {
    const double margin = max_over_prefix(r, u, n_bar) - delta;
    rep.assumption_f4.push_back(margin > 0.0);
    rep.f4_margin = std::min(rep.f4_margin, margin);
  }

  const bool f3 = std::all_of(rep.assumption_f3.begin(), rep.assumption_f3.end(), [](bool b) { return b; });
  const bool f4 = std::all_of(rep.assumption_f4.begin(), rep.assumption_f4.end(), [](bool b) { return b; });
  rep.in_class = f3 && f4;
  if (!f3) {
    rep.reason = "a majority user's top rating does not clear the ratings gap";
  } else if (!f4) {
    rep.reason = "a minority user has no popular rating above the ratings gap";
  }
  return rep;
}

SingularBoundsCheck singular_bounds_check(const RatingsMatrix& r, Index n_bar) {
  validate_split(r, n_bar);
  const SpectralSummary s = spectral(r);
  const double kappa = unpopular_kappa(r, n_bar);
  const double n = static_cast<double>(r.items());
  SingularBoundsCheck c;
  c.sigma_nbar = s.sigma(n_bar);
  c.sigma_next = s.sigma(n_bar + 1);
  c.lower_bound = kTwoPow54 * std::pow(n, 0.75) * std::sqrt(kappa);
  c.upper_bound = std::sqrt((n - static_cast<double>(n_bar)) * kappa);
  c.lower_holds = c.sigma_nbar >= c.lower_bound;
  c.upper_holds = c.sigma_next <= c.upper_bound;
  return c;
}

std::optional<Interval> gap_interval_F(const RatingsMatrix& r, Index n_bar) {
  validate_split(r, n_bar);
  const double kappa = unpopular_kappa(r, n_bar);
  if (!(kappa > 0.0)) return std::nullopt;
  const double n = static_cast<double>(r.items());
  return Interval{std::sqrt((n - static_cast<double>(n_bar)) * kappa),
                  kTwoPow54 * std::pow(n, 0.75) * std::sqrt(kappa)};
}

double projection_gap(const RatingsMatrix& r, Index n_bar) {
  validate_split(r, n_bar);
  const SvdFactors f = decompose(r.values());
  if (numeric_rank(f.sigma) < n_bar) {
    throw std::invalid_argument("matrix rank is below n_bar");
  }
  const Matrix v = f.v.leftCols(to_eigen(n_bar));
  Matrix diff = v * v.transpose();
  for (Index i = 0; i < n_bar; ++i) diff(to_eigen(i), to_eigen(i)) -= 1.0;
  return diff.norm();
}

double projection_gap_bound(const RatingsMatrix& r, Index n_bar) {
  validate_split(r, n_bar);
  const double delta = ratings_gap(unpopular_kappa(r, n_bar), r.items(), popular_sigma(r, n_bar));
  return delta / (2.0 * std::sqrt(static_cast<double>(r.items())));
}

IndexList switch_users(const RatingsMatrix& r, Index n_bar) {
  const auto classes = classify_users(r, n_bar);
  IndexList out;
  for (Index u = 0; u < r.users(); ++u) {
    if (!classes[u].minority) continue;
    const IndexList tops = top_items(r, u);
    if (std::find(tops.begin(), tops.end(), n_bar) != tops.end()) out.push_back(u);
  }
  return out;
}

DeltaInterval delta_interval(const RatingsMatrix& r, Index n_bar) {
  const auto classes = classify_users(r, n_bar);
  const IndexList sw = switch_users(r, n_bar);
  if (sw.empty()) throw std::invalid_argument("no minority user tops the manipulated item");
  double other_max = 0.0;
  double other_min = 0.0;
  for (Index u = 0; u < r.users(); ++u) {
    if (!classes[u].minority || std::binary_search(sw.begin(), sw.end(), u)) continue;
    other_max += max_over_prefix(r, u, n_bar + 1);
    other_min += min_over_prefix(r, u, n_bar + 1);
  }
  double switch_target = 0.0;
  double switch_popular = 0.0;
  for (Index u : sw) {
    switch_target += r(u, n_bar);
    switch_popular += max_over_prefix(r, u, n_bar);
  }
  return {std::max(0.0, other_max - other_min), switch_target - switch_popular};
}

double sigma_hat(const RatingsMatrix& r_star, Index n_bar, const Vector& r_tilde) {
  validate_split(r_star, n_bar);
  if (r_tilde.size() != to_eigen(r_star.users())) {
    throw std::invalid_argument("r_tilde length must equal the user count");
  }
  const double sigma = popular_sigma(r_star, n_bar);
  const Matrix a = r_star.values().leftCols(to_eigen(n_bar));
  const double radicand = std::min(r_tilde.squaredNorm(), sigma * sigma) - (r_tilde.transpose() * a).norm();
  if (radicand < 0.0) throw std::domain_error("sigma_hat radicand is negative");
  return std::sqrt(radicand);
}

RatingsMatrix apply_general_strategy(const RatingsMatrix& r_star, Index n_bar, const Vector& r_tilde) {
  validate_split(r_star, n_bar);
  if (r_tilde.size() != to_eigen(r_star.users())) {
    throw std::invalid_argument("r_tilde length must equal the user count");
  }
  if ((r_tilde.array() < 0.0).any() || (r_tilde.array() > 1.0).any()) {
    throw std::invalid_argument("r_tilde entries must lie in [0, 1]");
  }
  const auto classes = classify_users(r_star, n_bar);
  for (Index u = 0; u < r_star.users(); ++u) {
    if (classes[u].minority && r_tilde(to_eigen(u)) != r_star(u, n_bar)) {
      throw std::invalid_argument("minority user " + std::to_string(u) + " rating was changed");
    }
  }
  return r_star.with_column(n_bar, r_tilde);
}

GeneralSufficiencyReport check_general_sufficiency(const RatingsMatrix& r_star, Index n_bar,
                                                   const Vector& r_tilde, double alpha) {
  validate_split(r_star, n_bar);
  GeneralSufficiencyReport rep;
  const Index m = r_star.users();
  const Index n = r_star.items();

  const ClassMembershipReport cls = class_membership(r_star, n_bar);
  rep.in_class = cls.in_class;
  rep.groups_assumption = cls.groups_assumption();
  rep.switch_users = switch_users(r_star, n_bar);
  if (!rep.switch_users.empty()) rep.item_liked = delta_interval(r_star, n_bar).holds();
  if (const auto gap = gap_interval_F(r_star, n_bar)) rep.alpha_in_gap = gap->contains(alpha);

  rep.strategy_feasible = r_tilde.size() == to_eigen(m) && (r_tilde.array() >= 0.0).all() &&
                          (r_tilde.array() <= 1.0).all();
  if (rep.strategy_feasible) {
    for (Index u : cls.minority_users) {
      if (r_tilde(to_eigen(u)) != r_star(u, n_bar)) rep.strategy_feasible = false;
    }
  }

  if (!rep.in_class) {
    rep.precondition_failure = "not in the popularity gap class: " + cls.reason;
  } else if (!rep.groups_assumption) {
    rep.precondition_failure = "majority and minority users overlap or no minority user exists";
  } else if (rep.switch_users.empty()) {
    rep.precondition_failure = "no switch users";
  } else if (!rep.item_liked) {
    rep.precondition_failure = "no positive delta satisfies the item-liked assumption";
  } else if (!rep.alpha_in_gap) {
    rep.precondition_failure = "alpha outside the singular value gap";
  } else if (!rep.strategy_feasible) {
    rep.precondition_failure = "r_tilde leaves [0,1] or changes a minority rating";
  }
  if (r_tilde.size() != to_eigen(m)) return rep;

  rep.kappa_next = unpopular_kappa(r_star, n_bar + 1);
  rep.derived_alpha_bound =
      alpha > std::sqrt(static_cast<double>(n - n_bar - 1) * rep.kappa_next);

  try {
    rep.sigma_hat = sigma_hat(r_star, n_bar, r_tilde);
  } catch (const std::domain_error&) {
    return rep;
  }
  if (!(*rep.sigma_hat > 0.0)) return rep;
  const double gap = ratings_gap(rep.kappa_next, n, *rep.sigma_hat);
  rep.collective_gap = gap;

  rep.margin_alpha = *rep.sigma_hat - alpha;
  rep.alpha_below_sigma_hat = rep.margin_alpha > 0.0;

  const double inf = std::numeric_limits<double>::infinity();
  rep.margin_collective = inf;
  rep.margin_majority = inf;
  for (Index u : cls.majority_users) {
    const double top = row_max(r_star, u);
    rep.margin_collective = std::min(rep.margin_collective, (top - gap) - r_tilde(to_eigen(u)));
    const auto second = second_best(r_star, u);
    rep.margin_majority = std::min(rep.margin_majority, second ? (top - gap) - *second : -inf);
  }
  rep.margin_switch = inf;
  for (Index u : rep.switch_users) {
    const auto second = second_best(r_star, u);
    rep.margin_switch = std::min(rep.margin_switch, second ? (r_star(u, n_bar) - gap) - *second : -inf);
  }
  rep.margin_others = inf;
  for (Index u : cls.minority_users) {
    if (std::binary_search(rep.switch_users.begin(), rep.switch_users.end(), u)) continue;
    rep.margin_others = std::min(rep.margin_others, max_over_prefix(r_star, u, n_bar + 1) - gap);
  }
  rep.collective_below_top = rep.margin_collective > 0.0;
  rep.majority_stay = rep.margin_majority > 0.0;
  rep.switch_join = rep.margin_switch > 0.0;
  rep.others_stay = rep.margin_others > 0.0;
  return rep;
}

NoLargerNbarCheck no_larger_nbar_check(const RatingsMatrix& r, Index n_bar) {
  validate_split(r, n_bar);
  NoLargerNbarCheck c;
  const double n = static_cast<double>(r.items());
  const double threshold = (n - static_cast<double>(n_bar)) * unpopular_kappa(r, n_bar) /
                           (4.0 * std::sqrt(2.0) * n * std::sqrt(n));
  c.premise = unpopular_kappa_lower(r, n_bar) > threshold;
  if (!c.premise) return c;
  for (Index larger = n_bar + 1; larger < r.items(); ++larger) {
    if (class_membership(r, larger).in_class) c.larger_in_class.push_back(larger);
  }
  c.all_larger_fail = c.larger_in_class.empty();
  return c;
}

namespace {

PopGapInstance draw_popgap(const PopGapSpec& spec, std::mt19937_64& gen) {
  const Index n = spec.n_bar + spec.n_unpopular;
  std::vector<std::vector<double>> rows;
  PopGapInstance inst;
  inst.n_bar = spec.n_bar;

  for (Index item = 0; item < spec.n_bar; ++item) {
    const Index size = spec.group_min +
                       static_cast<Index>(detail::uniform_below(gen, spec.group_max - spec.group_min + 1));
    for (Index k = 0; k < size; ++k) {
      std::vector<double> row(n, 0.0);
      row[item] = 1.0;
      for (Index other = 0; other < spec.n_bar; ++other) {
        if (other != item && detail::uniform01(gen) < 0.3) {
          row[other] = detail::uniform_real(gen, 0.0, spec.majority_off_max);
        }
      }
      inst.majority_users.push_back(rows.size());
      rows.push_back(std::move(row));
    }
  }

  auto minority_row = [&](Index own, double lo, double hi) {
    std::vector<double> row(n, 0.0);
    row[own] = detail::uniform_real(gen, lo, hi);
    row[detail::uniform_below(gen, spec.n_bar)] = detail::uniform_real(gen, 0.4, 0.55);
    return row;
  };
  for (Index k = 0; k < spec.switch_users; ++k) {
    inst.switch_users.push_back(rows.size());
    rows.push_back(minority_row(spec.n_bar, 0.92, 1.0));
  }
  for (Index item = spec.n_bar + 1; item < n; ++item) {
    for (Index k = 0; k < spec.other_minority; ++k) {
      inst.other_minority.push_back(rows.size());
      rows.push_back(minority_row(item, 0.6, 0.9));
    }
  }
  inst.ratings = RatingsMatrix::from_rows(rows);
  return inst;
}

}  // namespace

PopGapInstance generate_popgap(const PopGapSpec& spec, std::uint64_t seed) {
  if (spec.n_bar == 0 || spec.n_unpopular == 0) {
    throw std::invalid_argument("need at least one popular and one unpopular item");
  }
  if (spec.group_min == 0 || spec.group_max < spec.group_min) {
    throw std::invalid_argument("group size range is empty");
  }
  if (spec.switch_users == 0) throw std::invalid_argument("need at least one switch user");
  if (!(spec.majority_off_max >= 0.0 && spec.majority_off_max < 1.0)) {
    throw std::invalid_argument("majority_off_max must lie in [0, 1)");
  }
  std::mt19937_64 gen = detail::make_engine({seed, 0x706f70676170ULL});
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    PopGapInstance inst = draw_popgap(spec, gen);
    const ClassMembershipReport cls = class_membership(inst.ratings, spec.n_bar);
    if (cls.in_class && cls.groups_assumption() && delta_interval(inst.ratings, spec.n_bar).holds()) {
      return inst;
    }
  }
  throw std::runtime_error("no in-class instance found for this spec; enlarge the popular groups");
}

Vector draw_general_strategy(const PopGapInstance& inst, double fraction, double value,
                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must lie in (0, 1]");
  if (!(value >= 0.0 && value <= 1.0)) throw std::invalid_argument("value must lie in [0, 1]");
  Vector r_tilde = inst.ratings.values().col(to_eigen(inst.n_bar));
  IndexList pool = inst.majority_users;
  const auto count = static_cast<Index>(std::ceil(fraction * static_cast<double>(pool.size())));
  std::mt19937_64 gen = detail::make_engine({seed, 0x7374726174ULL});
  for (Index a = 0; a < count; ++a) {
    const Index b = a + static_cast<Index>(detail::uniform_below(gen, pool.size() - a));
    std::swap(pool[a], pool[b]);
    r_tilde(to_eigen(pool[a])) = value;
  }
  return r_tilde;
}

}  // namespace colrec
