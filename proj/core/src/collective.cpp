#include "colrec/collective.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace colrec {

namespace {

Eigen::Index to_eigen(Index i) { return static_cast<Eigen::Index>(i); }

}  // namespace

void validate_strategy(const CollectiveStrategy& s, const GroupPartition& p) {
  if (s.target_item >= p.items() || p.is_majority_item(s.target_item)) {
    throw std::invalid_argument("target item " + std::to_string(s.target_item) +
                                " is not a minority item");
  }
  if (s.collective.empty()) throw std::invalid_argument("collective is empty");
  for (Index u : s.collective) {
    if (u >= p.users() || !p.is_majority_user(u)) {
      throw std::invalid_argument("collective member " + std::to_string(u) +
                                  " is not a majority user");
    }
  }
  IndexList sorted = s.collective;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("collective lists a user twice");
  }
  if (!(s.eta > 0.0) || !std::isfinite(s.eta)) throw std::invalid_argument("eta must be positive");
}

RatingsMatrix apply_uprating(const RatingsMatrix& r_star, const GroupPartition& p,
                             const CollectiveStrategy& s) {
  p.validate(r_star);
  validate_strategy(s, p);
  Matrix values = r_star.values();
  for (Index u : s.collective) values(to_eigen(u), to_eigen(s.target_item)) = s.eta;
  return RatingsMatrix(std::move(values));
}

double aggregate_value(const RatingsMatrix& r, const IndexList& collective, Index n_bar) {
  if (n_bar > r.items()) throw std::invalid_argument("n_bar exceeds the item count");
  IndexList items(n_bar);
  for (Index i = 0; i < n_bar; ++i) items[i] = i;
  return submatrix(r.values(), collective, items).colwise().sum().maxCoeff();
}

double aggregate_value(const RatingsMatrix& r, const IndexList& collective, const GroupPartition& p) {
  if (collective.empty() || p.majority_items().empty()) {
    throw std::invalid_argument("aggregate value needs a collective and popular items");
  }
  return submatrix(r.values(), collective, p.majority_items()).colwise().sum().maxCoeff();
}

double minority_sigma1(const RatingsMatrix& r, const GroupPartition& p) {
  if (p.minority_users().empty() || p.minority_items().empty()) return 0.0;
  return spectral(minority_block(r, p)).sigma(1);
}

FinderInputs finder_inputs(const RatingsMatrix& r_star, const GroupPartition& p,
                           const CollectiveStrategy& s, double alpha, Index k_items) {
  p.validate(r_star);
  validate_strategy(CollectiveStrategy{s.target_item, s.collective, 1.0}, p);
  const SpectralSummary maj = spectral(majority_block(r_star, p));
  if (maj.numeric_rank == 0) throw std::invalid_argument("majority block has rank zero");

  FinderInputs z;
  z.sigma_kmaj = maj.sigma(maj.numeric_rank);
  z.alpha = alpha;
  z.n_bar = static_cast<double>(p.n_bar());
  z.picky_col_sq = r_star.values().col(to_eigen(s.target_item)).squaredNorm();
  z.av = aggregate_value(r_star, s.collective, p);
  z.kappa = kappa_k(r_star, p, k_items);
  z.coll_size = static_cast<double>(s.collective.size());
  return z;
}

double sufficiency_slack(const FinderInputs& z, double eta) {
  const double top = std::min(z.sigma_kmaj * z.sigma_kmaj, eta * eta * z.coll_size + z.picky_col_sq);
  return top - eta * std::sqrt(z.n_bar) * z.av - z.alpha * z.alpha;
}

std::optional<Interval> sufficient_gap(const FinderInputs& z, double sigma1_min, double eta) {
  const double radicand = sufficiency_slack(z, eta) + z.alpha * z.alpha;
  if (!(radicand >= 0.0)) return std::nullopt;
  const Interval gap{sigma1_min, std::sqrt(radicand)};
  if (!(gap.lo < gap.hi)) return std::nullopt;
  return gap;
}

std::optional<Interval> sufficient_gap(const RatingsMatrix& r_star, const GroupPartition& p,
                                       const CollectiveStrategy& s) {
  validate_strategy(s, p);
  const FinderInputs z = finder_inputs(r_star, p, s, 0.0);
  return sufficient_gap(z, minority_sigma1(r_star, p), s.eta);
}

ConditionCheck check_sufficient_conditions(const FinderInputs& z, double sigma1_min, double eta) {
  ConditionCheck c;
  c.slack = sufficiency_slack(z, eta);
  c.eta_in_range = eta > 0.0 && eta < z.kappa;
  c.alpha_below_upper = c.slack > 0.0;
  c.alpha_above_minority = z.alpha > sigma1_min;
  return c;
}

double find_eta(const FinderInputs& z) {
  if (!(z.av > 0.0)) throw std::invalid_argument("aggregate value must be positive");
  if (!(z.coll_size >= 1.0)) throw std::invalid_argument("collective size must be at least 1");
  if (!(z.n_bar > 0.0)) throw std::invalid_argument("n_bar must be positive");

  const double root_nav = std::sqrt(z.n_bar) * z.av;
  const double alpha_sq = z.alpha * z.alpha;
  double n_up = std::min((z.sigma_kmaj * z.sigma_kmaj - alpha_sq) / root_nav, z.kappa);
  const double d = z.n_bar * z.av * z.av + 4.0 * z.coll_size * (alpha_sq - z.picky_col_sq);

  double n_lo = 0.0;
  if (d < 0.0) {
    n_lo = n_up / 2.0;
  } else {
    n_lo = (root_nav + std::sqrt(d)) / (2.0 * z.coll_size);
  }
  if (n_lo < n_up) return (n_lo + n_up) / 2.0;

  // With d < 0 the quadratic has no real root and sets no upper bound.
  if (d >= 0.0) n_up = std::min((root_nav - std::sqrt(d)) / (2.0 * z.coll_size), n_up);
  if (n_up > 0.0) return n_up / 2.0;
  return 0.0;
}

double lipschitz_bound(double eta, double l1_norm, double l2_norm, Index n) {
  const double l2_sq = l2_norm * l2_norm;
  const double nn = static_cast<double>(n);
  return std::sqrt(4.0 * l2_sq + eta * l1_norm * l1_norm / 4.0 + eta * eta * nn +
                   std::max(4.0 * l2_sq, 1.0 + std::pow(eta, 4)));
}

double robustness_margin(const FinderInputs& z_hat, double eta_hat, double l1_norm, double l2_norm,
                         Index n) {
  if (!(eta_hat > 0.0)) throw std::invalid_argument("eta_hat must be positive");
  const double f = sufficiency_slack(z_hat, eta_hat);
  if (!(f > 0.0)) throw std::domain_error("eta_hat does not satisfy the sufficient conditions");
  return f / lipschitz_bound(eta_hat, l1_norm, l2_norm, n);
}

SufficiencyReport evaluate_collective(const RatingsMatrix& r_star, const GroupPartition& p,
                                      const CollectiveStrategy& s, double alpha, Index k_items,
                                      TieBreak tie_break) {
  SufficiencyReport rep;
  rep.inputs = finder_inputs(r_star, p, s, alpha, k_items);
  rep.sigma1_min = minority_sigma1(r_star, p);
  rep.gap_interval = sufficient_gap(rep.inputs, rep.sigma1_min, s.eta);
  rep.conditions = check_sufficient_conditions(rep.inputs, rep.sigma1_min, s.eta);

  rep.truthful_model = fit_learner(r_star, alpha);
  rep.truthful_outcome = recommend(rep.truthful_model.truncated, k_items, tie_break,
                                   rep.truthful_model.revealed_spectrum.sigma(1));
  rep.truthful_welfare = social_welfare(r_star, r_star, rep.truthful_outcome);

  const RatingsMatrix r_tilde = apply_uprating(r_star, p, s);
  rep.collective_model = fit_learner(r_tilde, alpha);
  rep.collective_outcome = recommend(rep.collective_model.truncated, k_items, tie_break,
                                     rep.collective_model.revealed_spectrum.sigma(1));
  rep.collective_welfare = social_welfare(r_star, r_tilde, rep.collective_outcome);

  rep.sw_before = rep.truthful_welfare.social_welfare;
  rep.sw_after = rep.collective_welfare.social_welfare;
  if (!(rep.sw_before > 0.0)) throw std::domain_error("truthful social welfare is zero");
  rep.rho = rep.sw_after / rep.sw_before;

  rep.diffs.reserve(r_star.users());
  for (Index u = 0; u < r_star.users(); ++u) {
    rep.diffs.push_back({u, rep.truthful_outcome.users[u].chosen, rep.collective_outcome.users[u].chosen,
                         rep.truthful_welfare.per_user_welfare[u],
                         rep.collective_welfare.per_user_welfare[u]});
  }
  return rep;
}

bool eta_effective(const FinderInputs& z, double eta) {
  return eta > 0.0 && eta < z.kappa && sufficiency_slack(z, eta) > 0.0;
}

FinderInputs perturb_inputs(const FinderInputs& z, const std::array<double, 6>& offset) {
  FinderInputs out = z;
  out.sigma_kmaj += offset[0];
  out.alpha += offset[1];
  out.n_bar += offset[2];
  out.picky_col_sq += offset[3];
  out.av += offset[4];
  out.coll_size += offset[5];
  return out;
}

std::vector<FinderInputs> random_perturbations(const FinderInputs& z, double radius, Index count,
                                               std::uint64_t seed) {
  if (!(radius >= 0.0)) throw std::invalid_argument("perturbation radius must be nonnegative");
  std::mt19937_64 gen = detail::make_engine({seed, 0x7065727475726245ULL});
  std::vector<FinderInputs> out;
  out.reserve(count);
  while (out.size() < count) {
    std::array<double, 6> x{};
    double norm_sq = 0.0;
    for (double& v : x) {
      v = detail::uniform_real(gen, -1.0, 1.0);
      norm_sq += v * v;
    }
    if (norm_sq >= 1.0) continue;
    for (double& v : x) v *= radius;
    out.push_back(perturb_inputs(z, x));
  }
  return out;
}

}  // namespace colrec
