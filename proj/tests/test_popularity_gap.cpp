#include "colrec/learner.hpp"
#include "colrec/popularity_gap.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace colrec;
using colrec::testing::random_matrix;

namespace {

PopGapSpec roomy_spec() {
  PopGapSpec spec;
  spec.group_min = 2500;
  spec.group_max = 3500;
  spec.majority_off_max = 0.2;
  return spec;
}

// Four popular indicator columns of 100 users each, off-ratings 0.2, one
// unpopular column with sum 1 spread over two minority users, plus a picky column.
RatingsMatrix constructed(double off = 0.2) {
  Matrix v = Matrix::Zero(402, 6);
  for (Eigen::Index u = 0; u < 400; ++u) {
    for (Eigen::Index i = 0; i < 4; ++i) v(u, i) = off;
    v(u, u / 100) = 1.0;
  }
  v(400, 4) = 0.5;
  v(400, 0) = 0.1;
  v(401, 5) = 1.0;
  v(401, 1) = 0.1;
  return RatingsMatrix(v);
}

bool subset(const IndexList& a, const IndexList& b) {
  return std::all_of(a.begin(), a.end(), [&](Index x) { return std::find(b.begin(), b.end(), x) != b.end(); });
}

}  // namespace

TEST(PopularPrefs, ZeroesUnpopularColumns) {
  const RatingsMatrix r = constructed();
  const RatingsMatrix p = popular_prefs(r, 5);
  EXPECT_TRUE(p.values().col(5).isZero());
  EXPECT_TRUE(p.values().leftCols(5) == r.values().leftCols(5));
  EXPECT_TRUE(popular_prefs(RatingsMatrix::zeros(3, 3), 1).values().isZero());
  const Vector a = spectral(popular_prefs(r, 4)).singular_values;
  const Vector b = spectral(Matrix(r.values().leftCols(4))).singular_values;
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(a(j), b(j), 1e-9);
}

TEST(PopularPrefs, SplitValidation) {
  EXPECT_THROW(validate_split(constructed(), 0), std::invalid_argument);
  EXPECT_THROW(validate_split(constructed(), 6), std::invalid_argument);
  EXPECT_THROW(validate_split(RatingsMatrix(Matrix::Constant(2, 3, 2.0)), 1), std::invalid_argument);
  EXPECT_NO_THROW(validate_split(constructed(), 4));
}

TEST(ClassifyUsers, TiesStraddlingBothClasses) {
  Matrix v = Matrix::Zero(3, 3);
  v(0, 0) = 1.0;
  v(1, 0) = v(1, 2) = 0.5;
  v(2, 2) = 0.9;
  const auto c = classify_users(RatingsMatrix(v), 2);
  EXPECT_TRUE(c[0].majority && !c[0].minority);
  EXPECT_TRUE(c[1].majority && c[1].minority);
  EXPECT_TRUE(!c[2].majority && c[2].minority);
  EXPECT_FALSE(class_membership(RatingsMatrix(v), 2).exclusive);
}

TEST(ClassifyUsers, MatchesArgmaxScan) {
  std::mt19937_64 gen(51);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix v = random_matrix(gen, 20, 6);
    v = (v.array() * 4).round() / 4;
    const auto c = classify_users(RatingsMatrix(v), 3);
    for (Eigen::Index u = 0; u < 20; ++u) {
      const double best = v.row(u).maxCoeff();
      EXPECT_EQ(c[static_cast<Index>(u)].majority, (v.row(u).head(3).array() == best).any());
      EXPECT_EQ(c[static_cast<Index>(u)].minority, (v.row(u).tail(3).array() == best).any());
    }
  }
}

TEST(RatingsGap, ArithmeticAndMonotone) {
  EXPECT_NEAR(ratings_gap(1.0, 6, 10.0), std::pow(2.0, 2.5) * std::pow(6.0, 1.5) / 100.0, 1e-12);
  EXPECT_NEAR(ratings_gap(1.0, 6, 10.0), 0.831, 1e-3);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 200; ++k) {
    const double d = ratings_gap(0.7, 9, 0.1 * k);
    EXPECT_LE(d, prev);
    prev = d;
  }
}

TEST(ClassMembership, ZeroKappaReducesToStrictTopGap) {
  Matrix v = Matrix::Zero(4, 3);
  v(0, 0) = 1;
  v(1, 1) = 1;
  v(2, 0) = 0.3;
  v(2, 1) = 0.6;
  v(3, 0) = 1;
  const auto rep = class_membership(RatingsMatrix(v), 2);
  EXPECT_EQ(rep.kappa, 0.0);
  ASSERT_TRUE(rep.delta_gap);
  EXPECT_EQ(*rep.delta_gap, 0.0);
  EXPECT_FALSE(rep.has_minority);
  EXPECT_TRUE(rep.in_class);  // only the top-gap checks remain, and they are strict
  EXPECT_FALSE(rep.groups_assumption());
}

TEST(ClassMembership, ConstructedInstance) {
  const auto rep = class_membership(constructed(), 4);
  EXPECT_DOUBLE_EQ(rep.kappa, 1.0);
  EXPECT_DOUBLE_EQ(rep.kappa_lower, 0.5);
  const double sigma = spectral(Matrix(constructed().values().leftCols(4))).sigma(4);
  EXPECT_NEAR(rep.popular_sigma, sigma, 1e-9);
  ASSERT_TRUE(rep.delta_gap);
  EXPECT_NEAR(*rep.delta_gap, std::pow(2.0, 2.5) * std::pow(6.0, 1.5) / (sigma * sigma), 1e-12);
  EXPECT_EQ(rep.majority_users.size(), 400u);
  EXPECT_EQ(rep.minority_users, (IndexList{400, 401}));
  // in_class holds exactly when every assumption holds.
  const bool all = std::all_of(rep.assumption_f3.begin(), rep.assumption_f3.end(), [](bool b) { return b; }) &&
                   std::all_of(rep.assumption_f4.begin(), rep.assumption_f4.end(), [](bool b) { return b; });
  EXPECT_EQ(rep.in_class, all && rep.groups_assumption());
}

TEST(ClassMembership, RankDeficientPopularBlockIsFlagged) {
  Matrix v = Matrix::Zero(3, 3);
  v(0, 0) = v(1, 0) = 1.0;
  v(2, 2) = 1.0;
  const auto rep = class_membership(RatingsMatrix(v), 2);
  EXPECT_FALSE(rep.delta_gap);
  EXPECT_FALSE(rep.in_class);
  EXPECT_FALSE(rep.reason.empty());
}

TEST(GapIntervalF, Arithmetic) {
  const auto g = gap_interval_F(constructed(), 4);
  ASSERT_TRUE(g);
  EXPECT_NEAR(g->lo, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(g->hi, std::pow(2.0, 1.25) * std::pow(6.0, 0.75), 1e-12);
  EXPECT_NEAR(g->hi, 9.12, 1e-2);
  Matrix v = Matrix::Zero(2, 3);
  v(0, 0) = v(1, 1) = 1;
  EXPECT_FALSE(gap_interval_F(RatingsMatrix(v), 2));
}

TEST(GapIntervalF, NonemptyFormulaSweep) {
  for (int n = 2; n <= 100; ++n) {
    for (int nb = 1; nb < n; ++nb) {
      EXPECT_LT(std::sqrt(n - nb), std::pow(2.0, 1.25) * std::pow(n, 0.75)) << n << " " << nb;
    }
  }
}

TEST(SingularBounds, UpperBoundHoldsOutOfClass) {
  Matrix v = Matrix::Zero(5, 4);
  v.col(3).setOnes();  // heavy unpopular column
  v(0, 0) = v(1, 1) = 1;
  const auto c = singular_bounds_check(RatingsMatrix(v), 2);
  EXPECT_TRUE(c.upper_holds);
}

TEST(ProjectionGap, ZeroWithoutUnpopularRatings) {
  Matrix v = Matrix::Zero(6, 4);
  for (Eigen::Index u = 0; u < 6; ++u) v(u, u % 2) = 1.0;
  EXPECT_NEAR(projection_gap(RatingsMatrix(v), 2), 0.0, 1e-12);
  EXPECT_THROW(projection_gap(RatingsMatrix(v), 3), std::invalid_argument);
}

TEST(ProjectionGap, InvariantUnderUserPermutation) {
  const RatingsMatrix r = constructed();
  IndexList rows(r.users()), cols(r.items());
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  std::mt19937_64 gen(3);
  std::shuffle(rows.begin(), rows.end(), gen);
  EXPECT_NEAR(projection_gap(permute(r, rows, cols), 4), projection_gap(r, 4), 1e-9);
}

TEST(SwitchUsers, Examples) {
  EXPECT_TRUE(switch_users(RatingsMatrix(Matrix::Identity(3, 3)), 2).size() == 1);
  Matrix v = Matrix::Zero(6, 3);
  v(0, 0) = v(1, 1) = 1;
  v(2, 2) = v(3, 2) = v(4, 2) = 1;
  v(5, 0) = 1;
  EXPECT_EQ(switch_users(RatingsMatrix(v), 2), (IndexList{2, 3, 4}));
  Matrix w = Matrix::Zero(2, 3);
  w(0, 0) = w(1, 1) = 1;
  EXPECT_TRUE(switch_users(RatingsMatrix(w), 2).empty());
}

TEST(DeltaInterval, MatchesBruteForceGrid) {
  // Sums run over the popular items plus the manipulated one.
  Matrix v = Matrix::Zero(5, 4);
  v(0, 0) = 1;
  v(1, 1) = 1;
  v(2, 2) = 1.0;  // switch user, popular max 0.2
  v(2, 0) = 0.2;
  v(3, 0) = 0.3;  // other minority users, top item 3
  v(3, 1) = 0.4;
  v(3, 2) = 0.35;
  v(3, 3) = 0.6;
  v(4, 0) = 0.2;
  v(4, 1) = 0.25;
  v(4, 2) = 0.3;
  v(4, 3) = 0.4;
  const DeltaInterval d = delta_interval(RatingsMatrix(v), 2);
  EXPECT_TRUE(d.holds());
  EXPECT_NEAR(d.lo, (0.4 + 0.3) - (0.3 + 0.2), 1e-12);
  EXPECT_NEAR(d.hi, 1.0 - 0.2, 1e-12);
  for (int k = 1; k <= 1000; ++k) {
    const double delta = k * 1e-3;
    const bool c1 = (0.4 + 0.3) <= (0.3 + 0.2) + delta;
    const bool c2 = 1.0 > 0.2 + delta;
    EXPECT_EQ(c1 && c2, delta >= d.lo && delta < d.hi) << delta;
  }
}

TEST(DeltaInterval, EmptyWhenSwitchMarginVanishes) {
  Matrix v = Matrix::Zero(3, 3);
  v(0, 0) = v(1, 1) = 1;
  v(2, 2) = 0.5;
  v(2, 0) = 0.5;  // ties a popular item: no margin left
  const DeltaInterval d = delta_interval(RatingsMatrix(v), 2);
  EXPECT_FALSE(d.holds());
  EXPECT_THROW(delta_interval(RatingsMatrix(Matrix::Identity(2, 3)), 2), std::invalid_argument);
}

TEST(SigmaHat, OrthogonalColumnAndClamp) {
  // The column only touches users with no popular ratings, so it is orthogonal to A(n_bar).
  Matrix v = Matrix::Zero(4, 3);
  v(0, 0) = v(1, 1) = 1;
  Vector col = Vector::Zero(4);
  col(2) = 0.3;
  col(3) = 0.4;
  EXPECT_NEAR(sigma_hat(RatingsMatrix(v), 2, col), 0.5, 1e-12);
  col(2) = col(3) = 1.0;  // r~'r~ = 2 > sigma_2^2 = 1
  EXPECT_NEAR(sigma_hat(RatingsMatrix(v), 2, col), 1.0, 1e-12);
}

TEST(SigmaHat, BelowTrueSingularValue) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PopGapInstance inst = generate_popgap(roomy_spec(), seed);
    const Vector col = draw_general_strategy(inst, 0.4, 0.8, seed);
    double sh = 0.0;
    try {
      sh = sigma_hat(inst.ratings, inst.n_bar, col);
    } catch (const std::domain_error&) {
      continue;
    }
    const RatingsMatrix revealed = apply_general_strategy(inst.ratings, inst.n_bar, col);
    const RatingsMatrix prefix = popular_prefs(revealed, inst.n_bar + 1);
    EXPECT_LE(sh, spectral(prefix).sigma(inst.n_bar + 1) + 1e-9);
  }
}

TEST(GeneralStrategy, MinorityEntriesMustStay) {
  const PopGapInstance inst = generate_popgap(PopGapSpec{}, 1);
  Vector col = inst.ratings.values().col(static_cast<Eigen::Index>(inst.n_bar));
  const Index victim = inst.switch_users.front();
  col(static_cast<Eigen::Index>(victim)) = 0.0;
  EXPECT_THROW(apply_general_strategy(inst.ratings, inst.n_bar, col), std::invalid_argument);
}

TEST(GeneralSufficiency, NoChangeFailsConditionOne) {
  const PopGapInstance inst = generate_popgap(roomy_spec(), 2);
  const Vector col = inst.ratings.values().col(static_cast<Eigen::Index>(inst.n_bar));
  const auto g = gap_interval_F(inst.ratings, inst.n_bar);
  ASSERT_TRUE(g);
  const auto rep = check_general_sufficiency(inst.ratings, inst.n_bar, col, g->lo + 0.05 * g->width());
  EXPECT_FALSE(rep.alpha_below_sigma_hat);
  EXPECT_FALSE(rep.verdict());
}

TEST(GeneralSufficiency, PassingStrategyRaisesWelfare) {
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const PopGapInstance inst = generate_popgap(roomy_spec(), seed);
    const auto g = gap_interval_F(inst.ratings, inst.n_bar);
    ASSERT_TRUE(g);
    const double alpha = g->lo + 0.05 * g->width();
    const Vector col = draw_general_strategy(inst, 0.4, 0.8, seed + 100);
    const auto rep = check_general_sufficiency(inst.ratings, inst.n_bar, col, alpha);
    if (!rep.verdict()) continue;
    ++passing;
    const RatingsMatrix revealed = apply_general_strategy(inst.ratings, inst.n_bar, col);
    const LearnerModel before = fit_learner(inst.ratings, alpha);
    const LearnerModel after = fit_learner(revealed, alpha);
    const double sw0 = social_welfare(inst.ratings, recommend(before.truncated, 1, TieBreak::seeded(seed))).social_welfare;
    const double sw1 = social_welfare(inst.ratings, recommend(after.truncated, 1, TieBreak::seeded(seed))).social_welfare;
    EXPECT_GT(sw1, sw0);
    EXPECT_EQ(after.chosen_rank, inst.n_bar + 1);
  }
  EXPECT_GT(passing, 0);
}

TEST(GeneralSufficiency, TogglingConditionTwoFails) {
  const PopGapInstance inst = generate_popgap(roomy_spec(), 0);
  const auto g = gap_interval_F(inst.ratings, inst.n_bar);
  ASSERT_TRUE(g);
  const double alpha = g->lo + 0.05 * g->width();
  Vector col = draw_general_strategy(inst, 0.4, 0.8, 100);
  ASSERT_TRUE(check_general_sufficiency(inst.ratings, inst.n_bar, col, alpha).verdict());
  const Index u = inst.majority_users.front();
  col(static_cast<Eigen::Index>(u)) = 1.0;  // as high as her top item
  const auto rep = check_general_sufficiency(inst.ratings, inst.n_bar, col, alpha);
  EXPECT_FALSE(rep.collective_below_top);
  EXPECT_FALSE(rep.verdict());
}

TEST(Generator, InstancesAreInClassWithStatedStructure) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PopGapInstance inst = generate_popgap(PopGapSpec{}, seed);
    const auto rep = class_membership(inst.ratings, inst.n_bar);
    EXPECT_TRUE(rep.in_class) << rep.reason;
    EXPECT_EQ(switch_users(inst.ratings, inst.n_bar), inst.switch_users);
    EXPECT_TRUE(subset(inst.switch_users, rep.minority_users));
    const auto b = singular_bounds_check(inst.ratings, inst.n_bar);
    EXPECT_TRUE(b.lower_holds && b.upper_holds);
    EXPECT_LE(projection_gap(inst.ratings, inst.n_bar), projection_gap_bound(inst.ratings, inst.n_bar));
  }
  const PopGapInstance a = generate_popgap(PopGapSpec{}, 9);
  const PopGapInstance b = generate_popgap(PopGapSpec{}, 9);
  EXPECT_TRUE(a.ratings == b.ratings);
}

TEST(PopularityGapOutcome, RecommendationSetsAndWelfareBound) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const PopGapInstance inst = generate_popgap(PopGapSpec{}, seed);
    const RatingsMatrix& r = inst.ratings;
    const auto g = gap_interval_F(r, inst.n_bar);
    ASSERT_TRUE(g);
    for (double t : {0.05, 0.5, 0.95}) {
      const double alpha = g->lo + t * g->width();
      const LearnerModel m = fit_learner(r, alpha);
      EXPECT_EQ(m.chosen_rank, inst.n_bar);
      const auto out = recommend(m.truncated, 1, TieBreak::seeded(seed));
      const auto rep = class_membership(r, inst.n_bar);
      double maj_max = 0.0;
      for (Index u : rep.majority_users) {
        IndexList top_pop;
        for (Index i : top_items(r, u))
          if (i < inst.n_bar) top_pop.push_back(i);
        EXPECT_TRUE(subset(out.users[u].tie_set, top_pop)) << "user " << u;
        maj_max += r.values().row(static_cast<Eigen::Index>(u)).maxCoeff();
      }
      double r_lower = 0.0;
      for (Index u : rep.minority_users) {
        for (Index i : out.users[u].tie_set) EXPECT_LT(i, inst.n_bar);
        r_lower = std::max(r_lower, r.values().row(static_cast<Eigen::Index>(u)).head(
                                        static_cast<Eigen::Index>(inst.n_bar)).maxCoeff());
      }
      const double sw = social_welfare(r, out).social_welfare;
      EXPECT_LT(sw, static_cast<double>(rep.minority_users.size()) * r_lower + maj_max + 1e-12);
    }
  }
}

TEST(NoLargerNbar, PremiseAndSweep) {
  const PopGapInstance inst = generate_popgap(PopGapSpec{}, 4);
  const auto c = no_larger_nbar_check(inst.ratings, inst.n_bar);
  if (c.premise) {
    ASSERT_TRUE(c.all_larger_fail);
    EXPECT_TRUE(*c.all_larger_fail);
    EXPECT_TRUE(c.larger_in_class.empty());
  } else {
    EXPECT_FALSE(c.all_larger_fail);
  }
  for (Index nb = inst.n_bar + 1; nb < inst.ratings.items(); ++nb) {
    const bool in = class_membership(inst.ratings, nb).in_class;
    EXPECT_EQ(in, std::find(c.larger_in_class.begin(), c.larger_in_class.end(), nb) != c.larger_in_class.end());
  }
}
