#include "colrec/learner.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

using namespace colrec;
using colrec::testing::d2_matrix;
using colrec::testing::d2_partition;
using colrec::testing::random_matrix;
using colrec::testing::s1_matrix;
using colrec::testing::s1_partition;

namespace {

// Largest k-th order statistic brute force.
double kth_largest(const RatingsMatrix& r, Index u, Index k) {
  std::vector<double> row;
  for (Index i = 0; i < r.items(); ++i) row.push_back(r(u, i));
  std::sort(row.rbegin(), row.rend());
  return row[k - 1];
}

bool contains(const IndexList& xs, Index v) { return std::find(xs.begin(), xs.end(), v) != xs.end(); }

}  // namespace

TEST(Tvr, Examples) {
  EXPECT_NEAR(tvr(d2_matrix(), 2), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(tvr(d2_matrix(), 4), 1.0, 1e-12);
  Matrix rank1 = Matrix::Ones(3, 4);
  EXPECT_NEAR(tvr(RatingsMatrix(rank1), 1), 1.0, 1e-12);
  EXPECT_THROW(tvr(d2_matrix(), 0), std::invalid_argument);
  EXPECT_THROW(tvr(d2_matrix(), 5), std::invalid_argument);
}

TEST(Tvr, StrictlyIncreasingUpToRank) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const RatingsMatrix r(random_matrix(gen, 9, 6));
    const Index rank = spectral(r).numeric_rank;
    for (Index k = 1; k < rank; ++k) EXPECT_LT(tvr(r, k), tvr(r, k + 1));
    EXPECT_NEAR(tvr(r, rank), 1.0, 1e-12);
  }
}

TEST(ChooseRank, Examples) {
  EXPECT_EQ(choose_rank(d2_matrix(), 1.5), 2u);
  EXPECT_EQ(choose_rank(d2_matrix(), 2.0), 1u);  // alpha equal to sigma_1 admits k = 1
  EXPECT_EQ(choose_rank(d2_matrix(), 5.0), 1u);
  EXPECT_EQ(choose_rank(d2_matrix(), 0.0), 4u);
  EXPECT_EQ(choose_rank(d2_matrix(), 1.0), 2u);  // sigma_3 = alpha counts as "<="
  EXPECT_EQ(choose_rank(d2_matrix(), 0.5), 4u);
}

TEST(ChooseRank, ThresholdRuleMatchesTvrIncrementRule) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> a(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const RatingsMatrix r(random_matrix(gen, 8, 5));
    const SpectralSummary s = spectral(r);
    const double alpha = a(gen);
    const double mass = s.singular_values.head(static_cast<Eigen::Index>(s.numeric_rank)).sum();
    Index by_tvr = s.numeric_rank;
    for (Index k = 1; k < s.numeric_rank; ++k) {
      if (tvr(s, k + 1) - tvr(s, k) <= alpha / mass) {
        by_tvr = k;
        break;
      }
    }
    EXPECT_EQ(choose_rank(s, alpha), by_tvr) << "alpha " << alpha;
  }
}

TEST(ChooseRank, MinimalityInvariant) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> a(0.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const RatingsMatrix r(random_matrix(gen, 7, 7));
    const SpectralSummary s = spectral(r);
    const double alpha = a(gen);
    const Index k = choose_rank(s, alpha);
    ASSERT_GE(k, 1u);
    ASSERT_LE(k, s.numeric_rank);
    EXPECT_LE(s.sigma(k + 1), alpha + 1e-12);
    if (k > 1) EXPECT_GT(s.sigma(k), alpha);
  }
}

TEST(ChooseRank, PicksMajorityRankInsideGap) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix v = Matrix::Zero(12, 5);
    v.topLeftCorner(9, 3) = random_matrix(gen, 9, 3, 1.0, 2.0);
    v.bottomRightCorner(3, 2) = random_matrix(gen, 3, 2, 0.0, 0.2);
    const RatingsMatrix r(v);
    const GroupPartition p = GroupPartition::leading_blocks(12, 5, 9, 3);
    const auto gap = singular_value_gap(r, p);
    if (!gap) continue;
    const Index k_maj = numeric_rank(majority_block(r, p));
    for (double t : {0.01, 0.5, 0.99}) {
      EXPECT_EQ(choose_rank(r, gap->lo + t * gap->width()), k_maj);
    }
  }
}

TEST(Truncate, FullRankIsIdentity) {
  std::mt19937_64 gen(6);
  const RatingsMatrix r(random_matrix(gen, 6, 4));
  const RatingsMatrix t = truncate(r, 4);
  EXPECT_TRUE(t.is_estimate());
  EXPECT_LE((t.values() - r.values()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Truncate, EckartYoungResidual) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 30; ++trial) {
    const RatingsMatrix r(random_matrix(gen, 10, 6));
    const Vector s = spectral(r).singular_values;
    for (Index k = 1; k <= 6; ++k) {
      const double resid = (r.values() - truncate(r, k).values()).squaredNorm();
      const double tail = s.tail(static_cast<Eigen::Index>(6 - k)).squaredNorm();
      EXPECT_NEAR(resid, tail, 1e-9 * std::max(1.0, tail));
      if (k < 6) EXPECT_EQ(numeric_rank(truncate(r, k).values()), k);
    }
  }
}

TEST(Truncate, GapTruncationKeepsOnlyMajorityBlock) {
  const RatingsMatrix r = s1_matrix();
  const RatingsMatrix t = truncate(r, 4);
  Matrix expected = r.values();
  expected.rightCols(2).setZero();
  EXPECT_LE((t.values() - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Recommend, D2MinorityGetsPopularItems) {
  const LearnerModel m = fit_learner(d2_matrix(), 1.5);
  ASSERT_EQ(m.chosen_rank, 2u);
  const RecommendationOutcome out = recommend(m.truncated, 1, TieBreak::seeded(1));
  for (Index u = 0; u < 8; ++u) {
    EXPECT_EQ(out.users[u].tie_set, IndexList{u / 4});
    EXPECT_EQ(out.top(u), u / 4);
  }
  for (Index u = 8; u < 10; ++u) {
    EXPECT_EQ(out.users[u].tie_set, (IndexList{0, 1, 2, 3}));
    EXPECT_EQ(out.users[u].pop_tie_set, (IndexList{0, 1}));
    EXPECT_LT(out.top(u), 2u);
  }
  EXPECT_NEAR(out.popularity(0), 4.0, 1e-9);
  EXPECT_NEAR(out.popularity(1), 4.0, 1e-9);
}

TEST(Recommend, LexicographicModeTakesSmallest) {
  const LearnerModel m = fit_learner(d2_matrix(), 1.5);
  const RecommendationOutcome out = recommend(m.truncated, 1, TieBreak::lexicographic());
  EXPECT_EQ(out.top(8), 0u);
  EXPECT_EQ(out.top(9), 0u);
}

TEST(Recommend, SeededDrawsAreReproducibleAndCoverTies) {
  const LearnerModel m = fit_learner(d2_matrix(2, 1), 1.2);
  std::set<Index> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto a = recommend(m.truncated, 1, TieBreak::seeded(seed));
    const auto b = recommend(m.truncated, 1, TieBreak::seeded(seed));
    EXPECT_EQ(a.top(5), b.top(5));
    seen.insert(a.top(5));
  }
  EXPECT_EQ(seen, (std::set<Index>{0, 1}));
}

TEST(Recommend, AllItemsWhenKEqualsN) {
  const RecommendationOutcome out = recommend(truncate(s1_matrix(), 4), 6, TieBreak::seeded(3));
  for (const auto& u : out.users) EXPECT_EQ(u.chosen, (IndexList{0, 1, 2, 3, 4, 5}));
  EXPECT_THROW(recommend(truncate(s1_matrix(), 4), 7, TieBreak::seeded(3)), std::invalid_argument);
  EXPECT_THROW(recommend(truncate(s1_matrix(), 4), 0, TieBreak::seeded(3)), std::invalid_argument);
}

TEST(Recommend, ChosenInsidePopTieSetInsideTieSet) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix v = random_matrix(gen, 12, 6);
    // Force ties: duplicate a column and round to a coarse grid.
    v.col(4) = v.col(1);
    v = (v.array() * 2.0).round() / 2.0;
    const RatingsMatrix r(v);
    for (Index k : {1, 2, 3}) {
      const RecommendationOutcome out = recommend(r, k, TieBreak::seeded(trial));
      for (const auto& u : out.users) {
        ASSERT_EQ(u.chosen.size(), k);
        EXPECT_TRUE(std::is_sorted(u.chosen.begin(), u.chosen.end()));
        for (Index i : u.chosen) EXPECT_TRUE(contains(u.pop_tie_set, i));
        for (Index i : u.pop_tie_set) EXPECT_TRUE(contains(u.tie_set, i));
      }
    }
  }
}

TEST(Recommend, TopOneMatchesBruteForceArgmaxAndPopularity) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix v = random_matrix(gen, 10, 5);
    v = (v.array() * 2.0).round() / 2.0;
    const RatingsMatrix r(v);
    const RecommendationOutcome out = recommend(r, 1, TieBreak::seeded(trial));
    const Vector pop = v.cwiseAbs().colwise().sum().transpose();
    for (Index u = 0; u < 10; ++u) {
      const double best = v.row(static_cast<Eigen::Index>(u)).maxCoeff();
      IndexList ties;
      for (Index i = 0; i < 5; ++i)
        if (v(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(i)) == best) ties.push_back(i);
      double best_pop = 0.0;
      for (Index i : ties) best_pop = std::max(best_pop, pop(static_cast<Eigen::Index>(i)));
      IndexList pop_ties;
      for (Index i : ties)
        if (pop(static_cast<Eigen::Index>(i)) == best_pop) pop_ties.push_back(i);
      EXPECT_EQ(out.users[u].tie_set, ties);
      EXPECT_EQ(out.users[u].pop_tie_set, pop_ties);
    }
  }
}

TEST(Recommend, TieSetsInvariantUnderPermutation) {
  std::mt19937_64 gen(14);
  Matrix v = random_matrix(gen, 8, 5);
  v = (v.array() * 2.0).round() / 2.0;
  const RatingsMatrix r(v);
  IndexList rows(8), cols(5);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(rows.begin(), rows.end(), gen);
  std::shuffle(cols.begin(), cols.end(), gen);
  const RatingsMatrix q = permute(r, rows, cols);
  const auto a = recommend(r, 1, TieBreak::seeded(1));
  const auto b = recommend(q, 1, TieBreak::seeded(1));
  for (Index k = 0; k < 8; ++k) {
    auto mapped = [&](const IndexList& xs) {
      std::set<Index> s;
      for (Index i : xs) s.insert(cols[i]);
      return s;
    };
    const auto& orig = a.users[rows[k]];
    EXPECT_EQ(mapped(b.users[k].tie_set), std::set<Index>(orig.tie_set.begin(), orig.tie_set.end()));
    EXPECT_EQ(mapped(b.users[k].pop_tie_set), std::set<Index>(orig.pop_tie_set.begin(), orig.pop_tie_set.end()));
  }
}

TEST(Recommend, FlagsNegativeRows) {
  Matrix v = Matrix::Constant(2, 3, -1.0);
  v(0, 0) = 0.5;
  const auto out = recommend(RatingsMatrix::estimate(v), 1, TieBreak::seeded(0));
  EXPECT_FALSE(out.users[0].negative_row);
  EXPECT_TRUE(out.users[1].negative_row);
}

TEST(Welfare, D2TruthfulEqualsMajorityMax) {
  for (int m_maj : {2, 4, 7}) {
    const RatingsMatrix r = d2_matrix(m_maj, 1);
    const LearnerModel m = fit_learner(r, 1.2);
    const auto out = recommend(m.truncated, 1, TieBreak::seeded(5));
    const WelfareReport w = social_welfare(r, r, out);
    EXPECT_DOUBLE_EQ(w.social_welfare, 2.0 * m_maj);
    EXPECT_DOUBLE_EQ(w.u_ben, w.social_welfare);
    EXPECT_DOUBLE_EQ(std::accumulate(w.per_user_welfare.begin(), w.per_user_welfare.end(), 0.0), w.social_welfare);
    ASSERT_TRUE(w.u_en);
    EXPECT_DOUBLE_EQ(*w.u_en, 2.0 * m_maj + 2.0);
    EXPECT_DOUBLE_EQ(utility_ben(r, out), w.social_welfare);
  }
}

TEST(Welfare, OracleRecommendationsGiveRowMaxima) {
  std::mt19937_64 gen(15);
  const RatingsMatrix r(random_matrix(gen, 9, 4));
  const auto out = recommend(r, 1, TieBreak::seeded(0));
  double expected = 0.0;
  for (Index u = 0; u < 9; ++u) expected += r.values().row(static_cast<Eigen::Index>(u)).maxCoeff();
  EXPECT_NEAR(social_welfare(r, out).social_welfare, expected, 1e-12);
  EXPECT_FALSE(social_welfare(r, out).u_en);
}

TEST(Welfare, TopKSumsChosenSet) {
  std::mt19937_64 gen(16);
  const RatingsMatrix r(random_matrix(gen, 6, 5));
  const auto out = recommend(r, 3, TieBreak::seeded(0));
  const WelfareReport w = social_welfare(r, out);
  for (Index u = 0; u < 6; ++u) EXPECT_NEAR(w.per_user_welfare[u], best_k_sum(r, u, 3), 1e-12);
}

TEST(Welfare, DimensionMismatchThrows) {
  const auto out = recommend(d2_matrix(), 1, TieBreak::seeded(0));
  EXPECT_THROW(social_welfare(s1_matrix(), out), std::invalid_argument);
}

TEST(UtilityEn, SumOfAbsoluteValues) {
  EXPECT_DOUBLE_EQ(utility_en(RatingsMatrix::zeros(3, 3)), 0.0);
  EXPECT_DOUBLE_EQ(utility_en(s1_matrix()), 405.0);
  Matrix v = Matrix::Zero(1, 2);
  v(0, 0) = -2.0;
  v(0, 1) = 1.0;
  EXPECT_DOUBLE_EQ(utility_en(RatingsMatrix::estimate(v)), 3.0);
}

TEST(KappaK, ExamplesAndMonotonicity) {
  EXPECT_DOUBLE_EQ(kappa_k(s1_matrix(), s1_partition(), 1), 1.0);
  EXPECT_DOUBLE_EQ(kappa_k(s1_matrix(), s1_partition(), 6), 0.0);
  EXPECT_DOUBLE_EQ(kappa_k(s1_matrix(), s1_partition(), 2), 0.0);
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 30; ++trial) {
    const RatingsMatrix r(random_matrix(gen, 8, 6, 0.01, 1.0));
    const GroupPartition p = GroupPartition::leading_blocks(8, 6, 8, 6);
    double prev = std::numeric_limits<double>::infinity();
    for (Index k = 1; k <= 6; ++k) {
      double oracle = std::numeric_limits<double>::infinity();
      for (Index u = 0; u < 8; ++u) oracle = std::min(oracle, kth_largest(r, u, k));
      const double got = kappa_k(r, p, k);
      EXPECT_DOUBLE_EQ(got, oracle);
      EXPECT_LE(got, prev);
      prev = got;
    }
  }
}

TEST(TruthfulBlocks, BlockInstancesServeMajorityAndStarveMinority) {
  std::mt19937_64 gen(18);
  for (int trial = 0; trial < 40; ++trial) {
    Matrix v = Matrix::Zero(14, 6);
    v.topLeftCorner(10, 4) = random_matrix(gen, 10, 4, 0.0, 0.3);
    for (Eigen::Index u = 0; u < 10; ++u) v(u, u % 4) = 1.0;
    v(10, 4) = v(11, 4) = 0.6;
    v(12, 5) = v(13, 5) = 0.7;
    const RatingsMatrix r(v);
    const GroupPartition p = GroupPartition::leading_blocks(14, 6, 10, 4);
    const auto gap = singular_value_gap(r, p);
    if (!gap) continue;
    const double alpha = gap->lo + 0.5 * gap->width();
    const LearnerModel m = fit_learner(r, alpha);
    const auto out = recommend(m.truncated, 1, TieBreak::seeded(trial), m.revealed_spectrum.sigma(1));
    double maj_sum = 0.0;
    for (Index u = 0; u < 10; ++u) {
      EXPECT_EQ(r(u, out.top(u)), r.values().row(static_cast<Eigen::Index>(u)).maxCoeff());
      maj_sum += r(u, out.top(u));
    }
    for (Index u = 10; u < 14; ++u) {
      EXPECT_LT(out.top(u), 4u);
      EXPECT_EQ(r(u, out.top(u)), 0.0);
    }
    EXPECT_DOUBLE_EQ(social_welfare(r, out).social_welfare, maj_sum);
  }
}
