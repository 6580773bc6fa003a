#include "colrec/csv.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace colrec;

namespace {

RatingsTable parse(const std::string& text) {
  std::istringstream in(text);
  return read_ratings_csv(in);
}

}  // namespace

TEST(Csv, DenseIndicesInFirstSeenOrder) {
  const RatingsTable t = parse("user,item,rating\nbob,x,1\nann,y,0.5\nbob,z,2\n");
  EXPECT_EQ(t.user_ids, (std::vector<std::string>{"bob", "ann"}));
  EXPECT_EQ(t.item_ids, (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_EQ(t.ratings.users(), 2u);
  EXPECT_EQ(t.ratings.items(), 3u);
  EXPECT_DOUBLE_EQ(t.ratings(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(t.ratings(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(t.ratings(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(t.ratings(1, 0), 0.0);  // absent pairs are zero
}

TEST(Csv, ToleratesBomCrlfAndBlankLines) {
  const RatingsTable t = parse("\xEF\xBB\xBFuser,item,rating\r\n a , b ,3\r\n\r\n");
  EXPECT_EQ(t.user_ids.front(), "a");
  EXPECT_DOUBLE_EQ(t.ratings(0, 0), 3.0);
}

TEST(Csv, RejectsMalformedInput) {
  EXPECT_THROW(parse(""), std::runtime_error);
  EXPECT_THROW(parse("u,i,r\n1,1,1\n"), std::runtime_error);
  EXPECT_THROW(parse("user,item,rating\n"), std::runtime_error);
  EXPECT_THROW(parse("user,item,rating\n1,1\n"), std::runtime_error);
  EXPECT_THROW(parse("user,item,rating\n1,1,1,1\n"), std::runtime_error);
  EXPECT_THROW(parse("user,item,rating\n1,1,abc\n"), std::runtime_error);
  EXPECT_THROW(parse("user,item,rating\n1,1,1.5x\n"), std::runtime_error);
  EXPECT_THROW(parse("user,item,rating\n1,1,-1\n"), std::runtime_error);
  EXPECT_THROW(parse("user,item,rating\n1,1,inf\n"), std::runtime_error);
  EXPECT_THROW(parse("user,item,rating\n,1,1\n"), std::runtime_error);
}

TEST(Csv, DuplicatePairNamesTheLine) {
  try {
    parse("user,item,rating\na,b,1\nc,d,1\na,b,2\n");
    FAIL() << "expected a duplicate error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(Csv, RecordsKeepFileOrderAndDuplicates) {
  std::istringstream in("user,item,rating\n2,1,0.25\n2,1,0.5\n");
  const auto recs = read_rating_records(in);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].line, 2u);
  EXPECT_EQ(recs[1].rating, 0.5);
}

TEST(Csv, DenseRoundTripIsExact) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  std::bernoulli_distribution zero(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix v(7, 5);
    for (Eigen::Index i = 0; i < v.rows(); ++i)
      for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = zero(gen) ? 0.0 : d(gen);
    const RatingsTable t = with_index_ids(RatingsMatrix(v));
    std::stringstream buf;
    write_ratings_csv(buf, t, true);
    const RatingsTable back = read_ratings_csv(buf);
    EXPECT_EQ(back.user_ids, t.user_ids);
    EXPECT_EQ(back.item_ids, t.item_ids);
    EXPECT_TRUE(back.ratings.values() == v);
  }
}

TEST(Csv, SparseExportKeepsIdToRatingMap) {
  Matrix v = Matrix::Zero(3, 3);
  v(0, 2) = 1.0;
  v(2, 1) = 0.125;
  RatingsTable t = with_index_ids(RatingsMatrix(v));
  t.user_ids = {"u0", "u1", "u2"};
  t.item_ids = {"a", "b", "c"};
  std::stringstream buf;
  write_ratings_csv(buf, t, false);
  const RatingsTable back = read_ratings_csv(buf);
  ASSERT_EQ(back.ratings.users(), 3u);
  ASSERT_EQ(back.ratings.items(), 3u);
  auto lookup = [&](const RatingsTable& x, const std::string& u, const std::string& i) {
    const auto ui = std::find(x.user_ids.begin(), x.user_ids.end(), u) - x.user_ids.begin();
    const auto ii = std::find(x.item_ids.begin(), x.item_ids.end(), i) - x.item_ids.begin();
    return x.ratings(static_cast<Index>(ui), static_cast<Index>(ii));
  };
  for (const auto& u : t.user_ids)
    for (const auto& i : t.item_ids) EXPECT_EQ(lookup(back, u, i), lookup(t, u, i)) << u << "," << i;
}

TEST(Csv, WriteRejectsMismatchedIds) {
  RatingsTable t = with_index_ids(RatingsMatrix::zeros(2, 2));
  t.item_ids.pop_back();
  std::ostringstream out;
  EXPECT_THROW(write_ratings_csv(out, t), std::invalid_argument);
}
