#pragma once

#include "colrec/matrix.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace colrec::testing {

// Four popular items rated 1 by 100 users each, a picky item rated 1 by 4
// users, a niche item rated 1 by one user. Built here cell by cell so tests
// never lean on the library generator.
inline RatingsMatrix s1_matrix() {
  Matrix v = Matrix::Zero(405, 6);
  for (int u = 0; u < 400; ++u) v(u, u / 100) = 1.0;
  for (int u = 400; u < 404; ++u) v(u, 4) = 1.0;
  v(404, 5) = 1.0;
  return RatingsMatrix(v);
}

inline GroupPartition s1_partition() {
  IndexList users(400), items{0, 1, 2, 3};
  for (Index u = 0; u < 400; ++u) users[u] = u;
  return GroupPartition::from_majority(405, 6, users, items);
}

inline IndexList s1_collective() {  // 25 users from every popular group
  IndexList c;
  for (Index g = 0; g < 4; ++g)
    for (Index k = 0; k < 25; ++k) c.push_back(100 * g + k);
  return c;
}

// Two popular items with m_maj fans each, two minority items with m_minor fans each.
inline RatingsMatrix d2_matrix(int m_maj = 4, int m_minor = 1) {
  Matrix v = Matrix::Zero(2 * m_maj + 2 * m_minor, 4);
  int row = 0;
  for (int k = 0; k < m_maj; ++k) v(row++, 0) = 1.0;
  for (int k = 0; k < m_maj; ++k) v(row++, 1) = 1.0;
  for (int k = 0; k < m_minor; ++k) v(row++, 2) = 1.0;
  for (int k = 0; k < m_minor; ++k) v(row++, 3) = 1.0;
  return RatingsMatrix(v);
}

inline GroupPartition d2_partition(int m_maj = 4, int m_minor = 1) {
  return GroupPartition::leading_blocks(2 * m_maj + 2 * m_minor, 4, 2 * m_maj, 2);
}

// Singular values from the eigenvalues of the smaller Gram matrix.
inline std::vector<double> gram_singular_values(const Matrix& a) {
  const Matrix g = a.rows() >= a.cols() ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  std::vector<double> s;
  for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) s.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(j))));
  std::sort(s.rbegin(), s.rend());
  return s;
}

inline Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols, double lo = 0.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = d(gen);
  return m;
}

// The sufficient-condition slack written out longhand.
inline double slack_longhand(double sigma, double alpha, double n_bar, double s, double av, double coll,
                             double eta) {
  return std::min(sigma * sigma, eta * eta * coll + s) - eta * std::sqrt(n_bar) * av - alpha * alpha;
}

}  // namespace colrec::testing
