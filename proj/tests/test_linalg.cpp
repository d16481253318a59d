#include "support.hpp"

#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>
#include <limits>

namespace thmrom {
namespace {

SparseMatrix random_sparse(int n, double density, bool spd, std::mt19937& rng) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && coin(rng) < density) {
        const double v = val(rng);
        t.emplace_back(i, j, v);
        if (spd) t.emplace_back(j, i, v);
      }
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, 2.0 * n * density + 2.0);
  return sparse_from_triplets(n, n, t);
}

class SparseSolve : public ::testing::TestWithParam<int> {};

TEST_P(SparseSolve, GeneralAndSpdResidualsAreSmall) {
  std::mt19937 rng(GetParam());
  for (bool spd : {false, true}) {
    const SparseMatrix a = random_sparse(40, 0.1, spd, rng);
    const Vector b = test::random_vector(40, rng);
    const Factorization f =
        factorize(a, spd ? MatrixKind::symmetric_positive_definite : MatrixKind::general);
    EXPECT_EQ(f.size(), 40);
    const Vector x = solve(f, b);
    EXPECT_LE((a * x - b).norm(), 1e-12 * b.norm());
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SparseSolve, ::testing::Range(1, 9));

TEST(Factorization, SingularMatrixThrowsNumericalError) {
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 0, 1.0}, {0, 1, 2.0}, {1, 1, 2.0}};
  const SparseMatrix a = sparse_from_triplets(2, 2, t);
  EXPECT_THROW(Factorization{a}, NumericalError);
  const SparseMatrix sym = sparse_from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}});
  EXPECT_THROW(Factorization(sym, MatrixKind::symmetric_positive_definite), NumericalError);
}

TEST(Factorization, NonSquareThrowsInvalidArgument) {
  const SparseMatrix a = sparse_from_triplets(2, 3, {{0, 0, 1.0}});
  EXPECT_THROW(Factorization{a}, std::invalid_argument);
}

TEST(Factorization, ConcurrentSolvesMatchSerialSolves) {
  std::mt19937 rng(7);
  const SparseMatrix a = random_sparse(60, 0.05, false, rng);
  const Factorization f(a);
  const DenseMatrix rhs = test::random_matrix(60, 32, rng);
  DenseMatrix serial(60, 32), concurrent(60, 32);
  for (int k = 0; k < 32; ++k) serial.col(k) = f.solve(rhs.col(k));
#pragma omp parallel for num_threads(4)
  for (int k = 0; k < 32; ++k) concurrent.col(k) = f.solve(rhs.col(k));
  EXPECT_EQ((serial - concurrent).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SparseFromTriplets, SumsDuplicatesAndDropsZeros) {
  const SparseMatrix a =
      sparse_from_triplets(3, 3, {{0, 0, 1.0}, {0, 0, 2.5}, {1, 2, 4.0}, {2, 1, 0.0},
                                  {2, 2, 1.0}, {2, 2, -1.0}});
  EXPECT_DOUBLE_EQ(a.coeff(0, 0), 3.5);
  EXPECT_DOUBLE_EQ(a.coeff(1, 2), 4.0);
  EXPECT_EQ(a.nonZeros(), 2);
}

class SymEigProperty : public ::testing::TestWithParam<int> {};

TEST_P(SymEigProperty, DecompositionIsOrthonormalAndDescending) {
  std::mt19937 rng(GetParam());
  const int n = 5 + GetParam();
  const DenseMatrix b = test::random_matrix(n, n, rng);
  const DenseMatrix c = b + b.transpose();
  const SymEig e = sym_eig(c);
  ASSERT_EQ(static_cast<int>(e.values.size()), n);
  EXPECT_TRUE(std::is_sorted(e.values.rbegin(), e.values.rend()));
  const DenseMatrix lambda =
      Eigen::Map<const Vector>(e.values.data(), n).asDiagonal().toDenseMatrix();
  EXPECT_LE((c * e.vectors - e.vectors * lambda).norm(), 1e-12 * c.norm());
  EXPECT_LE((e.vectors.transpose() * e.vectors - DenseMatrix::Identity(n, n)).norm(), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Seeds, SymEigProperty, ::testing::Range(1, 9));

TEST(SymEig, RejectsNonSymmetricInput) {
  DenseMatrix c(2, 2);
  c << 1.0, 2.0, 0.0, 1.0;
  EXPECT_THROW(sym_eig(c), std::invalid_argument);
}

TEST(ConditionNumber, DiagonalAndSingular) {
  EXPECT_NEAR(condition_number_2(Vector::LinSpaced(3, 1.0, 100.0).asDiagonal().toDenseMatrix()),
              100.0, 1e-10);
  DenseMatrix s = DenseMatrix::Zero(2, 2);
  s(0, 0) = 1.0;
  EXPECT_EQ(condition_number_2(s), std::numeric_limits<double>::infinity());
}

TEST(DenseLu, SolvesAndRejectsSingular) {
  std::mt19937 rng(3);
  const DenseMatrix a = test::random_matrix(6, 6, rng) + 6.0 * DenseMatrix::Identity(6, 6);
  const Vector b = test::random_vector(6, rng);
  const DenseLu lu(a);
  EXPECT_EQ(lu.size(), 6);
  EXPECT_LE((a * lu.solve(b) - b).norm(), 1e-13);
  DenseMatrix s = a;
  s.row(5) = s.row(0);
  EXPECT_THROW(DenseLu{s}, NumericalError);
}

}  // namespace
}  // namespace thmrom
