#include "support.hpp"

#include <gtest/gtest.h>

#include <omp.h>

#include <filesystem>

namespace thmrom {
namespace {

struct PodCase {
  std::shared_ptr<const SpaceSet> spaces = test::unit_spaces(6);
  SparseMatrix gram;
  PodCase() {
    gram = assemble_form(FormId::GRAM_P, PhysicalParams{}, CoefficientField::uniform(1, 1),
                         *spaces, 1.0);
  }
  int n() const { return static_cast<int>(gram.rows()); }
  SnapshotSet snapshots(const DenseMatrix& cols) const { return {Field::p, cols, gram}; }
};

// Columns spanning a `rank`-dimensional subspace with decaying weights.
DenseMatrix low_rank(int n, int m, int rank, std::mt19937& rng) {
  const DenseMatrix left = test::random_matrix(n, rank, rng);
  DenseMatrix right = test::random_matrix(rank, m, rng);
  for (int k = 0; k < rank; ++k) right.row(k) *= std::pow(10.0, -k);
  return left * right;
}

class PodProperty : public ::testing::TestWithParam<int> {};

TEST_P(PodProperty, ModesAreGramOrthonormalAndSigned) {
  std::mt19937 rng(GetParam());
  PodCase c;
  const int m = 5 + 3 * GetParam();
  const SnapshotSet s = c.snapshots(test::random_matrix(c.n(), m, rng));
  const FieldBasis b = build_field_basis(s, 100);
  EXPECT_EQ(b.r(), std::min(m, c.n()));
  const DenseMatrix cert = gram_certificate(b, c.gram);
  EXPECT_LE((cert - DenseMatrix::Identity(b.r(), b.r())).cwiseAbs().maxCoeff(), 1e-10);
  for (int k = 0; k < b.r(); ++k) {
    Eigen::Index i;
    b.modes.col(k).cwiseAbs().maxCoeff(&i);
    EXPECT_GT(b.modes(i, k), 0.0);
  }
  EXPECT_TRUE(std::is_sorted(b.eigenvalues.rbegin(), b.eigenvalues.rend()));
  EXPECT_EQ(static_cast<int>(b.eigenvalues.size()), m);
}

TEST_P(PodProperty, SvdPathMatchesCorrelationEigenvalues) {
  std::mt19937 rng(GetParam());
  PodCase c;
  // More snapshots than dofs takes the factor-SVD path.
  const int m = c.n() + 4 + GetParam();
  const SnapshotSet s = c.snapshots(test::random_matrix(c.n(), m, rng));
  const SymEig direct = sym_eig(build_correlation(s));
  const SymEig fast = correlation_eigenpairs(s);
  ASSERT_EQ(fast.values.size(), direct.values.size());
  for (int k = 0; k < m; ++k) EXPECT_NEAR(fast.values[k], direct.values[k], 1e-10 * direct.values[0]);
  for (int k = c.n(); k < m; ++k) EXPECT_EQ(fast.values[k], 0.0);
  const FieldBasis a = modes_from_eigenpairs(s, direct, 10);
  const FieldBasis b = modes_from_eigenpairs(s, fast, 10);
  EXPECT_LE(test::rel_diff(a.modes, b.modes), 1e-8);
}

TEST_P(PodProperty, LowRankSetIsReproducedByItsModes) {
  std::mt19937 rng(GetParam());
  PodCase c;
  const int rank = 1 + GetParam() % 4;
  const DenseMatrix cols = low_rank(c.n(), 20, rank, rng);
  const SnapshotSet s = c.snapshots(cols);
  const FieldBasis b = build_field_basis(s, 10);
  EXPECT_EQ(b.r(), rank);
  EXPECT_EQ(numerical_rank(b.eigenvalues), rank);
  // G-orthogonal projection onto span(Phi).
  const DenseMatrix proj = b.modes * (b.modes.transpose() * DenseMatrix(c.gram) * cols);
  EXPECT_LE(test::rel_diff(proj, cols), 1e-9);
}

TEST_P(PodProperty, CaptureEnergyMatchesEigenvalueSum) {
  std::mt19937 rng(GetParam());
  PodCase c;
  const DenseMatrix cols = test::random_matrix(c.n(), 12, rng);
  const SnapshotSet s = c.snapshots(cols);
  const DenseMatrix corr = build_correlation(s);
  double sum = 0.0;
  for (double v : build_field_basis(s, 100).eigenvalues) sum += v;
  EXPECT_NEAR(sum, corr.trace(), 1e-10 * corr.trace());
}

INSTANTIATE_TEST_SUITE_P(Seeds, PodProperty, ::testing::Range(1, 9));

TEST(Pod, FloorAndCapLimitTheBasis) {
  std::mt19937 rng(4);
  PodCase c;
  const SnapshotSet s = c.snapshots(low_rank(c.n(), 15, 6, rng));
  EXPECT_EQ(build_field_basis(s, 3).r(), 3);
  // Weights 10^{-k} give eigenvalue ratios near 10^{-2k}.
  EXPECT_LT(build_field_basis(s, 10, 1e-7).r(), 6);
  EXPECT_EQ(numerical_rank({4.0, 1.0, 1e-3, 1e-20}, 1e-6), 3);
  EXPECT_EQ(numerical_rank({4.0, 1.0, 1e-3, 1e-20}, 0.0), 4);
}

TEST(Pod, ZeroSnapshotsThrowNumericalError) {
  PodCase c;
  const SnapshotSet s = c.snapshots(DenseMatrix::Zero(c.n(), 4));
  EXPECT_THROW(build_field_basis(s, 3), NumericalError);
  EXPECT_THROW(build_correlation(c.snapshots(DenseMatrix(c.n(), 0))), std::invalid_argument);
}

TEST(Pod, TruncationKeepsLeadingModes) {
  std::mt19937 rng(8);
  PodCase c;
  const FieldBasis b = build_field_basis(c.snapshots(test::random_matrix(c.n(), 9, rng)), 6);
  const FieldBasis t = b.truncated(2);
  EXPECT_EQ(t.r(), 2);
  EXPECT_TRUE(t.modes == b.modes.leftCols(2));
  EXPECT_THROW(b.truncated(7), std::invalid_argument);
}

TEST(Pod, SerialAndParallelCorrelationAgree) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  std::mt19937 rng(2);
  PodCase c;
  const SnapshotSet s = c.snapshots(test::random_matrix(c.n(), 30, rng));
  EXPECT_TRUE(build_correlation(s, Exec::serial) == build_correlation(s, Exec::parallel));
  omp_set_num_threads(saved);
}

TEST(Pod, SnapshotsStackTrajectoriesInOrder) {
  test::SmallCase a(0.1, 0.3), b(0.1, 0.2);
  const Trajectory ta = run_hf(a.sys, a.run).trajectory;
  const Trajectory tb = run_hf(b.sys, b.run).trajectory;
  const SnapshotSet s = collect_snapshots(Field::theta, {&ta, &tb}, a.sys.at(FormId::GRAM_T));
  ASSERT_EQ(s.columns.cols(), 4 + 3);
  EXPECT_TRUE(s.columns.col(2) == ta.states[2].theta);
  EXPECT_TRUE(s.columns.col(5) == tb.states[1].theta);
}

TEST(Pod, ReducedBasisBuildsAllFieldsAndRoundTrips) {
  test::SmallCase c(0.05, 0.5);
  const Trajectory t = run_hf(c.sys, c.run).trajectory;
  PodOptions opts;
  opts.r_max = {3, 2, 4};
  const ReducedBasis b = build_reduced_basis({&t}, c.sys, opts);
  EXPECT_EQ(b.dims(), (std::array<int, 3>{3, 2, 4}));
  EXPECT_EQ(b.truncated(2).dims(), (std::array<int, 3>{2, 2, 2}));

  const auto path = std::filesystem::temp_directory_path() / "thmrom_test_basis.bin";
  write_basis(b, path);
  const ReducedBasis back = read_basis(path);
  std::filesystem::remove(path);
  for (Field f : {Field::u, Field::p, Field::theta}) {
    EXPECT_TRUE(back.field(f).modes == b.field(f).modes);
    EXPECT_EQ(back.field(f).eigenvalues, b.field(f).eigenvalues);
  }
  const auto spectrum = pod_spectrum_report(b.u);
  EXPECT_EQ(spectrum.front(), 1.0);
  EXPECT_EQ(spectrum.size(), b.u.eigenvalues.size());
}

}  // namespace
}  // namespace thmrom
