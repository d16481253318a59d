#include "thmrom/kernels.hpp"

#include <stdexcept>

namespace thmrom::kernels {

namespace {

// Row i of a (CSR) dotted with column j of b, in stored-entry order.
inline double row_dot(const SparseMatrix& a, int i, const DenseMatrix& b, int j) {
  double s = 0.0;
  for (SparseMatrix::InnerIterator it(a, i); it; ++it) s += it.value() * b(it.col(), j);
  return s;
}

inline double col_dot(const DenseMatrix& a, int i, const DenseMatrix& b, int j) {
  const double* x = a.col(i).data();
  const double* y = b.col(j).data();
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) s += x[k] * y[k];
  return s;
}

bool run_parallel(Exec exec) { return exec == Exec::parallel && team_size() > 1; }

}  // namespace

DenseMatrix sparse_times_dense(const SparseMatrix& a, const DenseMatrix& b, Exec exec) {
  if (a.cols() != b.rows()) throw std::invalid_argument("sparse_times_dense: dimension mismatch");
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(b.cols());
  DenseMatrix out(rows, cols);
  if (run_parallel(exec)) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) out(i, j) = row_dot(a, i, b, j);
  } else {
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) out(i, j) = row_dot(a, i, b, j);
  }
  return out;
}

DenseMatrix gram_correlation(const SparseMatrix& gram, const DenseMatrix& snapshots, Exec exec) {
  if (gram.rows() != snapshots.rows() || gram.cols() != snapshots.rows())
    throw std::invalid_argument("gram_correlation: dimension mismatch");
  const DenseMatrix gs = sparse_times_dense(gram, snapshots, exec);
  const int m = static_cast<int>(snapshots.cols());
  DenseMatrix c(m, m);
  // Upper triangle computed once and mirrored, so c is exactly symmetric.
  if (run_parallel(exec)) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i <= j; ++i) c(i, j) = col_dot(snapshots, i, gs, j);
  } else {
    for (int j = 0; j < m; ++j)
      for (int i = 0; i <= j; ++i) c(i, j) = col_dot(snapshots, i, gs, j);
  }
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < j; ++i) c(j, i) = c(i, j);
  return c;
}

DenseMatrix congruence(const DenseMatrix& left, const SparseMatrix& a, const DenseMatrix& right,
                       Exec exec) {
  if (left.rows() != a.rows()) throw std::invalid_argument("congruence: dimension mismatch");
  const DenseMatrix ar = sparse_times_dense(a, right, exec);
  const int r1 = static_cast<int>(left.cols());
  const int r2 = static_cast<int>(right.cols());
  DenseMatrix out(r1, r2);
  if (run_parallel(exec)) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int j = 0; j < r2; ++j)
      for (int i = 0; i < r1; ++i) out(i, j) = col_dot(left, i, ar, j);
  } else {
    for (int j = 0; j < r2; ++j)
      for (int i = 0; i < r1; ++i) out(i, j) = col_dot(left, i, ar, j);
  }
  return out;
}

Vector project_vector(const DenseMatrix& basis, const Vector& v, Exec exec) {
  if (basis.rows() != v.size()) throw std::invalid_argument("project_vector: dimension mismatch");
  const int r = static_cast<int>(basis.cols());
  Vector out(r);
  const DenseMatrix vm = v;
  if (run_parallel(exec)) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < r; ++k) out[k] = col_dot(basis, k, vm, 0);
  } else {
    for (int k = 0; k < r; ++k) out[k] = col_dot(basis, k, vm, 0);
  }
  return out;
}

}  // namespace thmrom::kernels
