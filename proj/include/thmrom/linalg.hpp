#pragma once

#include "thmrom/types.hpp"

#include <memory>
#include <vector>

namespace thmrom {

enum class MatrixKind { general, symmetric_positive_definite };

/// Sparse direct factorization, reusable across right-hand sides.
///
/// Immutable after construction. Concurrent solve() calls against one
/// Factorization are safe: solves only read the factors.
class Factorization {
 public:
  /// Throws NumericalError naming the offending pivot row/column when the
  /// matrix is singular, std::invalid_argument when it is not square.
  explicit Factorization(const SparseMatrix& a, MatrixKind kind = MatrixKind::general);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  Vector solve(const Vector& b) const;
  int size() const { return n_; }
  MatrixKind kind() const { return kind_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
  MatrixKind kind_ = MatrixKind::general;
};

inline Factorization factorize(const SparseMatrix& a, MatrixKind kind = MatrixKind::general) {
  return Factorization(a, kind);
}

inline Vector solve(const Factorization& f, const Vector& b) { return f.solve(b); }

struct SymEig {
  std::vector<double> values;  // descending
  DenseMatrix vectors;         // column k pairs with values[k]
};

/// Dense symmetric eigendecomposition. Throws std::invalid_argument if `c` is
/// not symmetric to 1e-10 relative.
SymEig sym_eig(const DenseMatrix& c);

/// sigma_max / sigma_min; +infinity when sigma_min underflows to zero.
double condition_number_2(const DenseMatrix& a);

/// Sets the row-major CSR matrix from (row, col, value) triplets, summing
/// duplicates in order of appearance and dropping exact zeros.
SparseMatrix sparse_from_triplets(int rows, int cols,
                                  const std::vector<Eigen::Triplet<double>>& triplets);

/// Dense LU of a small square system; throws NumericalError if singular.
class DenseLu {
 public:
  DenseLu() = default;
  explicit DenseLu(const DenseMatrix& a);
  Vector solve(const Vector& b) const;
  int size() const { return static_cast<int>(lu_.rows()); }

 private:
  Eigen::FullPivLU<DenseMatrix> lu_;
};

}  // namespace thmrom
