#include "thmrom/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace thmrom {

namespace {
using ColMajorSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
}

struct Factorization::Impl {
  Eigen::SparseLU<ColMajorSparse, Eigen::COLAMDOrdering<int>> lu;
  Eigen::SimplicialLDLT<ColMajorSparse> ldlt;
};

Factorization::Factorization(const SparseMatrix& a, MatrixKind kind)
    : impl_(std::make_unique<Impl>()), n_(static_cast<int>(a.rows())), kind_(kind) {
  if (a.rows() != a.cols()) throw std::invalid_argument("factorize: matrix is not square");
  ColMajorSparse cm = a;
  cm.makeCompressed();

  if (kind == MatrixKind::symmetric_positive_definite) {
    impl_->ldlt.compute(cm);
    if (impl_->ldlt.info() != Eigen::Success)
      throw NumericalError("factorize: LDL^T failed (matrix not positive definite)");
    const Vector d = impl_->ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    for (int i = 0; i < d.size(); ++i) {
      if (!(d[i] > dmax * 1e-15)) {
        // Map the pivot index back through the fill-reducing permutation.
        const int row = impl_->ldlt.permutationPinv().indices()[i];
        std::ostringstream msg;
        msg << "factorize: singular pivot at row " << row << " (d=" << d[i] << ")";
        throw NumericalError(msg.str());
      }
    }
    return;
  }

  impl_->lu.analyzePattern(cm);
  impl_->lu.factorize(cm);
  if (impl_->lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "factorize: singular pivot: " << impl_->lu.lastErrorMessage();
    throw NumericalError(msg.str());
  }
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Vector Factorization::solve(const Vector& b) const {
  if (b.size() != n_) {
    std::ostringstream msg;
    msg << "solve: dimension mismatch (" << b.size() << " vs " << n_ << ")";
    throw std::invalid_argument(msg.str());
  }
  if (n_ == 0) return Vector();
  if (kind_ == MatrixKind::symmetric_positive_definite) return impl_->ldlt.solve(b);
  return impl_->lu.solve(b);
}

SymEig sym_eig(const DenseMatrix& c) {
  if (c.rows() != c.cols()) throw std::invalid_argument("sym_eig: matrix is not square");
  const double scale = std::max(c.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("sym_eig: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(c);
  if (es.info() != Eigen::Success) throw NumericalError("sym_eig: QR iteration did not converge");

  const int n = static_cast<int>(c.rows());
  SymEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (int k = 0; k < n; ++k) {
    out.values[k] = es.eigenvalues()[n - 1 - k];
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

double condition_number_2(const DenseMatrix& a) {
  if (a.size() == 0) throw std::invalid_argument("condition_number_2: empty matrix");
  Eigen::JacobiSVD<DenseMatrix> svd(a);
  const auto& s = svd.singularValues();
  const double smax = s[0];
  const double smin = s[s.size() - 1];
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  const double ratio = smax / smin;
  return std::isfinite(ratio) ? ratio : std::numeric_limits<double>::infinity();
}

SparseMatrix sparse_from_triplets(int rows, int cols,
                                  const std::vector<Eigen::Triplet<double>>& triplets) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

DenseLu::DenseLu(const DenseMatrix& a) : lu_(a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("DenseLu: matrix is not square");
  if (!lu_.isInvertible()) {
    std::ostringstream msg;
    msg << "DenseLu: singular " << a.rows() << "x" << a.cols() << " system (rank " << lu_.rank()
        << ")";
    throw NumericalError(msg.str());
  }
}

Vector DenseLu::solve(const Vector& b) const {
  if (b.size() != lu_.rows()) throw std::invalid_argument("DenseLu::solve: dimension mismatch");
  return lu_.solve(b);
}

}  // namespace thmrom
