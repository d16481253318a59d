#pragma once

#include "thmrom/hf_solver.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace thmrom {

/// Snapshot columns of one field together with the Gram matrix of its H1
/// inner product.
struct SnapshotSet {
  Field field = Field::u;
  DenseMatrix columns;
  SparseMatrix gram;
};

/// Stacks every time level of every trajectory (in order) into one set.
SnapshotSet collect_snapshots(Field field, const std::vector<const Trajectory*>& trajectories,
                              const SparseMatrix& gram);

/// C[n][m] = s_n^T GRAM s_m.
DenseMatrix build_correlation(const SnapshotSet& snaps, Exec exec = Exec::parallel);

struct FieldBasis {
  Field field = Field::u;
  DenseMatrix modes;                // n_free x r
  std::vector<double> eigenvalues;  // full correlation spectrum, descending

  int r() const { return static_cast<int>(modes.cols()); }
  /// Restriction to the leading k modes.
  FieldBasis truncated(int k) const;
};

/// Modes phi_k = nu_k^{-1/2} sum_b v_k[b] s_b for the leading eigenpairs with
/// nu_k > eig_floor * nu_0 (and nu_k > 0), at most r_max of them. Each mode
/// is signed so its largest-magnitude coefficient is positive. Throws
/// NumericalError if no eigenvalue survives the floor.
FieldBasis compute_modes(const SnapshotSet& snaps, const DenseMatrix& correlation, int r_max,
                         double eig_floor = 1e-12);

/// Eigenpairs of the correlation matrix S^T G S. With more snapshots than
/// dofs they come from a thin SVD of L^T S (G = L L^T), which costs
/// O(n^2 m) instead of O(m^3); the trailing m - n eigenvalues are then zero.
SymEig correlation_eigenpairs(const SnapshotSet& snaps, Exec exec = Exec::parallel);

FieldBasis modes_from_eigenpairs(const SnapshotSet& snaps, const SymEig& eig, int r_max,
                                 double eig_floor = 1e-12);

FieldBasis build_field_basis(const SnapshotSet& snaps, int r_max, double eig_floor = 1e-12,
                             Exec exec = Exec::parallel);

/// nu_k / nu_0 over the whole spectrum.
std::vector<double> pod_spectrum_report(const FieldBasis& basis);

/// Number of leading eigenvalues with nu_k > eig_floor * nu_0.
int numerical_rank(const std::vector<double>& eigenvalues, double eig_floor = 1e-12);

struct ReducedBasis {
  FieldBasis u, p, theta;

  const FieldBasis& field(Field f) const;
  FieldBasis& field(Field f);
  std::array<int, 3> dims() const { return {u.r(), p.r(), theta.r()}; }
  ReducedBasis truncated(int r) const;
};

struct PodOptions {
  std::array<int, 3> r_max{5, 5, 5};
  double eig_floor = 1e-12;
  Exec exec = Exec::parallel;
};

/// POD of all three fields from the given trajectories, using the Gram
/// matrices of `sys`.
ReducedBasis build_reduced_basis(const std::vector<const Trajectory*>& trajectories,
                                 const HfSystem& sys, const PodOptions& opts);

/// Phi^T GRAM Phi, which should be the identity.
DenseMatrix gram_certificate(const FieldBasis& basis, const SparseMatrix& gram,
                             Exec exec = Exec::parallel);

void write_basis(const ReducedBasis& basis, const std::filesystem::path& path);
ReducedBasis read_basis(const std::filesystem::path& path);

/// eigenvalues.csv rows: field, k, nu_normalized.
void write_spectrum_csv(const ReducedBasis& basis, const std::filesystem::path& path);

}  // namespace thmrom
