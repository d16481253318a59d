#pragma once

// Data-parallel kernels. Every kernel has a serial reference path and an
// OpenMP path selected by Exec. The OpenMP paths reproduce the serial
// results bit for bit: cell loops use static scheduling with per-thread
// buffers concatenated in thread order (which is cell order), and dense
// kernels parallelize over independent output entries only.

#include "thmrom/types.hpp"

#include <omp.h>

#include <array>
#include <utility>
#include <vector>

namespace thmrom::kernels {

using Triplet = Eigen::Triplet<double>;
using IndexedValue = std::pair<int, double>;

inline int team_size() { return omp_in_parallel() ? 1 : omp_get_max_threads(); }

/// Calls fn(cell, out) for every cell, where fn appends element
/// contributions to `out`. Returns all contributions in cell order.
template <class CellFn>
std::vector<Triplet> gather_cell_triplets(int n_cells, CellFn&& fn, Exec exec) {
  std::vector<Triplet> all;
  if (exec == Exec::serial || team_size() == 1) {
    for (int c = 0; c < n_cells; ++c) fn(c, all);
    return all;
  }
  const int nt = team_size();
  std::vector<std::vector<Triplet>> partial(nt);
#pragma omp parallel num_threads(nt)
  {
    auto& local = partial[omp_get_thread_num()];
#pragma omp for schedule(static)
    for (int c = 0; c < n_cells; ++c) fn(c, local);
  }
  size_t total = 0;
  for (const auto& p : partial) total += p.size();
  all.reserve(total);
  for (auto& p : partial) all.insert(all.end(), p.begin(), p.end());
  return all;
}

/// Accumulates per-cell (index, value) contributions into a vector of size n.
template <class CellFn>
Vector gather_cell_vector(int n, int n_cells, CellFn&& fn, Exec exec) {
  std::vector<IndexedValue> all;
  if (exec == Exec::serial || team_size() == 1) {
    for (int c = 0; c < n_cells; ++c) fn(c, all);
  } else {
    const int nt = team_size();
    std::vector<std::vector<IndexedValue>> partial(nt);
#pragma omp parallel num_threads(nt)
    {
      auto& local = partial[omp_get_thread_num()];
#pragma omp for schedule(static)
      for (int c = 0; c < n_cells; ++c) fn(c, local);
    }
    for (auto& p : partial) all.insert(all.end(), p.begin(), p.end());
  }
  Vector out = Vector::Zero(n);
  for (const auto& [i, v] : all) out[i] += v;
  return out;
}

/// Sum of fn(cell) over all cells, accumulated in cell order.
template <class CellFn>
double sum_over_cells(int n_cells, CellFn&& fn, Exec exec) {
  std::vector<double> values(n_cells);
  if (exec == Exec::serial || team_size() == 1) {
    for (int c = 0; c < n_cells; ++c) values[c] = fn(c);
  } else {
#pragma omp parallel for schedule(static) num_threads(team_size())
    for (int c = 0; c < n_cells; ++c) values[c] = fn(c);
  }
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

/// Component-wise sum of fn(cell) -> std::array<double, K>, in cell order.
template <size_t K, class CellFn>
std::array<double, K> sum_over_cells_n(int n_cells, CellFn&& fn, Exec exec) {
  std::vector<std::array<double, K>> values(n_cells);
  if (exec == Exec::serial || team_size() == 1) {
    for (int c = 0; c < n_cells; ++c) values[c] = fn(c);
  } else {
#pragma omp parallel for schedule(static) num_threads(team_size())
    for (int c = 0; c < n_cells; ++c) values[c] = fn(c);
  }
  std::array<double, K> s{};
  for (const auto& v : values)
    for (size_t k = 0; k < K; ++k) s[k] += v[k];
  return s;
}

/// A * B for sparse A, dense B.
DenseMatrix sparse_times_dense(const SparseMatrix& a, const DenseMatrix& b, Exec exec);

/// C[n][m] = s_n^T G s_m over the columns of `snapshots`; exactly symmetric.
DenseMatrix gram_correlation(const SparseMatrix& gram, const DenseMatrix& snapshots, Exec exec);

/// left^T * A * right.
DenseMatrix congruence(const DenseMatrix& left, const SparseMatrix& a, const DenseMatrix& right,
                       Exec exec);

/// basis^T * v.
Vector project_vector(const DenseMatrix& basis, const Vector& v, Exec exec);

}  // namespace thmrom::kernels
