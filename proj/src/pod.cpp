#include "thmrom/pod.hpp"

#include "thmrom/io.hpp"
#include "thmrom/kernels.hpp"

#include <cmath>

namespace thmrom {

SnapshotSet collect_snapshots(Field field, const std::vector<const Trajectory*>& trajectories,
                              const SparseMatrix& gram) {
  Eigen::Index count = 0;
  for (const Trajectory* t : trajectories) count += static_cast<Eigen::Index>(t->states.size());
  if (count == 0) throw std::invalid_argument("collect_snapshots: no snapshots");
  SnapshotSet s;
  s.field = field;
  s.gram = gram;
  s.columns.resize(gram.rows(), count);
  Eigen::Index k = 0;
  for (const Trajectory* t : trajectories) {
    for (const State& st : t->states) {
      const Vector& x = st.field(field);
      if (x.size() != gram.rows())
        throw std::invalid_argument("collect_snapshots: snapshot size does not match Gram matrix");
      s.columns.col(k++) = x;
    }
  }
  return s;
}

DenseMatrix build_correlation(const SnapshotSet& snaps, Exec exec) {
  if (snaps.columns.cols() == 0) throw std::invalid_argument("build_correlation: empty set");
  return kernels::gram_correlation(snaps.gram, snaps.columns, exec);
}

FieldBasis FieldBasis::truncated(int k) const {
  if (k < 0 || k > r()) throw std::invalid_argument("FieldBasis::truncated: bad size");
  FieldBasis b;
  b.field = field;
  b.modes = modes.leftCols(k);
  b.eigenvalues = eigenvalues;
  return b;
}

int numerical_rank(const std::vector<double>& ev, double eig_floor) {
  if (ev.empty() || !(ev[0] > 0.0)) return 0;
  int k = 0;
  while (k < static_cast<int>(ev.size()) && ev[k] > 0.0 && ev[k] > eig_floor * ev[0]) ++k;
  return k;
}

FieldBasis compute_modes(const SnapshotSet& snaps, const DenseMatrix& correlation, int r_max,
                         double eig_floor) {
  return modes_from_eigenpairs(snaps, sym_eig(correlation), r_max, eig_floor);
}

FieldBasis modes_from_eigenpairs(const SnapshotSet& snaps, const SymEig& eig, int r_max,
                                 double eig_floor) {
  if (eig_floor < 0.0) throw std::invalid_argument("compute_modes: eig_floor must be >= 0");
  if (r_max < 1) throw std::invalid_argument("compute_modes: r_max must be >= 1");
  const int keep = std::min(r_max, numerical_rank(eig.values, eig_floor));
  if (keep == 0)
    throw NumericalError("compute_modes: empty basis for field " +
                         std::string(field_name(snaps.field)) +
                         " (all eigenvalues under the floor)");

  FieldBasis b;
  b.field = snaps.field;
  b.eigenvalues = eig.values;
  b.modes = snaps.columns * eig.vectors.leftCols(keep);
  for (int k = 0; k < keep; ++k) {
    auto col = b.modes.col(k);
    col /= std::sqrt(eig.values[k]);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col[imax] < 0.0) col = -col;
  }
  return b;
}

SymEig correlation_eigenpairs(const SnapshotSet& snaps, Exec exec) {
  const Eigen::Index n = snaps.columns.rows();
  const Eigen::Index m = snaps.columns.cols();
  if (m <= n) return sym_eig(build_correlation(snaps, exec));

  const Eigen::LLT<DenseMatrix> llt(DenseMatrix(snaps.gram));
  if (llt.info() != Eigen::Success)
    throw NumericalError("correlation_eigenpairs: Gram matrix is not positive definite");
  const DenseMatrix b = llt.matrixU() * snaps.columns;
  const Eigen::BDCSVD<DenseMatrix> svd(b, Eigen::ComputeThinV);
  SymEig out;
  out.values.assign(static_cast<size_t>(m), 0.0);
  const auto& s = svd.singularValues();
  for (Eigen::Index k = 0; k < s.size(); ++k) out.values[k] = s[k] * s[k];
  out.vectors = svd.matrixV();
  return out;
}

FieldBasis build_field_basis(const SnapshotSet& snaps, int r_max, double eig_floor, Exec exec) {
  return modes_from_eigenpairs(snaps, correlation_eigenpairs(snaps, exec), r_max, eig_floor);
}

std::vector<double> pod_spectrum_report(const FieldBasis& basis) {
  std::vector<double> out;
  if (basis.eigenvalues.empty()) return out;
  const double nu0 = basis.eigenvalues[0];
  out.reserve(basis.eigenvalues.size());
  for (double v : basis.eigenvalues) out.push_back(v / nu0);
  return out;
}

const FieldBasis& ReducedBasis::field(Field f) const {
  switch (f) {
    case Field::u: return u;
    case Field::p: return p;
    case Field::theta: return theta;
  }
  throw std::invalid_argument("ReducedBasis::field");
}

FieldBasis& ReducedBasis::field(Field f) {
  return const_cast<FieldBasis&>(static_cast<const ReducedBasis&>(*this).field(f));
}

ReducedBasis ReducedBasis::truncated(int r) const {
  return {u.truncated(std::min(r, u.r())), p.truncated(std::min(r, p.r())),
          theta.truncated(std::min(r, theta.r()))};
}

ReducedBasis build_reduced_basis(const std::vector<const Trajectory*>& trajectories,
                                 const HfSystem& sys, const PodOptions& opts) {
  ReducedBasis b;
  const std::array<std::pair<Field, FormId>, 3> fields = {
      {{Field::u, FormId::GRAM_U}, {Field::p, FormId::GRAM_P}, {Field::theta, FormId::GRAM_T}}};
  for (const auto& [f, g] : fields) {
    const SnapshotSet s = collect_snapshots(f, trajectories, sys.at(g));
    b.field(f) = build_field_basis(s, opts.r_max[static_cast<int>(f)], opts.eig_floor, opts.exec);
  }
  return b;
}

DenseMatrix gram_certificate(const FieldBasis& basis, const SparseMatrix& gram, Exec exec) {
  return kernels::congruence(basis.modes, gram, basis.modes, exec);
}

namespace {
constexpr std::string_view kBasisMagic = "THMPOD";
constexpr std::uint32_t kBasisVersion = 1;
}  // namespace

void write_basis(const ReducedBasis& basis, const std::filesystem::path& path) {
  io::BinaryWriter w(path, kBasisMagic, kBasisVersion);
  for (Field f : {Field::u, Field::p, Field::theta}) {
    const FieldBasis& b = basis.field(f);
    w.str(field_name(f));
    w.mat(b.modes);
    w.i64(static_cast<std::int64_t>(b.eigenvalues.size()));
    for (double v : b.eigenvalues) w.f64(v);
  }
}

ReducedBasis read_basis(const std::filesystem::path& path) {
  io::BinaryReader r(path, kBasisMagic, kBasisVersion);
  ReducedBasis basis;
  for (Field f : {Field::u, Field::p, Field::theta}) {
    if (r.str() != field_name(f)) throw std::runtime_error(path.string() + ": field order");
    FieldBasis& b = basis.field(f);
    b.field = f;
    b.modes = r.mat();
    const auto n = r.i64();
    if (n < 0) throw std::runtime_error(path.string() + ": corrupt spectrum");
    b.eigenvalues.resize(static_cast<size_t>(n));
    for (auto& v : b.eigenvalues) v = r.f64();
  }
  return basis;
}

void write_spectrum_csv(const ReducedBasis& basis, const std::filesystem::path& path) {
  io::CsvWriter csv(path, {"field", "k", "nu_normalized"});
  for (Field f : {Field::u, Field::p, Field::theta}) {
    const auto spec = pod_spectrum_report(basis.field(f));
    for (size_t k = 0; k < spec.size(); ++k) csv.row(field_name(f), k, spec[k]);
  }
}

}  // namespace thmrom
