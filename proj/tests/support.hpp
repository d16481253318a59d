#pragma once

#include "thmrom/experiments.hpp"

#include <random>

namespace thmrom::test {

inline std::shared_ptr<const SpaceSet> unit_spaces(int n, BcSpec bc = BcSpec::all_dirichlet()) {
  auto mesh = std::make_shared<const Mesh>(build_unit_square_mesh(n));
  return build_spaces(mesh, bc);
}

inline DenseMatrix random_matrix(int rows, int cols, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = d(rng);
  return m;
}

inline Vector random_vector(int n, std::mt19937& rng) { return random_matrix(n, 1, rng).col(0); }

inline double rel_diff(const DenseMatrix& a, const DenseMatrix& b) {
  const double scale = b.norm();
  return scale == 0.0 ? a.norm() : (a - b).norm() / scale;
}

// Small manufactured run shared by the solver and ROM tests.
struct SmallCase {
  ManufacturedCase mc = ManufacturedCase::standard();
  std::shared_ptr<const SpaceSet> spaces = unit_spaces(4);
  HfSystem sys;
  HfRunConfig run;

  explicit SmallCase(double dt = 0.05, double T = 0.5, HfScheme scheme = HfScheme::monolithic) {
    sys = HfSystem::assemble(spaces, mc.params(), mc.coefficients(), dt);
    run.scheme = scheme;
    run.T = T;
    run.forcing = mc.forcing_functions();
  }
};

}  // namespace thmrom::test
