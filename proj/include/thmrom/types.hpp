#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>
#include <string_view>

namespace thmrom {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
/// Compressed-sparse-row operator over free degrees of freedom.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

enum class Field { u, p, theta };

inline std::string_view field_name(Field f) {
  switch (f) {
    case Field::u: return "u";
    case Field::p: return "p";
    case Field::theta: return "theta";
  }
  return "?";
}

/// Selects between the serial reference kernels and their OpenMP variants.
enum class Exec { serial, parallel };

/// A linear system or basis construction failed numerically (singular pivot,
/// empty basis, ...). The CLI maps this to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical parameter or coefficient violates its invariant (mu <= 0,
/// theta0 == 0, nonpositive permeability, ...). The CLI maps this to exit 1.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace thmrom
