#pragma once

#include "thmrom/assembly.hpp"

#include <array>

namespace thmrom {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;  // [component][derivative]

struct ExactValues {
  Vec2 u{};
  double p = 0.0;
  double theta = 0.0;
};

struct ExactGradients {
  Mat2 u{};
  Vec2 p{};
  Vec2 theta{};
};

struct ForcingValues {
  Vec2 f{};
  double g = 0.0;
  double eta = 0.0;
};

/// Smooth solution vanishing on the boundary of the unit square:
///   u     = [sin(pi x t) cos(pi y t), cos(pi x t) sin(pi y t)] B
///   p     = cos(t + x - y) B
///   theta = sin(t + x - y) B,     B = x y (1-x) (1-y),
/// with the forcing obtained by applying the balance laws to it.
class ManufacturedCase {
 public:
  ManufacturedCase(PhysicalParams params, double K, double D);
  /// lambda = mu = 100, c0 = 1, alpha = 1, K = 1e-5, C_d = 1, alpha_T = 1e-3,
  /// theta0 = 1, alpha_m = 1e-5, D = 1e-5, L = 1.
  static ManufacturedCase standard();

  const PhysicalParams& params() const { return params_; }
  double K() const { return K_; }
  double D() const { return D_; }
  CoefficientField coefficients() const { return CoefficientField::uniform(K_, D_); }

  ExactValues exact(double x, double y, double t) const;
  ExactGradients exact_gradients(double x, double y, double t) const;

  /// f = -mu Lap u - (lambda+mu) grad div u + alpha grad p + 3 alpha_T K_dr grad theta
  /// g = c0 p_t + alpha (div u)_t - 3 alpha_m theta_t - K Lap p
  /// eta = C_d theta_t + 3 alpha_T K_dr theta0 (div u)_t - 3 alpha_m theta0 p_t - D Lap theta
  ForcingValues forcing(double x, double y, double t) const;

  Forcing forcing_functions() const;
  /// Exact fields at time t packaged as a Forcing, for load-vector (L2)
  /// projections and vertex interpolation.
  Forcing exact_functions() const;

 private:
  PhysicalParams params_;
  double K_, D_;
};

}  // namespace thmrom
