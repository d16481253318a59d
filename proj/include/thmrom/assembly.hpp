#pragma once

#include "thmrom/mesh.hpp"
#include "thmrom/types.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <utility>

namespace thmrom {

struct PhysicalParams {
  double lambda = 0.0;   // first Lame parameter
  double mu = 1.0;       // shear modulus
  double c0 = 0.0;       // inverse Biot modulus
  double alpha = 1.0;    // Biot-Willis coefficient
  double alpha_T = 0.0;  // skeleton thermal dilation
  double alpha_m = 0.0;  // thermal dilation; 3*alpha_m is formed at assembly
  double C_d = 1.0;      // effective heat capacity
  double theta0 = 1.0;   // reference temperature
  double L = 1.0;        // fixed-stress stabilization

  /// Drained bulk modulus (2 lambda + 2 mu) / 2 in two dimensions.
  double K_dr() const { return lambda + mu; }

  /// Throws ParameterError on mu <= 0, lambda < 0, theta0 == 0, L <= 0,
  /// negative storage/capacity, or non-finite values.
  void validate() const;
};

/// Per-subdomain isotropic permeability K and conductivity D, keyed by cell
/// label.
class CoefficientField {
 public:
  static CoefficientField uniform(double K, double D);
  CoefficientField& set(int label, double K, double D);

  double K(int label) const;
  double D(int label) const;
  const std::map<int, std::pair<double, double>>& values() const { return values_; }

  /// Throws ParameterError unless every value is finite and positive.
  void validate() const;

 private:
  std::map<int, std::pair<double, double>> values_;  // label -> (K, D)
  std::optional<std::pair<double, double>> fallback_;
};

enum class FormId {
  AUU, APP, ATT, AUP, AUT,
  MPP, MTT, MPU, MPT, MTU, MTP,
  SPP, STT,
  GRAM_U, GRAM_P, GRAM_T,
  MASS_U, MASS_P, MASS_T,
};

inline constexpr std::array<FormId, 19> kAllForms = {
    FormId::AUU, FormId::APP, FormId::ATT, FormId::AUP, FormId::AUT,
    FormId::MPP, FormId::MTT, FormId::MPU, FormId::MPT, FormId::MTU, FormId::MTP,
    FormId::SPP, FormId::STT,
    FormId::GRAM_U, FormId::GRAM_P, FormId::GRAM_T,
    FormId::MASS_U, FormId::MASS_P, FormId::MASS_T};

std::string_view form_name(FormId id);
std::optional<FormId> form_from_name(std::string_view name);

/// (test field, trial field) of a form: rows belong to the test space.
std::pair<Field, Field> form_fields(FormId id);

/// Forms whose value is proportional to 1/dt.
bool form_scales_with_inverse_dt(FormId id);

struct AssemblyOptions {
  /// Integrate only over cells carrying this label.
  std::optional<int> only_label;
  Exec exec = Exec::parallel;
};

/// Assembles one bilinear form against P1 basis functions, restricted to the
/// free dofs of its test (rows) and trial (columns) spaces. All integrals
/// are exact. dt must be positive for the M and S forms and is ignored
/// otherwise.
SparseMatrix assemble_form(FormId id, const PhysicalParams& params, const CoefficientField& coeffs,
                           const SpaceSet& spaces, double dt, const AssemblyOptions& opts = {});

using FormSet = std::map<FormId, SparseMatrix>;

FormSet assemble_forms(const PhysicalParams& params, const CoefficientField& coeffs,
                       const SpaceSet& spaces, double dt, Exec exec = Exec::parallel);

using ScalarFn = std::function<double(double x, double y, double t)>;
using VectorFn = std::function<std::array<double, 2>(double x, double y, double t)>;

/// Right-hand sides of the momentum, mass and energy balances. An empty
/// function means zero.
struct Forcing {
  VectorFn f;
  ScalarFn g;
  ScalarFn eta;
};

struct LoadVectors {
  Vector f, g, eta;
};

/// (fn(t), phi_i) on the free dofs of u, using the 6-point degree-4 rule.
Vector assemble_load(const VectorFn& fn, double t, const SpaceSet& spaces,
                     Exec exec = Exec::parallel);
/// (fn(t), phi_i) on the free dofs of p or theta.
Vector assemble_load(Field field, const ScalarFn& fn, double t, const SpaceSet& spaces,
                     Exec exec = Exec::parallel);

LoadVectors assemble_loads(const Forcing& forcing, double t, const SpaceSet& spaces,
                           Exec exec = Exec::parallel);

/// Vertex interpolant restricted to free dofs.
Vector interpolate(const VectorFn& fn, double t, const SpaceSet& spaces);
Vector interpolate(Field field, const ScalarFn& fn, double t, const SpaceSet& spaces);

/// Symmetric quadrature rule on a triangle: barycentric points and weights
/// that sum to one (multiply by the cell area).
struct TriangleRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

/// The 6-point rule exact for polynomials of degree 4.
const TriangleRule& degree4_rule();

}  // namespace thmrom
