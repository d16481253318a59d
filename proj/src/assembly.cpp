#include "thmrom/assembly.hpp"

#include "thmrom/kernels.hpp"
#include "thmrom/linalg.hpp"

#include <cmath>
#include <sstream>

namespace thmrom {

void PhysicalParams::validate() const {
  const double all[] = {lambda, mu, c0, alpha, alpha_T, alpha_m, C_d, theta0, L};
  for (double v : all)
    if (!std::isfinite(v)) throw ParameterError("physical parameters must be finite");
  if (!(mu > 0.0)) throw ParameterError("mu must be positive (got " + std::to_string(mu) + ")");
  if (lambda < 0.0) throw ParameterError("lambda must be nonnegative");
  if (theta0 == 0.0) throw ParameterError("theta0 must be nonzero");
  if (!(L > 0.0)) throw ParameterError("L must be positive");
  if (c0 < 0.0) throw ParameterError("c0 must be nonnegative");
  if (!(C_d > 0.0)) throw ParameterError("C_d must be positive");
}

CoefficientField CoefficientField::uniform(double K, double D) {
  CoefficientField c;
  c.fallback_ = {K, D};
  return c;
}

CoefficientField& CoefficientField::set(int label, double K, double D) {
  values_[label] = {K, D};
  return *this;
}

double CoefficientField::K(int label) const {
  if (auto it = values_.find(label); it != values_.end()) return it->second.first;
  if (fallback_) return fallback_->first;
  throw ParameterError("no permeability for cell label " + std::to_string(label));
}

double CoefficientField::D(int label) const {
  if (auto it = values_.find(label); it != values_.end()) return it->second.second;
  if (fallback_) return fallback_->second;
  throw ParameterError("no conductivity for cell label " + std::to_string(label));
}

void CoefficientField::validate() const {
  auto check = [](double v, const char* what) {
    if (!std::isfinite(v) || !(v > 0.0))
      throw ParameterError(std::string(what) + " must be finite and positive");
  };
  for (const auto& [label, kd] : values_) {
    check(kd.first, "K");
    check(kd.second, "D");
  }
  if (fallback_) {
    check(fallback_->first, "K");
    check(fallback_->second, "D");
  }
  if (values_.empty() && !fallback_) throw ParameterError("empty coefficient field");
}

namespace {

constexpr std::pair<FormId, std::string_view> kNames[] = {
    {FormId::AUU, "AUU"},       {FormId::APP, "APP"},       {FormId::ATT, "ATT"},
    {FormId::AUP, "AUP"},       {FormId::AUT, "AUT"},       {FormId::MPP, "MPP"},
    {FormId::MTT, "MTT"},       {FormId::MPU, "MPU"},       {FormId::MPT, "MPT"},
    {FormId::MTU, "MTU"},       {FormId::MTP, "MTP"},       {FormId::SPP, "SPP"},
    {FormId::STT, "STT"},       {FormId::GRAM_U, "GRAM_U"}, {FormId::GRAM_P, "GRAM_P"},
    {FormId::GRAM_T, "GRAM_T"}, {FormId::MASS_U, "MASS_U"}, {FormId::MASS_P, "MASS_P"},
    {FormId::MASS_T, "MASS_T"},
};

// Geometry of one P1 triangle.
struct Element {
  std::array<int, 3> v;
  double area;
  std::array<std::array<double, 2>, 3> grad;  // gradients of the hat functions
};

Element element(const Mesh& mesh, int cell) {
  Element e;
  e.v = mesh.cells()[cell];
  e.area = mesh.signed_area(cell);
  const auto& P = mesh.vertices();
  const double inv2a = 1.0 / (2.0 * e.area);
  for (int k = 0; k < 3; ++k) {
    const Point& b = P[e.v[(k + 1) % 3]];
    const Point& c = P[e.v[(k + 2) % 3]];
    e.grad[k] = {(b.y - c.y) * inv2a, (c.x - b.x) * inv2a};
  }
  return e;
}

inline double dot(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return a[0] * b[0] + a[1] * b[1];
}

// Which local integrand a form uses, with its constant scalar factor.
enum class Kernel { elasticity, stiffness, mass, h1, div_test_u, div_trial_u };

struct FormSpec {
  Kernel kernel;
  double scale;              // constant factor (coefficient fields applied per cell)
  int cell_coefficient = 0;  // 0 none, 1 permeability K, 2 conductivity D
};

FormSpec form_spec(FormId id, const PhysicalParams& P, double dt) {
  const double kdr = P.K_dr();
  switch (id) {
    case FormId::AUU: return {Kernel::elasticity, 1.0};
    case FormId::APP: return {Kernel::stiffness, 1.0, 1};
    case FormId::ATT: return {Kernel::stiffness, 1.0, 2};
    case FormId::AUP: return {Kernel::div_test_u, -P.alpha};
    case FormId::AUT: return {Kernel::div_test_u, -3.0 * P.alpha_T * kdr};
    case FormId::MPP: return {Kernel::mass, P.c0 / dt};
    case FormId::MTT: return {Kernel::mass, P.C_d / dt};
    case FormId::MPU: return {Kernel::div_trial_u, P.alpha / dt};
    case FormId::MPT: return {Kernel::mass, -3.0 * P.alpha_m / dt};
    case FormId::MTU: return {Kernel::div_trial_u, 3.0 * P.alpha_T * kdr * P.theta0 / dt};
    case FormId::MTP: return {Kernel::mass, -3.0 * P.alpha_m * P.theta0 / dt};
    case FormId::SPP: return {Kernel::mass, P.L * P.alpha * P.alpha / kdr / dt};
    case FormId::STT:
      return {Kernel::mass, 9.0 * P.L * P.alpha_T * P.alpha_T * kdr * P.theta0 / dt};
    case FormId::GRAM_U:
    case FormId::GRAM_P:
    case FormId::GRAM_T: return {Kernel::h1, 1.0};
    case FormId::MASS_U:
    case FormId::MASS_P:
    case FormId::MASS_T: return {Kernel::mass, 1.0};
  }
  throw std::invalid_argument("form_spec: unknown form");
}

}  // namespace

std::string_view form_name(FormId id) {
  for (const auto& [f, n] : kNames)
    if (f == id) return n;
  return "?";
}

std::optional<FormId> form_from_name(std::string_view name) {
  for (const auto& [f, n] : kNames)
    if (n == name) return f;
  return std::nullopt;
}

std::pair<Field, Field> form_fields(FormId id) {
  switch (id) {
    case FormId::AUU:
    case FormId::GRAM_U:
    case FormId::MASS_U: return {Field::u, Field::u};
    case FormId::APP:
    case FormId::MPP:
    case FormId::SPP:
    case FormId::GRAM_P:
    case FormId::MASS_P: return {Field::p, Field::p};
    case FormId::ATT:
    case FormId::MTT:
    case FormId::STT:
    case FormId::GRAM_T:
    case FormId::MASS_T: return {Field::theta, Field::theta};
    case FormId::AUP: return {Field::u, Field::p};
    case FormId::AUT: return {Field::u, Field::theta};
    case FormId::MPU: return {Field::p, Field::u};
    case FormId::MPT: return {Field::p, Field::theta};
    case FormId::MTU: return {Field::theta, Field::u};
    case FormId::MTP: return {Field::theta, Field::p};
  }
  throw std::invalid_argument("form_fields: unknown form");
}

bool form_scales_with_inverse_dt(FormId id) {
  switch (id) {
    case FormId::MPP:
    case FormId::MTT:
    case FormId::MPU:
    case FormId::MPT:
    case FormId::MTU:
    case FormId::MTP:
    case FormId::SPP:
    case FormId::STT: return true;
    default: return false;
  }
}

SparseMatrix assemble_form(FormId id, const PhysicalParams& params, const CoefficientField& coeffs,
                           const SpaceSet& spaces, double dt, const AssemblyOptions& opts) {
  if (form_scales_with_inverse_dt(id) && !(dt > 0.0))
    throw std::invalid_argument("assemble_form: dt must be positive for " +
                                std::string(form_name(id)));
  const auto [test_field, trial_field] = form_fields(id);
  const FieldSpace& test = spaces.space(test_field);
  const FieldSpace& trial = spaces.space(trial_field);
  const FormSpec spec = form_spec(id, params, dt);
  const Mesh& mesh = spaces.mesh();
  const double lambda = params.lambda;
  const double mu = params.mu;

  auto cell_fn = [&](int cell, std::vector<kernels::Triplet>& out) {
    const int label = mesh.cell_labels()[cell];
    if (opts.only_label && *opts.only_label != label) return;
    const Element e = element(mesh, cell);
    double s = spec.scale;
    if (spec.cell_coefficient == 1) s *= coeffs.K(label);
    if (spec.cell_coefficient == 2) s *= coeffs.D(label);

    auto emit = [&](int test_dof, int trial_dof, double value) {
      const int r = test.free_index[test_dof];
      const int c = trial.free_index[trial_dof];
      if (r >= 0 && c >= 0) out.emplace_back(r, c, value);
    };

    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double mass = e.area / 12.0 * (i == j ? 2.0 : 1.0);
        const double stiff = e.area * dot(e.grad[i], e.grad[j]);
        switch (spec.kernel) {
          case Kernel::stiffness:
            emit(test.dof(e.v[i], 0), trial.dof(e.v[j], 0), s * stiff);
            break;
          case Kernel::mass:
          case Kernel::h1: {
            const double v = spec.kernel == Kernel::mass ? mass : mass + stiff;
            for (int c = 0; c < test.components; ++c)
              emit(test.dof(e.v[i], c), trial.dof(e.v[j], c), s * v);
            break;
          }
          case Kernel::elasticity:
            for (int a = 0; a < 2; ++a) {
              for (int b = 0; b < 2; ++b) {
                // 2 mu eps(N_i e_a):eps(N_j e_b) + lambda div(N_i e_a) div(N_j e_b)
                const double v =
                    mu * ((a == b ? dot(e.grad[i], e.grad[j]) : 0.0) + e.grad[i][b] * e.grad[j][a]) +
                    lambda * e.grad[i][a] * e.grad[j][b];
                emit(test.dof(e.v[i], a), trial.dof(e.v[j], b), e.area * v);
              }
            }
            break;
          case Kernel::div_test_u:
            // (q_j, div(N_i e_a)) with q_j a scalar hat: (area/3) d_a N_i.
            for (int a = 0; a < 2; ++a)
              emit(test.dof(e.v[i], a), trial.dof(e.v[j], 0), s * e.area / 3.0 * e.grad[i][a]);
            break;
          case Kernel::div_trial_u:
            for (int b = 0; b < 2; ++b)
              emit(test.dof(e.v[i], 0), trial.dof(e.v[j], b), s * e.area / 3.0 * e.grad[j][b]);
            break;
        }
      }
    }
  };

  const auto triplets = kernels::gather_cell_triplets(mesh.num_cells(), cell_fn, opts.exec);
  return sparse_from_triplets(test.n_free(), trial.n_free(), triplets);
}

FormSet assemble_forms(const PhysicalParams& params, const CoefficientField& coeffs,
                       const SpaceSet& spaces, double dt, Exec exec) {
  FormSet out;
  for (FormId id : kAllForms) out[id] = assemble_form(id, params, coeffs, spaces, dt, {{}, exec});
  return out;
}

const TriangleRule& degree4_rule() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1;
    const double w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2;
    const double w2 = 0.109951743655322;
    r.points = {{b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1},
                {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}};
    r.weights = {w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

namespace {

template <int Components, class Eval>
Vector load_vector(const FieldSpace& space, const Mesh& mesh, Eval&& eval, Exec exec) {
  const TriangleRule& rule = degree4_rule();
  auto cell_fn = [&](int cell, std::vector<kernels::IndexedValue>& out) {
    const auto& tri = mesh.cells()[cell];
    const double area = mesh.signed_area(cell);
    const auto& P = mesh.vertices();
    std::array<std::array<double, Components>, 3> acc{};
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      const double x = l[0] * P[tri[0]].x + l[1] * P[tri[1]].x + l[2] * P[tri[2]].x;
      const double y = l[0] * P[tri[0]].y + l[1] * P[tri[1]].y + l[2] * P[tri[2]].y;
      const std::array<double, Components> val = eval(x, y);
      for (int k = 0; k < 3; ++k)
        for (int c = 0; c < Components; ++c) acc[k][c] += rule.weights[q] * l[k] * val[c];
    }
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < Components; ++c) {
        const int f = space.free_index[space.dof(tri[k], c)];
        if (f >= 0) out.emplace_back(f, area * acc[k][c]);
      }
    }
  };
  return kernels::gather_cell_vector(space.n_free(), mesh.num_cells(), cell_fn, exec);
}

}  // namespace

Vector assemble_load(const VectorFn& fn, double t, const SpaceSet& spaces, Exec exec) {
  const FieldSpace& space = spaces.u();
  if (!fn) return Vector::Zero(space.n_free());
  return load_vector<2>(space, spaces.mesh(), [&](double x, double y) { return fn(x, y, t); },
                        exec);
}

Vector assemble_load(Field field, const ScalarFn& fn, double t, const SpaceSet& spaces,
                     Exec exec) {
  if (field == Field::u) throw std::invalid_argument("assemble_load: u needs a vector function");
  const FieldSpace& space = spaces.space(field);
  if (!fn) return Vector::Zero(space.n_free());
  return load_vector<1>(
      space, spaces.mesh(),
      [&](double x, double y) { return std::array<double, 1>{fn(x, y, t)}; }, exec);
}

LoadVectors assemble_loads(const Forcing& forcing, double t, const SpaceSet& spaces, Exec exec) {
  return {assemble_load(forcing.f, t, spaces, exec),
          assemble_load(Field::p, forcing.g, t, spaces, exec),
          assemble_load(Field::theta, forcing.eta, t, spaces, exec)};
}

Vector interpolate(const VectorFn& fn, double t, const SpaceSet& spaces) {
  const FieldSpace& s = spaces.u();
  Vector out = Vector::Zero(s.n_free());
  if (!fn) return out;
  const auto& P = spaces.mesh().vertices();
  for (int k = 0; k < s.n_free(); ++k) {
    const int dof = s.free_dofs[k];
    const int v = dof / 2;
    out[k] = fn(P[v].x, P[v].y, t)[dof % 2];
  }
  return out;
}

Vector interpolate(Field field, const ScalarFn& fn, double t, const SpaceSet& spaces) {
  const FieldSpace& s = spaces.space(field);
  if (s.components != 1) throw std::invalid_argument("interpolate: scalar field expected");
  Vector out = Vector::Zero(s.n_free());
  if (!fn) return out;
  const auto& P = spaces.mesh().vertices();
  for (int k = 0; k < s.n_free(); ++k) {
    const int v = s.free_dofs[k];
    out[k] = fn(P[v].x, P[v].y, t);
  }
  return out;
}

}  // namespace thmrom
