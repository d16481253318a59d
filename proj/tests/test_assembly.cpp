#include "support.hpp"

#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>
#include <set>

namespace thmrom {
namespace {

const BcSpec kAllFree{false, false, false};

PhysicalParams sample_params() {
  PhysicalParams p;
  p.lambda = 3.0;
  p.mu = 2.0;
  p.c0 = 0.7;
  p.alpha = 0.9;
  p.alpha_T = 0.05;
  p.alpha_m = 0.02;
  p.C_d = 1.3;
  p.theta0 = 2.0;
  p.L = 1.5;
  return p;
}

// Coefficients of a linear scalar a + b x + c y at the vertices.
Vector linear_scalar(const SpaceSet& s, double a, double b, double c) {
  Vector v(s.p().n_free());
  for (int k = 0; k < s.p().n_free(); ++k) {
    const Point& q = s.mesh().vertices()[s.p().free_dofs[k]];
    v[k] = a + b * q.x + c * q.y;
  }
  return v;
}

// u = (a x + b y, c x + d y) on a mesh with free displacement everywhere.
Vector linear_displacement(const SpaceSet& s, double a, double b, double c, double d) {
  Vector v(s.u().n_free());
  for (int k = 0; k < s.u().n_free(); ++k) {
    const int dof = s.u().free_dofs[k];
    const Point& q = s.mesh().vertices()[dof / 2];
    v[k] = dof % 2 == 0 ? a * q.x + b * q.y : c * q.x + d * q.y;
  }
  return v;
}

SparseMatrix form(FormId id, const SpaceSet& s, double dt = 0.1,
                  const PhysicalParams& p = sample_params()) {
  return assemble_form(id, p, CoefficientField::uniform(0.4, 0.6), s, dt);
}

TEST(FormTable, NamesRoundTrip) {
  for (FormId id : kAllForms) {
    const auto back = form_from_name(form_name(id));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, id);
  }
  EXPECT_FALSE(form_from_name("XYZ").has_value());
}

TEST(FormTable, InverseDtFormsAreTheTimeDerivativeAndStabilizationForms) {
  const std::set<FormId> expected{FormId::MPP, FormId::MTT, FormId::MPU, FormId::MPT,
                                  FormId::MTU, FormId::MTP, FormId::SPP, FormId::STT};
  for (FormId id : kAllForms)
    EXPECT_EQ(form_scales_with_inverse_dt(id), expected.count(id) == 1) << form_name(id);
  EXPECT_EQ(form_fields(FormId::AUP), std::make_pair(Field::u, Field::p));
  EXPECT_EQ(form_fields(FormId::MTU), std::make_pair(Field::theta, Field::u));
}

TEST(Assembly, NonPositiveDtIsRejectedForTimeForms) {
  const auto s = test::unit_spaces(2);
  EXPECT_THROW(form(FormId::MPP, *s, 0.0), std::invalid_argument);
  EXPECT_NO_THROW(form(FormId::APP, *s, 0.0));
}

class LinearFields : public ::testing::TestWithParam<int> {};

// Energies of linear fields are integrated exactly by P1 forms, so they can
// be compared with hand-computed integrals over the unit square.
TEST_P(LinearFields, ScalarMassAndStiffnessEnergies) {
  std::mt19937 rng(GetParam());
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  const double a = d(rng), b = d(rng), c = d(rng);
  const auto s = test::unit_spaces(1 + GetParam(), kAllFree);
  const Vector v = linear_scalar(*s, a, b, c);
  // int (a + b x + c y)^2 over [0,1]^2
  const double l2 = a * a + b * b / 3.0 + c * c / 3.0 + a * b + a * c + b * c / 2.0;
  const double mass = v.dot(form(FormId::MASS_P, *s) * v);
  const double stiff = v.dot(form(FormId::APP, *s) * v) / 0.4;
  EXPECT_NEAR(mass, l2, 1e-12 * (1.0 + l2));
  EXPECT_NEAR(stiff, b * b + c * c, 1e-12 * (1.0 + b * b + c * c));
  EXPECT_NEAR(v.dot(form(FormId::GRAM_T, *s) * v), l2 + b * b + c * c, 1e-11 * (1.0 + l2));
  EXPECT_NEAR(v.dot(form(FormId::ATT, *s) * v) / 0.6, b * b + c * c, 1e-12 * (1.0 + stiff));
}

TEST_P(LinearFields, ElasticEnergyAndDivergence) {
  std::mt19937 rng(100 + GetParam());
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  const double a = d(rng), b = d(rng), c = d(rng), e = d(rng);
  const auto s = test::unit_spaces(1 + GetParam(), kAllFree);
  const PhysicalParams P = sample_params();
  const Vector u = linear_displacement(*s, a, b, c, e);
  const double eps_eps = a * a + e * e + 0.5 * (b + c) * (b + c);
  const double energy = 2.0 * P.mu * eps_eps + P.lambda * (a + e) * (a + e);
  EXPECT_NEAR(u.dot(form(FormId::AUU, *s) * u), energy, 1e-11 * (1.0 + energy));

  // 1^T MPU u = (alpha / dt) int div u
  const Vector ones = Vector::Ones(s->p().n_free());
  EXPECT_NEAR(ones.dot(form(FormId::MPU, *s, 0.25) * u), P.alpha / 0.25 * (a + e), 1e-12);
  // 1^T AUP^T u = -alpha int div u
  EXPECT_NEAR(u.dot(form(FormId::AUP, *s) * ones), -P.alpha * (a + e), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Seeds, LinearFields, ::testing::Range(1, 7));

TEST(Assembly, RigidMotionsAreInTheElasticKernel) {
  const auto s = test::unit_spaces(5, kAllFree);
  const SparseMatrix auu = form(FormId::AUU, *s);
  EXPECT_LE((auu * linear_displacement(*s, 0, -1, 1, 0)).norm(), 1e-12);
  Vector tx(s->u().n_free()), ty(s->u().n_free());
  for (int k = 0; k < s->u().n_free(); ++k) {
    tx[k] = s->u().free_dofs[k] % 2 == 0;
    ty[k] = s->u().free_dofs[k] % 2 == 1;
  }
  EXPECT_LE((auu * tx).norm(), 1e-12);
  EXPECT_LE((auu * ty).norm(), 1e-12);
}

TEST(Assembly, ClampedElasticityIsSymmetricPositiveDefinite) {
  const auto s = test::unit_spaces(6);
  const DenseMatrix auu = form(FormId::AUU, *s);
  EXPECT_LE((auu - auu.transpose()).norm(), 1e-14 * auu.norm());
  Eigen::LLT<DenseMatrix> llt(auu);
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Assembly, CouplingFormsAreScaledTransposes) {
  const auto s = test::unit_spaces(4);
  const PhysicalParams P = sample_params();
  const double dt = 0.2;
  const double kdr = P.lambda + P.mu;
  const DenseMatrix mass_p = form(FormId::MASS_P, *s, dt);
  EXPECT_LE(test::rel_diff(DenseMatrix(form(FormId::AUP, *s, dt)),
                           -dt * DenseMatrix(form(FormId::MPU, *s, dt)).transpose()), 1e-14);
  EXPECT_LE(test::rel_diff(DenseMatrix(form(FormId::AUT, *s, dt)),
                           -dt / P.theta0 * DenseMatrix(form(FormId::MTU, *s, dt)).transpose()),
            1e-14);
  EXPECT_LE(test::rel_diff(DenseMatrix(form(FormId::MTP, *s, dt)),
                           P.theta0 * DenseMatrix(form(FormId::MPT, *s, dt))), 1e-14);
  EXPECT_LE(test::rel_diff(DenseMatrix(form(FormId::MPT, *s, dt)), -3.0 * P.alpha_m / dt * mass_p),
            1e-14);
  EXPECT_LE(test::rel_diff(DenseMatrix(form(FormId::MPP, *s, dt)), P.c0 / dt * mass_p), 1e-14);
  EXPECT_LE(test::rel_diff(DenseMatrix(form(FormId::MTT, *s, dt)), P.C_d / dt * mass_p), 1e-14);
  EXPECT_LE(test::rel_diff(DenseMatrix(form(FormId::SPP, *s, dt)),
                           P.L * P.alpha * P.alpha / kdr / dt * mass_p), 1e-14);
  EXPECT_LE(test::rel_diff(DenseMatrix(form(FormId::STT, *s, dt)),
                           9.0 * P.L * P.alpha_T * P.alpha_T * kdr * P.theta0 / dt * mass_p),
            1e-14);
}

TEST(Assembly, InverseDtFormsScaleWithStepSize) {
  const auto s = test::unit_spaces(3);
  for (FormId id : kAllForms) {
    const DenseMatrix a = form(id, *s, 0.1);
    const DenseMatrix b = form(id, *s, 0.05);
    const double factor = form_scales_with_inverse_dt(id) ? 2.0 : 1.0;
    EXPECT_LE(test::rel_diff(b, factor * a), 1e-14) << form_name(id);
  }
}

TEST(Assembly, LabelRestrictedPartsSumToTheWhole) {
  auto mesh = std::make_shared<const Mesh>(build_unit_square_mesh(8, BandRegion{0.25, 0.5}));
  const auto s = build_spaces(mesh, BcSpec::clamped_insulated());
  const CoefficientField k = CoefficientField::uniform(1.0, 1.0).set(1, 5.0, 7.0).set(2, 0.5, 0.25);
  for (FormId id : {FormId::APP, FormId::ATT, FormId::AUU, FormId::MASS_P}) {
    const DenseMatrix whole = assemble_form(id, sample_params(), k, *s, 0.1);
    AssemblyOptions o1, o2;
    o1.only_label = 1;
    o2.only_label = 2;
    const DenseMatrix parts = DenseMatrix(assemble_form(id, sample_params(), k, *s, 0.1, o1)) +
                              DenseMatrix(assemble_form(id, sample_params(), k, *s, 0.1, o2));
    EXPECT_LE(test::rel_diff(parts, whole), 1e-14) << form_name(id);
  }
}

TEST(Assembly, SerialAndParallelAreBitIdentical) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  const auto s = test::unit_spaces(9);
  const auto p = sample_params();
  const auto k = CoefficientField::uniform(0.4, 0.6);
  for (FormId id : kAllForms) {
    AssemblyOptions ser, par;
    ser.exec = Exec::serial;
    par.exec = Exec::parallel;
    const DenseMatrix a = assemble_form(id, p, k, *s, 0.1, ser);
    const DenseMatrix b = assemble_form(id, p, k, *s, 0.1, par);
    EXPECT_TRUE(a == b) << form_name(id);
  }
  const ScalarFn fn = [](double x, double y, double t) { return std::sin(x + 2 * y + t); };
  EXPECT_TRUE(assemble_load(Field::p, fn, 0.3, *s, Exec::serial) ==
              assemble_load(Field::p, fn, 0.3, *s, Exec::parallel));
  omp_set_num_threads(saved);
}

double factorial(int k) { return std::tgamma(k + 1.0); }

TEST(Quadrature, DegreeFourRuleIsExactOnMonomials) {
  const TriangleRule& rule = degree4_rule();
  EXPECT_EQ(rule.points.size(), 6u);
  double wsum = 0.0;
  for (double w : rule.weights) wsum += w;
  EXPECT_NEAR(wsum, 1.0, 1e-15);
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + b <= 4; ++b) {
      // Reference triangle (0,0),(1,0),(0,1), area 1/2.
      double q = 0.0;
      for (size_t k = 0; k < rule.points.size(); ++k)
        q += 0.5 * rule.weights[k] * std::pow(rule.points[k][1], a) * std::pow(rule.points[k][2], b);
      EXPECT_NEAR(q, factorial(a) * factorial(b) / factorial(a + b + 2), 1e-15) << a << "," << b;
    }
  }
}

TEST(Loads, PolynomialLoadsSumToExactIntegrals) {
  const auto s = test::unit_spaces(5, kAllFree);
  // P1 hats sum to one, so the entries of a load vector sum to the integral
  // of the data; cubic data times a hat is within the degree-4 rule.
  const ScalarFn cubic = [](double x, double y, double t) { return t * x * x * x + y * y * x; };
  EXPECT_NEAR(assemble_load(Field::p, cubic, 2.0, *s).sum(), 2.0 / 4.0 + 1.0 / 6.0, 1e-14);
  const VectorFn vec = [](double x, double y, double) { return std::array<double, 2>{x, 3 * y * y}; };
  const Vector fu = assemble_load(vec, 0.0, *s);
  double sx = 0.0, sy = 0.0;
  for (int k = 0; k < s->u().n_free(); ++k) (s->u().free_dofs[k] % 2 == 0 ? sx : sy) += fu[k];
  EXPECT_NEAR(sx, 0.5, 1e-14);
  EXPECT_NEAR(sy, 1.0, 1e-14);
}

TEST(Loads, EmptyForcingGivesZeroLoads) {
  const auto s = test::unit_spaces(3);
  const LoadVectors l = assemble_loads(Forcing{}, 0.5, *s);
  EXPECT_EQ(l.f.size(), s->u().n_free());
  EXPECT_EQ(l.f.norm() + l.g.norm() + l.eta.norm(), 0.0);
}

TEST(Interpolation, MatchesVertexValues) {
  const auto s = test::unit_spaces(4);
  const ScalarFn fn = [](double x, double y, double t) { return x - 2 * y + t; };
  const Vector v = interpolate(Field::theta, fn, 1.5, *s);
  EXPECT_LE((v - linear_scalar(*s, 1.5, 1.0, -2.0)).norm(), 1e-15);
}

TEST(Parameters, ValidationRejectsBadValues) {
  EXPECT_NO_THROW(sample_params().validate());
  auto bad = [](auto mutate) {
    PhysicalParams p = sample_params();
    mutate(p);
    return p;
  };
  EXPECT_THROW(bad([](PhysicalParams& p) { p.mu = 0.0; }).validate(), ParameterError);
  EXPECT_THROW(bad([](PhysicalParams& p) { p.lambda = -1.0; }).validate(), ParameterError);
  EXPECT_THROW(bad([](PhysicalParams& p) { p.theta0 = 0.0; }).validate(), ParameterError);
  EXPECT_THROW(bad([](PhysicalParams& p) { p.L = 0.0; }).validate(), ParameterError);
  EXPECT_THROW(bad([](PhysicalParams& p) { p.c0 = NAN; }).validate(), ParameterError);
  EXPECT_DOUBLE_EQ(sample_params().K_dr(), 5.0);
}

TEST(Coefficients, LabelsOverrideTheUniformValue) {
  const auto k = CoefficientField::uniform(1.0, 2.0).set(3, 4.0, 5.0);
  EXPECT_EQ(k.K(3), 4.0);
  EXPECT_EQ(k.D(3), 5.0);
  EXPECT_EQ(k.K(9), 1.0);
  EXPECT_NO_THROW(k.validate());
  EXPECT_THROW(CoefficientField::uniform(0.0, 1.0).validate(), ParameterError);
  EXPECT_THROW(CoefficientField().set(1, 1.0, 1.0).K(2), ParameterError);
}

}  // namespace
}  // namespace thmrom
