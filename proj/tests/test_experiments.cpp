#include "forcing_oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace thmrom {
namespace {

using std::numbers::pi;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Manufactured, VanishesOnTheBoundary) {
  const ManufacturedCase mc = ManufacturedCase::standard();
  for (double s : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    for (const auto& [x, y] : {std::pair{s, 0.0}, {s, 1.0}, {0.0, s}, {1.0, s}}) {
      const ExactValues v = mc.exact(x, y, 0.6);
      EXPECT_EQ(v.u[0], 0.0);
      EXPECT_EQ(v.u[1], 0.0);
      EXPECT_EQ(v.p, 0.0);
      EXPECT_EQ(v.theta, 0.0);
    }
  }
}

TEST(Manufactured, HandComputedValues) {
  const ManufacturedCase mc = ManufacturedCase::standard();
  // Bubble x y (1-x)(1-y) is 1/16 at the centre; the trigonometric factors
  // of u vanish there at t = 1 because cos(pi/2) = 0.
  const ExactValues c = mc.exact(0.5, 0.5, 1.0);
  EXPECT_NEAR(c.p, std::cos(1.0) / 16.0, 1e-16);
  EXPECT_NEAR(c.theta, std::sin(1.0) / 16.0, 1e-16);
  EXPECT_NEAR(c.u[0], 0.0, 1e-16);
  EXPECT_NEAR(c.u[1], 0.0, 1e-16);

  const double x = 0.3, y = 0.8, b = x * y * (1 - x) * (1 - y);
  const ExactValues z = mc.exact(x, y, 0.0);
  EXPECT_EQ(z.u[0], 0.0);
  EXPECT_EQ(z.u[1], 0.0);
  EXPECT_NEAR(z.p, std::cos(x - y) * b, 1e-16);
  EXPECT_NEAR(z.theta, std::sin(x - y) * b, 1e-16);

  const ExactValues w = mc.exact(x, y, 0.5);
  EXPECT_NEAR(w.u[0], std::sin(pi * x * 0.5) * std::cos(pi * y * 0.5) * b, 1e-16);
  EXPECT_NEAR(w.u[1], std::cos(pi * x * 0.5) * std::sin(pi * y * 0.5) * b, 1e-16);
}

class ManufacturedPoints : public ::testing::TestWithParam<int> {};

TEST_P(ManufacturedPoints, GradientsMatchFiniteDifferences) {
  std::mt19937 rng(GetParam());
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const ManufacturedCase mc = ManufacturedCase::standard();
  for (int k = 0; k < 20; ++k) {
    const double x = d(rng), y = d(rng), t = d(rng);
    const ExactGradients g = mc.exact_gradients(x, y, t);
    for (int c = 0; c < 4; ++c) {
      const double gx = test::d1([&](double h) { return test::component(mc, c, x + h, y, t); });
      const double gy = test::d1([&](double h) { return test::component(mc, c, x, y + h, t); });
      const std::array<double, 2> ref = c < 2 ? g.u[c] : (c == 2 ? g.p : g.theta);
      EXPECT_NEAR(ref[0], gx, 1e-10);
      EXPECT_NEAR(ref[1], gy, 1e-10);
    }
  }
}

TEST_P(ManufacturedPoints, ForcingSatisfiesTheBalanceLaws) {
  std::mt19937 rng(GetParam());
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const ManufacturedCase mc = ManufacturedCase::standard();
  for (int k = 0; k < 25; ++k) {
    const double x = d(rng), y = d(rng), t = d(rng);
    EXPECT_LE(test::forcing_residual(mc, x, y, t).max_abs(), 1e-6) << x << "," << y << "," << t;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, ManufacturedPoints, ::testing::Range(1, 5));

TEST(Manufactured, DecoupledForcingMatchesHandDerivation) {
  PhysicalParams p = ManufacturedCase::standard().params();
  p.alpha = p.alpha_T = p.alpha_m = 0.0;
  const double K = 0.3, D = 0.7;
  const ManufacturedCase mc(p, K, D);
  const double x = 0.2, y = 0.65, t = 0.4;
  const double s = t + x - y;
  const double B = x * y * (1 - x) * (1 - y);
  const double Bx = y * (1 - y) * (1 - 2 * x), By = x * (1 - x) * (1 - 2 * y);
  const double Bxx = -2 * y * (1 - y), Byy = -2 * x * (1 - x);
  // p = cos(s) B with s = t + x - y.
  const double lap_p = -2 * std::cos(s) * B - 2 * std::sin(s) * (Bx - By) + std::cos(s) * (Bxx + Byy);
  const double lap_t = -2 * std::sin(s) * B + 2 * std::cos(s) * (Bx - By) + std::sin(s) * (Bxx + Byy);
  const ForcingValues f = mc.forcing(x, y, t);
  EXPECT_NEAR(f.g, p.c0 * -std::sin(s) * B - K * lap_p, 1e-14);
  EXPECT_NEAR(f.eta, p.C_d * std::cos(s) * B - D * lap_t, 1e-14);
}

TEST(Quadrature, DegreeEightRuleIsExactOnMonomials) {
  const TriangleRule& rule = degree8_rule();
  EXPECT_EQ(rule.points.size(), 25u);
  for (int a = 0; a <= 8; ++a) {
    for (int b = 0; a + b <= 8; ++b) {
      double q = 0.0;
      for (size_t k = 0; k < rule.points.size(); ++k)
        q += 0.5 * rule.weights[k] * std::pow(rule.points[k][1], a) * std::pow(rule.points[k][2], b);
      const double exact = std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
      EXPECT_NEAR(q, exact, 1e-15) << a << "," << b;
    }
  }
}

struct ErrorCase {
  ManufacturedCase mc = ManufacturedCase::standard();
  std::shared_ptr<const SpaceSet> spaces;
  HfSystem sys;
  explicit ErrorCase(int n) : spaces(test::unit_spaces(n)) {
    sys = HfSystem::assemble(spaces, mc.params(), mc.coefficients(), 0.1);
  }
  State interpolant(double t) const {
    const Forcing ex = mc.exact_functions();
    State s;
    s.u = interpolate(ex.f, t, *spaces);
    s.p = interpolate(Field::p, ex.g, t, *spaces);
    s.theta = interpolate(Field::theta, ex.eta, t, *spaces);
    s.t = t;
    return s;
  }
};

TEST(ErrorNorms, InterpolantHasZeroInterpolantError) {
  ErrorCase c(6);
  const FieldNorms e = state_error(c.interpolant(0.7), c.mc, c.sys, ErrorReference::vertex_interpolant);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(e.l2[k], 0.0);
    EXPECT_EQ(e.h1[k], 0.0);
  }
}

TEST(ErrorNorms, ZeroStateErrorIsTheExactNorm) {
  ErrorCase c(5);
  const FieldNorms e = state_error(State::zero(*c.spaces, 0.4), c.mc, c.sys);
  const FieldNorms x = exact_norms(c.mc, c.sys, 0.4);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(e.l2[k], x.l2[k], 1e-14);
    EXPECT_NEAR(e.h1[k], x.h1[k], 1e-14);
    EXPECT_GT(x.l2[k], 0.0);
    EXPECT_GT(x.h1[k], x.l2[k]);
  }
  // ||p(t)||^2 = int cos^2(t + x - y) B^2, compare with a fine midpoint sum.
  double s = 0.0;
  const int m = 400;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double xx = (i + 0.5) / m, yy = (j + 0.5) / m;
      const double v = c.mc.exact(xx, yy, 0.4).p;
      s += v * v / (m * m);
    }
  EXPECT_NEAR(x.l2[1], std::sqrt(s), 1e-6 * std::sqrt(s));
}

TEST(ErrorNorms, InterpolationErrorHasOptimalOrder) {
  ErrorCase a(8), b(16);
  const FieldNorms ea = state_error(a.interpolant(0.5), a.mc, a.sys);
  const FieldNorms eb = state_error(b.interpolant(0.5), b.mc, b.sys);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(std::log2(ea.l2[k] / eb.l2[k]), 2.0, 0.2) << k;
    EXPECT_NEAR(std::log2(ea.h1[k] / eb.h1[k]), 1.0, 0.15) << k;
  }
}

TEST(ErrorNorms, RelativeErrorsOfAScaledTrajectory) {
  test::SmallCase c(0.1, 0.3);
  const Trajectory ref = run_hf(c.sys, c.run).trajectory;
  Trajectory scaled = ref;
  for (State& s : scaled.states) {
    s.u *= 1.01;
    s.p *= 0.98;
    s.theta *= 1.03;
  }
  const RelativeErrors same = relative_errors(ref, ref, c.sys);
  const RelativeErrors e = relative_errors(scaled, ref, c.sys);
  const double expected[] = {0.01, 0.02, 0.03};
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(same.max_over_time.h1[k], 0.0);
    EXPECT_NEAR(e.max_over_time.l2[k], expected[k], 1e-12);
    EXPECT_NEAR(e.final_time.h1[k], expected[k], 1e-12);
  }
}

TEST(ErrorNorms, TrajectoryErrorIsMaxOverLevels) {
  test::SmallCase c(0.1, 0.3);
  const Trajectory t = run_hf(c.sys, c.run).trajectory;
  const FieldNorms m = error_norms(t, c.mc, c.sys);
  for (int k = 0; k < 3; ++k) {
    double worst = 0.0;
    for (size_t n = 1; n < t.states.size(); ++n)
      worst = std::max(worst, state_error(t.states[n], c.mc, c.sys).h1[k]);
    EXPECT_NEAR(m.h1[k], worst, 1e-14 * worst);
  }
}

bool non_increasing(const std::vector<double>& s, size_t from) {
  for (size_t i = from + 1; i < s.size(); ++i)
    if (s[i] > s[i - 1] * (1 + 1e-12) + 1e-14 * s.front()) return false;
  return true;
}

// Once the mechanics step has run, iterates satisfy the elasticity error
// equation and the weighted pressure/temperature error contracts.
TEST(Contraction, WeightedErrorContractsAfterTheFirstSweep) {
  test::SmallCase c(0.05, 0.5);
  const ContractionTrace tr = measure_contraction(c.sys, c.run.forcing, State::zero(*c.spaces),
                                                  0.5, StoppingCriterion{1e-10, 20});
  ASSERT_EQ(tr.per_step.size(), 10u);
  for (const auto& s : tr.per_step) {
    ASSERT_GE(s.size(), 3u);
    EXPECT_TRUE(non_increasing(s, 1));
  }
}

// With time-independent data the previous state already satisfies the new
// step's elasticity equation, so contraction holds from the initial iterate.
TEST(Contraction, FrozenForcingContractsFromTheInitialIterate) {
  test::SmallCase c(0.05, 0.5);
  const Forcing live = c.run.forcing;
  Forcing frozen;
  frozen.f = [live](double x, double y, double) { return live.f(x, y, 0.5); };
  frozen.g = [live](double x, double y, double) { return live.g(x, y, 0.5); };
  frozen.eta = [live](double x, double y, double) { return live.eta(x, y, 0.5); };
  HfRunConfig mono;
  mono.T = 0.05;
  mono.forcing = frozen;
  const State start = run_hf(c.sys, mono).trajectory.states.back();
  const ContractionTrace tr =
      measure_contraction(c.sys, frozen, start, 0.5, StoppingCriterion{1e-10, 20});
  for (const auto& s : tr.per_step) EXPECT_TRUE(non_increasing(s, 0));
}

TEST(ParamGrid, UniformGridCountsAndEndpoints) {
  const ParamBox train{-3.0, 0.0, -1.0, 1.0};
  const auto g3 = uniform_grid(train, 3);
  ASSERT_EQ(g3.size(), 9u);
  EXPECT_EQ(g3.front(), (std::array<double, 2>{-3.0, -1.0}));
  EXPECT_EQ(g3[1], (std::array<double, 2>{-1.5, -1.0}));
  EXPECT_EQ(g3.back(), (std::array<double, 2>{0.0, 1.0}));
  EXPECT_EQ(uniform_grid(ParamBox{-4.0, 1.0, -2.0, 2.0}, 7).size(), 49u);
  EXPECT_EQ(uniform_grid(train, 1).front(), (std::array<double, 2>{-1.5, 0.0}));
  EXPECT_TRUE(train.contains({0.0, 1.0}));
  EXPECT_FALSE(train.contains({0.1, 0.0}));
}

TEST(Config, DefaultsForEveryExperiment) {
  for (const char* id : {"1a", "1b", "1c", "1d", "2", "custom"}) {
    const ExperimentConfig c = ExperimentConfig::defaults(id);
    EXPECT_EQ(c.id, id);
    EXPECT_NO_THROW(c.validate()) << id;
  }
  const ExperimentConfig a = ExperimentConfig::defaults("1a");
  EXPECT_EQ(a.n, 4);
  EXPECT_EQ(a.cycles, 3);
  EXPECT_DOUBLE_EQ(a.dt_train, 0.0025);
  const ExperimentConfig c = ExperimentConfig::defaults("1c");
  EXPECT_DOUBLE_EQ(c.T_train, 0.1);
  EXPECT_DOUBLE_EQ(c.T_online, 1.0);
  EXPECT_DOUBLE_EQ(ExperimentConfig::defaults("1d").dt_online, 0.01);
  EXPECT_THROW(ExperimentConfig::defaults("3"), std::invalid_argument);
}

TEST(Config, ValidationNamesTheField) {
  auto message = [](auto mutate) {
    ExperimentConfig c = ExperimentConfig::defaults("1b");
    mutate(c);
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_EQ(message([](ExperimentConfig& c) { c.n = 0; }).rfind("mesh.n", 0), 0u);
  EXPECT_EQ(message([](ExperimentConfig& c) { c.dt_train = 0.3; }).rfind("time.T_train", 0), 0u);
  EXPECT_EQ(message([](ExperimentConfig& c) { c.eps = -1; }).rfind("solver.eps", 0), 0u);
  EXPECT_EQ(message([](ExperimentConfig& c) { c.r_list = {}; }).rfind("rom.r", 0), 0u);
  EXPECT_EQ(message([](ExperimentConfig& c) { c.r_list = {2, 0}; }).rfind("rom.r", 0), 0u);
}

TEST(RunExample, SmallCustomRunWritesADeterministicBundle) {
  const auto root = std::filesystem::temp_directory_path() / "thmrom_test_custom";
  std::filesystem::remove_all(root);
  ExperimentConfig cfg = ExperimentConfig::defaults("custom");
  cfg.n = 4;
  cfg.dt_train = cfg.dt_online = 0.05;
  cfg.T_train = cfg.T_online = 0.2;
  cfg.r_list = {1, 2};
  cfg.out_dir = root / "a";
  const ExperimentResult a = run_example(cfg);
  cfg.out_dir = root / "b";
  run_example(cfg);
  EXPECT_TRUE(a.complete);
  for (const char* f : {"errors.csv", "iterations.csv", "eigenvalues.csv", "status.txt"}) {
    ASSERT_TRUE(std::filesystem::exists(root / "a" / f)) << f;
    EXPECT_EQ(slurp(root / "a" / f), slurp(root / "b" / f)) << f;
  }
  EXPECT_TRUE(std::filesystem::exists(root / "a" / "timings.csv"));
  EXPECT_NO_THROW(a.report("FS-HF"));
  EXPECT_LT(a.error("FS-ROM", Field::u, "H1_rel_hf", 2), 1.0);
  std::filesystem::remove_all(root);
}

TEST(RunExample, ZeroDataSkipsTheRomStage) {
  const auto root = std::filesystem::temp_directory_path() / "thmrom_test_zero";
  ExperimentConfig cfg = ExperimentConfig::defaults("custom");
  cfg.n = 4;
  cfg.dt_train = cfg.dt_online = 0.05;
  cfg.T_train = cfg.T_online = 0.1;
  cfg.zero_forcing = true;
  cfg.out_dir = root;
  const ExperimentResult r = run_example(cfg);
  EXPECT_NE(r.status_message.find("skipped"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(root / "status.txt"));
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace thmrom
