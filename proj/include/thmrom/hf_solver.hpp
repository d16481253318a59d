#pragma once

#include "thmrom/assembly.hpp"
#include "thmrom/linalg.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace thmrom {

/// Free-dof coefficient vectors of (u, p, theta) at time t.
struct State {
  Vector u, p, theta;
  double t = 0.0;

  const Vector& field(Field f) const;
  Vector& field(Field f);
  static State zero(const SpaceSet& spaces, double t = 0.0);
};

struct Trajectory {
  std::vector<State> states;  // t^0 ... t^N
  double dt = 0.0;
  double T = 0.0;
};

/// Time levels t^0..t^N for a horizon T that is a multiple of dt (to 1e-12
/// relative); throws std::invalid_argument otherwise.
int num_time_steps(double dt, double T);

enum class IncrementNorm { h1, euclidean };

struct StoppingCriterion {
  double eps = 1e-10;
  int max_iter = 20;
  IncrementNorm norm = IncrementNorm::h1;

  void validate() const;
};

struct StepRecord {
  int time_index = 0;  // n+1
  int iterations = 1;
  std::array<double, 3> increments{};  // final relative increments (u, p, theta)
  bool converged = true;
  double seconds = 0.0;  // solve phase only
};

struct SolverReport {
  std::string scheme;
  std::vector<StepRecord> steps;
  double setup_seconds = 0.0;  // assembly, factorization, projection
  double solve_seconds = 0.0;  // sum of step times

  double average_iterations() const;
  int max_iterations() const;
  int nonconverged_steps() const;
  double mean_step_seconds() const;
};

struct AssumptionReport {
  bool storage_ok = false;   // c0 > 3 alpha_m
  bool capacity_ok = false;  // C_d > 3 alpha_m theta0
  bool stabilization_ok = false;  // L >= 2 delta with delta >= 1/2
  double storage_margin = 0.0;
  double capacity_margin = 0.0;
  double stabilization_margin = 0.0;
};

/// Sufficient conditions for fixed-stress convergence. Informational only.
AssumptionReport check_assumptions(const PhysicalParams& params, double delta = 0.5);

/// Weighted pressure/temperature error norm squared in which the fixed-stress
/// iteration contracts:
///   (3 alpha_m + L alpha^2/K_dr) |e_p|^2 + (3 alpha_m + 9 L alpha_T^2 K_dr) |e_theta|^2
/// with L2 norms induced by the given mass matrices.
double contraction_norm_sq(const PhysicalParams& params, const SparseMatrix& mass_p,
                           const SparseMatrix& mass_theta, const Vector& e_p,
                           const Vector& e_theta);

/// All forms of one (params, coefficients, mesh, dt) configuration.
struct HfSystem {
  std::shared_ptr<const SpaceSet> spaces;
  PhysicalParams params;
  FormSet forms;
  double dt = 0.0;

  static HfSystem assemble(std::shared_ptr<const SpaceSet> spaces, const PhysicalParams& params,
                           const CoefficientField& coeffs, double dt, Exec exec = Exec::parallel);
  const SparseMatrix& at(FormId id) const;
};

/// H1 norm through the field's Gram matrix.
double h1_norm(const HfSystem& sys, Field f, const Vector& x);

/// Backward Euler step of the coupled block system, factorized once.
class MonolithicStepper {
 public:
  explicit MonolithicStepper(const HfSystem& sys);

  State step(const State& prev, const LoadVectors& loads, double t_next) const;
  const SparseMatrix& block_matrix() const { return block_; }
  Vector block_rhs(const State& prev, const LoadVectors& loads) const;

 private:
  const HfSystem* sys_;
  SparseMatrix block_;
  Factorization lu_;
};

struct FsStepResult {
  State state;
  int iterations = 0;
  std::array<double, 3> increments{};
  bool converged = false;
};

/// Called after every completed sweep with the iteration number (1-based)
/// and the new iterate.
using IterationObserver = std::function<void(int iteration, const State& iterate)>;

/// Fixed-stress splitting: flow and heat solves both read iterate i, then
/// mechanics reads the updated pressure and temperature.
class FixedStressStepper {
 public:
  explicit FixedStressStepper(const HfSystem& sys);

  Vector flow_step(const State& iter, const State& prev, const Vector& g) const;
  Vector heat_step(const State& iter, const State& prev, const Vector& eta) const;
  Vector mech_step(const Vector& p_next, const Vector& theta_next, const Vector& f) const;
  /// One sweep of the three steps from `iter`.
  State sweep(const State& iter, const State& prev, const LoadVectors& loads, double t_next) const;

  /// Iterates from prev until all relative H1 increments are <= eps or
  /// max_iter sweeps are done.
  FsStepResult time_step(const State& prev, const LoadVectors& loads, double t_next,
                         const StoppingCriterion& stop, const IterationObserver& obs = {}) const;

 private:
  const HfSystem* sys_;
  Factorization flow_, heat_, mech_;
};

enum class HfScheme { monolithic, fixed_stress };
std::string_view scheme_name(HfScheme s);

struct HfRunConfig {
  HfScheme scheme = HfScheme::monolithic;
  double T = 1.0;
  StoppingCriterion stop;
  Forcing forcing;
  /// Initial state; zero when empty.
  std::function<State(const SpaceSet&)> initial;
  Exec exec = Exec::parallel;
  /// Called once per time step (time_index, record) when set.
  std::function<void(const StepRecord&)> on_step;
};

struct HfRunResult {
  Trajectory trajectory;
  SolverReport report;
};

HfRunResult run_hf(const HfSystem& sys, const HfRunConfig& cfg);

/// Binary trajectory file: magic, version, field sizes, N, dt, then float64
/// payload per time level (t, u, p, theta).
void write_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);

/// CSV: time_index, iterations, increment_u, increment_p, increment_theta,
/// converged, seconds.
void write_report_csv(const SolverReport& report, const std::filesystem::path& path);

}  // namespace thmrom
