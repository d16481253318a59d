#pragma once

#include "thmrom/pod.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace thmrom {

/// Reduced coefficient vectors; same layout as State with r-sized fields.
using RomState = State;

/// Reduced forms Phi_test^T A Phi_trial keyed by form. Forms that carry 1/dt
/// are stored for dt = 1 so one projection serves every online step size.
struct ProjectedForms {
  std::map<FormId, DenseMatrix> forms;
  std::array<int, 3> dims{};

  const DenseMatrix& at(FormId id) const;
};

/// Projects every form of `sys` that the ROM uses (all of kAllForms).
ProjectedForms project_operators(const ReducedBasis& basis, const HfSystem& sys,
                                 Exec exec = Exec::parallel);

/// Leading dims[test] x dims[trial] blocks; equals projecting onto the
/// leading modes of the basis.
ProjectedForms truncate(const ProjectedForms& forms, const std::array<int, 3>& dims);

/// Phi^T applied to HF load vectors.
struct RomLoads {
  std::vector<Vector> f, g, eta;  // index n is time level t^n; index 0 unused
};

/// Re-projects the forcing on the online grid t^n = n dt, n = 1..N.
RomLoads project_loads(const ReducedBasis& basis, const Forcing& forcing, const SpaceSet& spaces,
                       double dt, int N, Exec exec = Exec::parallel);

RomLoads truncate(const RomLoads& loads, const std::array<int, 3>& dims);

/// Everything the online solvers need for one (basis, parameter, dt).
struct RomOperators {
  std::map<FormId, DenseMatrix> forms;  // scaled by 1/dt where applicable
  RomLoads loads;
  double dt = 0.0;
  std::array<int, 3> dims{};

  const DenseMatrix& at(FormId id) const;
  int num_steps() const { return static_cast<int>(loads.f.size()) - 1; }
};

RomOperators instantiate(const ProjectedForms& projected, double dt, RomLoads loads);

/// A_r(w) = sum_q c_q(w) A^(q) per form; forms without terms come from
/// `fixed`.
struct AffineOperatorFamily {
  using Omega = std::array<double, 2>;
  struct Term {
    std::function<double(const Omega&)> coefficient;
    DenseMatrix matrix;
  };
  std::map<FormId, std::vector<Term>> terms;
  ProjectedForms fixed;
};

ProjectedForms instantiate_affine(const AffineOperatorFamily& family,
                                  const AffineOperatorFamily::Omega& omega);

/// L2 projection per field: (Phi^T M Phi) x = Phi^T b, where b holds the
/// tested right-hand sides (b = M x_hf for an HF state, or the load vector
/// of exact data). Throws NumericalError if a reduced mass is singular.
RomState project_initial_condition(const ReducedBasis& basis, const HfSystem& sys,
                                   const LoadVectors& tested_data);
RomState project_initial_condition(const ReducedBasis& basis, const HfSystem& sys,
                                   const State& hf_state);

State lift(const RomState& reduced, const ReducedBasis& basis);
Trajectory lift(const Trajectory& reduced, const ReducedBasis& basis);

class MRomStepper {
 public:
  explicit MRomStepper(const RomOperators& ops);
  RomState step(const RomState& prev, int time_index) const;
  const DenseMatrix& block_matrix() const { return block_; }

 private:
  const RomOperators* ops_;
  DenseMatrix block_;
  DenseLu lu_;
};

struct RomConditionNumbers {
  double flow = 0.0, heat = 0.0, mech = 0.0;
};

class FsRomStepper {
 public:
  explicit FsRomStepper(const RomOperators& ops);

  Vector step_i(const RomState& iter, const RomState& prev, int time_index) const;
  Vector step_ii(const RomState& iter, const RomState& prev, int time_index) const;
  Vector step_iii(const Vector& p_next, const Vector& theta_next, int time_index) const;
  RomState sweep(const RomState& iter, const RomState& prev, int time_index) const;

  /// Iterates with relative Euclidean increments.
  FsStepResult time_step(const RomState& prev, int time_index, const StoppingCriterion& stop,
                         const IterationObserver& obs = {}) const;

  /// 2-norm condition numbers of the three left-hand matrices.
  RomConditionNumbers condition_numbers() const;

 private:
  const RomOperators* ops_;
  DenseMatrix flow_m_, heat_m_, mech_m_;
  DenseLu flow_, heat_, mech_;
};

/// Same as FsRomStepper::condition_numbers without factorizing, so it also
/// reports singular systems (as infinity).
RomConditionNumbers fs_rom_condition_numbers(const RomOperators& ops);

enum class RomScheme { monolithic, fixed_stress };
std::string_view scheme_name(RomScheme s);

struct RomRunConfig {
  RomScheme scheme = RomScheme::monolithic;
  StoppingCriterion stop{1e-10, 20, IncrementNorm::euclidean};
  RomState initial;
  std::function<void(const StepRecord&)> on_step;
};

struct RomRunResult {
  Trajectory trajectory;  // reduced states
  SolverReport report;
};

/// Runs over every time index for which `ops` holds loads.
RomRunResult run_rom(const RomOperators& ops, const RomRunConfig& cfg);

/// Binary container of named dense matrices (forms then per-step loads).
void write_rom_operators(const RomOperators& ops, const std::filesystem::path& path);
RomOperators read_rom_operators(const std::filesystem::path& path);

}  // namespace thmrom
