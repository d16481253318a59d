#pragma once

#include "thmrom/manufactured.hpp"
#include "thmrom/rom.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace thmrom {

/// Field-indexed pair of L2 and full H1 values.
struct FieldNorms {
  std::array<double, 3> l2{};
  std::array<double, 3> h1{};
};

enum class ErrorReference {
  /// Integrate |x_h - x|^2 against the exact fields with a degree-8 rule.
  exact_quadrature,
  /// Discrete norms of x_h - I_h x, with I_h the vertex interpolant.
  vertex_interpolant,
};

/// Error of one state against the exact solution at s.t.
FieldNorms state_error(const State& s, const ManufacturedCase& mc, const HfSystem& sys,
                       ErrorReference ref = ErrorReference::exact_quadrature);
/// Norms of the exact solution at time t (same quadrature).
FieldNorms exact_norms(const ManufacturedCase& mc, const HfSystem& sys, double t);

/// Max over n >= 1 of the per-level errors.
FieldNorms error_norms(const Trajectory& traj, const ManufacturedCase& mc, const HfSystem& sys,
                       ErrorReference ref = ErrorReference::exact_quadrature);
/// Max over n >= 1 of error / exact norm.
FieldNorms relative_error_norms(const Trajectory& traj, const ManufacturedCase& mc,
                                const HfSystem& sys,
                                ErrorReference ref = ErrorReference::exact_quadrature);

struct RelativeErrors {
  FieldNorms max_over_time;
  FieldNorms final_time;
};

/// |x - y| / |y| in the discrete mass (L2) and Gram (H1) norms of `sys`, per
/// time level n >= 1 (levels where both vanish count as zero).
RelativeErrors relative_errors(const Trajectory& approx, const Trajectory& reference,
                               const HfSystem& sys);

/// Collapsed 5x5 Gauss-Legendre rule, exact through degree 8.
const TriangleRule& degree8_rule();

struct ParamBox {
  double w1_min, w1_max, w2_min, w2_max;
  bool contains(const std::array<double, 2>& w, double tol = 1e-12) const;
};

/// Uniform g x g grid on a box, endpoints included, w1 varying fastest.
std::vector<std::array<double, 2>> uniform_grid(const ParamBox& box, int g);

struct ExperimentConfig {
  std::string id = "1a";  // 1a | 1b | 1c | 1d | 2 | custom
  int n = 4;
  int cycles = 3;
  double dt_train = 0.0025;
  double dt_online = 0.0025;
  double T_train = 1.0;
  double T_online = 1.0;
  double eps = 1e-10;
  int max_iter = 20;
  double L = 1.0;
  std::vector<int> r_list{1, 2, 3, 4, 5};
  double eig_floor = 1e-12;
  ErrorReference error_reference = ErrorReference::exact_quadrature;

  // Example 2.
  ParamBox train_box{-3.0, 0.0, -1.0, 1.0};
  ParamBox test_box{-4.0, 1.0, -2.0, 2.0};
  int train_grid = 3;
  int test_grid = 7;

  // custom: uniform material, optional zero forcing and zero initial data.
  PhysicalParams params{};
  double K = 1.0;
  double D = 1.0;
  bool zero_forcing = false;
  BcSpec bc{};

  std::filesystem::path out_dir = "out";
  Exec exec = Exec::parallel;
  bool verbose = false;

  /// Defaults for an experiment id; throws std::invalid_argument on an
  /// unknown id.
  static ExperimentConfig defaults(std::string_view id);
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ErrorRow {
  std::string scheme;
  Field field;
  std::string norm;
  int cycle_or_r;
  double value;
};

struct RateRow {
  std::string scheme;
  Field field;
  std::string norm;
  int cycle;  // rate between cycle-1 and cycle
  double rate;
};

struct IterationRow {
  std::string scheme;
  int r;
  int time_index;
  int iterations;
};

struct TimingRow {
  std::string scheme;
  std::string phase;
  double seconds;
};

struct ConditionRow {
  std::string scheme;
  int r;
  double eig_floor;
  std::string matrix;  // flow | heat | mech
  double value;
};

struct EigenRow {
  std::string scheme;  // basis origin (M-HF or FS-HF trained)
  Field field;
  int k;
  double nu_normalized;
};

/// One parameter point of the Example 2 study.
struct ParamErrorRow {
  std::string test_case;  // i | ii | iii
  std::string scheme;     // M-ROM | FS-ROM
  int r;
  std::array<double, 2> omega;
  std::array<double, 3> max_rel_h1;
  std::array<double, 3> final_rel_h1;
  int hf_iterations;   // total over the run (FS only)
  int rom_iterations;  // total over the run (FS only)
  double hf_seconds;
  double rom_seconds;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<ErrorRow> errors;
  std::vector<RateRow> rates;
  std::vector<IterationRow> iterations;
  std::vector<TimingRow> timings;
  std::vector<ConditionRow> conditions;
  std::vector<EigenRow> eigenvalues;
  std::vector<ParamErrorRow> param_errors;
  std::map<std::string, SolverReport> reports;
  bool complete = true;
  std::string status_message;

  /// First matching error value; throws std::out_of_range if absent.
  double error(std::string_view scheme, Field f, std::string_view norm, int key) const;
  double rate(std::string_view scheme, Field f, std::string_view norm, int cycle) const;
  const SolverReport& report(const std::string& key) const;

  /// Writes errors.csv, rates.csv, iterations.csv, timings.csv,
  /// eigenvalues.csv, condition_numbers.csv, status.txt and, for Example 2,
  /// example2_errors.csv.
  void write(const std::filesystem::path& dir) const;
};

/// Label used for ROM schemes at a given r, e.g. "FS-ROM-r3".
std::string rom_label(RomScheme s, int r);

/// Per-step contraction data: for each time step, the weighted error norm
/// of (p^i - p, theta^i - theta) against the monolithic step solution, for
/// i = 0, 1, ... (i = 0 is the initial iterate).
struct ContractionTrace {
  std::vector<std::vector<double>> per_step;
};

ContractionTrace measure_contraction(const HfSystem& sys, const Forcing& forcing,
                                     const State& initial, double T,
                                     const StoppingCriterion& stop);

/// Example 2 material at a parameter point.
PhysicalParams example2_params(const std::array<double, 2>& omega);
CoefficientField example2_coefficients(const std::array<double, 2>& omega);
Forcing example2_forcing();
std::shared_ptr<const SpaceSet> example2_spaces(int n);

/// Parameter-separable reduced forms of Example 2 for a fixed basis and
/// reference mesh (forms are dt-free as in ProjectedForms).
AffineOperatorFamily build_example2_family(const ReducedBasis& basis,
                                           std::shared_ptr<const SpaceSet> spaces,
                                           Exec exec = Exec::parallel);

/// Assemble at omega, then project (the reference path for the family).
ProjectedForms example2_direct_projection(const ReducedBasis& basis,
                                          std::shared_ptr<const SpaceSet> spaces,
                                          const std::array<double, 2>& omega,
                                          Exec exec = Exec::parallel);

ExperimentResult run_convergence_study(const ExperimentConfig& cfg);

/// Offline stage alone (Example 1 family and custom): runs M-HF and FS-HF on
/// the training grid and stores traj_<scheme>.bin and basis_<scheme>.bin in
/// cfg.out_dir together with eigenvalues.csv.
ExperimentResult run_pod_stage(const ExperimentConfig& cfg);
/// Online stage from the artifacts of run_pod_stage: projects, runs M-ROM
/// and FS-ROM for every r and stores rom_<label>.bin for the largest r.
/// Throws std::runtime_error if an artifact is missing.
ExperimentResult run_rom_stage(const ExperimentConfig& cfg);
/// Dispatches on cfg.id; also writes the bundle to cfg.out_dir.
ExperimentResult run_example(const ExperimentConfig& cfg);

}  // namespace thmrom
