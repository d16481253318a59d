#include "thmrom/experiments.hpp"

#include "thmrom/io.hpp"
#include "thmrom/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <list>
#include <limits>
#include <numbers>
#include <tuple>
#include <sstream>

namespace thmrom {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr std::array<Field, 3> kFields = {Field::u, Field::p, Field::theta};
int idx(Field f) { return static_cast<int>(f); }

FormId gram_form(Field f) {
  return f == Field::u ? FormId::GRAM_U : f == Field::p ? FormId::GRAM_P : FormId::GRAM_T;
}
FormId mass_form(Field f) {
  return f == Field::u ? FormId::MASS_U : f == Field::p ? FormId::MASS_P : FormId::MASS_T;
}

double quad_norm(const Vector& x, const SparseMatrix& m) {
  return std::sqrt(std::max(0.0, x.dot(m * x)));
}

// Free-dof vector scattered to all dofs (constrained dofs carry zero data).
Vector expand(const FieldSpace& s, const Vector& x) {
  Vector full = Vector::Zero(s.n_dofs);
  for (int k = 0; k < s.n_free(); ++k) full[s.free_dofs[k]] = x[k];
  return full;
}

std::vector<double> gauss_legendre_nodes(int n, std::vector<double>& weights) {
  std::vector<double> x(n);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(n, z);
      const double pm = std::legendre(n - 1, z);
      dp = n * (z * p - pm) / (z * z - 1.0);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double p = std::legendre(n, z);
    const double pm = std::legendre(n - 1, z);
    dp = n * (z * p - pm) / (z * z - 1.0);
    x[i] = z;
    weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return x;
}

}  // namespace

const TriangleRule& degree8_rule() {
  static const TriangleRule rule = [] {
    constexpr int n = 5;
    std::vector<double> w;
    const std::vector<double> z = gauss_legendre_nodes(n, w);
    TriangleRule r;
    for (int i = 0; i < n; ++i) {
      const double xi = 0.5 * (z[i] + 1.0);
      for (int j = 0; j < n; ++j) {
        const double eta = 0.5 * (z[j] + 1.0);
        // (xi, eta) in the unit square -> (x, y) = (xi, eta (1 - xi)).
        const double x = xi, y = eta * (1.0 - xi);
        r.points.push_back({1.0 - x - y, x, y});
        // Square weights are w/2 each; Jacobian (1 - xi); reference area 1/2.
        r.weights.push_back(2.0 * 0.25 * w[i] * w[j] * (1.0 - xi));
      }
    }
    return r;
  }();
  return rule;
}

namespace {

// Exact data at one time level, shared by every trajectory measured there.
// Since discrete fields are linear per cell, the exact solution enters the
// error integrals only through per-cell moments; for each scalar component
// v in (u0, u1, p, theta) they are
//   int lambda_k v (k = 0..2), int v^2, int v_x, int v_y, int |grad v|^2.
constexpr int kMoments = 7;
using CellMoments = std::array<double, 4 * kMoments>;

struct ExactSample {
  ErrorReference ref = ErrorReference::exact_quadrature;
  std::vector<CellMoments> cells;
  std::array<Vector, 3> interp;
};

ExactSample sample_exact(const ManufacturedCase& mc, const HfSystem& sys, double t,
                         ErrorReference ref) {
  ExactSample out;
  out.ref = ref;
  const SpaceSet& spaces = *sys.spaces;
  if (ref == ErrorReference::vertex_interpolant) {
    const Forcing ex = mc.exact_functions();
    out.interp = {interpolate(ex.f, t, spaces), interpolate(Field::p, ex.g, t, spaces),
                  interpolate(Field::theta, ex.eta, t, spaces)};
    return out;
  }
  const Mesh& mesh = spaces.mesh();
  const TriangleRule& rule = degree8_rule();
  out.cells.resize(static_cast<size_t>(mesh.num_cells()));
#pragma omp parallel for schedule(static)
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const auto& tri = mesh.cells()[cell];
    const auto& P = mesh.vertices();
    const double area = mesh.signed_area(cell);
    CellMoments m{};
    for (size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      const double x = l[0] * P[tri[0]].x + l[1] * P[tri[1]].x + l[2] * P[tri[2]].x;
      const double y = l[0] * P[tri[0]].y + l[1] * P[tri[1]].y + l[2] * P[tri[2]].y;
      const ExactValues ev = mc.exact(x, y, t);
      const ExactGradients eg = mc.exact_gradients(x, y, t);
      const double w = rule.weights[q] * area;
      const std::array<double, 4> v = {ev.u[0], ev.u[1], ev.p, ev.theta};
      const std::array<Vec2, 4> g = {eg.u[0], eg.u[1], eg.p, eg.theta};
      for (int c = 0; c < 4; ++c) {
        double* mc_ = &m[c * kMoments];
        for (int k = 0; k < 3; ++k) mc_[k] += w * l[k] * v[c];
        mc_[3] += w * v[c] * v[c];
        mc_[4] += w * g[c][0];
        mc_[5] += w * g[c][1];
        mc_[6] += w * (g[c][0] * g[c][0] + g[c][1] * g[c][1]);
      }
    }
    out.cells[cell] = m;
  }
  return out;
}

FieldNorms sampled_error(const State& s, const ExactSample& ex, const HfSystem& sys) {
  const SpaceSet& spaces = *sys.spaces;
  FieldNorms out;
  if (ex.ref == ErrorReference::vertex_interpolant) {
    for (Field f : kFields) {
      const Vector e = s.field(f) - ex.interp[idx(f)];
      out.l2[idx(f)] = quad_norm(e, sys.at(mass_form(f)));
      out.h1[idx(f)] = quad_norm(e, sys.at(gram_form(f)));
    }
    return out;
  }

  const Mesh& mesh = spaces.mesh();
  const Vector u = expand(spaces.u(), s.u);
  const Vector p = expand(spaces.p(), s.p);
  const Vector th = expand(spaces.theta(), s.theta);

  // Per cell: squared L2 and gradient errors for u, p, theta.
  const auto sums = kernels::sum_over_cells_n<6>(
      mesh.num_cells(),
      [&](int cell) {
        const auto& tri = mesh.cells()[cell];
        const auto& P = mesh.vertices();
        const double area = mesh.signed_area(cell);
        std::array<std::array<double, 2>, 3> grad;
        for (int k = 0; k < 3; ++k) {
          const Point& b = P[tri[(k + 1) % 3]];
          const Point& c = P[tri[(k + 2) % 3]];
          grad[k] = {(b.y - c.y) / (2 * area), (c.x - b.x) / (2 * area)};
        }
        const CellMoments& m = ex.cells[cell];
        std::array<double, 6> acc{};
        for (int c = 0; c < 4; ++c) {
          double a[3];
          for (int k = 0; k < 3; ++k)
            a[k] = c < 2 ? u[2 * tri[k] + c] : c == 2 ? p[tri[k]] : th[tri[k]];
          const double* mm = &m[c * kMoments];
          const double sum = a[0] + a[1] + a[2];
          const double vh2 = area / 12.0 * (a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + sum * sum);
          const double l2 = vh2 - 2.0 * (a[0] * mm[0] + a[1] * mm[1] + a[2] * mm[2]) + mm[3];
          double gx = 0, gy = 0;
          for (int k = 0; k < 3; ++k) {
            gx += a[k] * grad[k][0];
            gy += a[k] * grad[k][1];
          }
          const double semi = area * (gx * gx + gy * gy) - 2.0 * (gx * mm[4] + gy * mm[5]) + mm[6];
          const int f = c < 2 ? 0 : c - 1;
          acc[2 * f] += l2;
          acc[2 * f + 1] += semi;
        }
        return acc;
      },
      Exec::parallel);
  for (int f = 0; f < 3; ++f) {
    const double l2 = std::max(0.0, sums[2 * f]);
    out.l2[f] = std::sqrt(l2);
    out.h1[f] = std::sqrt(l2 + std::max(0.0, sums[2 * f + 1]));
  }
  return out;
}

using LevelSource = std::function<State(size_t)>;

// Max over n = 1..levels-1 of the error of every source, absolute or
// relative to the reference solution's norm at that level.
std::vector<FieldNorms> max_errors(const std::vector<LevelSource>& sources, size_t levels,
                                   double dt, const ManufacturedCase& mc, const HfSystem& sys,
                                   ErrorReference ref, bool relative) {
  std::vector<FieldNorms> out(sources.size());
  for (size_t n = 1; n < levels; ++n) {
    const ExactSample ex = sample_exact(mc, sys, n * dt, ref);
    FieldNorms scale;
    if (relative) scale = sampled_error(State::zero(*sys.spaces, n * dt), ex, sys);
    for (size_t k = 0; k < sources.size(); ++k) {
      const FieldNorms e = sampled_error(sources[k](n), ex, sys);
      for (int f = 0; f < 3; ++f) {
        const double l2 = relative ? (scale.l2[f] > 0 ? e.l2[f] / scale.l2[f] : 0.0) : e.l2[f];
        const double h1 = relative ? (scale.h1[f] > 0 ? e.h1[f] / scale.h1[f] : 0.0) : e.h1[f];
        out[k].l2[f] = std::max(out[k].l2[f], l2);
        out[k].h1[f] = std::max(out[k].h1[f], h1);
      }
    }
  }
  return out;
}

LevelSource source_of(const Trajectory& t) {
  return [&t](size_t n) { return t.states[n]; };
}

FieldNorms trajectory_errors(const Trajectory& traj, const ManufacturedCase& mc,
                             const HfSystem& sys, ErrorReference ref, bool relative) {
  for (size_t n = 1; n < traj.states.size(); ++n)
    if (std::abs(traj.states[n].t - n * traj.dt) > 1e-9 * std::max(1.0, traj.T))
      throw std::invalid_argument("error norms: trajectory times are not n * dt");
  return max_errors({source_of(traj)}, traj.states.size(), traj.dt, mc, sys, ref, relative)[0];
}

}  // namespace

FieldNorms state_error(const State& s, const ManufacturedCase& mc, const HfSystem& sys,
                       ErrorReference ref) {
  return sampled_error(s, sample_exact(mc, sys, s.t, ref), sys);
}

FieldNorms exact_norms(const ManufacturedCase& mc, const HfSystem& sys, double t) {
  State zero = State::zero(*sys.spaces, t);
  return state_error(zero, mc, sys, ErrorReference::exact_quadrature);
}

FieldNorms error_norms(const Trajectory& traj, const ManufacturedCase& mc, const HfSystem& sys,
                       ErrorReference ref) {
  return trajectory_errors(traj, mc, sys, ref, false);
}

FieldNorms relative_error_norms(const Trajectory& traj, const ManufacturedCase& mc,
                                const HfSystem& sys, ErrorReference ref) {
  return trajectory_errors(traj, mc, sys, ref, true);
}

RelativeErrors relative_errors(const Trajectory& approx, const Trajectory& reference,
                               const HfSystem& sys) {
  if (approx.states.size() != reference.states.size())
    throw std::invalid_argument("relative_errors: trajectories have different lengths");
  RelativeErrors out;
  auto ratio = [](double d, double x) {
    if (d == 0.0) return 0.0;
    return x > 0.0 ? d / x : std::numeric_limits<double>::infinity();
  };
  for (size_t n = 1; n < approx.states.size(); ++n) {
    for (Field f : kFields) {
      const Vector d = approx.states[n].field(f) - reference.states[n].field(f);
      const Vector& y = reference.states[n].field(f);
      const double l2 = ratio(quad_norm(d, sys.at(mass_form(f))), quad_norm(y, sys.at(mass_form(f))));
      const double h1 = ratio(quad_norm(d, sys.at(gram_form(f))), quad_norm(y, sys.at(gram_form(f))));
      out.max_over_time.l2[idx(f)] = std::max(out.max_over_time.l2[idx(f)], l2);
      out.max_over_time.h1[idx(f)] = std::max(out.max_over_time.h1[idx(f)], h1);
      if (n + 1 == approx.states.size()) {
        out.final_time.l2[idx(f)] = l2;
        out.final_time.h1[idx(f)] = h1;
      }
    }
  }
  return out;
}

bool ParamBox::contains(const std::array<double, 2>& w, double tol) const {
  return w[0] >= w1_min - tol && w[0] <= w1_max + tol && w[1] >= w2_min - tol &&
         w[1] <= w2_max + tol;
}

std::vector<std::array<double, 2>> uniform_grid(const ParamBox& box, int g) {
  if (g < 1) throw std::invalid_argument("uniform_grid: g must be >= 1");
  std::vector<std::array<double, 2>> pts;
  auto coord = [g](double lo, double hi, int i) {
    return g == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (g - 1);
  };
  for (int j = 0; j < g; ++j)
    for (int i = 0; i < g; ++i)
      pts.push_back({coord(box.w1_min, box.w1_max, i), coord(box.w2_min, box.w2_max, j)});
  return pts;
}

ExperimentConfig ExperimentConfig::defaults(std::string_view id) {
  ExperimentConfig c;
  c.id = std::string(id);
  if (id == "1a") {
    c.n = 4;
    c.cycles = 3;
    c.dt_train = c.dt_online = 0.0025;
    c.T_train = c.T_online = 1.0;
    c.r_list = {1, 2, 3, 4, 5};
  } else if (id == "1b") {
    c.n = 16;
    c.dt_train = c.dt_online = 0.001;
    c.T_train = c.T_online = 1.0;
    c.r_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  } else if (id == "1c") {
    c.n = 16;
    c.dt_train = c.dt_online = 0.001;
    c.T_train = 0.1;
    c.T_online = 1.0;
    c.r_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  } else if (id == "1d") {
    c.n = 16;
    c.dt_train = 0.001;
    c.dt_online = 0.01;
    c.T_train = c.T_online = 1.0;
    c.r_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  } else if (id == "2") {
    c.n = 20;
    c.dt_train = c.dt_online = 0.1;
    c.T_train = c.T_online = 2.0;
    c.eps = 1e-3;
    c.train_grid = 3;
    c.test_grid = 7;
    c.r_list = {5, 10, 20, 40};
  } else if (id == "custom") {
    c.n = 8;
    c.dt_train = c.dt_online = 0.01;
    c.T_train = c.T_online = 0.1;
    c.r_list = {1, 2, 3};
    c.params = ManufacturedCase::standard().params();
    c.K = c.D = 1e-5;
  } else {
    throw std::invalid_argument("unknown experiment '" + std::string(id) +
                                "' (expected 1a, 1b, 1c, 1d, 2 or custom)");
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (n < 1) fail("mesh.n", "must be >= 1");
  if (cycles < 1) fail("cycles", "must be >= 1");
  if (!(dt_train > 0)) fail("time.dt_train", "must be positive");
  if (!(dt_online > 0)) fail("time.dt_online", "must be positive");
  try {
    num_time_steps(dt_train, T_train);
  } catch (const std::invalid_argument& e) {
    fail("time.T_train", e.what());
  }
  try {
    num_time_steps(dt_online, T_online);
  } catch (const std::invalid_argument& e) {
    fail("time.T_online", e.what());
  }
  if (!(eps > 0)) fail("solver.eps", "must be positive");
  if (max_iter < 1) fail("solver.max_iter", "must be >= 1");
  if (r_list.empty()) fail("rom.r", "must list at least one size");
  for (int r : r_list)
    if (r < 1) fail("rom.r", "sizes must be >= 1");
  if (eig_floor < 0) fail("rom.eig_floor", "must be >= 0");
  if (train_grid < 1) fail("example2.train_grid", "must be >= 1");
  if (test_grid < 1) fail("example2.test_grid", "must be >= 1");
}

std::string rom_label(RomScheme s, int r) {
  return std::string(scheme_name(s)) + "-r" + std::to_string(r);
}

double ExperimentResult::error(std::string_view scheme, Field f, std::string_view norm,
                               int key) const {
  for (const auto& e : errors)
    if (e.scheme == scheme && e.field == f && e.norm == norm && e.cycle_or_r == key) return e.value;
  throw std::out_of_range("no error row for " + std::string(scheme) + "/" +
                          std::string(field_name(f)) + "/" + std::string(norm) + "/" +
                          std::to_string(key));
}

double ExperimentResult::rate(std::string_view scheme, Field f, std::string_view norm,
                              int cycle) const {
  for (const auto& r : rates)
    if (r.scheme == scheme && r.field == f && r.norm == norm && r.cycle == cycle) return r.rate;
  throw std::out_of_range("no rate row for " + std::string(scheme));
}

const SolverReport& ExperimentResult::report(const std::string& key) const {
  auto it = reports.find(key);
  if (it == reports.end()) throw std::out_of_range("no solver report '" + key + "'");
  return it->second;
}

void ExperimentResult::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    io::CsvWriter csv(dir / "errors.csv",
                      {"experiment", "scheme", "field", "norm", "cycle_or_r", "value"});
    for (const auto& e : errors)
      csv.row(experiment, e.scheme, field_name(e.field), e.norm, e.cycle_or_r, e.value);
  }
  {
    io::CsvWriter csv(dir / "rates.csv", {"experiment", "scheme", "field", "norm", "cycle", "rate"});
    for (const auto& r : rates)
      csv.row(experiment, r.scheme, field_name(r.field), r.norm, r.cycle, r.rate);
  }
  {
    io::CsvWriter csv(dir / "iterations.csv",
                      {"experiment", "scheme", "r", "time_index", "iterations"});
    for (const auto& r : iterations) csv.row(experiment, r.scheme, r.r, r.time_index, r.iterations);
  }
  {
    io::CsvWriter csv(dir / "timings.csv", {"experiment", "scheme", "phase", "seconds"});
    for (const auto& t : timings) csv.row(experiment, t.scheme, t.phase, t.seconds);
  }
  {
    io::CsvWriter csv(dir / "eigenvalues.csv", {"field", "k", "nu_normalized"});
    // The mandated schema has no scheme column: it holds the FS-HF-trained
    // spectrum when present, else the first one recorded.
    std::string origin;
    for (const auto& e : eigenvalues)
      if (e.scheme == "FS-HF") origin = "FS-HF";
    if (origin.empty() && !eigenvalues.empty()) origin = eigenvalues.front().scheme;
    for (const auto& e : eigenvalues)
      if (e.scheme == origin) csv.row(field_name(e.field), e.k, e.nu_normalized);
  }
  {
    io::CsvWriter csv(dir / "eigenvalues_by_scheme.csv", {"scheme", "field", "k", "nu_normalized"});
    for (const auto& e : eigenvalues) csv.row(e.scheme, field_name(e.field), e.k, e.nu_normalized);
  }
  {
    io::CsvWriter csv(dir / "condition_numbers.csv",
                      {"experiment", "scheme", "r", "eig_floor", "matrix", "condition_number"});
    for (const auto& c : conditions)
      csv.row(experiment, c.scheme, c.r, c.eig_floor, c.matrix, c.value);
  }
  if (!param_errors.empty()) {
    io::CsvWriter csv(dir / "example2_errors.csv",
                      {"case", "scheme", "r", "omega1", "omega2", "max_rel_h1_u", "max_rel_h1_p",
                       "max_rel_h1_theta", "final_rel_h1_u", "final_rel_h1_p",
                       "final_rel_h1_theta", "hf_iterations", "rom_iterations"});
    for (const auto& p : param_errors)
      csv.row(p.test_case, p.scheme, p.r, p.omega[0], p.omega[1], p.max_rel_h1[0],
              p.max_rel_h1[1], p.max_rel_h1[2], p.final_rel_h1[0], p.final_rel_h1[1],
              p.final_rel_h1[2], p.hf_iterations, p.rom_iterations);
    io::CsvWriter sp(dir / "example2_speedup.csv",
                     {"case", "scheme", "r", "omega1", "omega2", "hf_seconds", "rom_seconds"});
    for (const auto& p : param_errors)
      sp.row(p.test_case, p.scheme, p.r, p.omega[0], p.omega[1], p.hf_seconds, p.rom_seconds);
  }
  std::ofstream status(dir / "status.txt", std::ios::trunc);
  status << (complete ? "complete" : "partial") << '\n';
  if (!status_message.empty()) status << status_message << '\n';
}

ContractionTrace measure_contraction(const HfSystem& sys, const Forcing& forcing,
                                     const State& initial, double T,
                                     const StoppingCriterion& stop) {
  const int N = num_time_steps(sys.dt, T);
  MonolithicStepper mono(sys);
  FixedStressStepper fs(sys);
  const SparseMatrix& mp = sys.at(FormId::MASS_P);
  const SparseMatrix& mt = sys.at(FormId::MASS_T);
  ContractionTrace out;
  State prev = initial;
  for (int n = 0; n < N; ++n) {
    const double t = (n + 1) * sys.dt;
    const LoadVectors loads = assemble_loads(forcing, t, *sys.spaces);
    const State ref = mono.step(prev, loads, t);
    std::vector<double> trace;
    auto norm = [&](const State& s) {
      return std::sqrt(contraction_norm_sq(sys.params, mp, mt, s.p - ref.p, s.theta - ref.theta));
    };
    trace.push_back(norm(prev));
    fs.time_step(prev, loads, t, stop, [&](int, const State& it) { trace.push_back(norm(it)); });
    out.per_step.push_back(std::move(trace));
    prev = ref;
  }
  return out;
}

PhysicalParams example2_params(const std::array<double, 2>& omega) {
  PhysicalParams p;
  p.lambda = p.mu = std::pow(10.0, omega[1]);
  p.alpha = 1.0;
  p.alpha_T = 1e-4;
  p.alpha_m = 1e-6;
  p.c0 = 1e-2;
  p.C_d = 1.0;
  p.theta0 = 1.0;
  p.L = 1.0;
  return p;
}

CoefficientField example2_coefficients(const std::array<double, 2>& omega) {
  CoefficientField c;
  c.set(1, 0.1, 1.0);
  c.set(2, std::pow(10.0, omega[0] - 1.0), std::pow(10.0, omega[0]));
  return c;
}

Forcing example2_forcing() {
  Forcing f;
  auto src = [](double x, double y, double) {
    const double a = std::exp(-1000.0 * ((x - 0.25) * (x - 0.25) + (y - 0.5) * (y - 0.5)));
    const double b = std::exp(-1000.0 * ((x - 0.75) * (x - 0.75) + (y - 0.5) * (y - 0.5)));
    return 1e-2 * (a - b);
  };
  f.g = src;
  f.eta = src;
  return f;
}

std::shared_ptr<const SpaceSet> example2_spaces(int n) {
  auto mesh = std::make_shared<const Mesh>(build_unit_square_mesh(n, BandRegion{0.35, 0.65}));
  return build_spaces(mesh, BcSpec::clamped_insulated());
}

AffineOperatorFamily build_example2_family(const ReducedBasis& basis,
                                           std::shared_ptr<const SpaceSet> spaces, Exec exec) {
  // Reference material: lambda = mu = 1 and unit K, D per subdomain. Every
  // parametric form is then a scalar function of omega times a fixed form.
  const PhysicalParams base = example2_params({0.0, 0.0});
  const CoefficientField unit = CoefficientField::uniform(1.0, 1.0);
  const HfSystem ref = HfSystem::assemble(spaces, base, unit, 1.0, exec);
  AffineOperatorFamily fam;
  fam.fixed = project_operators(basis, ref, exec);

  auto project = [&](FormId id, std::optional<int> label) {
    const auto [test, trial] = form_fields(id);
    const SparseMatrix a = assemble_form(id, base, unit, *spaces, 1.0, {label, exec});
    return kernels::congruence(basis.field(test).modes, a, basis.field(trial).modes, exec);
  };
  using Omega = AffineOperatorFamily::Omega;
  auto scale_w2 = [](const Omega& w) { return std::pow(10.0, w[1]); };
  for (FormId id : {FormId::AUU, FormId::AUT, FormId::MTU, FormId::STT})
    fam.terms[id] = {{scale_w2, fam.fixed.at(id)}};
  fam.terms[FormId::SPP] = {{[](const Omega& w) { return std::pow(10.0, -w[1]); },
                             fam.fixed.at(FormId::SPP)}};
  const DenseMatrix app1 = project(FormId::APP, 1);
  const DenseMatrix app2 = project(FormId::APP, 2);
  const DenseMatrix att1 = project(FormId::ATT, 1);
  const DenseMatrix att2 = project(FormId::ATT, 2);
  fam.terms[FormId::APP] = {{[](const Omega&) { return 0.1; }, app1},
                            {[](const Omega& w) { return std::pow(10.0, w[0] - 1.0); }, app2}};
  fam.terms[FormId::ATT] = {{[](const Omega&) { return 1.0; }, att1},
                            {[](const Omega& w) { return std::pow(10.0, w[0]); }, att2}};
  return fam;
}

ProjectedForms example2_direct_projection(const ReducedBasis& basis,
                                          std::shared_ptr<const SpaceSet> spaces,
                                          const std::array<double, 2>& omega, Exec exec) {
  const HfSystem sys = HfSystem::assemble(std::move(spaces), example2_params(omega),
                                          example2_coefficients(omega), 1.0, exec);
  return project_operators(basis, sys, exec);
}

namespace {

std::function<void(const StepRecord&)> step_logger(bool verbose, std::string label) {
  if (!verbose) return {};
  return [label = std::move(label)](const StepRecord& r) {
    std::cerr << label << " step " << r.time_index << " iterations " << r.iterations
              << " increment " << std::max({r.increments[0], r.increments[1], r.increments[2]})
              << (r.converged ? "" : " (not converged)") << '\n';
  };
}

// Offline stage shared by the ROM drivers.
struct TrainedRom {
  ReducedBasis basis;
  ProjectedForms forms;
  RomLoads loads;
  double pod_seconds = 0.0;
  double projection_seconds = 0.0;
};

TrainedRom train_rom(const std::vector<const Trajectory*>& trajectories, const HfSystem& sys,
                     int r_max, double eig_floor, const Forcing& forcing, double dt_online,
                     int n_online, Exec exec) {
  TrainedRom t;
  auto t0 = Clock::now();
  t.basis = build_reduced_basis(trajectories, sys, {{r_max, r_max, r_max}, eig_floor, exec});
  t.pod_seconds = seconds_since(t0);
  t0 = Clock::now();
  t.forms = project_operators(t.basis, sys, exec);
  t.loads = project_loads(t.basis, forcing, *sys.spaces, dt_online, n_online, exec);
  t.projection_seconds = seconds_since(t0);
  return t;
}

std::array<int, 3> dims_for(const TrainedRom& t, int r) {
  const auto d = t.basis.dims();
  return {std::min(r, d[0]), std::min(r, d[1]), std::min(r, d[2])};
}

struct RomEvaluation {
  Trajectory reduced;
  ReducedBasis basis;
  SolverReport report;
  RomConditionNumbers cond;

  Trajectory lifted() const { return lift(reduced, basis); }
  LevelSource source() const {
    return [this](size_t n) { return lift(reduced.states[n], basis); };
  }
};

RomEvaluation evaluate_rom(const TrainedRom& t, int r, RomScheme scheme, const HfSystem& sys,
                           const std::optional<State>& hf_initial, double dt_online,
                           const StoppingCriterion& stop, bool verbose) {
  const auto dims = dims_for(t, r);
  const ReducedBasis basis = {t.basis.u.truncated(dims[0]), t.basis.p.truncated(dims[1]),
                              t.basis.theta.truncated(dims[2])};
  const RomOperators ops =
      instantiate(truncate(t.forms, dims), dt_online, truncate(t.loads, dims));
  RomRunConfig cfg;
  cfg.scheme = scheme;
  cfg.stop = stop;
  if (hf_initial) cfg.initial = project_initial_condition(basis, sys, *hf_initial);
  cfg.on_step = step_logger(verbose, rom_label(scheme, r));
  RomEvaluation ev;
  RomRunResult run = run_rom(ops, cfg);
  ev.reduced = std::move(run.trajectory);
  ev.basis = basis;
  ev.report = std::move(run.report);
  if (scheme == RomScheme::fixed_stress) ev.cond = FsRomStepper(ops).condition_numbers();
  return ev;
}

void add_errors(ExperimentResult& res, const std::string& scheme, const FieldNorms& e,
                const std::string& suffix, int key) {
  for (Field f : kFields) {
    res.errors.push_back({scheme, f, "L2" + suffix, key, e.l2[idx(f)]});
    res.errors.push_back({scheme, f, "H1" + suffix, key, e.h1[idx(f)]});
  }
}

void add_iterations(ExperimentResult& res, const std::string& scheme, int r,
                    const SolverReport& rep) {
  for (const auto& s : rep.steps) res.iterations.push_back({scheme, r, s.time_index, s.iterations});
}

void add_spectrum(ExperimentResult& res, const std::string& origin, const ReducedBasis& b) {
  for (Field f : kFields) {
    const auto spec = pod_spectrum_report(b.field(f));
    for (size_t k = 0; k < spec.size(); ++k)
      res.eigenvalues.push_back({origin, f, static_cast<int>(k), spec[k]});
  }
}

void add_conditions(ExperimentResult& res, const std::string& scheme, int r, double floor,
                    const RomConditionNumbers& c) {
  res.conditions.push_back({scheme, r, floor, "flow", c.flow});
  res.conditions.push_back({scheme, r, floor, "heat", c.heat});
  res.conditions.push_back({scheme, r, floor, "mech", c.mech});
}

void add_run_timings(ExperimentResult& res, const std::string& scheme, const SolverReport& rep) {
  res.timings.push_back({scheme, "setup", rep.setup_seconds});
  res.timings.push_back({scheme, "solve_total", rep.solve_seconds});
  res.timings.push_back({scheme, "step_mean", rep.mean_step_seconds()});
}

bool all_zero(const Trajectory& t) {
  for (const State& s : t.states)
    if (s.u.squaredNorm() + s.p.squaredNorm() + s.theta.squaredNorm() > 0.0) return false;
  return true;
}

struct Example1Setup {
  ManufacturedCase mc;
  std::shared_ptr<const SpaceSet> spaces;
  Forcing forcing;
  bool exact_available = true;
};

Example1Setup example1_setup(const ExperimentConfig& cfg, int n) {
  Example1Setup s{ManufacturedCase::standard(), nullptr, {}, true};
  BcSpec bc = BcSpec::all_dirichlet();
  if (cfg.id == "custom") {
    s.mc = ManufacturedCase(cfg.params, cfg.K, cfg.D);
    bc = cfg.bc;
    s.exact_available = !cfg.zero_forcing;
  } else {
    PhysicalParams p = s.mc.params();
    p.L = cfg.L;
    s.mc = ManufacturedCase(p, s.mc.K(), s.mc.D());
  }
  s.spaces = build_spaces(std::make_shared<const Mesh>(build_unit_square_mesh(n)), bc);
  if (s.exact_available) s.forcing = s.mc.forcing_functions();
  return s;
}

HfRunConfig hf_config(const ExperimentConfig& cfg, HfScheme scheme, const Example1Setup& s,
                      double T, const std::string& label) {
  HfRunConfig h;
  h.scheme = scheme;
  h.T = T;
  h.stop = {cfg.eps, cfg.max_iter, IncrementNorm::h1};
  h.forcing = s.forcing;
  h.exec = cfg.exec;
  if (s.exact_available) {
    const Forcing ex = s.mc.exact_functions();
    h.initial = [ex](const SpaceSet& sp) {
      return State{interpolate(ex.f, 0.0, sp), interpolate(Field::p, ex.g, 0.0, sp),
                   interpolate(Field::theta, ex.eta, 0.0, sp), 0.0};
    };
  }
  h.on_step = step_logger(cfg.verbose, label);
  return h;
}

// The reduced initial state is the L2 projection of the HF initial state
// (the vertex interpolant of the exact data).
std::optional<State> rom_initial_data(const Example1Setup& s) {
  if (!s.exact_available) return std::nullopt;
  const Forcing ex = s.mc.exact_functions();
  return State{interpolate(ex.f, 0.0, *s.spaces), interpolate(Field::p, ex.g, 0.0, *s.spaces),
               interpolate(Field::theta, ex.eta, 0.0, *s.spaces), 0.0};
}

ExperimentResult run_time_study(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = cfg.id;
  const Example1Setup s = example1_setup(cfg, cfg.n);
  const auto t_asm = Clock::now();
  const HfSystem sys =
      HfSystem::assemble(s.spaces, s.mc.params(), s.mc.coefficients(), cfg.dt_train, cfg.exec);
  res.timings.push_back({"HF", "assembly", seconds_since(t_asm)});
  const StoppingCriterion rom_stop{cfg.eps, cfg.max_iter, IncrementNorm::euclidean};
  const int n_online = num_time_steps(cfg.dt_online, cfg.T_online);
  const int r_max = *std::max_element(cfg.r_list.begin(), cfg.r_list.end());

  // HF reference over the online horizon (needed for ROM-vs-HF errors).
  std::map<HfScheme, HfRunResult> train, reference;
  for (HfScheme hs : {HfScheme::monolithic, HfScheme::fixed_stress}) {
    const std::string name(scheme_name(hs));
    train[hs] = run_hf(sys, hf_config(cfg, hs, s, cfg.T_train, name));
    res.reports[name] = train[hs].report;
    add_run_timings(res, name, train[hs].report);
    if (hs == HfScheme::fixed_stress) add_iterations(res, name, 0, train[hs].report);
    if (s.exact_available) {
      add_errors(res, name, relative_error_norms(train[hs].trajectory, s.mc, sys,
                                                 cfg.error_reference),
                 "_rel_exact", 0);
    }
  }

  const bool same_grid = cfg.dt_online == cfg.dt_train && cfg.T_online == cfg.T_train;
  std::unique_ptr<HfSystem> online_sys;
  if (!same_grid) {
    online_sys = std::make_unique<HfSystem>(HfSystem::assemble(
        s.spaces, s.mc.params(), s.mc.coefficients(), cfg.dt_online, cfg.exec));
    for (HfScheme hs : {HfScheme::monolithic, HfScheme::fixed_stress}) {
      const std::string name = std::string(scheme_name(hs)) + "-online";
      reference[hs] = run_hf(*online_sys, hf_config(cfg, hs, s, cfg.T_online, name));
      res.reports[name] = reference[hs].report;
      if (s.exact_available)
        add_errors(res, name, relative_error_norms(reference[hs].trajectory, s.mc, *online_sys,
                                                   cfg.error_reference),
                   "_rel_exact", 0);
    }
  }
  const HfSystem& ref_sys = same_grid ? sys : *online_sys;
  auto ref_traj = [&](HfScheme hs) -> const Trajectory& {
    return same_grid ? train.at(hs).trajectory : reference.at(hs).trajectory;
  };

  if (all_zero(train[HfScheme::monolithic].trajectory) &&
      all_zero(train[HfScheme::fixed_stress].trajectory)) {
    res.status_message = "ROM stage skipped: all snapshots are zero";
    return res;
  }

  const std::optional<State> init = rom_initial_data(s);
  for (HfScheme hs : {HfScheme::monolithic, HfScheme::fixed_stress}) {
    const RomScheme rs = hs == HfScheme::monolithic ? RomScheme::monolithic : RomScheme::fixed_stress;
    const std::string hf_name(scheme_name(hs));
    const std::string rom_name(scheme_name(rs));
    const TrainedRom t = train_rom({&train[hs].trajectory}, sys, r_max, cfg.eig_floor, s.forcing,
                                   cfg.dt_online, n_online, cfg.exec);
    add_spectrum(res, hf_name, t.basis);
    res.timings.push_back({rom_name, "offline_pod", t.pod_seconds});
    res.timings.push_back({rom_name, "offline_projection", t.projection_seconds});

    // With the floor disabled (1c), the trailing modes show the conditioning
    // breakdown; only the condition numbers are recorded for that basis.
    std::optional<TrainedRom> unfloored;
    if (cfg.id == "1c" && rs == RomScheme::fixed_stress && cfg.eig_floor > 0.0)
      unfloored = train_rom({&train[hs].trajectory}, sys, r_max, 0.0, s.forcing, cfg.dt_online,
                            n_online, cfg.exec);

    std::list<RomEvaluation> evals;
    for (int r : cfg.r_list) {
      evals.push_back(evaluate_rom(t, r, rs, sys, init, cfg.dt_online, rom_stop, cfg.verbose));
      const RomEvaluation& ev = evals.back();
      const std::string label = rom_label(rs, r);
      res.reports[label] = ev.report;
      add_run_timings(res, label, ev.report);
      add_errors(res, rom_name, relative_errors(ev.lifted(), ref_traj(hs), ref_sys).max_over_time,
                 "_rel_hf", r);
      if (rs == RomScheme::fixed_stress) {
        add_iterations(res, rom_name, r, ev.report);
        add_conditions(res, rom_name, r, cfg.eig_floor, ev.cond);
      }
      if (unfloored) {
        const auto dims = dims_for(*unfloored, r);
        const RomOperators ops = instantiate(truncate(unfloored->forms, dims), cfg.dt_online,
                                             truncate(unfloored->loads, dims));
        add_conditions(res, rom_name, r, 0.0, fs_rom_condition_numbers(ops));
      }
    }
    if (s.exact_available) {
      std::vector<LevelSource> sources;
      for (const auto& ev : evals) sources.push_back(ev.source());
      const auto errs = max_errors(sources, static_cast<size_t>(n_online) + 1, cfg.dt_online,
                                   s.mc, ref_sys, cfg.error_reference, true);
      for (size_t k = 0; k < errs.size(); ++k)
        add_errors(res, rom_name, errs[k], "_rel_exact", cfg.r_list[k]);
    }
  }
  return res;
}

ExperimentResult run_example2(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = "2";
  const auto spaces = example2_spaces(cfg.n);
  const Forcing forcing = example2_forcing();
  const StoppingCriterion hf_stop{cfg.eps, cfg.max_iter, IncrementNorm::h1};
  const StoppingCriterion rom_stop{cfg.eps, cfg.max_iter, IncrementNorm::euclidean};
  const int N = num_time_steps(cfg.dt_train, cfg.T_train);
  const int r_max = *std::max_element(cfg.r_list.begin(), cfg.r_list.end());

  struct HfPair {
    HfRunResult mono, fs;
  };
  auto run_pair = [&](const std::array<double, 2>& w) {
    const HfSystem sys = HfSystem::assemble(spaces, example2_params(w), example2_coefficients(w),
                                            cfg.dt_train, cfg.exec);
    HfRunConfig hc;
    hc.T = cfg.T_train;
    hc.stop = hf_stop;
    hc.forcing = forcing;
    hc.exec = cfg.exec;
    HfPair out;
    hc.scheme = HfScheme::monolithic;
    out.mono = run_hf(sys, hc);
    hc.scheme = HfScheme::fixed_stress;
    out.fs = run_hf(sys, hc);
    return out;
  };

  const auto train_pts = uniform_grid(cfg.train_box, cfg.train_grid);
  std::vector<HfPair> training;
  const auto t_train = Clock::now();
  for (const auto& w : train_pts) {
    training.push_back(run_pair(w));
    if (cfg.verbose)
      std::cerr << "training point (" << w[0] << ", " << w[1] << "): FS-HF max iterations "
                << training.back().fs.report.max_iterations() << '\n';
  }
  res.timings.push_back({"HF", "training_runs", seconds_since(t_train)});
  for (size_t k = 0; k < train_pts.size(); ++k)
    res.reports["FS-HF@train" + std::to_string(k)] = training[k].fs.report;

  // Gram and mass matrices do not depend on omega.
  const HfSystem ref = HfSystem::assemble(spaces, example2_params({0, 0}),
                                          example2_coefficients({0, 0}), cfg.dt_train, cfg.exec);

  struct Trained {
    ReducedBasis basis;
    AffineOperatorFamily family;
    RomLoads loads;
  };
  std::map<RomScheme, Trained> roms;
  for (RomScheme rs : {RomScheme::monolithic, RomScheme::fixed_stress}) {
    std::vector<const Trajectory*> snaps;
    for (const auto& tp : training)
      snaps.push_back(rs == RomScheme::monolithic ? &tp.mono.trajectory : &tp.fs.trajectory);
    const auto t0 = Clock::now();
    Trained t;
    t.basis = build_reduced_basis(snaps, ref, {{r_max, r_max, r_max}, cfg.eig_floor, cfg.exec});
    const double pod_s = seconds_since(t0);
    const auto t1 = Clock::now();
    t.family = build_example2_family(t.basis, spaces, cfg.exec);
    t.loads = project_loads(t.basis, forcing, *spaces, cfg.dt_online, N, cfg.exec);
    res.timings.push_back({std::string(scheme_name(rs)), "offline_pod", pod_s});
    res.timings.push_back({std::string(scheme_name(rs)), "offline_projection", seconds_since(t1)});
    add_spectrum(res, rs == RomScheme::monolithic ? "M-HF" : "FS-HF", t.basis);
    roms[rs] = std::move(t);
  }

  // Test sets.
  std::vector<std::pair<std::string, std::array<double, 2>>> tests;
  for (const auto& w : train_pts) tests.push_back({"i", w});
  auto is_train_point = [&](const std::array<double, 2>& w) {
    for (const auto& t : train_pts)
      if (std::abs(t[0] - w[0]) < 1e-9 && std::abs(t[1] - w[1]) < 1e-9) return true;
    return false;
  };
  for (const auto& w : uniform_grid(cfg.train_box, cfg.test_grid))
    if (!is_train_point(w)) tests.push_back({"ii", w});
  for (const auto& w : uniform_grid(cfg.test_box, cfg.test_grid))
    if (!cfg.train_box.contains(w, 1e-9)) tests.push_back({"iii", w});

  std::map<std::tuple<std::string, std::string, int>, std::array<double, 3>> sums;
  std::map<std::tuple<std::string, std::string, int>, int> counts;
  for (size_t k = 0; k < tests.size(); ++k) {
    const auto& [tc, w] = tests[k];
    HfPair hf = k < train_pts.size() ? training[k] : run_pair(w);
    for (RomScheme rs : {RomScheme::monolithic, RomScheme::fixed_stress}) {
      const Trained& t = roms.at(rs);
      const HfRunResult& hfr = rs == RomScheme::monolithic ? hf.mono : hf.fs;
      const ProjectedForms full = instantiate_affine(t.family, w);
      for (int r : cfg.r_list) {
        const auto d = t.basis.dims();
        const std::array<int, 3> dims = {std::min(r, d[0]), std::min(r, d[1]), std::min(r, d[2])};
        const ReducedBasis basis = {t.basis.u.truncated(dims[0]), t.basis.p.truncated(dims[1]),
                                    t.basis.theta.truncated(dims[2])};
        const RomOperators ops =
            instantiate(truncate(full, dims), cfg.dt_online, truncate(t.loads, dims));
        RomRunConfig rc;
        rc.scheme = rs;
        rc.stop = rom_stop;
        const RomRunResult rr = run_rom(ops, rc);
        const RelativeErrors re = relative_errors(lift(rr.trajectory, basis), hfr.trajectory, ref);
        ParamErrorRow row;
        row.test_case = tc;
        row.scheme = std::string(scheme_name(rs));
        row.r = r;
        row.omega = w;
        row.max_rel_h1 = re.max_over_time.h1;
        row.final_rel_h1 = re.final_time.h1;
        int hf_it = 0, rom_it = 0;
        for (const auto& st : hfr.report.steps) hf_it += st.iterations;
        for (const auto& st : rr.report.steps) rom_it += st.iterations;
        row.hf_iterations = hf_it;
        row.rom_iterations = rom_it;
        row.hf_seconds = hfr.report.solve_seconds;
        row.rom_seconds = rr.report.solve_seconds;
        res.param_errors.push_back(row);
        auto& acc = sums[{tc, row.scheme, r}];
        for (int f = 0; f < 3; ++f) acc[f] += row.max_rel_h1[f];
        counts[{tc, row.scheme, r}] += 1;
        if (rs == RomScheme::fixed_stress && tc == "i" && k == 0)
          add_conditions(res, row.scheme, r, cfg.eig_floor, FsRomStepper(ops).condition_numbers());
      }
    }
  }
  for (const auto& [key, acc] : sums) {
    const auto& [tc, scheme, r] = key;
    const double c = counts[key];
    for (Field f : kFields)
      res.errors.push_back({scheme, f, "H1_rel_hf_mean_case_" + tc, r, acc[idx(f)] / c});
  }
  return res;
}

}  // namespace

ExperimentResult run_convergence_study(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.experiment = cfg.id;
  const StoppingCriterion rom_stop{cfg.eps, cfg.max_iter, IncrementNorm::euclidean};
  const int r_max = *std::max_element(cfg.r_list.begin(), cfg.r_list.end());
  std::map<std::string, std::vector<FieldNorms>> per_scheme;

  for (int c = 0; c < cfg.cycles; ++c) {
    const int n = cfg.n << c;
    const double dt = cfg.dt_train / std::pow(4.0, c);
    const std::string cyc = "cycle" + std::to_string(c) + ":";
    const Example1Setup s = example1_setup(cfg, n);
    const auto t_asm = Clock::now();
    const HfSystem sys =
        HfSystem::assemble(s.spaces, s.mc.params(), s.mc.coefficients(), dt, cfg.exec);
    res.timings.push_back({cyc + "HF", "assembly", seconds_since(t_asm)});
    const int N = num_time_steps(dt, cfg.T_train);
    const std::optional<State> init = rom_initial_data(s);

    // Errors are evaluated after all runs of the cycle so that the exact
    // solution is sampled once per time level.
    std::vector<std::string> labels;
    std::vector<LevelSource> sources;
    std::vector<HfRunResult> hf_runs;
    std::list<RomEvaluation> rom_runs;
    hf_runs.reserve(2);
    for (HfScheme hs : {HfScheme::monolithic, HfScheme::fixed_stress}) {
      const std::string name(scheme_name(hs));
      hf_runs.push_back(run_hf(sys, hf_config(cfg, hs, s, cfg.T_train, cyc + name)));
      const HfRunResult& hf = hf_runs.back();
      res.reports[cyc + name] = hf.report;
      add_run_timings(res, cyc + name, hf.report);
      if (hs == HfScheme::fixed_stress) add_iterations(res, cyc + name, 0, hf.report);
      labels.push_back(name);
      sources.push_back(source_of(hf.trajectory));

      const RomScheme rs =
          hs == HfScheme::monolithic ? RomScheme::monolithic : RomScheme::fixed_stress;
      const TrainedRom t = train_rom({&hf.trajectory}, sys, r_max, cfg.eig_floor, s.forcing, dt,
                                     N, cfg.exec);
      if (c + 1 == cfg.cycles) add_spectrum(res, name, t.basis);
      res.timings.push_back({cyc + std::string(scheme_name(rs)), "offline_pod", t.pod_seconds});
      res.timings.push_back(
          {cyc + std::string(scheme_name(rs)), "offline_projection", t.projection_seconds});
      for (int r : cfg.r_list) {
        rom_runs.push_back(evaluate_rom(t, r, rs, sys, init, dt, rom_stop, cfg.verbose));
        const RomEvaluation& ev = rom_runs.back();
        const std::string label = rom_label(rs, r);
        res.reports[cyc + label] = ev.report;
        add_run_timings(res, cyc + label, ev.report);
        if (rs == RomScheme::fixed_stress) {
          add_iterations(res, cyc + std::string(scheme_name(rs)), r, ev.report);
          add_conditions(res, cyc + std::string(scheme_name(rs)), r, cfg.eig_floor, ev.cond);
        }
        labels.push_back(label);
        sources.push_back(ev.source());
      }
    }
    const auto t_err = Clock::now();
    const std::vector<FieldNorms> errs =
        max_errors(sources, static_cast<size_t>(N) + 1, dt, s.mc, sys, cfg.error_reference, false);
    res.timings.push_back({cyc + "all", "error_evaluation", seconds_since(t_err)});
    for (size_t k = 0; k < labels.size(); ++k) {
      add_errors(res, labels[k], errs[k], "", c);
      per_scheme[labels[k]].push_back(errs[k]);
    }
  }

  for (const auto& [scheme, errs] : per_scheme) {
    for (size_t c = 1; c < errs.size(); ++c) {
      for (Field f : kFields) {
        const int k = idx(f);
        res.rates.push_back({scheme, f, "L2", static_cast<int>(c),
                             std::log2(errs[c - 1].l2[k] / errs[c].l2[k])});
        res.rates.push_back({scheme, f, "H1", static_cast<int>(c),
                             std::log2(errs[c - 1].h1[k] / errs[c].h1[k])});
      }
    }
  }
  return res;
}

namespace {

std::string artifact(const char* kind, HfScheme s) {
  return std::string(kind) + "_" + std::string(scheme_name(s)) + ".bin";
}

void require_example1_family(const ExperimentConfig& cfg) {
  if (cfg.id == "2")
    throw std::invalid_argument("the pod and rom stages apply to experiments 1a-1d and custom");
}

}  // namespace

ExperimentResult run_pod_stage(const ExperimentConfig& cfg) {
  cfg.validate();
  require_example1_family(cfg);
  ExperimentResult res;
  res.experiment = cfg.id;
  const Example1Setup s = example1_setup(cfg, cfg.n);
  const HfSystem sys =
      HfSystem::assemble(s.spaces, s.mc.params(), s.mc.coefficients(), cfg.dt_train, cfg.exec);
  const int r_max = *std::max_element(cfg.r_list.begin(), cfg.r_list.end());
  std::filesystem::create_directories(cfg.out_dir);
  for (HfScheme hs : {HfScheme::monolithic, HfScheme::fixed_stress}) {
    const std::string name(scheme_name(hs));
    const HfRunResult hf = run_hf(sys, hf_config(cfg, hs, s, cfg.T_train, name));
    res.reports[name] = hf.report;
    add_run_timings(res, name, hf.report);
    if (hs == HfScheme::fixed_stress) add_iterations(res, name, 0, hf.report);
    write_trajectory(hf.trajectory, cfg.out_dir / artifact("traj", hs));
    if (all_zero(hf.trajectory)) {
      res.status_message = "POD skipped: all snapshots are zero";
      continue;
    }
    const auto t0 = Clock::now();
    const ReducedBasis basis = build_reduced_basis({&hf.trajectory}, sys,
                                                   {{r_max, r_max, r_max}, cfg.eig_floor, cfg.exec});
    res.timings.push_back({name, "offline_pod", seconds_since(t0)});
    write_basis(basis, cfg.out_dir / artifact("basis", hs));
    add_spectrum(res, name, basis);
  }
  res.write(cfg.out_dir);
  return res;
}

ExperimentResult run_rom_stage(const ExperimentConfig& cfg) {
  cfg.validate();
  require_example1_family(cfg);
  ExperimentResult res;
  res.experiment = cfg.id;
  const Example1Setup s = example1_setup(cfg, cfg.n);
  const HfSystem sys =
      HfSystem::assemble(s.spaces, s.mc.params(), s.mc.coefficients(), cfg.dt_train, cfg.exec);
  const std::unique_ptr<HfSystem> online =
      cfg.dt_online == cfg.dt_train
          ? nullptr
          : std::make_unique<HfSystem>(HfSystem::assemble(
                s.spaces, s.mc.params(), s.mc.coefficients(), cfg.dt_online, cfg.exec));
  const HfSystem& online_sys = online ? *online : sys;
  const int n_online = num_time_steps(cfg.dt_online, cfg.T_online);
  const bool same_grid = !online && cfg.T_online == cfg.T_train;
  const StoppingCriterion rom_stop{cfg.eps, cfg.max_iter, IncrementNorm::euclidean};
  const std::optional<State> init = rom_initial_data(s);

  for (HfScheme hs : {HfScheme::monolithic, HfScheme::fixed_stress}) {
    const RomScheme rs =
        hs == HfScheme::monolithic ? RomScheme::monolithic : RomScheme::fixed_stress;
    const std::filesystem::path basis_path = cfg.out_dir / artifact("basis", hs);
    if (!std::filesystem::exists(basis_path))
      throw std::runtime_error("missing " + basis_path.string() + " (run the pod stage first)");
    TrainedRom t;
    t.basis = read_basis(basis_path);
    add_spectrum(res, std::string(scheme_name(hs)), t.basis);
    if (t.basis.u.modes.rows() != s.spaces->u().n_free() ||
        t.basis.p.modes.rows() != s.spaces->p().n_free() ||
        t.basis.theta.modes.rows() != s.spaces->theta().n_free())
      throw std::runtime_error(basis_path.string() + " does not match the configured mesh");
    auto t0 = Clock::now();
    t.forms = project_operators(t.basis, sys, cfg.exec);
    t.loads = project_loads(t.basis, s.forcing, *s.spaces, cfg.dt_online, n_online, cfg.exec);
    res.timings.push_back({std::string(scheme_name(rs)), "offline_projection", seconds_since(t0)});
    std::optional<Trajectory> hf;
    if (same_grid) hf = read_trajectory(cfg.out_dir / artifact("traj", hs));

    const int r_max = *std::max_element(cfg.r_list.begin(), cfg.r_list.end());
    for (int r : cfg.r_list) {
      const RomEvaluation ev =
          evaluate_rom(t, r, rs, online_sys, init, cfg.dt_online, rom_stop, cfg.verbose);
      const std::string label = rom_label(rs, r);
      res.reports[label] = ev.report;
      add_run_timings(res, label, ev.report);
      if (s.exact_available)
        add_errors(res, std::string(scheme_name(rs)),
                   relative_error_norms(ev.lifted(), s.mc, online_sys, cfg.error_reference),
                   "_rel_exact", r);
      if (hf)
        add_errors(res, std::string(scheme_name(rs)),
                   relative_errors(ev.lifted(), *hf, sys).max_over_time, "_rel_hf", r);
      if (rs == RomScheme::fixed_stress) {
        add_iterations(res, std::string(scheme_name(rs)), r, ev.report);
        add_conditions(res, std::string(scheme_name(rs)), r, cfg.eig_floor, ev.cond);
      }
      if (r == r_max) {
        const auto dims = dims_for(t, r);
        write_rom_operators(instantiate(truncate(t.forms, dims), cfg.dt_online,
                                        truncate(t.loads, dims)),
                            cfg.out_dir / ("rom_" + label + ".bin"));
      }
    }
  }
  res.write(cfg.out_dir);
  return res;
}

ExperimentResult run_example(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  try {
    if (cfg.id == "1a")
      res = run_convergence_study(cfg);
    else if (cfg.id == "2")
      res = run_example2(cfg);
    else if (cfg.id == "1b" || cfg.id == "1c" || cfg.id == "1d" || cfg.id == "custom")
      res = run_time_study(cfg);
    else
      throw std::invalid_argument("unknown experiment '" + cfg.id + "'");
  } catch (const NumericalError& e) {
    res.experiment = cfg.id;
    res.complete = false;
    res.status_message = e.what();
    res.write(cfg.out_dir);
    throw;
  }
  res.write(cfg.out_dir);
  return res;
}

}  // namespace thmrom
