#include "thmrom/hf_solver.hpp"

#include "thmrom/io.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace thmrom {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// |delta| <= eps |x| test and the ratio it reports; 0/0 counts as converged.
double relative(double delta, double x) {
  if (delta == 0.0) return 0.0;
  return x > 0.0 ? delta / x : std::numeric_limits<double>::infinity();
}

}  // namespace

const Vector& State::field(Field f) const {
  switch (f) {
    case Field::u: return u;
    case Field::p: return p;
    case Field::theta: return theta;
  }
  throw std::invalid_argument("State::field");
}

Vector& State::field(Field f) {
  return const_cast<Vector&>(static_cast<const State&>(*this).field(f));
}

State State::zero(const SpaceSet& spaces, double t) {
  return {Vector::Zero(spaces.u().n_free()), Vector::Zero(spaces.p().n_free()),
          Vector::Zero(spaces.theta().n_free()), t};
}

int num_time_steps(double dt, double T) {
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("dt and T must be positive");
  const double n = T / dt;
  const double rounded = std::round(n);
  if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream msg;
    msg << "T=" << T << " is not a multiple of dt=" << dt;
    throw std::invalid_argument(msg.str());
  }
  return static_cast<int>(rounded);
}

void StoppingCriterion::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("stopping tolerance must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

double SolverReport::average_iterations() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : steps) s += r.iterations;
  return s / static_cast<double>(steps.size());
}

int SolverReport::max_iterations() const {
  int m = 0;
  for (const auto& r : steps) m = std::max(m, r.iterations);
  return m;
}

int SolverReport::nonconverged_steps() const {
  int k = 0;
  for (const auto& r : steps) k += r.converged ? 0 : 1;
  return k;
}

double SolverReport::mean_step_seconds() const {
  return steps.empty() ? 0.0 : solve_seconds / static_cast<double>(steps.size());
}

AssumptionReport check_assumptions(const PhysicalParams& P, double delta) {
  AssumptionReport r;
  r.storage_margin = P.c0 - 3.0 * P.alpha_m;
  r.capacity_margin = P.C_d - 3.0 * P.alpha_m * P.theta0;
  r.stabilization_margin = P.L - 2.0 * delta;
  r.storage_ok = r.storage_margin > 0.0;
  r.capacity_ok = r.capacity_margin > 0.0;
  r.stabilization_ok = delta >= 0.5 && r.stabilization_margin >= 0.0;
  return r;
}

double contraction_norm_sq(const PhysicalParams& P, const SparseMatrix& mass_p,
                           const SparseMatrix& mass_theta, const Vector& e_p,
                           const Vector& e_theta) {
  const double kdr = P.K_dr();
  const double wp = 3.0 * P.alpha_m + P.L * P.alpha * P.alpha / kdr;
  const double wt = 3.0 * P.alpha_m + 9.0 * P.L * P.alpha_T * P.alpha_T * kdr;
  return wp * e_p.dot(mass_p * e_p) + wt * e_theta.dot(mass_theta * e_theta);
}

HfSystem HfSystem::assemble(std::shared_ptr<const SpaceSet> spaces, const PhysicalParams& params,
                            const CoefficientField& coeffs, double dt, Exec exec) {
  params.validate();
  coeffs.validate();
  HfSystem s;
  s.forms = assemble_forms(params, coeffs, *spaces, dt, exec);
  s.spaces = std::move(spaces);
  s.params = params;
  s.dt = dt;
  return s;
}

const SparseMatrix& HfSystem::at(FormId id) const {
  auto it = forms.find(id);
  if (it == forms.end()) throw std::invalid_argument("HfSystem: missing form " +
                                                     std::string(form_name(id)));
  return it->second;
}

double h1_norm(const HfSystem& sys, Field f, const Vector& x) {
  const FormId g = f == Field::u ? FormId::GRAM_U : f == Field::p ? FormId::GRAM_P : FormId::GRAM_T;
  return std::sqrt(std::max(0.0, x.dot(sys.at(g) * x)));
}

namespace {

SparseMatrix block3x3(const std::array<std::array<const SparseMatrix*, 3>, 3>& blocks) {
  std::array<int, 4> off{0, 0, 0, 0};
  for (int b = 0; b < 3; ++b) off[b + 1] = off[b] + static_cast<int>(blocks[b][b]->rows());
  std::vector<Eigen::Triplet<double>> trip;
  for (int bi = 0; bi < 3; ++bi) {
    for (int bj = 0; bj < 3; ++bj) {
      const SparseMatrix& m = *blocks[bi][bj];
      for (int r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it)
          trip.emplace_back(off[bi] + r, off[bj] + static_cast<int>(it.col()), it.value());
    }
  }
  return sparse_from_triplets(off[3], off[3], trip);
}

}  // namespace

MonolithicStepper::MonolithicStepper(const HfSystem& sys) : sys_(&sys), lu_([&] {
  const SparseMatrix pp = sys.at(FormId::MPP) + sys.at(FormId::APP);
  const SparseMatrix tt = sys.at(FormId::MTT) + sys.at(FormId::ATT);
  block_ = block3x3({{{&sys.at(FormId::AUU), &sys.at(FormId::AUP), &sys.at(FormId::AUT)},
                      {&sys.at(FormId::MPU), &pp, &sys.at(FormId::MPT)},
                      {&sys.at(FormId::MTU), &sys.at(FormId::MTP), &tt}}});
  return Factorization(block_, MatrixKind::general);
}()) {}

Vector MonolithicStepper::block_rhs(const State& prev, const LoadVectors& loads) const {
  const HfSystem& s = *sys_;
  const Eigen::Index nu = prev.u.size(), np = prev.p.size(), nt = prev.theta.size();
  Vector rhs(nu + np + nt);
  rhs.segment(0, nu) = loads.f;
  rhs.segment(nu, np) = loads.g + s.at(FormId::MPU) * prev.u + s.at(FormId::MPP) * prev.p +
                        s.at(FormId::MPT) * prev.theta;
  rhs.segment(nu + np, nt) = loads.eta + s.at(FormId::MTU) * prev.u +
                             s.at(FormId::MTP) * prev.p + s.at(FormId::MTT) * prev.theta;
  return rhs;
}

State MonolithicStepper::step(const State& prev, const LoadVectors& loads, double t_next) const {
  const Vector x = lu_.solve(block_rhs(prev, loads));
  const Eigen::Index nu = prev.u.size(), np = prev.p.size(), nt = prev.theta.size();
  return {x.segment(0, nu), x.segment(nu, np), x.segment(nu + np, nt), t_next};
}

FixedStressStepper::FixedStressStepper(const HfSystem& sys)
    : sys_(&sys),
      flow_(SparseMatrix(sys.at(FormId::MPP) + sys.at(FormId::APP) + sys.at(FormId::SPP)),
            MatrixKind::symmetric_positive_definite),
      heat_(SparseMatrix(sys.at(FormId::MTT) + sys.at(FormId::ATT) + sys.at(FormId::STT)),
            MatrixKind::symmetric_positive_definite),
      mech_(sys.at(FormId::AUU), MatrixKind::symmetric_positive_definite) {}

Vector FixedStressStepper::flow_step(const State& iter, const State& prev, const Vector& g) const {
  const HfSystem& s = *sys_;
  const Vector rhs = g + s.at(FormId::MPP) * prev.p + s.at(FormId::SPP) * iter.p -
                     s.at(FormId::MPU) * (iter.u - prev.u) -
                     s.at(FormId::MPT) * (iter.theta - prev.theta);
  return flow_.solve(rhs);
}

Vector FixedStressStepper::heat_step(const State& iter, const State& prev,
                                     const Vector& eta) const {
  const HfSystem& s = *sys_;
  const Vector rhs = eta + s.at(FormId::MTT) * prev.theta + s.at(FormId::STT) * iter.theta -
                     s.at(FormId::MTU) * (iter.u - prev.u) -
                     s.at(FormId::MTP) * (iter.p - prev.p);
  return heat_.solve(rhs);
}

Vector FixedStressStepper::mech_step(const Vector& p_next, const Vector& theta_next,
                                     const Vector& f) const {
  const HfSystem& s = *sys_;
  return mech_.solve(f - s.at(FormId::AUP) * p_next - s.at(FormId::AUT) * theta_next);
}

State FixedStressStepper::sweep(const State& iter, const State& prev, const LoadVectors& loads,
                                double t_next) const {
  State next;
  next.t = t_next;
  next.p = flow_step(iter, prev, loads.g);
  next.theta = heat_step(iter, prev, loads.eta);
  next.u = mech_step(next.p, next.theta, loads.f);
  return next;
}

FsStepResult FixedStressStepper::time_step(const State& prev, const LoadVectors& loads,
                                           double t_next, const StoppingCriterion& stop,
                                           const IterationObserver& obs) const {
  FsStepResult res;
  State iter = prev;
  iter.t = t_next;
  for (int i = 1; i <= stop.max_iter; ++i) {
    State next = sweep(iter, prev, loads, t_next);
    bool ok = true;
    for (Field f : {Field::u, Field::p, Field::theta}) {
      const double d = h1_norm(*sys_, f, next.field(f) - iter.field(f));
      const double x = h1_norm(*sys_, f, next.field(f));
      res.increments[static_cast<int>(f)] = relative(d, x);
      ok = ok && d <= stop.eps * x;
    }
    iter = std::move(next);
    res.iterations = i;
    if (obs) obs(i, iter);
    if (ok) {
      res.converged = true;
      break;
    }
  }
  res.state = std::move(iter);
  return res;
}

std::string_view scheme_name(HfScheme s) {
  return s == HfScheme::monolithic ? "M-HF" : "FS-HF";
}

HfRunResult run_hf(const HfSystem& sys, const HfRunConfig& cfg) {
  cfg.stop.validate();
  const int N = num_time_steps(sys.dt, cfg.T);
  const SpaceSet& spaces = *sys.spaces;

  HfRunResult out;
  out.report.scheme = std::string(scheme_name(cfg.scheme));
  out.trajectory.dt = sys.dt;
  out.trajectory.T = cfg.T;
  out.trajectory.states.reserve(N + 1);
  out.trajectory.states.push_back(cfg.initial ? cfg.initial(spaces) : State::zero(spaces));
  out.trajectory.states.back().t = 0.0;

  const auto t_setup = Clock::now();
  std::unique_ptr<MonolithicStepper> mono;
  std::unique_ptr<FixedStressStepper> fs;
  if (cfg.scheme == HfScheme::monolithic)
    mono = std::make_unique<MonolithicStepper>(sys);
  else
    fs = std::make_unique<FixedStressStepper>(sys);
  out.report.setup_seconds = seconds_since(t_setup);

  for (int n = 0; n < N; ++n) {
    const double t_next = (n + 1) * sys.dt;
    const LoadVectors loads = assemble_loads(cfg.forcing, t_next, spaces, cfg.exec);
    const State& prev = out.trajectory.states.back();

    StepRecord rec;
    rec.time_index = n + 1;
    const auto t0 = Clock::now();
    State next;
    if (mono) {
      next = mono->step(prev, loads, t_next);
    } else {
      FsStepResult r = fs->time_step(prev, loads, t_next, cfg.stop);
      next = std::move(r.state);
      rec.iterations = r.iterations;
      rec.increments = r.increments;
      rec.converged = r.converged;
    }
    rec.seconds = seconds_since(t0);
    out.report.solve_seconds += rec.seconds;
    out.report.steps.push_back(rec);
    if (cfg.on_step) cfg.on_step(rec);
    out.trajectory.states.push_back(std::move(next));
  }
  return out;
}

namespace {
constexpr std::string_view kTrajMagic = "THMTRAJ";
constexpr std::uint32_t kTrajVersion = 1;
}  // namespace

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  if (traj.states.empty()) throw std::invalid_argument("write_trajectory: empty trajectory");
  io::BinaryWriter w(path, kTrajMagic, kTrajVersion);
  const State& s0 = traj.states.front();
  w.i64(s0.u.size());
  w.i64(s0.p.size());
  w.i64(s0.theta.size());
  w.i64(static_cast<std::int64_t>(traj.states.size()) - 1);
  w.f64(traj.dt);
  w.f64(traj.T);
  for (const State& s : traj.states) {
    w.f64(s.t);
    w.vec(s.u);
    w.vec(s.p);
    w.vec(s.theta);
  }
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  io::BinaryReader r(path, kTrajMagic, kTrajVersion);
  const auto nu = r.i64(), np = r.i64(), nt = r.i64(), N = r.i64();
  Trajectory traj;
  traj.dt = r.f64();
  traj.T = r.f64();
  if (N < 0) throw std::runtime_error(path.string() + ": corrupt header");
  for (std::int64_t n = 0; n <= N; ++n) {
    State s;
    s.t = r.f64();
    s.u = r.vec();
    s.p = r.vec();
    s.theta = r.vec();
    if (s.u.size() != nu || s.p.size() != np || s.theta.size() != nt)
      throw std::runtime_error(path.string() + ": field size mismatch");
    traj.states.push_back(std::move(s));
  }
  return traj;
}

void write_report_csv(const SolverReport& report, const std::filesystem::path& path) {
  io::CsvWriter csv(path, {"time_index", "iterations", "increment_u", "increment_p",
                           "increment_theta", "converged", "seconds"});
  for (const auto& r : report.steps)
    csv.row(r.time_index, r.iterations, r.increments[0], r.increments[1], r.increments[2],
            r.converged ? 1 : 0, r.seconds);
}

}  // namespace thmrom
