#include "thmrom/rom.hpp"

#include "thmrom/io.hpp"
#include "thmrom/kernels.hpp"

#include <chrono>
#include <cmath>

namespace thmrom {

namespace {

using Clock = std::chrono::steady_clock;

const DenseMatrix& find_form(const std::map<FormId, DenseMatrix>& m, FormId id) {
  auto it = m.find(id);
  if (it == m.end())
    throw std::invalid_argument("missing reduced form " + std::string(form_name(id)));
  return it->second;
}

FormId mass_form(Field f) {
  return f == Field::u ? FormId::MASS_U : f == Field::p ? FormId::MASS_P : FormId::MASS_T;
}

}  // namespace

const DenseMatrix& ProjectedForms::at(FormId id) const { return find_form(forms, id); }
const DenseMatrix& RomOperators::at(FormId id) const { return find_form(forms, id); }

ProjectedForms project_operators(const ReducedBasis& basis, const HfSystem& sys, Exec exec) {
  ProjectedForms out;
  out.dims = basis.dims();
  for (FormId id : kAllForms) {
    const auto [test, trial] = form_fields(id);
    const SparseMatrix& a = sys.at(id);
    const DenseMatrix& left = basis.field(test).modes;
    const DenseMatrix& right = basis.field(trial).modes;
    if (left.rows() != a.rows() || right.rows() != a.cols())
      throw std::invalid_argument("project_operators: basis does not match " +
                                  std::string(form_name(id)));
    DenseMatrix m = kernels::congruence(left, a, right, exec);
    if (form_scales_with_inverse_dt(id)) m *= sys.dt;
    out.forms[id] = std::move(m);
  }
  return out;
}

ProjectedForms truncate(const ProjectedForms& forms, const std::array<int, 3>& dims) {
  ProjectedForms out;
  for (int k = 0; k < 3; ++k)
    if (dims[k] < 0 || dims[k] > forms.dims[k])
      throw std::invalid_argument("truncate: requested size exceeds the projected basis");
  out.dims = dims;
  for (const auto& [id, m] : forms.forms) {
    const auto [test, trial] = form_fields(id);
    out.forms[id] = m.topLeftCorner(dims[static_cast<int>(test)], dims[static_cast<int>(trial)]);
  }
  return out;
}

RomLoads truncate(const RomLoads& loads, const std::array<int, 3>& dims) {
  RomLoads out;
  for (const Vector& v : loads.f) out.f.emplace_back(v.head(dims[0]));
  for (const Vector& v : loads.g) out.g.emplace_back(v.head(dims[1]));
  for (const Vector& v : loads.eta) out.eta.emplace_back(v.head(dims[2]));
  return out;
}

RomLoads project_loads(const ReducedBasis& basis, const Forcing& forcing, const SpaceSet& spaces,
                       double dt, int N, Exec exec) {
  RomLoads out;
  const auto [ru, rp, rt] = basis.dims();
  out.f.assign(N + 1, Vector::Zero(ru));
  out.g.assign(N + 1, Vector::Zero(rp));
  out.eta.assign(N + 1, Vector::Zero(rt));
  for (int n = 1; n <= N; ++n) {
    const double t = n * dt;
    if (forcing.f)
      out.f[n] = kernels::project_vector(basis.u.modes, assemble_load(forcing.f, t, spaces, exec),
                                         exec);
    if (forcing.g)
      out.g[n] = kernels::project_vector(
          basis.p.modes, assemble_load(Field::p, forcing.g, t, spaces, exec), exec);
    if (forcing.eta)
      out.eta[n] = kernels::project_vector(
          basis.theta.modes, assemble_load(Field::theta, forcing.eta, t, spaces, exec), exec);
  }
  return out;
}

RomOperators instantiate(const ProjectedForms& projected, double dt, RomLoads loads) {
  if (!(dt > 0.0)) throw std::invalid_argument("instantiate: dt must be positive");
  RomOperators ops;
  ops.dt = dt;
  ops.dims = projected.dims;
  for (const auto& [id, m] : projected.forms)
    ops.forms[id] = form_scales_with_inverse_dt(id) ? DenseMatrix(m / dt) : m;
  ops.loads = std::move(loads);
  return ops;
}

ProjectedForms instantiate_affine(const AffineOperatorFamily& family,
                                  const AffineOperatorFamily::Omega& omega) {
  ProjectedForms out = family.fixed;
  for (const auto& [id, terms] : family.terms) {
    if (terms.empty()) continue;
    DenseMatrix m = terms.front().coefficient(omega) * terms.front().matrix;
    for (size_t q = 1; q < terms.size(); ++q) m += terms[q].coefficient(omega) * terms[q].matrix;
    out.forms[id] = std::move(m);
  }
  return out;
}

RomState project_initial_condition(const ReducedBasis& basis, const HfSystem& sys,
                                   const LoadVectors& b) {
  RomState out;
  out.t = 0.0;
  const std::array<const Vector*, 3> rhs = {&b.f, &b.g, &b.eta};
  for (Field f : {Field::u, Field::p, Field::theta}) {
    const DenseMatrix& phi = basis.field(f).modes;
    const Vector& bf = *rhs[static_cast<int>(f)];
    if (bf.size() != phi.rows())
      throw std::invalid_argument("project_initial_condition: dimension mismatch");
    const DenseMatrix mr = kernels::congruence(phi, sys.at(mass_form(f)), phi, Exec::serial);
    const DenseLu lu(mr);
    out.field(f) = lu.solve(phi.transpose() * bf);
  }
  return out;
}

RomState project_initial_condition(const ReducedBasis& basis, const HfSystem& sys,
                                   const State& hf_state) {
  LoadVectors b{sys.at(FormId::MASS_U) * hf_state.u, sys.at(FormId::MASS_P) * hf_state.p,
                sys.at(FormId::MASS_T) * hf_state.theta};
  return project_initial_condition(basis, sys, b);
}

State lift(const RomState& reduced, const ReducedBasis& basis) {
  State s;
  s.t = reduced.t;
  for (Field f : {Field::u, Field::p, Field::theta}) {
    const DenseMatrix& phi = basis.field(f).modes;
    if (reduced.field(f).size() != phi.cols()) throw std::invalid_argument("lift: dimension");
    s.field(f) = phi * reduced.field(f);
  }
  return s;
}

Trajectory lift(const Trajectory& reduced, const ReducedBasis& basis) {
  Trajectory out;
  out.dt = reduced.dt;
  out.T = reduced.T;
  out.states.reserve(reduced.states.size());
  for (const State& s : reduced.states) out.states.push_back(lift(s, basis));
  return out;
}

MRomStepper::MRomStepper(const RomOperators& ops) : ops_(&ops) {
  const auto [ru, rp, rt] = ops.dims;
  block_ = DenseMatrix::Zero(ru + rp + rt, ru + rp + rt);
  block_.block(0, 0, ru, ru) = ops.at(FormId::AUU);
  block_.block(0, ru, ru, rp) = ops.at(FormId::AUP);
  block_.block(0, ru + rp, ru, rt) = ops.at(FormId::AUT);
  block_.block(ru, 0, rp, ru) = ops.at(FormId::MPU);
  block_.block(ru, ru, rp, rp) = ops.at(FormId::MPP) + ops.at(FormId::APP);
  block_.block(ru, ru + rp, rp, rt) = ops.at(FormId::MPT);
  block_.block(ru + rp, 0, rt, ru) = ops.at(FormId::MTU);
  block_.block(ru + rp, ru, rt, rp) = ops.at(FormId::MTP);
  block_.block(ru + rp, ru + rp, rt, rt) = ops.at(FormId::MTT) + ops.at(FormId::ATT);
  lu_ = DenseLu(block_);
}

RomState MRomStepper::step(const RomState& prev, int n) const {
  const RomOperators& o = *ops_;
  const auto [ru, rp, rt] = o.dims;
  Vector rhs(ru + rp + rt);
  rhs.segment(0, ru) = o.loads.f.at(n);
  rhs.segment(ru, rp) = o.loads.g.at(n) + o.at(FormId::MPU) * prev.u +
                        o.at(FormId::MPP) * prev.p + o.at(FormId::MPT) * prev.theta;
  rhs.segment(ru + rp, rt) = o.loads.eta.at(n) + o.at(FormId::MTU) * prev.u +
                             o.at(FormId::MTP) * prev.p + o.at(FormId::MTT) * prev.theta;
  const Vector x = lu_.solve(rhs);
  return {x.segment(0, ru), x.segment(ru, rp), x.segment(ru + rp, rt), n * o.dt};
}

FsRomStepper::FsRomStepper(const RomOperators& ops)
    : ops_(&ops),
      flow_m_(ops.at(FormId::MPP) + ops.at(FormId::APP) + ops.at(FormId::SPP)),
      heat_m_(ops.at(FormId::MTT) + ops.at(FormId::ATT) + ops.at(FormId::STT)),
      mech_m_(ops.at(FormId::AUU)),
      flow_(flow_m_),
      heat_(heat_m_),
      mech_(mech_m_) {}

Vector FsRomStepper::step_i(const RomState& iter, const RomState& prev, int n) const {
  const RomOperators& o = *ops_;
  const Vector rhs = o.loads.g.at(n) + o.at(FormId::MPP) * prev.p + o.at(FormId::SPP) * iter.p -
                     o.at(FormId::MPU) * (iter.u - prev.u) -
                     o.at(FormId::MPT) * (iter.theta - prev.theta);
  return flow_.solve(rhs);
}

Vector FsRomStepper::step_ii(const RomState& iter, const RomState& prev, int n) const {
  const RomOperators& o = *ops_;
  const Vector rhs = o.loads.eta.at(n) + o.at(FormId::MTT) * prev.theta +
                     o.at(FormId::STT) * iter.theta - o.at(FormId::MTU) * (iter.u - prev.u) -
                     o.at(FormId::MTP) * (iter.p - prev.p);
  return heat_.solve(rhs);
}

Vector FsRomStepper::step_iii(const Vector& p_next, const Vector& theta_next, int n) const {
  const RomOperators& o = *ops_;
  return mech_.solve(o.loads.f.at(n) - o.at(FormId::AUP) * p_next -
                     o.at(FormId::AUT) * theta_next);
}

RomState FsRomStepper::sweep(const RomState& iter, const RomState& prev, int n) const {
  RomState next;
  next.t = n * ops_->dt;
  next.p = step_i(iter, prev, n);
  next.theta = step_ii(iter, prev, n);
  next.u = step_iii(next.p, next.theta, n);
  return next;
}

FsStepResult FsRomStepper::time_step(const RomState& prev, int n, const StoppingCriterion& stop,
                                     const IterationObserver& obs) const {
  FsStepResult res;
  RomState iter = prev;
  iter.t = n * ops_->dt;
  for (int i = 1; i <= stop.max_iter; ++i) {
    RomState next = sweep(iter, prev, n);
    bool ok = true;
    for (Field f : {Field::u, Field::p, Field::theta}) {
      const double d = (next.field(f) - iter.field(f)).norm();
      const double x = next.field(f).norm();
      res.increments[static_cast<int>(f)] =
          d == 0.0 ? 0.0 : (x > 0.0 ? d / x : std::numeric_limits<double>::infinity());
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

RomConditionNumbers FsRomStepper::condition_numbers() const {
  return {condition_number_2(flow_m_), condition_number_2(heat_m_), condition_number_2(mech_m_)};
}

RomConditionNumbers fs_rom_condition_numbers(const RomOperators& ops) {
  return {condition_number_2(ops.at(FormId::MPP) + ops.at(FormId::APP) + ops.at(FormId::SPP)),
          condition_number_2(ops.at(FormId::MTT) + ops.at(FormId::ATT) + ops.at(FormId::STT)),
          condition_number_2(ops.at(FormId::AUU))};
}

std::string_view scheme_name(RomScheme s) {
  return s == RomScheme::monolithic ? "M-ROM" : "FS-ROM";
}

RomRunResult run_rom(const RomOperators& ops, const RomRunConfig& cfg) {
  cfg.stop.validate();
  const int N = ops.num_steps();
  if (N < 1) throw std::invalid_argument("run_rom: no online time steps");
  RomRunResult out;
  out.report.scheme = std::string(scheme_name(cfg.scheme));
  out.trajectory.dt = ops.dt;
  out.trajectory.T = N * ops.dt;

  RomState init = cfg.initial;
  if (init.u.size() == 0 && init.p.size() == 0 && init.theta.size() == 0)
    init = {Vector::Zero(ops.dims[0]), Vector::Zero(ops.dims[1]), Vector::Zero(ops.dims[2]), 0.0};
  if (init.u.size() != ops.dims[0] || init.p.size() != ops.dims[1] ||
      init.theta.size() != ops.dims[2])
    throw std::invalid_argument("run_rom: initial state dimension mismatch");
  init.t = 0.0;
  out.trajectory.states.reserve(N + 1);
  out.trajectory.states.push_back(std::move(init));

  const auto t_setup = Clock::now();
  std::unique_ptr<MRomStepper> mono;
  std::unique_ptr<FsRomStepper> fs;
  if (cfg.scheme == RomScheme::monolithic)
    mono = std::make_unique<MRomStepper>(ops);
  else
    fs = std::make_unique<FsRomStepper>(ops);
  out.report.setup_seconds = std::chrono::duration<double>(Clock::now() - t_setup).count();

  for (int n = 1; n <= N; ++n) {
    const RomState& prev = out.trajectory.states.back();
    StepRecord rec;
    rec.time_index = n;
    const auto t0 = Clock::now();
    RomState next;
    if (mono) {
      next = mono->step(prev, n);
    } else {
      FsStepResult r = fs->time_step(prev, n, cfg.stop);
      next = std::move(r.state);
      rec.iterations = r.iterations;
      rec.increments = r.increments;
      rec.converged = r.converged;
    }
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    out.report.solve_seconds += rec.seconds;
    out.report.steps.push_back(rec);
    if (cfg.on_step) cfg.on_step(rec);
    out.trajectory.states.push_back(std::move(next));
  }
  return out;
}

namespace {
constexpr std::string_view kRomMagic = "THMROM";
constexpr std::uint32_t kRomVersion = 1;

DenseMatrix stack(const std::vector<Vector>& v, int rows) {
  DenseMatrix m = DenseMatrix::Zero(rows, static_cast<Eigen::Index>(v.size()));
  for (size_t k = 0; k < v.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = v[k];
  return m;
}

std::vector<Vector> unstack(const DenseMatrix& m) {
  std::vector<Vector> v;
  for (Eigen::Index k = 0; k < m.cols(); ++k) v.emplace_back(m.col(k));
  return v;
}
}  // namespace

void write_rom_operators(const RomOperators& ops, const std::filesystem::path& path) {
  io::BinaryWriter w(path, kRomMagic, kRomVersion);
  w.f64(ops.dt);
  for (int d : ops.dims) w.i64(d);
  w.i64(static_cast<std::int64_t>(ops.forms.size()) + 3);
  for (const auto& [id, m] : ops.forms) {
    w.str(form_name(id));
    w.mat(m);
  }
  w.str("load_f");
  w.mat(stack(ops.loads.f, ops.dims[0]));
  w.str("load_g");
  w.mat(stack(ops.loads.g, ops.dims[1]));
  w.str("load_eta");
  w.mat(stack(ops.loads.eta, ops.dims[2]));
}

RomOperators read_rom_operators(const std::filesystem::path& path) {
  io::BinaryReader r(path, kRomMagic, kRomVersion);
  RomOperators ops;
  ops.dt = r.f64();
  for (int& d : ops.dims) d = static_cast<int>(r.i64());
  const auto count = r.i64();
  for (std::int64_t k = 0; k < count; ++k) {
    const std::string name = r.str();
    DenseMatrix m = r.mat();
    if (name == "load_f") {
      ops.loads.f = unstack(m);
    } else if (name == "load_g") {
      ops.loads.g = unstack(m);
    } else if (name == "load_eta") {
      ops.loads.eta = unstack(m);
    } else if (auto id = form_from_name(name)) {
      ops.forms[*id] = std::move(m);
    } else {
      throw std::runtime_error(path.string() + ": unknown entry " + name);
    }
  }
  return ops;
}

}  // namespace thmrom
