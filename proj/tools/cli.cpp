#include "cli.hpp"

#include "thmrom/io.hpp"

#include <CLI11.hpp>
#include <omp.h>
#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <set>

namespace thmrom::cli {

namespace {

class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::set<std::string> kExperiments = {"1a", "1b", "1c", "1d", "2", "custom"};
const std::set<std::string> kSubcommands = {"run", "convergence", "pod", "rom", "info"};

// Typed access to a YAML map that records which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsMap()) throw UsageError(where() + "expected a mapping");
  }

  template <class T>
  void read(const std::string& key, T& target) {
    used_.insert(key);
    const YAML::Node v = node_[key];
    if (!v) return;
    try {
      target = v.as<T>();
    } catch (const YAML::Exception&) {
      throw UsageError(path_ + (path_.empty() ? "" : ".") + key + ": invalid value");
    }
  }

  Section child(const std::string& key) {
    used_.insert(key);
    return Section(node_[key], path_.empty() ? key : path_ + "." + key);
  }

  bool has(const std::string& key) const { return node_ && node_[key]; }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key))
        throw UsageError("unknown config key '" + (path_.empty() ? key : path_ + "." + key) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

ParamBox read_box(Section& s, const std::string& key, const ParamBox& fallback,
                  const std::string& path) {
  std::vector<double> v;
  s.read(key, v);
  if (v.empty()) return fallback;
  if (v.size() != 4 || v[0] > v[1] || v[2] > v[3])
    throw UsageError(path + "." + key + ": expected [w1_min, w1_max, w2_min, w2_max]");
  return {v[0], v[1], v[2], v[3]};
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void print_config(const ExperimentConfig& c, std::ostream& out) {
  out << "experiment: " << c.id << '\n'
      << "mesh:\n  n: " << c.n << '\n'
      << "cycles: " << c.cycles << '\n'
      << "time:\n  dt_train: " << c.dt_train << "\n  dt_online: " << c.dt_online
      << "\n  T_train: " << c.T_train << "\n  T_online: " << c.T_online << '\n'
      << "solver:\n  eps: " << c.eps << "\n  max_iter: " << c.max_iter << "\n  L: " << c.L << '\n'
      << "rom:\n  r: [";
  for (size_t k = 0; k < c.r_list.size(); ++k) out << (k ? ", " : "") << c.r_list[k];
  out << "]\n  eig_floor: " << c.eig_floor << '\n'
      << "error_reference: "
      << (c.error_reference == ErrorReference::exact_quadrature ? "exact" : "interpolant") << '\n';
  if (c.id == "2") {
    out << "example2:\n  train_box: [" << c.train_box.w1_min << ", " << c.train_box.w1_max << ", "
        << c.train_box.w2_min << ", " << c.train_box.w2_max << "]\n  test_box: ["
        << c.test_box.w1_min << ", " << c.test_box.w1_max << ", " << c.test_box.w2_min << ", "
        << c.test_box.w2_max << "]\n  train_grid: " << c.train_grid
        << "\n  test_grid: " << c.test_grid << '\n';
  }
  if (c.id == "custom") {
    const PhysicalParams& p = c.params;
    out << "material:\n  lambda: " << p.lambda << "\n  mu: " << p.mu << "\n  c0: " << p.c0
        << "\n  alpha: " << p.alpha << "\n  alpha_T: " << p.alpha_T << "\n  alpha_m: " << p.alpha_m
        << "\n  C_d: " << p.C_d << "\n  theta0: " << p.theta0 << "\n  K: " << c.K
        << "\n  D: " << c.D << '\n'
        << "forcing: " << (c.zero_forcing ? "zero" : "manufactured") << '\n'
        << "boundary: " << (c.bc.p_dirichlet ? "dirichlet" : "clamped_insulated") << '\n';
  }
  out << "output_dir: " << c.out_dir.string() << '\n';
}

void print_summary(const ExperimentResult& res, const std::filesystem::path& dir,
                   std::ostream& out) {
  out << "experiment " << res.experiment << ": " << (res.complete ? "complete" : "partial");
  if (!res.status_message.empty()) out << " (" << res.status_message << ")";
  out << "\noutputs in " << dir.string() << '\n';
  for (const auto& r : res.rates)
    if (r.scheme == "M-HF" || r.scheme == "FS-HF")
      out << "  rate " << r.scheme << ' ' << field_name(r.field) << ' ' << r.norm << " cycle "
          << r.cycle << ": " << std::fixed << std::setprecision(3) << r.rate
          << std::defaultfloat << '\n';
  int nonconverged = 0;
  for (const auto& [key, rep] : res.reports) nonconverged += rep.nonconverged_steps();
  if (nonconverged > 0)
    out << "  " << nonconverged << " fixed-stress steps hit the iteration cap\n";
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::optional<std::string>& fallback_id) {
  if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw UsageError("cannot parse " + path.string() + ": " + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  Section top(root, "");

  std::string id = fallback_id.value_or("");
  top.read("experiment", id);
  if (id.empty()) throw UsageError("experiment: missing (expected one of 1a, 1b, 1c, 1d, 2, custom)");
  if (!kExperiments.count(id)) throw UsageError("experiment: unknown id '" + id + "'");
  ExperimentConfig c = ExperimentConfig::defaults(id);

  std::string out_dir;
  top.read("output_dir", out_dir);
  if (!out_dir.empty()) c.out_dir = out_dir;
  top.read("cycles", c.cycles);
  top.read("verbose", c.verbose);
  std::string ref;
  top.read("error_reference", ref);
  if (!ref.empty()) {
    if (ref == "exact")
      c.error_reference = ErrorReference::exact_quadrature;
    else if (ref == "interpolant")
      c.error_reference = ErrorReference::vertex_interpolant;
    else
      throw UsageError("error_reference: expected 'exact' or 'interpolant'");
  }

  Section mesh = top.child("mesh");
  mesh.read("n", c.n);
  mesh.reject_unknown();

  Section time = top.child("time");
  double dt = 0.0, T = 0.0;
  time.read("dt", dt);
  time.read("T", T);
  if (dt > 0) c.dt_train = c.dt_online = dt;
  if (T > 0) c.T_train = c.T_online = T;
  time.read("dt_train", c.dt_train);
  time.read("dt_online", c.dt_online);
  time.read("T_train", c.T_train);
  time.read("T_online", c.T_online);
  time.reject_unknown();

  Section solver = top.child("solver");
  solver.read("eps", c.eps);
  solver.read("max_iter", c.max_iter);
  solver.read("L", c.L);
  solver.reject_unknown();

  Section rom = top.child("rom");
  if (rom.has("r")) {
    try {
      int single = 0;
      rom.read("r", single);
      c.r_list = {single};
    } catch (const UsageError&) {
      c.r_list.clear();
      rom.read("r", c.r_list);
    }
  }
  rom.read("eig_floor", c.eig_floor);
  rom.reject_unknown();

  if (top.has("example2") && id != "2") throw UsageError("example2: only valid for experiment 2");
  Section ex2 = top.child("example2");
  c.train_box = read_box(ex2, "train_box", c.train_box, "example2");
  c.test_box = read_box(ex2, "test_box", c.test_box, "example2");
  ex2.read("train_grid", c.train_grid);
  ex2.read("test_grid", c.test_grid);
  ex2.reject_unknown();

  for (const char* key : {"material", "forcing", "boundary"})
    if (top.has(key) && id != "custom")
      throw UsageError(std::string(key) + ": only valid for experiment custom");
  Section mat = top.child("material");
  mat.read("lambda", c.params.lambda);
  mat.read("mu", c.params.mu);
  mat.read("c0", c.params.c0);
  mat.read("alpha", c.params.alpha);
  mat.read("alpha_T", c.params.alpha_T);
  mat.read("alpha_m", c.params.alpha_m);
  mat.read("C_d", c.params.C_d);
  mat.read("theta0", c.params.theta0);
  mat.read("K", c.K);
  mat.read("D", c.D);
  mat.reject_unknown();
  c.params.L = c.L;

  std::string forcing;
  top.read("forcing", forcing);
  if (!forcing.empty()) {
    if (forcing != "zero" && forcing != "manufactured")
      throw UsageError("forcing: expected 'zero' or 'manufactured'");
    c.zero_forcing = forcing == "zero";
  }
  std::string boundary;
  top.read("boundary", boundary);
  if (!boundary.empty()) {
    if (boundary == "dirichlet")
      c.bc = BcSpec::all_dirichlet();
    else if (boundary == "clamped_insulated")
      c.bc = BcSpec::clamped_insulated();
    else
      throw UsageError("boundary: expected 'dirichlet' or 'clamped_insulated'");
  }
  top.reject_unknown();
  return c;
}

CliInvocation parse_and_validate(const std::vector<std::string>& args) {
  CLI::App app{"Thermo-poroelastic HF solvers and POD reduced order models"};
  std::string sub;
  std::optional<std::string> experiment, config, out_dir;
  std::optional<int> cycles, n;
  std::vector<int> r_list;
  int threads = 0;
  bool verbose = false, serial = false;
  app.add_option("subcommand", sub, "run | convergence | pod | rom | info")->required();
  app.add_option("-e,--experiment", experiment, "1a, 1b, 1c, 1d, 2 or custom");
  app.add_option("-c,--config", config, "YAML config file");
  app.add_option("--cycles", cycles, "convergence cycles (1a)");
  app.add_option("--n", n, "cells per side of the (initial) mesh");
  app.add_option("--r", r_list, "reduced dimensions, e.g. --r 1 2 3");
  app.add_option("-o,--out", out_dir, "output directory (overrides THM_OUTPUT_DIR)");
  app.add_option("-j,--threads", threads, "OpenMP threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", verbose, "one line per time step on stderr");
  app.add_flag("--serial", serial, "use the serial reference kernels");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  if (!kSubcommands.count(sub)) throw UsageError("unknown subcommand '" + sub + "'");
  if (experiment && !kExperiments.count(lower(*experiment)))
    throw UsageError("unknown experiment '" + *experiment +
                     "' (expected 1a, 1b, 1c, 1d, 2 or custom)");

  CliInvocation inv;
  inv.subcommand = sub;
  inv.threads = threads;
  if (config) {
    inv.config_path = *config;
    inv.config = load_config(*config, experiment ? std::optional(lower(*experiment)) : std::nullopt);
    if (experiment && lower(*experiment) != inv.config.id)
      throw UsageError("--experiment " + *experiment + " conflicts with config experiment '" +
                       inv.config.id + "'");
  } else if (experiment) {
    inv.config = ExperimentConfig::defaults(lower(*experiment));
    inv.config.out_dir = "out/" + inv.config.id;
  } else if (sub != "info") {
    throw UsageError("missing config: pass --config FILE or --experiment ID");
  } else {
    inv.config = ExperimentConfig::defaults("1a");
    inv.config.out_dir = "out/1a";
  }

  ExperimentConfig& c = inv.config;
  if (cycles) c.cycles = *cycles;
  if (n) c.n = *n;
  if (!r_list.empty()) c.r_list = r_list;
  if (verbose) c.verbose = true;
  if (serial) c.exec = Exec::serial;
  if (const char* env = std::getenv("THM_OUTPUT_DIR"); env && *env) c.out_dir = env;
  if (out_dir) c.out_dir = *out_dir;

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  if (sub == "convergence" && c.id != "1a")
    throw UsageError("convergence applies to experiment 1a only");
  if ((sub == "pod" || sub == "rom") && c.id == "2")
    throw UsageError(sub + " applies to experiments 1a-1d and custom");
  return inv;
}

int dispatch(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  if (inv.threads > 0) omp_set_num_threads(inv.threads);
  const ExperimentConfig& c = inv.config;
  if (inv.subcommand == "info") {
    out << "# threads: " << omp_get_max_threads() << '\n';
    print_config(c, out);
    return 0;
  }
  if (inv.subcommand == "rom") {
    for (const char* f : {"basis_M-HF.bin", "basis_FS-HF.bin"})
      if (!std::filesystem::exists(c.out_dir / f))
        throw UsageError("missing " + (c.out_dir / f).string() + "; run the pod subcommand first");
  }
  ExperimentResult res;
  if (inv.subcommand == "run") {
    res = run_example(c);
  } else if (inv.subcommand == "convergence") {
    res = run_convergence_study(c);
    res.write(c.out_dir);
  } else if (inv.subcommand == "pod") {
    res = run_pod_stage(c);
  } else {
    res = run_rom_stage(c);
  }
  print_summary(res, c.out_dir, out);
  (void)err;
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(parse_and_validate(args), out, err);
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n(run with --help for options)\n";
    return 2;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace thmrom::cli
