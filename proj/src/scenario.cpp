#include "rhoflow/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rhoflow/rng.hpp"

namespace rhoflow {

using nlohmann::json;

namespace {

std::string joined_path(const std::string& ctx, const std::string& key) {
  return ctx.empty() ? key : ctx + "." + key;
}

const json& require_key(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key))
    throw Error("config: missing key '" + joined_path(ctx, key) + "'");
  return j.at(key);
}

double get_number(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = require_key(j, key, ctx);
  if (!v.is_number())
    throw Error("config: key '" + joined_path(ctx, key) + "' must be a number");
  return v.get<double>();
}

double get_number_or(const json& j, const std::string& key, const std::string& ctx,
                     double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_number(j, key, ctx);
}

int get_int(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = require_key(j, key, ctx);
  if (!v.is_number_integer())
    throw Error("config: key '" + joined_path(ctx, key) + "' must be an integer");
  return v.get<int>();
}

int get_int_or(const json& j, const std::string& key, const std::string& ctx,
               int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_int(j, key, ctx);
}

std::string get_string(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = require_key(j, key, ctx);
  if (!v.is_string())
    throw Error("config: key '" + joined_path(ctx, key) + "' must be a string");
  return v.get<std::string>();
}

std::string get_string_or(const json& j, const std::string& key,
                          const std::string& ctx, const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_string(j, key, ctx);
}

bool get_bool_or(const json& j, const std::string& key, const std::string& ctx,
                 bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean())
    throw Error("config: key '" + joined_path(ctx, key) + "' must be a boolean");
  return v.get<bool>();
}

std::vector<double> get_number_array(const json& j, const std::string& key,
                                     const std::string& ctx) {
  const json& v = require_key(j, key, ctx);
  if (!v.is_array())
    throw Error("config: key '" + joined_path(ctx, key) + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number())
      throw Error("config: key '" + joined_path(ctx, key) +
                  "' must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

ShapeSpec parse_shape(const json& j, const std::string& ctx) {
  ShapeSpec s;
  s.name = get_string(j, "name", ctx);
  if (s.name == "gaussian") {
    s.center = get_number(j, "center", ctx);
    s.width = get_number(j, "width", ctx);
  } else if (s.name == "box") {
    s.from = get_number(j, "from", ctx);
    s.to = get_number(j, "to", ctx);
  } else if (s.name == "step") {
    s.from = get_number(j, "from", ctx);
    s.to = get_number(j, "to", ctx);
    s.split = get_number(j, "split", ctx);
    s.hi = get_number(j, "hi", ctx);
    s.lo = get_number(j, "lo", ctx);
  } else {
    throw Error("config: key '" + joined_path(ctx, "name") +
                "' must be one of gaussian, box, step");
  }
  return s;
}

}  // namespace

GridSpec ExperimentConfig::grid() const {
  return GridSpec(grid_n, x_min, x_max, points);
}

EvolutionMethod ExperimentConfig::method() const {
  EvolutionMethod m;
  m.kind = evolution.method == "RK4Direct" ? MethodKind::RK4Direct
                                           : MethodKind::CocycleMidpoint;
  m.dt = evolution.dt;
  m.midpoint_iterations = evolution.midpoint_iterations;
  return m;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "linear-limit", "delta-compare", "spectrum-check", "cocycle-check",
      "bracket-audit"};
  return names;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: invalid JSON: ") + e.what());
  }

  ExperimentConfig c;
  c.raw = json_text;
  c.scenario = get_string(j, "scenario", "");
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), c.scenario) == names.end()) {
    std::string all;
    for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
    throw Error("config: unknown scenario '" + c.scenario + "' (expected one of " +
                all + ")");
  }

  const json& g = require_key(j, "grid", "");
  c.grid_n = get_int(g, "n", "grid");
  c.x_min = get_number(g, "x_min", "grid");
  c.x_max = get_number(g, "x_max", "grid");
  c.points = get_int(g, "points", "grid");
  try {
    (void)c.grid();
  } catch (const Error& e) {
    throw Error(std::string("config: grid: ") + e.what());
  }
  const Index dim = c.grid().dim();

  const json& h = require_key(j, "hamiltonian", "");
  c.hamiltonian.hop = get_number(h, "hop", "hamiltonian");
  const json& pot = require_key(h, "potential", "hamiltonian");
  c.hamiltonian.potential_name = get_string(pot, "name", "hamiltonian.potential");
  if (c.hamiltonian.potential_name == "harmonic") {
    c.hamiltonian.k = get_number(pot, "k", "hamiltonian.potential");
  } else if (c.hamiltonian.potential_name != "zero") {
    throw Error("config: key 'hamiltonian.potential.name' must be zero or harmonic");
  }
  c.hamiltonian.eps = get_number(h, "eps", "hamiltonian");
  c.hamiltonian.alpha = get_number(h, "alpha", "hamiltonian");
  if (!(c.hamiltonian.alpha > 0))
    throw Error("config: key 'hamiltonian.alpha' must be > 0");
  c.hamiltonian.periodic = get_bool_or(h, "periodic", "hamiltonian", false);

  const json& ini = require_key(j, "initial", "");
  c.initial.type = get_string(ini, "type", "initial");
  if (c.initial.type == "mixture") {
    const json& comps = require_key(ini, "components", "initial");
    if (!comps.is_array() || comps.empty())
      throw Error("config: key 'initial.components' must be a nonempty array");
    double wsum = 0.0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string ctx = "initial.components[" + std::to_string(i) + "]";
      ComponentSpec cs;
      cs.weight = get_number(comps[i], "weight", ctx);
      if (cs.weight <= 0.0)
        throw Error("config: key '" + ctx + ".weight' must be positive");
      cs.shape = parse_shape(require_key(comps[i], "shape", ctx), ctx + ".shape");
      wsum += cs.weight;
      c.initial.components.push_back(std::move(cs));
    }
    if (std::abs(wsum - 1.0) > kWeightSumTol)
      throw Error("config: initial.components weights sum to " +
                  std::to_string(wsum) + ", expected 1");
  } else if (c.initial.type == "pure_samples") {
    c.initial.re = get_number_array(ini, "re", "initial");
    if (ini.contains("im")) c.initial.im = get_number_array(ini, "im", "initial");
    if (Index(c.initial.re.size()) != dim ||
        (!c.initial.im.empty() && c.initial.im.size() != c.initial.re.size()))
      throw Error("config: initial.re/initial.im must have one entry per grid point (" +
                  std::to_string(dim) + ")");
  } else if (c.initial.type == "diagonal") {
    c.initial.diagonal = get_number_array(ini, "weights", "initial");
    if (Index(c.initial.diagonal.size()) != dim)
      throw Error("config: initial.weights must have one entry per grid point (" +
                  std::to_string(dim) + ")");
    double wsum = 0.0;
    for (double w : c.initial.diagonal) {
      if (w < 0.0) throw Error("config: initial.weights must be nonnegative");
      wsum += w;
    }
    if (std::abs(wsum - 1.0) > kWeightSumTol)
      throw Error("config: initial.weights sum to " + std::to_string(wsum) +
                  ", expected 1");
  } else {
    throw Error(
        "config: key 'initial.type' must be mixture, pure_samples, or diagonal");
  }

  const json& ev = require_key(j, "evolution", "");
  c.evolution.method = get_string_or(ev, "method", "evolution", "CocycleMidpoint");
  if (c.evolution.method != "CocycleMidpoint" && c.evolution.method != "RK4Direct")
    throw Error("config: key 'evolution.method' must be CocycleMidpoint or RK4Direct");
  c.evolution.dt = get_number(ev, "dt", "evolution");
  if (!(c.evolution.dt > 0)) throw Error("config: key 'evolution.dt' must be > 0");
  c.evolution.T = get_number(ev, "T", "evolution");
  if (!(c.evolution.T > 0)) throw Error("config: key 'evolution.T' must be > 0");
  c.evolution.sample_every = get_int_or(ev, "sample_every", "evolution", 10);
  if (c.evolution.sample_every < 1)
    throw Error("config: key 'evolution.sample_every' must be >= 1");
  c.evolution.midpoint_iterations =
      get_int_or(ev, "midpoint_iterations", "evolution", 3);
  if (c.evolution.midpoint_iterations < 1 || c.evolution.midpoint_iterations > 8)
    throw Error("config: key 'evolution.midpoint_iterations' must be in [1, 8]");

  if (j.contains("output")) {
    const json& o = j.at("output");
    c.output.directory = get_string_or(o, "directory", "output", "out");
    if (o.contains("formats")) {
      const json& f = o.at("formats");
      if (!f.is_array())
        throw Error("config: key 'output.formats' must be an array");
      c.output.csv = false;
      c.output.json = false;
      for (const auto& e : f) {
        if (!e.is_string() || (e != "csv" && e != "json"))
          throw Error("config: key 'output.formats' entries must be csv or json");
        if (e == "csv") c.output.csv = true;
        if (e == "json") c.output.json = true;
      }
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("config: cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool RunReport::verdict() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string RunReport::to_json(const ExperimentConfig& cfg) const {
  json j;
  j["scenario"] = scenario;
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash;
  j["verdict"] = verdict() ? "pass" : "fail";
  if (json::accept(cfg.raw)) j["config"] = json::parse(cfg.raw);
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"value", c.value},
                   {"threshold", c.threshold},
                   {"comparison", c.at_least ? ">=" : "<="},
                   {"pass", c.pass}});
  }
  j["checks"] = arr;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Shared CSV body: t, Q, trace, purity, eigenvalues descending.
std::string write_state_csv(const std::string& path, const std::vector<double>& times,
                            const std::vector<DensityMatrix>& states,
                            const std::vector<double>& qvals) {
  if (times.empty() || times.size() != states.size() || times.size() != qvals.size())
    throw Error("export_trajectory: inconsistent trajectory");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("export_trajectory: cannot open '" + path + "'");
  const Index d = states.front().dim();
  f << "t,Q,trace,purity";
  for (Index k = 1; k <= d; ++k) f << ",w" << k;
  f << "\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    f << fmt(times[i]) << "," << fmt(qvals[i]) << ","
      << fmt(real_trace(states[i].matrix())) << "," << fmt(purity(states[i]));
    const RealVector w = hermitian_eig(states[i].op()).eigenvalues;
    for (Index k = 0; k < d; ++k) f << "," << fmt(w(k));
    f << "\n";
  }
  if (!f.good()) throw Error("export_trajectory: write failed for '" + path + "'");
  return path;
}

}  // namespace

std::vector<std::string> export_trajectory(const Trajectory& t,
                                           const std::string& csv_path) {
  return {write_state_csv(csv_path, t.times, t.states, t.functional_values)};
}

std::vector<std::string> export_trajectory(const MixtureTrajectory& t,
                                           const DifferentiableFunctional& q,
                                           const std::string& directory,
                                           const std::string& stem) {
  if (t.components.empty()) throw Error("export_trajectory: empty mixture");
  std::vector<std::string> out;
  for (std::size_t j = 0; j < t.components.size(); ++j) {
    const std::string p =
        directory + "/" + stem + "_component_" + std::to_string(j) + ".csv";
    out.push_back(write_state_csv(p, t.components[j].times, t.components[j].states,
                                  t.components[j].functional_values));
  }
  const std::size_t samples = t.components.front().times.size();
  std::vector<DensityMatrix> bary;
  std::vector<double> qvals;
  bary.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    bary.push_back(barycenter_at(t, i));
    qvals.push_back(q.eval(bary.back()));
  }
  out.push_back(write_state_csv(directory + "/" + stem + "_barycenter.csv",
                                t.components.front().times, bary, qvals));
  return out;
}

namespace {

struct Setup {
  GridSpec grid;
  HermitianOperator h0;
  DifferentiableFunctional q;
  DensityMatrix rho0;
  std::optional<PureStateMixture> psm;
  std::optional<GenuineMixture> gm;
};

PureState make_shape(const GridSpec& grid, const ShapeSpec& s) {
  if (s.name == "gaussian") return gaussian_state(grid, s.center, s.width);
  if (s.name == "box") return box_state(grid, s.from, s.to);
  if (s.name == "step") return step_state(grid, s.from, s.to, s.split, s.hi, s.lo);
  throw Error("unknown shape '" + s.name + "'");
}

Setup build_setup(const ExperimentConfig& c) {
  GridSpec grid = c.grid();
  const Potential v = c.hamiltonian.potential_name == "harmonic"
                          ? potentials::harmonic(c.hamiltonian.k)
                          : potentials::zero();
  HermitianOperator h0 = build_h0(
      grid, v, c.hamiltonian.hop,
      c.hamiltonian.periodic ? Boundary::Periodic : Boundary::Dirichlet);
  DifferentiableFunctional q =
      functionals::grid_nonlinear(grid, h0, c.hamiltonian.eps, c.hamiltonian.alpha);

  std::optional<PureStateMixture> psm;
  std::optional<GenuineMixture> gm;

  if (c.initial.type == "mixture") {
    std::vector<double> ws;
    std::vector<PureState> states;
    for (const auto& comp : c.initial.components) {
      ws.push_back(comp.weight);
      states.push_back(make_shape(grid, comp.shape));
    }
    psm = PureStateMixture(std::move(ws), std::move(states));
    gm = psm->to_genuine();
    DensityMatrix rho0 = barycenter(*gm);
    return Setup{grid, h0, q, rho0, std::move(psm), std::move(gm)};
  }
  if (c.initial.type == "pure_samples") {
    Vector s(grid.dim());
    for (Index i = 0; i < grid.dim(); ++i) {
      s(i) = Complex(c.initial.re[i],
                     c.initial.im.empty() ? 0.0 : c.initial.im[i]);
    }
    PureState p = wave_to_vector(s, grid);
    psm = PureStateMixture({1.0}, {p});
    gm = psm->to_genuine();
    return Setup{grid, h0, q, projector(p), std::move(psm), std::move(gm)};
  }
  // diagonal
  Matrix m = Matrix::Zero(grid.dim(), grid.dim());
  for (Index i = 0; i < grid.dim(); ++i) m(i, i) = c.initial.diagonal[i];
  DensityMatrix rho0 = density_from_matrix(m);
  gm = GenuineMixture({{1.0, rho0}});
  return Setup{grid, h0, q, rho0, std::nullopt, std::move(gm)};
}

void add_check(RunReport& r, const std::string& name, double value,
               double threshold, bool at_least = false) {
  Check c;
  c.name = name;
  c.value = value;
  c.threshold = threshold;
  c.at_least = at_least;
  c.pass = at_least ? value >= threshold : value <= threshold;
  r.checks.push_back(std::move(c));
}

void run_linear_limit(const ExperimentConfig& c, const Setup& s,
                      const std::string& out_dir, RunReport& r) {
  if (c.hamiltonian.eps != 0.0)
    throw Error("scenario linear-limit requires hamiltonian.eps = 0");
  SampleOptions so;
  so.sample_every = c.evolution.sample_every;
  const Trajectory traj =
      evolve_elementary(s.q, s.rho0, c.evolution.T, c.method(), so);

  double gap = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Matrix u = unitary_exp(s.h0, traj.times[i]);
    const Matrix exact = u * s.rho0.matrix() * u.adjoint();
    gap = std::max(gap, max_abs((traj.states[i].matrix() - exact).eval()));
  }
  add_check(r, "exact_propagator_gap", gap, 1e-8);

  if (s.gm && s.gm->size() > 1) {
    const MixtureTrajectory mt =
        evolve_genuine(s.q, *s.gm, c.evolution.T, c.method(), so);
    double affinity = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      affinity = std::max(
          affinity,
          max_abs((barycenter_at(mt, i).matrix() - traj.states[i].matrix()).eval()));
    }
    add_check(r, "affinity_gap", affinity, 1e-9);
    if (c.output.csv) {
      auto files = export_trajectory(mt, s.q, out_dir, "linear-limit");
      r.outputs.insert(r.outputs.end(), files.begin(), files.end());
    }
  }
  if (c.output.csv) {
    auto files = export_trajectory(traj, out_dir + "/linear-limit.csv");
    r.outputs.insert(r.outputs.end(), files.begin(), files.end());
  }
}

void run_delta_compare(const ExperimentConfig& c, const Setup& s,
                       const std::string& out_dir, RunReport& r) {
  if (!s.psm || s.psm->size() < 2)
    throw Error(
        "scenario delta-compare requires a mixture initial state with at least two "
        "components");
  if (c.hamiltonian.eps == 0.0)
    throw Error("scenario delta-compare requires hamiltonian.eps != 0");

  const Matrix da =
      delta_analytic(c.hamiltonian.eps, c.hamiltonian.alpha, *s.psm, s.grid);
  const Matrix dn = delta_numeric(s.q, *s.gm);
  add_check(r, "delta_cross_residual", max_abs((da - dn).eval()), 1e-10);
  add_check(r, "delta_magnitude", max_abs(da), 1e-6, /*at_least=*/true);

  // The trajectory slope (sum_j lambda_j phi_t(rho_j) - phi_t(rho_bar))/t must
  // approach the t = 0 discriminator linearly in t.
  const std::vector<double> ts = {1e-2, 1e-3, 1e-4};
  std::vector<double> errs;
  for (double t : ts) {
    EvolutionMethod m = c.method();
    m.dt = t / 16.0;
    errs.push_back(max_abs((delta_trajectory_fd(s.q, *s.gm, t, m) - dn).eval()));
  }
  add_check(r, "delta_fd_ratio_t2_over_t1", errs[1] / errs[0], 0.2);
  add_check(r, "delta_fd_ratio_t3_over_t2", errs[2] / errs[1], 0.2);

  if (c.output.csv) {
    const std::string conv = out_dir + "/delta_fd_convergence.csv";
    std::ofstream f(conv, std::ios::binary);
    if (!f) throw Error("cannot open '" + conv + "'");
    f << "t,fd_error\n";
    for (std::size_t i = 0; i < ts.size(); ++i)
      f << fmt(ts[i]) << "," << fmt(errs[i]) << "\n";
    if (!f.good()) throw Error("write failed for '" + conv + "'");
    r.outputs.push_back(conv);

    SampleOptions so;
    so.sample_every = c.evolution.sample_every;
    const MixtureTrajectory mt =
        evolve_genuine(s.q, *s.gm, c.evolution.T, c.method(), so);
    auto files = export_trajectory(mt, s.q, out_dir, "delta-compare");
    r.outputs.insert(r.outputs.end(), files.begin(), files.end());
  }
}

void run_spectrum_check(const ExperimentConfig& c, const Setup& s,
                        const std::string& out_dir, RunReport& r) {
  SampleOptions so;
  so.sample_every = c.evolution.sample_every;
  const Trajectory traj =
      evolve_elementary(s.q, s.rho0, c.evolution.T, c.method(), so);

  const RealVector eig0 = hermitian_eig(s.rho0.op()).eigenvalues;
  const double pur0 = purity(s.rho0);
  const double q0 = traj.functional_values.front();
  double spectral = 0.0, pur_drift = 0.0, energy = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const RealVector w = hermitian_eig(traj.states[i].op()).eigenvalues;
    spectral = std::max(spectral, (w - eig0).cwiseAbs().maxCoeff());
    pur_drift = std::max(pur_drift, std::abs(purity(traj.states[i]) - pur0));
    energy = std::max(energy, std::abs(traj.functional_values[i] - q0));
  }
  add_check(r, "spectral_drift", spectral, 1e-8);
  add_check(r, "purity_drift", pur_drift, 1e-8);
  add_check(r, "energy_drift", energy, 1e-6 * std::max(1.0, std::abs(q0)));

  if (c.output.csv) {
    auto files = export_trajectory(traj, out_dir + "/spectrum-check.csv");
    r.outputs.insert(r.outputs.end(), files.begin(), files.end());
  }
}

void run_cocycle_check(const ExperimentConfig& c, const Setup& s,
                       const std::string& out_dir, RunReport& r) {
  const double half = c.evolution.T / 2.0;
  const double residual =
      cocycle_identity_residual(s.q, s.rho0, half, half, c.method());
  add_check(r, "cocycle_residual", residual,
            c.hamiltonian.eps == 0.0 ? 1e-12 : 5e-7);

  if (c.output.csv) {
    SampleOptions so;
    so.sample_every = c.evolution.sample_every;
    const Trajectory traj =
        evolve_elementary(s.q, s.rho0, c.evolution.T, c.method(), so);
    auto files = export_trajectory(traj, out_dir + "/cocycle-check.csv");
    r.outputs.insert(r.outputs.end(), files.begin(), files.end());
  }
}

void run_bracket_audit(const ExperimentConfig& c, const Setup& s,
                       const std::string& out_dir, std::uint64_t seed,
                       RunReport& r) {
  Rng rng(seed);
  const Index d = std::min<Index>(s.grid.dim(), 16);
  const int trials = 100;
  double anti = 0.0, bilin = 0.0, jacobi = 0.0, leibniz = 0.0;

  std::ofstream f;
  const std::string audit_path = out_dir + "/bracket_audit.csv";
  if (c.output.csv) {
    f.open(audit_path, std::ios::binary);
    if (!f) throw Error("cannot open '" + audit_path + "'");
    f << "trial,antisymmetry,bilinearity,jacobi,leibniz\n";
  }

  for (int trial = 0; trial < trials; ++trial) {
    const HermitianOperator A = random_hermitian(d, rng);
    const HermitianOperator B = random_hermitian(d, rng);
    const HermitianOperator C = random_hermitian(d, rng);
    const Matrix rho = random_density(d, d, rng).matrix();
    const auto fa = functionals::linear(A, "a");
    const auto fb = functionals::linear(B, "b");
    const auto fc = functionals::linear(C, "c");

    const double t_anti =
        std::abs(poisson_bracket(fa, fb, rho) + poisson_bracket(fb, fa, rho));

    const double x = 2.0 * rng.uniform() - 1.0;
    const double y = 2.0 * rng.uniform() - 1.0;
    const auto combo = functionals::sum(functionals::scaled(fa, x),
                                        functionals::scaled(fb, y));
    const double t_bilin =
        std::abs(poisson_bracket(combo, fc, rho) -
                 (x * poisson_bracket(fa, fc, rho) + y * poisson_bracket(fb, fc, rho)));

    const double t_jacobi =
        std::abs(poisson_bracket(fa, functionals::bracket(fb, fc), rho) +
                 poisson_bracket(fb, functionals::bracket(fc, fa), rho) +
                 poisson_bracket(fc, functionals::bracket(fa, fb), rho));

    // Leibniz twice over: the product functional's differential against the
    // hand-assembled right side, and the bracket's derivation property.
    const auto prod = functionals::product(fa, fb);
    const Matrix lhs = prod.differential(rho).matrix();
    const Matrix rhs_formula =
        fa.eval(rho) * B.matrix() + fb.eval(rho) * A.matrix();
    const double t_leib1 = max_abs((lhs - rhs_formula).eval());
    const double t_leib2 =
        std::abs(poisson_bracket(fc, prod, rho) -
                 (fa.eval(rho) * poisson_bracket(fc, fb, rho) +
                  fb.eval(rho) * poisson_bracket(fc, fa, rho)));
    const double t_leib = std::max(t_leib1, t_leib2);

    anti = std::max(anti, t_anti);
    bilin = std::max(bilin, t_bilin);
    jacobi = std::max(jacobi, t_jacobi);
    leibniz = std::max(leibniz, t_leib);
    if (c.output.csv) {
      f << trial << "," << fmt(t_anti) << "," << fmt(t_bilin) << ","
        << fmt(t_jacobi) << "," << fmt(t_leib) << "\n";
    }
  }
  if (c.output.csv) {
    if (!f.good()) throw Error("write failed for '" + audit_path + "'");
    r.outputs.push_back(audit_path);
  }

  add_check(r, "antisymmetry_max", anti, 1e-12);
  add_check(r, "bilinearity_max", bilin, 1e-12);
  add_check(r, "jacobi_max", jacobi, 1e-10);
  add_check(r, "leibniz_max", leibniz, 1e-12);
}

}  // namespace

RunReport run(const ExperimentConfig& cfg, const std::string& out_dir,
              std::uint64_t seed) {
  RunReport r;
  r.scenario = cfg.scenario;
  r.tool_version = kToolVersion;
  r.config_hash = fnv1a_hex(cfg.raw);

  std::filesystem::create_directories(out_dir);
  const Setup s = build_setup(cfg);

  try {
    if (cfg.scenario == "linear-limit") {
      run_linear_limit(cfg, s, out_dir, r);
    } else if (cfg.scenario == "delta-compare") {
      run_delta_compare(cfg, s, out_dir, r);
    } else if (cfg.scenario == "spectrum-check") {
      run_spectrum_check(cfg, s, out_dir, r);
    } else if (cfg.scenario == "cocycle-check") {
      run_cocycle_check(cfg, s, out_dir, r);
    } else if (cfg.scenario == "bracket-audit") {
      run_bracket_audit(cfg, s, out_dir, seed, r);
    } else {
      throw Error("unknown scenario '" + cfg.scenario + "'");
    }
  } catch (const Error& e) {
    throw Error("scenario " + cfg.scenario + ": " + e.what());
  }

  if (cfg.output.json) {
    const std::string report_path = out_dir + "/report.json";
    r.outputs.push_back(report_path);
    std::ofstream f(report_path, std::ios::binary);
    if (!f) throw Error("cannot open '" + report_path + "'");
    f << r.to_json(cfg);
    if (!f.good()) throw Error("write failed for '" + report_path + "'");
  }
  return r;
}

}  // namespace rhoflow
