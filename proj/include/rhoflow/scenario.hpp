#ifndef RHOFLOW_SCENARIO_HPP
#define RHOFLOW_SCENARIO_HPP

#include <cstdint>
#include <optional>

#include "rhoflow/dynamics.hpp"

namespace rhoflow {

inline constexpr const char* kToolVersion = "0.1.0";

/// Named initial pure-state shape on the grid.
struct ShapeSpec {
  std::string name;  // gaussian | box | step
  double center = 0.0, width = 1.0;           // gaussian
  double from = 0.0, to = 0.0;                // box / step support
  double split = 0.0, hi = 1.0, lo = 1.0;     // step levels
};

struct ComponentSpec {
  double weight = 0.0;
  ShapeSpec shape;
};

struct InitialSpec {
  std::string type;  // mixture | pure_samples | diagonal
  std::vector<ComponentSpec> components;  // mixture
  std::vector<double> re, im;             // pure_samples at the grid points
  std::vector<double> diagonal;           // diagonal density-matrix entries
};

struct HamiltonianSpec {
  double hop = 0.0;
  std::string potential_name = "zero";  // zero | harmonic
  double k = 0.0;                       // harmonic strength
  double eps = 0.0;
  double alpha = 1.0;
  bool periodic = false;
};

struct EvolutionSpec {
  std::string method = "CocycleMidpoint";  // CocycleMidpoint | RK4Direct
  double dt = 1e-3;
  double T = 1.0;
  int sample_every = 10;
  int midpoint_iterations = 3;
};

struct OutputSpec {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

struct ExperimentConfig {
  std::string scenario;
  int grid_n = 1;
  double x_min = 0.0, x_max = 0.0;
  int points = 0;
  HamiltonianSpec hamiltonian;
  InitialSpec initial;
  EvolutionSpec evolution;
  OutputSpec output;
  std::string raw;  // exact config text, hashed into the report

  GridSpec grid() const;
  EvolutionMethod method() const;
};

const std::vector<std::string>& scenario_names();

/// Parse and validate a config document. Errors name the offending key.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// One measured check. `pass` uses `at_least` to pick the comparison
/// direction: false means value <= threshold, true means value >= threshold
/// (used for effects that must be present, not absent).
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool at_least = false;
  bool pass = false;
};

struct RunReport {
  std::string scenario;
  std::string tool_version;
  std::string config_hash;
  std::vector<Check> checks;
  std::vector<std::string> outputs;

  bool verdict() const;
  std::string to_json(const ExperimentConfig& cfg) const;
};

/// Execute the configured scenario, writing CSV/JSON artifacts into out_dir.
/// `seed` feeds the randomized audit scenario only.
RunReport run(const ExperimentConfig& cfg, const std::string& out_dir,
              std::uint64_t seed);

/// CSV columns: t, Q, trace, purity, eigenvalues descending (w1..wd).
/// Floats are printed round-trip exact, so identical runs produce identical
/// bytes. Returns the paths written.
std::vector<std::string> export_trajectory(const Trajectory& t,
                                           const std::string& csv_path);

/// One CSV per mixture component plus one for the barycenter (whose Q column
/// needs the functional re-evaluated).
std::vector<std::string> export_trajectory(const MixtureTrajectory& t,
                                           const DifferentiableFunctional& q,
                                           const std::string& directory,
                                           const std::string& stem);

/// FNV-1a (64-bit) hex digest; stamps configs into reports.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace rhoflow

#endif
