#pragma once

#include "hgdg/config.hpp"
#include "hgdg/harness.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace hgdg {

struct EnergySample {
  double t;
  BulkEnergies computed;
  /// Linear theory; only filled for the Jeans case.
  std::optional<BulkEnergies> analytic;
};

/// Solution values along y = 0, x >= 0.
struct Slice {
  double t = 0.0;
  /// Native LGL nodes on the elements touching the line from above.
  std::vector<double> x, rho, phi;
};

struct RunResult {
  std::string experiment;
  double t_final = 0.0;
  std::size_t steps = 0;
  /// Pseudotime steps of a steady-state run, or gravity sub-cycles summed over a coupled run.
  std::size_t total_subcycles = 0;
  std::size_t gravity_solves = 0;
  double final_residual = 0.0;
  std::map<std::size_t, std::size_t> subcycle_histogram;

  std::vector<std::string> variables;
  /// L2 errors against the exact solution, if the case has one.
  std::vector<double> errors;

  std::size_t element_steps = 0;
  int min_level = 0;
  int max_level = 0;
  std::size_t final_elements = 0;

  std::vector<EnergySample> energies;
  std::vector<Slice> slices;

  double euler_seconds = 0.0;
  double gravity_seconds = 0.0;
  double amr_seconds = 0.0;
  double total_seconds = 0.0;
};

/// Called with the mesh and both states (gravity may be empty) after each
/// snapshot time is reached.
using SnapshotFn = std::function<void(double t, const DGMesh& mesh, const Field& euler, const Field& gravity)>;

/// Runs one configured experiment. Solver failures are rethrown with the
/// step number and time added to the message.
RunResult run_experiment(const RunConfig& config, const SnapshotFn& on_snapshot = {});

/// Evaluates variable `var` of `field` at (x, 0) from the elements above the line.
std::vector<double> sample_line(const DGMesh& mesh, const Field& field, int var, const std::vector<double>& xs);

Slice extract_slice(double t, const DGMesh& mesh, const Field& euler, const Field& gravity);

/// Writes nodes, level map and slice CSVs for one snapshot into `dir`.
void write_snapshot(const std::string& dir, double t, const DGMesh& mesh, const Field& euler, const Field& gravity);

/// Writes errors.csv, energies.csv, subcycles.csv and summary.json as applicable.
void write_run_outputs(const std::string& dir, const RunConfig& config, const RunResult& result);

struct ConvergenceResult {
  std::vector<int> levels;
  std::vector<double> h;
  std::vector<RunResult> runs;
  EocReport report;
};

/// One run per level, then EOC. Throws InvalidArgument with fewer than two levels.
ConvergenceResult run_convergence(const RunConfig& base, const std::vector<int>& levels);

/// Writes eoc.csv and an aligned eoc.txt.
void write_convergence_outputs(const std::string& dir, const ConvergenceResult& result);

/// Full-precision scientific notation used in every CSV.
std::string format_number(double v);

}  // namespace hgdg
