#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roilqr/bounds.hpp"
#include "roilqr/pde.hpp"
#include "roilqr/solver.hpp"

namespace roilqr::harness {

enum class ProblemKind { Burgers, AllenCahn, CahnHilliard };

struct CostWeights {
  double state = 1.0;     // Q = state * I
  double terminal = 1.0;  // Q_T = terminal * I
  double control = 1.0;   // R = control * I
};

struct RepeatSettings {
  int count = 10;
  double spread_threshold = 0.05;  // (max - min) / mean of final costs
  double guess_std = 0.1;          // seeded Gaussian initial controls
};

struct BoundsSettings {
  int instances = 3;
  int samples = 200;
  double control_scale = 1.0;
  double nominal_std = 0.1;  // seeded Gaussian controls of each nominal
  bool trace = false;        // also trace S_inf along a reduced solve
};

struct ExperimentConfig {
  std::string preset;
  ProblemKind problem = ProblemKind::Burgers;
  int grid_points = 100;
  int horizon = 20;
  pde::PdeParams pde;
  std::string mask = "half_plane";  // or "disk"
  double mask_radius = 0.0;         // disk radius in grid points; 0 = n/4
  /// Burgers: amplitude of sin(pi x). Phase field: amplitude of a cosine in
  /// the column index.
  double initial_amplitude = 1.0;
  double goal_value = -0.5;  // Burgers only; phase fields target the mask
  CostWeights cost;
  solver::SolverConfig solver;
  double initial_guess_std = 0.0;  // 0 = zero controls
  RepeatSettings repeat;
  BoundsSettings bounds;
  double time_budget = 600.0;  // seconds, full-order benchmark leg
};

const std::vector<std::string>& preset_names();
/// Throws ConfigError for unknown names.
ExperimentConfig preset(const std::string& name);

/// Parses a JSON (comments allowed) config. Either "preset" or the trio
/// "problem", "grid_points", "horizon" is required; unknown keys are errors.
ExperimentConfig parse_config(const std::string& text,
                              const std::optional<std::string>& preset_override = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::optional<std::string>& preset_override = {});

void validate(const ExperimentConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);

const char* to_string(ProblemKind kind);

/// Model, cost, x0 and initial guess. A nonzero `guess_std` draws the
/// initial controls from N(0, guess_std^2) with `guess_seed`.
solver::Problem build_problem(const ExperimentConfig& cfg, double guess_std,
                              std::uint64_t guess_seed);
std::shared_ptr<const Dynamics> build_model(const ExperimentConfig& cfg,
                                            pde::Backend backend = pde::Backend::Parallel);

/// Output writers. Everything except metadata.json is reproducible.
void write_iterations_csv(const solver::SolveReport& report,
                          const std::filesystem::path& path);
void write_snapshots_csv(const Trajectory& traj, const std::filesystem::path& path);
nlohmann::json report_json(const ExperimentConfig& cfg,
                           const solver::SolveReport& report);
nlohmann::json timing_json(const solver::SolveReport& report);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

struct SolveOutcome {
  solver::SolveReport report;
  double terminal_linf_error = 0.0;  // Burgers: max |x_T - goal|
};

SolveOutcome run_solve(const ExperimentConfig& cfg,
                       const std::filesystem::path& out);

struct BenchmarkLeg {
  solver::SolveReport report;
  bool timed_out = false;
  int final_modes = 0;
};

struct BenchmarkRecord {
  BenchmarkLeg reduced;
  BenchmarkLeg full;
  double speedup = 0.0;   // full / reduced wall clock
  double cost_gap = 0.0;  // reduced / full final cost - 1
};

BenchmarkRecord run_benchmark(const ExperimentConfig& cfg,
                              const std::filesystem::path& out);

struct VerifyOutcome {
  std::vector<bounds::BoundsReport> instances;
  std::optional<bounds::SInfinityTrace> trace;
  bool passed() const;
};

VerifyOutcome run_verify_bounds(const ExperimentConfig& cfg,
                                const std::filesystem::path& out);

struct RepeatOutcome {
  std::vector<solver::SolveReport> runs;
  std::vector<double> final_costs;
  double mean = 0.0;
  double stddev = 0.0;
  double relative_spread = 0.0;
  bool partial = false;
  bool within_threshold = false;
};

RepeatOutcome run_repeatability(const ExperimentConfig& cfg,
                                const std::filesystem::path& out);

}  // namespace roilqr::harness
