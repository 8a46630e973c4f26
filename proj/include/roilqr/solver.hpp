#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "roilqr/dynamics.hpp"
#include "roilqr/lqr.hpp"
#include "roilqr/pod.hpp"
#include "roilqr/sysid.hpp"

namespace roilqr::solver {

enum class Mode { Reduced, Full };

struct SolverConfig {
  double convergence = 1e-4;        // stop once J_m / J_{m-1} >= 1 - convergence
  int max_iterations = 50;
  double line_search_threshold = 0.3;  // accept when realized/predicted >= this
  double initial_step = 1.0;
  double step_shrink = 0.5;
  double min_step = 1e-8;
  pod::PodOptions pod;
  Mode mode = Mode::Reduced;
  std::uint64_t seed = 0;
  lqr::Regularizer regularizer;
  sysid::PerturbationConfig perturbation;
  bool keep_iterates = false;  // store every accepted trajectory in the report
  double time_limit = 0.0;     // seconds; 0 = unlimited, checked between iterations

  void validate() const;
};

struct Problem {
  std::shared_ptr<const Dynamics> model;
  lqr::CostModel cost;
  Vector x0;
  std::vector<Vector> initial_controls;

  int horizon() const { return static_cast<int>(initial_controls.size()); }
};

enum class Status { Converged, MaxIterations, NoDescent, Failed, TimeLimit };
const char* to_string(Status status);

struct PhaseTimes {
  double pod = 0.0;
  double sysid = 0.0;
  double backward = 0.0;
  double forward = 0.0;
};

/// One accepted iterate. Record 0 is the initial guess.
struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  int modes = 0;          // POD modes of this iterate's trajectory
  double residual = 0.0;  // projection residual of that basis
  double step = 0.0;      // accepted line-search step
  int trials = 0;         // forward passes tried
  int rollouts = 0;       // identification samples per timestep
  double expected_improvement = 0.0;
  PhaseTimes seconds;     // wall-clock, excluded from reproducible outputs
};

struct SolveReport {
  std::vector<IterationRecord> iterations;
  Trajectory trajectory;
  std::vector<Trajectory> iterates;  // only with keep_iterates
  Status status = Status::Failed;
  std::string message;
  double total_seconds = 0.0;
  Mode mode = Mode::Reduced;

  bool converged() const { return status == Status::Converged; }
  double final_cost() const;
  std::vector<double> costs() const;
  PhaseTimes phase_totals() const;
};

struct ForwardResult {
  Trajectory trajectory;
  double cost = 0.0;
  double expected_improvement = 0.0;
  bool diverged = false;
};

/// Rolls the nonlinear model forward under
///   u_t = u_bar_t - alpha k_t - K_t (alpha_t^new - alpha_t^old),
/// with reduced deviations Phi^T (x_t^new - x_t^old) (a null basis uses the
/// full deviation). A divergent rollout is reported with infinite cost.
ForwardResult forward_pass(const Dynamics& model, const lqr::CostModel& cost,
                           const Trajectory& previous,
                           const lqr::GainSchedule& gains,
                           const pod::ReducedBasis* basis, double alpha);

struct LineSearchResult {
  bool accepted = false;
  ForwardResult result;
  double step = 0.0;
  int trials = 0;
};

/// Backtracking on alpha until (J_prev - J_new) / expected(alpha) reaches
/// the threshold. Not accepted once alpha drops below `min_step`.
LineSearchResult line_search(const Dynamics& model, const lqr::CostModel& cost,
                             const Trajectory& previous, double previous_cost,
                             const lqr::GainSchedule& gains,
                             const pod::ReducedBasis* basis,
                             const SolverConfig& config);

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Reduced-order ILQR (or plain ILQR with Mode::Full). Never throws for
/// numerical failures: they end the run with Status::Failed and the
/// history so far.
SolveReport solve(const Problem& problem, const SolverConfig& config,
                  const IterationCallback& on_iteration = {});

/// Seed used for the identification data of outer iteration `iteration`.
std::uint64_t iteration_seed(std::uint64_t seed, int iteration);

}  // namespace roilqr::solver
