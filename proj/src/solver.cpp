#include "roilqr/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "roilqr/errors.hpp"

namespace roilqr::solver {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void SolverConfig::validate() const {
  if (!(convergence > 0.0 && convergence < 1.0))
    throw ConfigError("convergence coefficient must lie in (0, 1)");
  if (!(line_search_threshold > 0.0 && line_search_threshold < 1.0))
    throw ConfigError("line-search threshold must lie in (0, 1)");
  if (!(step_shrink > 0.0 && step_shrink < 1.0))
    throw ConfigError("step shrink factor must lie in (0, 1)");
  if (!(initial_step > 0.0)) throw ConfigError("initial step must be positive");
  if (!(min_step > 0.0)) throw ConfigError("minimum step must be positive");
  if (max_iterations < 0) throw ConfigError("max iterations must be >= 0");
  if (time_limit < 0.0) throw ConfigError("time limit must be >= 0");
  if (!(pod.energy_cutoff > 0.0 && pod.energy_cutoff <= 1.0))
    throw ConfigError("energy cutoff must lie in (0, 1]");
  if (regularizer.mu < 0.0 || regularizer.mu_min > regularizer.mu_max ||
      regularizer.increase <= 1.0 || regularizer.decrease <= 1.0)
    throw ConfigError("invalid regularization schedule");
}

const char* to_string(Status status) {
  switch (status) {
    case Status::Converged: return "converged";
    case Status::MaxIterations: return "max_iterations";
    case Status::NoDescent: return "no_descent";
    case Status::Failed: return "failed";
    case Status::TimeLimit: return "time_limit";
  }
  return "unknown";
}

double SolveReport::final_cost() const {
  return iterations.empty() ? std::numeric_limits<double>::quiet_NaN()
                            : iterations.back().cost;
}

std::vector<double> SolveReport::costs() const {
  std::vector<double> c;
  c.reserve(iterations.size());
  for (const auto& r : iterations) c.push_back(r.cost);
  return c;
}

PhaseTimes SolveReport::phase_totals() const {
  PhaseTimes p;
  for (const auto& r : iterations) {
    p.pod += r.seconds.pod;
    p.sysid += r.seconds.sysid;
    p.backward += r.seconds.backward;
    p.forward += r.seconds.forward;
  }
  return p;
}

std::uint64_t iteration_seed(std::uint64_t seed, int iteration) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(iteration) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ForwardResult forward_pass(const Dynamics& model, const lqr::CostModel& cost,
                           const Trajectory& previous,
                           const lqr::GainSchedule& gains,
                           const pod::ReducedBasis* basis, double alpha) {
  const int T = previous.horizon();
  if (gains.horizon() != T)
    throw DimensionError("forward_pass: gain schedule horizon mismatch");

  ForwardResult out;
  out.expected_improvement = gains.expected_improvement(alpha);
  Trajectory& traj = out.trajectory;
  traj.states.reserve(T + 1);
  traj.controls.reserve(T);
  traj.states.push_back(previous.states.front());

  for (int t = 0; t < T; ++t) {
    const Vector dx = traj.states[t] - previous.states[t];
    const Vector da = basis ? basis->project(dx) : dx;
    if (da.size() != gains.K[t].cols())
      throw DimensionError("forward_pass: gains do not match the basis");
    traj.controls.push_back(previous.controls[t] - alpha * gains.k[t] -
                            gains.K[t] * da);
    try {
      traj.states.push_back(model.step(traj.states[t], traj.controls[t]));
    } catch (const DivergenceError&) {
      out.diverged = true;
      out.cost = std::numeric_limits<double>::infinity();
      return out;
    }
  }
  out.cost = cost.total(traj);
  if (!std::isfinite(out.cost)) {
    out.diverged = true;
    out.cost = std::numeric_limits<double>::infinity();
  }
  return out;
}

LineSearchResult line_search(const Dynamics& model, const lqr::CostModel& cost,
                             const Trajectory& previous, double previous_cost,
                             const lqr::GainSchedule& gains,
                             const pod::ReducedBasis* basis,
                             const SolverConfig& config) {
  LineSearchResult ls;
  for (double alpha = config.initial_step; alpha >= config.min_step;
       alpha *= config.step_shrink) {
    ForwardResult fr = forward_pass(model, cost, previous, gains, basis, alpha);
    ++ls.trials;
    if (fr.diverged || !(fr.expected_improvement > 0.0)) continue;
    const double z = (previous_cost - fr.cost) / fr.expected_improvement;
    if (z >= config.line_search_threshold && fr.cost < previous_cost) {
      ls.accepted = true;
      ls.step = alpha;
      ls.result = std::move(fr);
      return ls;
    }
  }
  return ls;
}

SolveReport solve(const Problem& problem, const SolverConfig& config,
                  const IterationCallback& on_iteration) {
  config.validate();
  if (!problem.model) throw ConfigError("problem has no dynamics model");
  const Dynamics& model = *problem.model;
  problem.cost.validate(model.state_dim(), model.control_dim());

  const auto start = Clock::now();
  const bool reduced = config.mode == Mode::Reduced;
  SolveReport report;
  report.mode = config.mode;
  lqr::Regularizer reg = config.regularizer;

  auto emit = [&](const IterationRecord& r) {
    report.iterations.push_back(r);
    if (on_iteration) on_iteration(r);
  };

  try {
    Trajectory traj = rollout(model, problem.x0, problem.initial_controls);
    double cost = problem.cost.total(traj);
    if (!std::isfinite(cost)) throw NumericalError("initial cost is not finite");

    pod::ReducedBasis basis;
    auto refresh_basis = [&](IterationRecord& r) {
      const auto t0 = Clock::now();
      if (reduced) {
        basis = pod::method_of_snapshots(pod::snapshot_matrix(traj), config.pod);
        r.modes = basis.rank();
        r.residual = basis.projection_residual(traj);
      } else {
        r.modes = model.state_dim();
        r.residual = 0.0;
      }
      r.seconds.pod = seconds_since(t0);
    };

    IterationRecord initial;
    initial.cost = cost;
    refresh_basis(initial);
    emit(initial);
    report.trajectory = traj;
    if (config.keep_iterates) report.iterates.push_back(traj);
    report.status = Status::MaxIterations;

    for (int m = 1; m <= config.max_iterations; ++m) {
      IterationRecord rec;
      rec.iteration = m;
      const pod::ReducedBasis* phi = reduced ? &basis : nullptr;

      auto t0 = Clock::now();
      sysid::PerturbationConfig pert = config.perturbation;
      pert.seed = iteration_seed(config.seed, m);
      const auto data = sysid::generate_rollout_data(model, traj, phi, pert);
      const auto ltv = sysid::fit_ltv(data, pert.condition_limit);
      rec.rollouts = static_cast<int>(data.X.empty() ? 0 : data.X[0].cols());
      rec.seconds.sysid = seconds_since(t0);

      t0 = Clock::now();
      const auto terms = lqr::reduce_cost(problem.cost, traj, phi);
      const auto gains = lqr::backward_pass(ltv, terms, reg);
      rec.seconds.backward = seconds_since(t0);
      rec.expected_improvement = gains.expected_improvement(1.0);

      if (rec.expected_improvement <= 1e-12 * std::abs(cost)) {
        report.status = Status::Converged;
        report.message = "no predicted improvement";
        break;
      }

      t0 = Clock::now();
      auto ls = line_search(model, problem.cost, traj, cost, gains, phi, config);
      rec.seconds.forward = seconds_since(t0);
      rec.trials = ls.trials;
      if (!ls.accepted) {
        report.status = Status::NoDescent;
        report.message = "line search found no step realizing the predicted decrease";
        break;
      }

      const double previous_cost = cost;
      traj = std::move(ls.result.trajectory);
      cost = ls.result.cost;
      rec.cost = cost;
      rec.step = ls.step;
      refresh_basis(rec);
      emit(rec);
      report.trajectory = traj;
      if (config.keep_iterates) report.iterates.push_back(traj);

      if (cost / previous_cost >= 1.0 - config.convergence) {
        report.status = Status::Converged;
        report.message = "relative cost improvement below tolerance";
        break;
      }
      if (config.time_limit > 0.0 && seconds_since(start) > config.time_limit) {
        report.status = Status::TimeLimit;
        report.message = "time limit reached";
        break;
      }
    }
  } catch (const NumericalError& e) {
    report.status = Status::Failed;
    report.message = e.what();
  }

  report.total_seconds = seconds_since(start);
  return report;
}

}  // namespace roilqr::solver
