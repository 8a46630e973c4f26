#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "roilqr/errors.hpp"
#include "roilqr/harness.hpp"

namespace roilqr::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json controls_json(const Trajectory& traj) {
  json rows = json::array();
  for (const auto& u : traj.controls) rows.push_back(std::vector<double>(u.data(), u.data() + u.size()));
  return rows;
}

json phase_json(const solver::PhaseTimes& p) {
  return {{"pod", p.pod}, {"sysid", p.sysid}, {"backward", p.backward}, {"forward", p.forward}};
}

double terminal_error(const ExperimentConfig& cfg, const solver::SolveReport& r) {
  if (r.trajectory.states.empty()) return std::numeric_limits<double>::quiet_NaN();
  const Vector& xT = r.trajectory.states.back();
  if (cfg.problem == ProblemKind::Burgers)
    return (xT.array() - cfg.goal_value).abs().maxCoeff();
  const Vector goal = build_problem(cfg, 0.0, 0).cost.goal;
  return (xT - goal).cwiseAbs().maxCoeff();
}

json metadata(const std::string& command, const std::string& started) {
  return {{"command", command},
          {"started_at", started},
          {"finished_at", utc_now()},
          {"omp_max_threads", omp_get_max_threads()}};
}

solver::SolveReport solve_config(const ExperimentConfig& cfg, solver::Mode mode,
                                 std::uint64_t seed, double guess_std,
                                 std::uint64_t guess_seed, double time_limit = 0.0) {
  auto problem = build_problem(cfg, guess_std, guess_seed);
  auto sc = cfg.solver;
  sc.mode = mode;
  sc.seed = seed;
  sc.time_limit = time_limit;
  return solver::solve(problem, sc);
}

void write_solve_outputs(const ExperimentConfig& cfg, const solver::SolveReport& r,
                         const fs::path& dir, const std::string& command,
                         const std::string& started) {
  make_dir(dir);
  write_iterations_csv(r, dir / "iterations.csv");
  write_snapshots_csv(r.trajectory, dir / "trajectory_snapshots.csv");
  auto rep = report_json(cfg, r);
  rep["terminal_linf_error"] = finite_or_null(terminal_error(cfg, r));
  write_json(rep, dir / "report.json");
  auto meta = metadata(command, started);
  meta["timing"] = timing_json(r);
  write_json(meta, dir / "metadata.json");
}

}  // namespace

void write_iterations_csv(const solver::SolveReport& report, const fs::path& path) {
  auto out = open_out(path);
  out << "# roilqr iterations v1\n"
      << "iteration,cost,modes,residual,step,trials,rollouts,expected_improvement\n";
  for (const auto& r : report.iterations)
    out << r.iteration << ',' << r.cost << ',' << r.modes << ',' << r.residual << ','
        << r.step << ',' << r.trials << ',' << r.rollouts << ',' << r.expected_improvement
        << '\n';
}

void write_snapshots_csv(const Trajectory& traj, const fs::path& path) {
  auto out = open_out(path);
  const int T = traj.horizon();
  const std::vector<int> times = {0, static_cast<int>(std::lround(T / 3.0)),
                                  static_cast<int>(std::lround(2.0 * T / 3.0)), T};
  out << "# roilqr snapshots v1\npoint";
  for (int t : times) out << ",t" << t;
  out << '\n';
  if (traj.states.empty()) return;
  const auto n = traj.states.front().size();
  for (Eigen::Index i = 0; i < n; ++i) {
    out << i;
    for (int t : times) out << ',' << traj.states[t][i];
    out << '\n';
  }
}

json report_json(const ExperimentConfig& cfg, const solver::SolveReport& r) {
  json costs = json::array(), modes = json::array(), residuals = json::array();
  for (const auto& it : r.iterations) {
    costs.push_back(it.cost);
    modes.push_back(it.modes);
    residuals.push_back(it.residual);
  }
  return {{"config", to_json(cfg)},
          {"mode", r.mode == solver::Mode::Reduced ? "reduced" : "full"},
          {"status", solver::to_string(r.status)},
          {"message", r.message},
          {"converged", r.converged()},
          {"iterations", static_cast<int>(r.iterations.size()) - 1},
          {"final_cost", finite_or_null(r.final_cost())},
          {"costs", costs},
          {"modes", modes},
          {"residuals", residuals},
          {"final_controls", controls_json(r.trajectory)}};
}

json timing_json(const solver::SolveReport& r) {
  json per = json::array();
  for (const auto& it : r.iterations) per.push_back(phase_json(it.seconds));
  return {{"total_seconds", r.total_seconds},
          {"phase_totals", phase_json(r.phase_totals())},
          {"per_iteration", per}};
}

void write_json(const json& j, const fs::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

SolveOutcome run_solve(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto started = utc_now();
  SolveOutcome o;
  o.report = solve_config(cfg, cfg.solver.mode, cfg.solver.seed, cfg.initial_guess_std,
                          cfg.solver.seed);
  o.terminal_linf_error = terminal_error(cfg, o.report);
  make_dir(out);
  write_solve_outputs(cfg, o.report, out, "solve", started);
  return o;
}

BenchmarkRecord run_benchmark(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto started = utc_now();
  BenchmarkRecord b;
  const auto seed = cfg.solver.seed;
  b.reduced.report = solve_config(cfg, solver::Mode::Reduced, seed, cfg.initial_guess_std, seed);
  b.full.report = solve_config(cfg, solver::Mode::Full, seed, cfg.initial_guess_std, seed,
                               cfg.time_budget);
  b.full.timed_out = b.full.report.status == solver::Status::TimeLimit;
  for (auto* leg : {&b.reduced, &b.full})
    leg->final_modes = leg->report.iterations.empty() ? 0 : leg->report.iterations.back().modes;
  b.speedup = b.full.report.total_seconds / b.reduced.report.total_seconds;
  b.cost_gap = b.reduced.report.final_cost() / b.full.report.final_cost() - 1.0;

  make_dir(out);
  write_solve_outputs(cfg, b.reduced.report, out / "reduced", "benchmark", started);
  write_solve_outputs(cfg, b.full.report, out / "full", "benchmark", started);

  auto leg_json = [](const BenchmarkLeg& leg) {
    const auto& r = leg.report;
    json rollouts = json::array();
    for (const auto& it : r.iterations) rollouts.push_back(it.rollouts);
    return json{{"status", solver::to_string(r.status)},
                {"timed_out", leg.timed_out},
                {"final_cost", finite_or_null(r.final_cost())},
                {"iterations", static_cast<int>(r.iterations.size()) - 1},
                {"final_modes", leg.final_modes},
                {"rollouts", rollouts}};
  };
  json rec = {{"config", to_json(cfg)},
              {"reduced", leg_json(b.reduced)},
              {"full", leg_json(b.full)},
              {"cost_gap", b.full.timed_out ? json(nullptr) : finite_or_null(b.cost_gap)},
              {"cost_gap_limit", 0.14}};
  write_json(rec, out / "benchmark.json");

  auto meta = metadata("benchmark", started);
  meta["reduced"] = timing_json(b.reduced.report);
  meta["full"] = timing_json(b.full.report);
  meta["speedup"] = b.full.timed_out ? json(nullptr) : finite_or_null(b.speedup);
  write_json(meta, out / "metadata.json");
  return b;
}

bool VerifyOutcome::passed() const {
  return !instances.empty() &&
         std::all_of(instances.begin(), instances.end(),
                     [](const auto& r) { return r.passed(); });
}

VerifyOutcome run_verify_bounds(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto started = utc_now();
  VerifyOutcome v;
  const auto base = cfg.solver.seed;
  json instances = json::array();
  for (int k = 0; k < cfg.bounds.instances; ++k) {
    const auto seed = solver::iteration_seed(base, 1000 + k);
    auto problem = build_problem(cfg, cfg.bounds.nominal_std, seed);
    const auto nominal = rollout(*problem.model, problem.x0, problem.initial_controls);
    auto pert = cfg.solver.perturbation;
    pert.seed = seed;
    const auto pair = bounds::identify_pair(*problem.model, problem.cost, nominal,
                                            cfg.solver.pod, pert);
    auto rep = bounds::verify(pair, cfg.bounds.samples, seed, cfg.bounds.control_scale);
    json j = rep;
    j["instance"] = k;
    instances.push_back(j);
    v.instances.push_back(rep);
  }

  json doc = {{"config", to_json(cfg)}, {"instances", instances}};
  if (cfg.bounds.trace) {
    auto problem = build_problem(cfg, cfg.initial_guess_std, base);
    auto sc = cfg.solver;
    sc.mode = solver::Mode::Reduced;
    sc.keep_iterates = true;
    const auto report = solver::solve(problem, sc);
    v.trace = bounds::trace_s_infinity(*problem.model, problem.cost, report.iterates,
                                       cfg.solver.pod, cfg.solver.perturbation,
                                       cfg.bounds.samples, base);
    doc["s_infinity"] = *v.trace;
    doc["s_infinity"]["solve_status"] = solver::to_string(report.status);
  }
  doc["passed"] = v.passed();

  make_dir(out);
  write_json(doc, out / "bounds.json");
  write_json(metadata("verify-bounds", started), out / "metadata.json");
  return v;
}

RepeatOutcome run_repeatability(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  if (cfg.repeat.count < 2) throw ConfigError("repeat.count must be >= 2");
  const auto started = utc_now();
  RepeatOutcome o;
  make_dir(out);

  json runs = json::array();
  for (int k = 0; k < cfg.repeat.count; ++k) {
    const std::uint64_t seed = cfg.solver.seed + static_cast<std::uint64_t>(k);
    const auto run_started = utc_now();
    auto r = solve_config(cfg, cfg.solver.mode, seed, cfg.repeat.guess_std, seed);
    const fs::path dir = out / ("seed_" + std::to_string(seed));
    make_dir(dir);
    write_solve_outputs(cfg, r, dir, "repeat", run_started);
    runs.push_back({{"seed", seed}, {"status", solver::to_string(r.status)},
                    {"final_cost", finite_or_null(r.final_cost())}});
    if (r.status == solver::Status::Failed || r.iterations.empty()) {
      o.partial = true;
    } else {
      o.final_costs.push_back(r.final_cost());
    }
    o.runs.push_back(std::move(r));
  }

  if (!o.final_costs.empty()) {
    const double n = static_cast<double>(o.final_costs.size());
    o.mean = std::accumulate(o.final_costs.begin(), o.final_costs.end(), 0.0) / n;
    double ss = 0.0;
    for (double c : o.final_costs) ss += (c - o.mean) * (c - o.mean);
    o.stddev = o.final_costs.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    const auto [lo, hi] = std::minmax_element(o.final_costs.begin(), o.final_costs.end());
    o.relative_spread = o.mean != 0.0 ? (*hi - *lo) / std::abs(o.mean) : 0.0;
  }
  o.within_threshold = !o.partial && o.relative_spread <= cfg.repeat.spread_threshold;

  // Runs that stopped early carry their final cost forward.
  std::size_t longest = 0;
  for (const auto& r : o.runs) longest = std::max(longest, r.iterations.size());
  {
    auto csv = open_out(out / "aggregate.csv");
    csv << "# roilqr repeat aggregate v1\niteration,mean,std,runs\n";
    for (std::size_t i = 0; i < longest; ++i) {
      std::vector<double> vals;
      for (const auto& r : o.runs) {
        if (r.iterations.empty()) continue;
        vals.push_back(r.iterations[std::min(i, r.iterations.size() - 1)].cost);
      }
      const double n = static_cast<double>(vals.size());
      const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
      double ss = 0.0;
      for (double c : vals) ss += (c - mean) * (c - mean);
      csv << i << ',' << mean << ',' << (vals.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0)
          << ',' << vals.size() << '\n';
    }
  }

  json agg = {{"config", to_json(cfg)},
              {"runs", runs},
              {"final_costs", o.final_costs},
              {"mean", o.mean},
              {"std", o.stddev},
              {"coefficient_of_variation", o.mean != 0.0 ? json(o.stddev / std::abs(o.mean)) : json(nullptr)},
              {"relative_spread", o.relative_spread},
              {"spread_threshold", cfg.repeat.spread_threshold},
              {"within_threshold", o.within_threshold},
              {"partial", o.partial}};
  write_json(agg, out / "aggregate.json");
  write_json(metadata("repeat", started), out / "metadata.json");
  return o;
}

}  // namespace roilqr::harness
