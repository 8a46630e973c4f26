// Command-line front end: solve, benchmark, verify-bounds, repeat.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "roilqr/errors.hpp"
#include "roilqr/harness.hpp"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumerical = 3, kNoDescent = 4 };

struct Flags {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--preset", f.preset, "Built-in preset (overrides the config's preset)");
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--mode", f.mode, "Solver mode")->check(CLI::IsMember({"reduced", "full"}));
}

roilqr::harness::ExperimentConfig resolve(const Flags& f) {
  using namespace roilqr;
  std::optional<std::string> preset;
  if (!f.preset.empty()) preset = f.preset;
  harness::ExperimentConfig cfg;
  if (!f.config.empty()) {
    cfg = harness::load_config(f.config, preset);
  } else if (preset) {
    cfg = harness::preset(*preset);
  } else {
    throw ConfigError("give --config or --preset");
  }
  if (f.seed) cfg.solver.seed = *f.seed;
  if (!f.mode.empty())
    cfg.solver.mode = f.mode == "full" ? solver::Mode::Full : solver::Mode::Reduced;
  harness::validate(cfg);
  return cfg;
}

int status_exit(roilqr::solver::Status s) {
  using roilqr::solver::Status;
  switch (s) {
    case Status::Failed: return kNumerical;
    case Status::NoDescent: return kNoDescent;
    default: return kOk;
  }
}

void print_report(const roilqr::solver::SolveReport& r) {
  std::printf("status: %s (%s)\n", roilqr::solver::to_string(r.status), r.message.c_str());
  std::printf("iterations: %zu  final cost: %.10g  modes: %d  time: %.3fs\n",
              r.iterations.empty() ? 0 : r.iterations.size() - 1, r.final_cost(),
              r.iterations.empty() ? 0 : r.iterations.back().modes, r.total_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace roilqr;
  CLI::App app{"Reduced-order ILQR for PDE control"};
  app.require_subcommand(1);

  Flags f;
  auto* solve = app.add_subcommand("solve", "Run one optimization");
  auto* bench = app.add_subcommand("benchmark", "Reduced vs full-order comparison");
  auto* verify = app.add_subcommand("verify-bounds", "Measure the convergence-analysis bounds");
  auto* repeat = app.add_subcommand("repeat", "Repeatability sweep over seeded initial guesses");
  for (auto* sub : {solve, bench, verify, repeat}) add_flags(sub, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const auto cfg = resolve(f);
    const std::string name = app.get_subcommands().front()->get_name();
    const std::filesystem::path out = f.out.empty() ? "runs/" + name : f.out;

    if (solve->parsed()) {
      const auto o = harness::run_solve(cfg, out);
      print_report(o.report);
      if (cfg.problem == harness::ProblemKind::Burgers)
        std::printf("terminal max |u - goal|: %.6g\n", o.terminal_linf_error);
      return status_exit(o.report.status);
    }
    if (bench->parsed()) {
      const auto b = harness::run_benchmark(cfg, out);
      std::printf("reduced: ");
      print_report(b.reduced.report);
      std::printf("full:    ");
      print_report(b.full.report);
      if (b.full.timed_out) {
        std::printf("full-order leg hit the %.0fs budget\n", cfg.time_budget);
      } else {
        std::printf("speedup (full/reduced wall clock): %.3f\ncost gap (reduced/full - 1): %.4f\n",
                    b.speedup, b.cost_gap);
      }
      return status_exit(b.reduced.report.status);
    }
    if (verify->parsed()) {
      const auto v = harness::run_verify_bounds(cfg, out);
      for (std::size_t k = 0; k < v.instances.size(); ++k) {
        const auto& r = v.instances[k];
        std::printf("instance %zu: lemma1 %s (gap %.3g <= %.3g)  lemma2 %s  lemma3 %s (%.3g <= %.3g)\n",
                    k, r.lemma1.holds ? "ok" : "VIOLATED", r.lemma1.max_gap, r.lemma1.bound,
                    r.lemma3.lemma2_holds ? "ok" : "VIOLATED",
                    r.lemma3.lemma3_holds ? "ok" : "VIOLATED", r.lemma3.control_distance,
                    r.lemma3.delta);
      }
      if (v.trace)
        std::printf("S_inf trace: delta %.3g, final iterate %s\n", v.trace->delta,
                    v.trace->final_member ? "inside" : "outside");
      return v.passed() ? kOk : kCheckFailed;
    }
    if (repeat->parsed()) {
      const auto o = harness::run_repeatability(cfg, out);
      std::printf("runs: %zu  mean final cost: %.10g  std: %.3g  relative spread: %.4f (limit %.3f)%s\n",
                  o.runs.size(), o.mean, o.stddev, o.relative_spread,
                  cfg.repeat.spread_threshold, o.partial ? "  [partial]" : "");
      if (o.partial) return kNumerical;
      return o.within_threshold ? kOk : kCheckFailed;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
