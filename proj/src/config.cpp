#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "roilqr/errors.hpp"
#include "roilqr/harness.hpp"

namespace roilqr::harness {

using nlohmann::json;

namespace {

ExperimentConfig burgers_preset() {
  ExperimentConfig c;
  c.preset = "burgers";
  c.problem = ProblemKind::Burgers;
  c.grid_points = 100;
  c.horizon = 20;
  c.pde.viscosity = 0.1;
  c.pde.dt = 8e-4;
  c.pde.substeps = 400;
  c.initial_amplitude = 1.0;
  c.goal_value = -0.5;
  c.cost = {0.1, 100.0, 0.1};
  c.solver.max_iterations = 50;
  return c;
}

ExperimentConfig allen_cahn_preset(int n, const std::string& mask) {
  ExperimentConfig c;
  c.preset = n == 20 ? "allen_cahn" : "allen_cahn_" + std::to_string(n);
  c.problem = ProblemKind::AllenCahn;
  c.grid_points = n;
  c.horizon = 10;
  c.pde.mobility = 1.0;
  c.pde.dt = 0.01;
  c.pde.substeps = 20;
  c.mask = mask;
  c.initial_amplitude = 0.1;
  c.cost = {0.1, 10.0, 0.01};
  c.solver.max_iterations = 50;
  return c;
}

ExperimentConfig cahn_hilliard_preset() {
  ExperimentConfig c;
  c.preset = "cahn_hilliard";
  c.problem = ProblemKind::CahnHilliard;
  c.grid_points = 20;
  c.horizon = 10;
  c.pde.mobility = 1.0;
  c.pde.dt = 0.005;
  c.pde.substeps = 100;
  c.mask = "half_plane";
  c.initial_amplitude = 0.1;
  c.cost = {0.1, 10.0, 0.01};
  c.solver.max_iterations = 50;
  return c;
}

ProblemKind parse_kind(const std::string& s) {
  if (s == "burgers") return ProblemKind::Burgers;
  if (s == "allen_cahn") return ProblemKind::AllenCahn;
  if (s == "cahn_hilliard") return ProblemKind::CahnHilliard;
  throw ConfigError("unknown problem '" + s +
                    "' (expected burgers, allen_cahn or cahn_hilliard)");
}

solver::Mode parse_mode(const std::string& s) {
  if (s == "reduced") return solver::Mode::Reduced;
  if (s == "full") return solver::Mode::Full;
  throw ConfigError("unknown mode '" + s + "' (expected reduced or full)");
}

// Reads known keys of one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : obj_.items())
      if (!seen_.count(key))
        throw ConfigError("unknown key '" + qualified(key) + "'");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("'" + qualified(key) + "' has the wrong type");
    }
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }
  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void apply_overrides(const json& root, ExperimentConfig& c) {
  Section s(root, "");
  std::string ignored;
  s.get("preset", ignored);
  if (s.has("problem")) {
    std::string kind;
    s.get("problem", kind);
    c.problem = parse_kind(kind);
  }
  s.get("grid_points", c.grid_points);
  s.get("horizon", c.horizon);
  s.get("mask", c.mask);
  s.get("mask_radius", c.mask_radius);
  s.get("initial_amplitude", c.initial_amplitude);
  s.get("goal_value", c.goal_value);
  s.get("initial_guess_std", c.initial_guess_std);
  s.get("time_budget", c.time_budget);

  if (s.has("pde")) {
    Section p(s.child("pde"), "pde");
    p.get("viscosity", c.pde.viscosity);
    p.get("mobility", c.pde.mobility);
    p.get("gradient_coeff", c.pde.gradient_coeff);
    p.get("dt", c.pde.dt);
    p.get("substeps", c.pde.substeps);
  }
  if (s.has("cost")) {
    Section p(s.child("cost"), "cost");
    p.get("state", c.cost.state);
    p.get("terminal", c.cost.terminal);
    p.get("control", c.cost.control);
  }
  if (s.has("solver")) {
    Section p(s.child("solver"), "solver");
    auto& sv = c.solver;
    p.get("convergence", sv.convergence);
    p.get("max_iterations", sv.max_iterations);
    p.get("line_search_threshold", sv.line_search_threshold);
    p.get("initial_step", sv.initial_step);
    p.get("step_shrink", sv.step_shrink);
    p.get("min_step", sv.min_step);
    p.get("energy_cutoff", sv.pod.energy_cutoff);
    p.get("rank_tolerance", sv.pod.rank_tolerance);
    p.get("seed", sv.seed);
    if (p.has("mode")) {
      std::string m;
      p.get("mode", m);
      sv.mode = parse_mode(m);
    }
    if (p.has("regularization")) {
      Section r(p.child("regularization"), "solver.regularization");
      r.get("mu", sv.regularizer.mu);
      r.get("increase", sv.regularizer.increase);
      r.get("decrease", sv.regularizer.decrease);
      r.get("mu_min", sv.regularizer.mu_min);
      r.get("mu_max", sv.regularizer.mu_max);
    }
  }
  if (s.has("perturbation")) {
    Section p(s.child("perturbation"), "perturbation");
    auto& pc = c.solver.perturbation;
    p.get("rollouts", pc.rollouts);
    p.get("state_std", pc.state_std);
    p.get("control_std", pc.control_std);
    p.get("central_difference", pc.central_difference);
    p.get("condition_limit", pc.condition_limit);
  }
  if (s.has("repeat")) {
    Section p(s.child("repeat"), "repeat");
    p.get("count", c.repeat.count);
    p.get("spread_threshold", c.repeat.spread_threshold);
    p.get("guess_std", c.repeat.guess_std);
  }
  if (s.has("bounds")) {
    Section p(s.child("bounds"), "bounds");
    p.get("instances", c.bounds.instances);
    p.get("samples", c.bounds.samples);
    p.get("control_scale", c.bounds.control_scale);
    p.get("nominal_std", c.bounds.nominal_std);
    p.get("trace", c.bounds.trace);
  }
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Burgers: return "burgers";
    case ProblemKind::AllenCahn: return "allen_cahn";
    case ProblemKind::CahnHilliard: return "cahn_hilliard";
  }
  return "unknown";
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"burgers", "allen_cahn",
                                                 "allen_cahn_50", "cahn_hilliard"};
  return names;
}

ExperimentConfig preset(const std::string& name) {
  if (name == "burgers") return burgers_preset();
  if (name == "allen_cahn") return allen_cahn_preset(20, "half_plane");
  if (name == "allen_cahn_50") return allen_cahn_preset(50, "disk");
  if (name == "cahn_hilliard") return cahn_hilliard_preset();
  throw ConfigError("unknown preset '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text,
                              const std::optional<std::string>& preset_override) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig cfg;
  std::string name;
  if (preset_override) {
    name = *preset_override;
  } else if (root.contains("preset")) {
    if (!root["preset"].is_string()) throw ConfigError("'preset' must be a string");
    name = root["preset"].get<std::string>();
  }
  if (!name.empty()) {
    cfg = preset(name);
  } else {
    for (const char* key : {"problem", "grid_points", "horizon"})
      if (!root.contains(key))
        throw ConfigError(std::string("missing required field '") + key +
                          "' (or give a preset)");
    cfg.preset.clear();
  }
  apply_overrides(root, cfg);
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::optional<std::string>& preset_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), preset_override);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void validate(const ExperimentConfig& c) {
  if (c.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (c.problem == ProblemKind::Burgers ? c.grid_points < 4 : c.grid_points < 2)
    throw ConfigError("grid too small (need at least 4 states)");
  if (c.problem != ProblemKind::Burgers && c.mask != "half_plane" && c.mask != "disk")
    throw ConfigError("mask must be half_plane or disk");
  if (c.cost.state < 0 || c.cost.terminal < 0)
    throw ConfigError("state weights must be nonnegative");
  if (!(c.cost.control > 0)) throw ConfigError("control weight must be positive");
  if (c.initial_guess_std < 0) throw ConfigError("initial_guess_std must be >= 0");
  if (!(c.time_budget > 0)) throw ConfigError("time_budget must be positive");
  if (c.repeat.count < 1) throw ConfigError("repeat.count must be >= 1");
  if (!(c.repeat.spread_threshold > 0)) throw ConfigError("repeat.spread_threshold must be positive");
  if (c.repeat.guess_std < 0) throw ConfigError("repeat.guess_std must be >= 0");
  if (c.bounds.instances < 1 || c.bounds.samples < 1)
    throw ConfigError("bounds.instances and bounds.samples must be >= 1");
  if (c.solver.perturbation.rollouts < 0)
    throw ConfigError("perturbation.rollouts must be >= 0");
  c.solver.validate();
  build_model(c);  // grid and stability checks
}

json to_json(const ExperimentConfig& c) {
  const auto& sv = c.solver;
  const auto& pc = sv.perturbation;
  return {
      {"preset", c.preset},
      {"problem", to_string(c.problem)},
      {"grid_points", c.grid_points},
      {"horizon", c.horizon},
      {"pde", {{"viscosity", c.pde.viscosity}, {"mobility", c.pde.mobility},
               {"gradient_coeff", c.pde.gradient_coeff}, {"dt", c.pde.dt},
               {"substeps", c.pde.substeps}}},
      {"mask", c.mask},
      {"mask_radius", c.mask_radius},
      {"initial_amplitude", c.initial_amplitude},
      {"goal_value", c.goal_value},
      {"initial_guess_std", c.initial_guess_std},
      {"cost", {{"state", c.cost.state}, {"terminal", c.cost.terminal},
                {"control", c.cost.control}}},
      {"solver", {{"convergence", sv.convergence},
                  {"max_iterations", sv.max_iterations},
                  {"line_search_threshold", sv.line_search_threshold},
                  {"initial_step", sv.initial_step},
                  {"step_shrink", sv.step_shrink},
                  {"min_step", sv.min_step},
                  {"energy_cutoff", sv.pod.energy_cutoff},
                  {"rank_tolerance", sv.pod.rank_tolerance},
                  {"mode", sv.mode == solver::Mode::Reduced ? "reduced" : "full"},
                  {"seed", sv.seed},
                  {"regularization", {{"mu", sv.regularizer.mu},
                                      {"increase", sv.regularizer.increase},
                                      {"decrease", sv.regularizer.decrease},
                                      {"mu_min", sv.regularizer.mu_min},
                                      {"mu_max", sv.regularizer.mu_max}}}}},
      {"perturbation", {{"rollouts", pc.rollouts}, {"state_std", pc.state_std},
                        {"control_std", pc.control_std},
                        {"central_difference", pc.central_difference},
                        {"condition_limit", pc.condition_limit}}},
      {"repeat", {{"count", c.repeat.count},
                  {"spread_threshold", c.repeat.spread_threshold},
                  {"guess_std", c.repeat.guess_std}}},
      {"bounds", {{"instances", c.bounds.instances}, {"samples", c.bounds.samples},
                  {"control_scale", c.bounds.control_scale},
                  {"nominal_std", c.bounds.nominal_std}, {"trace", c.bounds.trace}}},
      {"time_budget", c.time_budget},
  };
}

std::shared_ptr<const Dynamics> build_model(const ExperimentConfig& c,
                                            pde::Backend backend) {
  const int n = c.grid_points;
  if (c.problem == ProblemKind::Burgers)
    return std::make_shared<pde::BurgersModel>(pde::Grid::interval(n), c.pde, backend);

  const auto grid = pde::Grid::lattice(n);
  const auto mask = c.mask == "disk"
                        ? pde::PhaseTargetMask::centered_disk(
                              n, c.mask_radius > 0 ? c.mask_radius : n / 4.0)
                        : pde::PhaseTargetMask::half_plane(n);
  if (c.problem == ProblemKind::AllenCahn)
    return std::make_shared<pde::AllenCahnModel>(grid, c.pde, mask, backend);
  return std::make_shared<pde::CahnHilliardModel>(grid, c.pde, mask, backend);
}

solver::Problem build_problem(const ExperimentConfig& c, double guess_std,
                              std::uint64_t guess_seed) {
  solver::Problem p;
  p.model = build_model(c);
  const int nx = p.model->state_dim();
  const int nu = p.model->control_dim();
  const int n = c.grid_points;

  p.x0 = Vector(nx);
  if (c.problem == ProblemKind::Burgers) {
    const double dx = 2.0 / (n - 1);
    for (int i = 0; i < n; ++i)
      p.x0[i] = c.initial_amplitude * std::sin(std::numbers::pi * (-1.0 + i * dx));
    p.cost.goal = Vector::Constant(nx, c.goal_value);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        p.x0[i * n + j] = c.initial_amplitude * std::cos(2.0 * std::numbers::pi * j / n);
    const auto* phase = dynamic_cast<const pde::AllenCahnModel*>(p.model.get());
    p.cost.goal = phase ? phase->mask().as_state()
                        : dynamic_cast<const pde::CahnHilliardModel&>(*p.model).mask().as_state();
  }
  p.cost.state = lqr::StateWeight::scaled_identity(nx, c.cost.state);
  p.cost.terminal = lqr::StateWeight::scaled_identity(nx, c.cost.terminal);
  p.cost.control = c.cost.control * Matrix::Identity(nu, nu);

  p.initial_controls.assign(c.horizon, Vector::Zero(nu));
  if (guess_std > 0) {
    std::mt19937_64 rng(guess_seed);
    std::normal_distribution<double> normal(0.0, guess_std);
    for (auto& u : p.initial_controls)
      for (int k = 0; k < nu; ++k) u[k] = normal(rng);
  }
  return p;
}

}  // namespace roilqr::harness
