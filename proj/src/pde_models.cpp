#include "roilqr/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "roilqr/errors.hpp"
#include "roilqr/kernels.hpp"

namespace roilqr {

Trajectory rollout(const Dynamics& model, const Vector& x0,
                   const std::vector<Vector>& controls) {
  if (x0.size() != model.state_dim())
    throw DimensionError("rollout: initial state has wrong dimension");
  Trajectory traj;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(x0);
  traj.controls = controls;
  for (std::size_t t = 0; t < controls.size(); ++t) {
    try {
      traj.states.push_back(model.step(traj.states.back(), controls[t]));
    } catch (const DivergenceError& e) {
      std::ostringstream msg;
      msg << "rollout diverged at control step " << t << ": " << e.what();
      throw DivergenceError(msg.str(), static_cast<int>(t), e.rollout());
    }
  }
  return traj;
}

}  // namespace roilqr

namespace roilqr::pde {

void Grid::validate() const {
  if (dimensionality != 1 && dimensionality != 2)
    throw ConfigError("grid dimensionality must be 1 or 2");
  if (points < 2) throw ConfigError("grid needs at least 2 points per axis");
  if (size() < 4) throw ConfigError("grid needs at least 4 points in total");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw ConfigError("grid spacing must be positive");
}

Grid Grid::interval(int points) {
  return Grid{1, points, points > 1 ? 2.0 / (points - 1) : 1.0};
}

Grid Grid::lattice(int points, double spacing) {
  return Grid{2, points, spacing};
}

PhaseTargetMask::PhaseTargetMask(std::vector<std::int8_t> labels)
    : labels_(std::move(labels)) {
  for (auto l : labels_)
    if (l != 1 && l != -1)
      throw ConfigError("phase target labels must be +1 or -1");
}

PhaseTargetMask PhaseTargetMask::uniform(int size, std::int8_t label) {
  return PhaseTargetMask(std::vector<std::int8_t>(size, label));
}

PhaseTargetMask PhaseTargetMask::half_plane(int points) {
  std::vector<std::int8_t> labels(static_cast<std::size_t>(points) * points);
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j)
      labels[i * points + j] = j < points / 2 ? 1 : -1;
  return PhaseTargetMask(std::move(labels));
}

PhaseTargetMask PhaseTargetMask::centered_disk(int points, double radius) {
  std::vector<std::int8_t> labels(static_cast<std::size_t>(points) * points);
  const double c = 0.5 * (points - 1);
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      const double r = std::hypot(i - c, j - c);
      labels[i * points + j] = r <= radius ? 1 : -1;
    }
  return PhaseTargetMask(std::move(labels));
}

Vector PhaseTargetMask::as_state() const {
  Vector v(size());
  for (int k = 0; k < size(); ++k) v[k] = labels_[k];
  return v;
}

double burgers_dt_limit(const Grid& grid, const PdeParams& params) {
  return 0.2 * grid.spacing * grid.spacing / params.viscosity;
}

double allen_cahn_dt_limit(const Grid& grid, const PdeParams& params) {
  return 0.2 * grid.spacing * grid.spacing /
         (params.mobility * params.gradient_coeff);
}

double cahn_hilliard_dt_limit(const Grid& grid, const PdeParams& params) {
  const double dx2 = grid.spacing * grid.spacing;
  return 0.05 * dx2 * dx2 / (params.mobility * params.gradient_coeff);
}

namespace {

// The guards above ignore the double-well term. For the default step use the
// forward Euler bound of the linearization with f'' <= 12 (|phi| <= 1) and
// the largest 5-point Laplacian eigenvalue 8 / dx^2.
constexpr double kWellStiffness = 12.0;

double phase_field_euler_bound(Scheme scheme, const Grid& grid, const PdeParams& p) {
  const double lap = 8.0 / (grid.spacing * grid.spacing);
  const double rate = p.mobility * (p.gradient_coeff * lap + kWellStiffness);
  return 2.0 / (scheme == Scheme::CahnHilliard ? rate * lap : rate);
}

}  // namespace

PdeParams resolve_params(Scheme scheme, const Grid& grid, PdeParams p) {
  grid.validate();
  if (p.gradient_coeff <= 0.0) p.gradient_coeff = 0.5 * grid.spacing * grid.spacing;
  if (p.substeps < 1) throw ConfigError("substeps must be a positive integer");

  double limit = 0.0;
  switch (scheme) {
    case Scheme::Burgers:
      if (!(p.viscosity > 0.0)) throw ConfigError("viscosity must be positive");
      if (grid.dimensionality != 1)
        throw ConfigError("Burgers model requires a 1-D grid");
      limit = burgers_dt_limit(grid, p);
      break;
    case Scheme::AllenCahn:
    case Scheme::CahnHilliard:
      if (!(p.mobility > 0.0)) throw ConfigError("mobility must be positive");
      if (grid.dimensionality != 2)
        throw ConfigError("phase-field models require a 2-D grid");
      limit = scheme == Scheme::AllenCahn ? allen_cahn_dt_limit(grid, p)
                                          : cahn_hilliard_dt_limit(grid, p);
      break;
  }
  if (p.dt <= 0.0) {
    p.dt = 0.5 * limit;
    if (scheme != Scheme::Burgers)
      p.dt = std::min(p.dt, 0.5 * phase_field_euler_bound(scheme, grid, p));
  }
  if (!(p.dt <= limit)) {
    std::ostringstream msg;
    msg << "dt = " << p.dt << " violates the explicit stability limit "
        << limit;
    throw ConfigError(msg.str());
  }
  return p;
}

namespace {

void check_sizes(const Grid& grid, const Vector& state, const Vector& control,
                 int control_dim) {
  if (state.size() != grid.size())
    throw DimensionError("state size does not match the grid");
  if (control.size() != control_dim)
    throw DimensionError("control vector has the wrong length");
}

[[noreturn]] void diverged(const char* scheme, int substep) {
  std::ostringstream msg;
  msg << scheme << " produced non-finite values at substep " << substep;
  throw DivergenceError(msg.str(), 0);
}

std::span<const double> view(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::span<double> view(Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

kernels::PhaseControl phase_control(const Vector& u) {
  return {u[0], u[1], u[2], u[3]};
}

}  // namespace

Vector burgers_step(const Grid& grid, const PdeParams& params,
                    const Vector& state, const Vector& control,
                    Backend backend) {
  check_sizes(grid, state, control, 2);
  auto substep = backend == Backend::Parallel ? &kernels::burgers_substep
                                              : &kernels::serial::burgers_substep;
  Vector cur = state;
  Vector next(state.size());
  for (int s = 0; s < params.substeps; ++s) {
    if (!substep(view(std::as_const(cur)), view(next), params.viscosity, params.dt, grid.spacing,
                 control[0], control[1]))
      diverged("Burgers", s);
    cur.swap(next);
  }
  return cur;
}

Vector allen_cahn_step(const Grid& grid, const PdeParams& params,
                       const PhaseTargetMask& mask, const Vector& state,
                       const Vector& control, Backend backend) {
  check_sizes(grid, state, control, 4);
  if (mask.size() != grid.size())
    throw DimensionError("phase mask size does not match the grid");
  auto substep = backend == Backend::Parallel
                     ? &kernels::allen_cahn_substep
                     : &kernels::serial::allen_cahn_substep;
  const auto c = phase_control(control);
  Vector cur = state;
  Vector next(state.size());
  for (int s = 0; s < params.substeps; ++s) {
    if (!substep(view(std::as_const(cur)), view(next), mask.labels(), grid.points, c, params.mobility,
                 params.gradient_coeff, params.dt, grid.spacing))
      diverged("Allen-Cahn", s);
    cur.swap(next);
  }
  return cur;
}

Vector cahn_hilliard_step(const Grid& grid, const PdeParams& params,
                          const PhaseTargetMask& mask, const Vector& state,
                          const Vector& control, Backend backend) {
  check_sizes(grid, state, control, 4);
  if (mask.size() != grid.size())
    throw DimensionError("phase mask size does not match the grid");
  auto substep = backend == Backend::Parallel
                     ? &kernels::cahn_hilliard_substep
                     : &kernels::serial::cahn_hilliard_substep;
  const auto c = phase_control(control);
  Vector cur = state;
  Vector next(state.size());
  Vector chem(state.size());
  for (int s = 0; s < params.substeps; ++s) {
    if (!substep(view(std::as_const(cur)), view(next), view(chem), mask.labels(), grid.points, c,
                 params.mobility, params.gradient_coeff, params.dt,
                 grid.spacing))
      diverged("Cahn-Hilliard", s);
    cur.swap(next);
  }
  return cur;
}

BurgersModel::BurgersModel(Grid grid, PdeParams params, Backend backend)
    : grid_(grid),
      params_(resolve_params(Scheme::Burgers, grid, params)),
      backend_(backend) {}

Vector BurgersModel::step(const Vector& state, const Vector& control) const {
  return burgers_step(grid_, params_, state, control, backend_);
}

AllenCahnModel::AllenCahnModel(Grid grid, PdeParams params,
                               PhaseTargetMask mask, Backend backend)
    : grid_(grid),
      params_(resolve_params(Scheme::AllenCahn, grid, params)),
      mask_(std::move(mask)),
      backend_(backend) {
  if (mask_.size() != grid_.size())
    throw ConfigError("phase mask size does not match the grid");
}

Vector AllenCahnModel::step(const Vector& state, const Vector& control) const {
  return allen_cahn_step(grid_, params_, mask_, state, control, backend_);
}

CahnHilliardModel::CahnHilliardModel(Grid grid, PdeParams params,
                                     PhaseTargetMask mask, Backend backend)
    : grid_(grid),
      params_(resolve_params(Scheme::CahnHilliard, grid, params)),
      mask_(std::move(mask)),
      backend_(backend) {
  if (mask_.size() != grid_.size())
    throw ConfigError("phase mask size does not match the grid");
}

Vector CahnHilliardModel::step(const Vector& state,
                               const Vector& control) const {
  return cahn_hilliard_step(grid_, params_, mask_, state, control, backend_);
}

}  // namespace roilqr::pde
