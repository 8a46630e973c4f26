#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roilqr/dynamics.hpp"

namespace roilqr::pde {

/// Uniform 1-D or 2-D grid. 2-D grids are square and stored row-major.
struct Grid {
  int dimensionality = 1;
  int points = 100;  // per axis
  double spacing = 2.0 / 99.0;

  int size() const { return dimensionality == 1 ? points : points * points; }
  void validate() const;

  /// Burgers convention: `points` nodes spanning [-1, 1].
  static Grid interval(int points);
  /// Phase-field convention: n x n periodic lattice with unit spacing.
  static Grid lattice(int points, double spacing = 1.0);
};

enum class Backend { Parallel, Serial };

struct PdeParams {
  double viscosity = 0.01;  // Burgers nu
  double mobility = 1.0;    // phase-field M
  double gradient_coeff = 0.0;  // gamma; <= 0 means 0.5 * dx^2
  double dt = 0.0;              // <= 0 means half the stability bound
  int substeps = 10;            // explicit substeps per control step
};

/// Label +1 or -1 per grid point; selects which (temp, h) pair of the
/// control vector (temp+, h+, temp-, h-) drives that point.
class PhaseTargetMask {
 public:
  PhaseTargetMask() = default;
  explicit PhaseTargetMask(std::vector<std::int8_t> labels);

  static PhaseTargetMask uniform(int size, std::int8_t label = 1);
  /// Left half of the columns +1, right half -1.
  static PhaseTargetMask half_plane(int points);
  /// +1 inside a centered disk of the given radius (in grid points).
  static PhaseTargetMask centered_disk(int points, double radius);

  const std::vector<std::int8_t>& labels() const { return labels_; }
  int size() const { return static_cast<int>(labels_.size()); }

  /// The +/-1 labels as a state vector (the natural phase-field goal).
  Vector as_state() const;

 private:
  std::vector<std::int8_t> labels_;
};

/// Largest stable dt for each scheme; configs above it are rejected.
double burgers_dt_limit(const Grid& grid, const PdeParams& params);
double allen_cahn_dt_limit(const Grid& grid, const PdeParams& params);
double cahn_hilliard_dt_limit(const Grid& grid, const PdeParams& params);

/// Fills the defaulted fields (gamma, dt) and checks positivity and the
/// explicit-scheme limit for the given scheme. Throws ConfigError.
enum class Scheme { Burgers, AllenCahn, CahnHilliard };
PdeParams resolve_params(Scheme scheme, const Grid& grid, PdeParams params);

/// One control step of viscous Burgers with Dirichlet boundary actuation
/// u(x_0) = control[0], u(x_{n-1}) = control[1].
Vector burgers_step(const Grid& grid, const PdeParams& params,
                    const Vector& state, const Vector& control,
                    Backend backend = Backend::Parallel);

/// One control step of Allen-Cahn with F = phi^4 + temp phi^2 + h phi.
Vector allen_cahn_step(const Grid& grid, const PdeParams& params,
                       const PhaseTargetMask& mask, const Vector& state,
                       const Vector& control,
                       Backend backend = Backend::Parallel);

/// One control step of Cahn-Hilliard (divergence form, periodic).
Vector cahn_hilliard_step(const Grid& grid, const PdeParams& params,
                          const PhaseTargetMask& mask, const Vector& state,
                          const Vector& control,
                          Backend backend = Backend::Parallel);

class BurgersModel final : public Dynamics {
 public:
  BurgersModel(Grid grid, PdeParams params, Backend backend = Backend::Parallel);

  int state_dim() const override { return grid_.size(); }
  int control_dim() const override { return 2; }
  Vector step(const Vector& state, const Vector& control) const override;

  const Grid& grid() const { return grid_; }
  const PdeParams& params() const { return params_; }

 private:
  Grid grid_;
  PdeParams params_;
  Backend backend_;
};

class AllenCahnModel final : public Dynamics {
 public:
  AllenCahnModel(Grid grid, PdeParams params, PhaseTargetMask mask,
                 Backend backend = Backend::Parallel);

  int state_dim() const override { return grid_.size(); }
  int control_dim() const override { return 4; }
  Vector step(const Vector& state, const Vector& control) const override;

  const Grid& grid() const { return grid_; }
  const PdeParams& params() const { return params_; }
  const PhaseTargetMask& mask() const { return mask_; }

 private:
  Grid grid_;
  PdeParams params_;
  PhaseTargetMask mask_;
  Backend backend_;
};

class CahnHilliardModel final : public Dynamics {
 public:
  CahnHilliardModel(Grid grid, PdeParams params, PhaseTargetMask mask,
                    Backend backend = Backend::Parallel);

  int state_dim() const override { return grid_.size(); }
  int control_dim() const override { return 4; }
  Vector step(const Vector& state, const Vector& control) const override;

  const Grid& grid() const { return grid_; }
  const PdeParams& params() const { return params_; }
  const PhaseTargetMask& mask() const { return mask_; }

 private:
  Grid grid_;
  PdeParams params_;
  PhaseTargetMask mask_;
  Backend backend_;
};

}  // namespace roilqr::pde
