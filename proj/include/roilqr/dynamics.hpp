#pragma once

#include <vector>

#include <Eigen/Dense>

namespace roilqr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Discrete-time black-box dynamics x_{t+1} = f(x_t, u_t).
///
/// Implementations must be pure: the same (x, u) always yields a
/// bit-identical successor, and concurrent calls are safe.
class Dynamics {
 public:
  virtual ~Dynamics() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;

  /// Throws DivergenceError (step index 0) if the result is not finite.
  virtual Vector step(const Vector& state, const Vector& control) const = 0;
};

/// States x_0..x_T and controls u_0..u_{T-1}.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> controls;

  int horizon() const { return static_cast<int>(controls.size()); }
};

/// Simulates `controls.size()` steps from `x0`. Divergence errors are
/// rethrown with the offending control step index.
Trajectory rollout(const Dynamics& model, const Vector& x0,
                   const std::vector<Vector>& controls);

}  // namespace roilqr
