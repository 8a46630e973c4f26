#pragma once

#include <vector>

#include "roilqr/dynamics.hpp"
#include "roilqr/pod.hpp"
#include "roilqr/sysid.hpp"

namespace roilqr::lqr {

/// Symmetric PSD state weight, stored diagonally when possible.
class StateWeight {
 public:
  StateWeight() = default;
  static StateWeight diagonal(Vector diag);
  static StateWeight scaled_identity(int n, double scale);
  static StateWeight dense(Matrix q);

  int dim() const;
  bool is_diagonal() const { return dense_.size() == 0; }
  bool is_zero() const;

  Vector apply(const Vector& x) const;
  double quadratic(const Vector& x) const { return x.dot(apply(x)); }
  /// Phi^T Q Phi.
  Matrix project(const Matrix& phi) const;
  Matrix to_dense() const;

 private:
  Vector diag_;
  Matrix dense_;
};

/// c_t(x, u) = 1/2 (x - g)^T Q (x - g) + 1/2 u^T R u,
/// c_T(x)    = 1/2 (x - g)^T Q_T (x - g).
struct CostModel {
  StateWeight state;
  StateWeight terminal;
  Matrix control;  // R
  Vector goal;

  void validate(int state_dim, int control_dim) const;
  double stage(const Vector& x, const Vector& u) const;
  double final(const Vector& x) const;
  double total(const Trajectory& traj) const;
};

/// Gradient and Hessian blocks of the cost along a nominal trajectory in
/// (possibly reduced) coordinates. Index T of `lx`/`lxx` is terminal.
struct CostTerms {
  std::vector<Vector> lx;
  std::vector<Matrix> lxx;
  std::vector<Vector> lu;  // R u_bar_t
  Matrix luu;              // R

  int horizon() const { return static_cast<int>(lu.size()); }
  int state_dim() const { return lx.empty() ? 0 : static_cast<int>(lx[0].size()); }
};

/// l_alpha = Phi^T Q (x_bar_t - g), l_alpha_alpha = Phi^T Q Phi.
/// A null basis gives the full-order terms.
CostTerms reduce_cost(const CostModel& cost, const Trajectory& nominal,
                      const pod::ReducedBasis* basis);

struct Regularizer {
  double mu = 1e-6;
  double increase = 10.0;  // factor on failure
  double decrease = 2.0;   // divisor after a clean sweep
  double mu_min = 1e-9;
  double mu_max = 1e6;

  static Regularizer none() { return {0.0, 10.0, 2.0, 0.0, 1e6}; }
};

/// Gains in the sign convention du_t = -k_t - K_t d_alpha_t.
struct GainSchedule {
  std::vector<Vector> k;
  std::vector<Matrix> K;
  std::vector<Vector> v;  // T+1 value gradients
  std::vector<Matrix> V;  // T+1 value Hessians
  double sum_k_qu = 0.0;   // sum k^T Q_u
  double sum_k_quu_k = 0.0;  // sum k^T Q_uu k

  int horizon() const { return static_cast<int>(k.size()); }

  /// Predicted cost reduction of a step of size alpha:
  /// alpha sum k^T Q_u - alpha^2 / 2 sum k^T Q_uu k.
  double expected_improvement(double alpha) const {
    return alpha * sum_k_qu - 0.5 * alpha * alpha * sum_k_quu_k;
  }
};

/// Backward Riccati sweep in Q-function form. Q_uu and Q_u_alpha use
/// V_{t+1} + mu I; a non-PD Q_uu raises mu and retries the same timestep.
/// `reg` is updated in place (decreased after a clean sweep).
GainSchedule backward_pass(const sysid::LtvModel& ltv, const CostTerms& terms,
                           Regularizer& reg);

/// Stacked form of the perturbed LQR objective with d_alpha_0 = 0:
///   J(dU) = 1/2 dU^T H dU + g^T dU,   d_alpha = S dU.
struct DenseQp {
  Matrix H;
  Vector g;
  Matrix S;  // (T+1) d x T n_u state response
};

DenseQp build_dense_qp(const sysid::LtvModel& ltv, const CostTerms& terms);

/// Exact minimizer -H^{-1} g of the stacked problem. Throws IndefiniteError
/// if H is not positive definite.
Vector lqr_solve_dense(const sysid::LtvModel& ltv, const CostTerms& terms);
Vector solve_dense_qp(const DenseQp& qp);

/// Evaluates the perturbed objective for a stacked control sequence by
/// simulating the LTV model.
double perturbed_objective(const sysid::LtvModel& ltv, const CostTerms& terms,
                           const Vector& stacked_du);

/// Open-loop controls produced by running du_t = -k_t - K_t d_alpha_t on
/// the LTV model from d_alpha_0 = 0.
Vector simulate_feedback(const sysid::LtvModel& ltv,
                         const GainSchedule& gains);

}  // namespace roilqr::lqr
