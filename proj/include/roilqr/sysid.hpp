#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "roilqr/dynamics.hpp"
#include "roilqr/pod.hpp"

namespace roilqr::sysid {

/// Per-timestep linear maps delta_{t+1} = A_t delta_t + B_t du_t.
struct LtvModel {
  std::vector<Matrix> A;
  std::vector<Matrix> B;
  bool full_order = false;

  int horizon() const { return static_cast<int>(A.size()); }
  int state_dim() const { return A.empty() ? 0 : static_cast<int>(A[0].rows()); }
  int control_dim() const { return B.empty() ? 0 : static_cast<int>(B[0].cols()); }
};

/// Galerkin projection Phi^T A_t Phi, Phi^T B_t of a full-order model.
LtvModel galerkin_project(const LtvModel& full, const pod::ReducedBasis& basis);

struct PerturbationConfig {
  /// Samples per timestep; 0 selects 2 (d + n_u).
  int rollouts = 0;
  /// Std of the state (or reduced-coordinate) perturbation; <= 0 selects
  /// 1e-3 * max(1, max |x_bar|).
  double state_std = 0.0;
  /// Std of the control perturbation; <= 0 selects 1e-2 * max(1, max |u_bar|).
  double control_std = 0.0;
  std::uint64_t seed = 0;
  /// Antithetic (+/-) sample pairs, i.e. central differences.
  bool central_difference = true;
  /// Guard on cond(X X^T).
  double condition_limit = 1e10;
};

/// Per-timestep regression data: X_t = [d_alpha; d_u] (columns are
/// samples), Y_t the corresponding next-step deviations.
struct RegressionData {
  std::vector<Matrix> X;
  std::vector<Matrix> Y;
  int state_dim = 0;
  int control_dim = 0;
  bool full_order = false;
};

/// Default sample count 2 (d + n_u).
int default_rollouts(int state_dim, int control_dim);

/// Perturbs state and control around every nominal step and records the
/// resulting one-step deviations. With a basis the state perturbation lives
/// in span(Phi) and deviations are projected with Phi^T; with nullptr the
/// data is full order. Sample simulations run in parallel.
RegressionData generate_rollout_data(const Dynamics& model,
                                     const Trajectory& nominal,
                                     const pod::ReducedBasis* basis,
                                     const PerturbationConfig& config);

/// Least-squares [A_t | B_t] = Y X^T (X X^T)^{-1} per timestep, solved by a
/// QR factorization of X^T. Throws RankDeficiencyError when cond(X X^T)
/// exceeds the limit.
LtvModel fit_ltv(const RegressionData& data, double condition_limit = 1e10);

/// Benchmark path: identification in the full state space.
LtvModel fit_full_order_ltv(const Dynamics& model, const Trajectory& nominal,
                            const PerturbationConfig& config);

/// Writes one CSV block per timestep ("# t=<t> X" / "# t=<t> Y").
void dump_regression_csv(const RegressionData& data, std::ostream& out);

}  // namespace roilqr::sysid
