#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "roilqr/errors.hpp"
#include "roilqr/lqr.hpp"

namespace roilqr::lqr {

StateWeight StateWeight::diagonal(Vector diag) {
  StateWeight w;
  w.diag_ = std::move(diag);
  return w;
}

StateWeight StateWeight::scaled_identity(int n, double scale) {
  return diagonal(Vector::Constant(n, scale));
}

StateWeight StateWeight::dense(Matrix q) {
  if (q.rows() != q.cols()) throw DimensionError("state weight must be square");
  StateWeight w;
  w.dense_ = 0.5 * (q + q.transpose());
  return w;
}

int StateWeight::dim() const {
  return static_cast<int>(is_diagonal() ? diag_.size() : dense_.rows());
}

bool StateWeight::is_zero() const {
  return is_diagonal() ? (diag_.array() == 0.0).all()
                       : (dense_.array() == 0.0).all();
}

Vector StateWeight::apply(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("state weight: size mismatch");
  if (is_diagonal()) return diag_.cwiseProduct(x);
  return dense_ * x;
}

Matrix StateWeight::project(const Matrix& phi) const {
  if (phi.rows() != dim()) throw DimensionError("state weight: basis mismatch");
  if (is_diagonal()) return phi.transpose() * diag_.asDiagonal() * phi;
  return phi.transpose() * dense_ * phi;
}

Matrix StateWeight::to_dense() const {
  if (is_diagonal()) return diag_.asDiagonal();
  return dense_;
}

namespace {

void check_psd(const StateWeight& w, const char* name) {
  if (w.is_diagonal()) {
    const Matrix d = w.to_dense();
    if ((d.diagonal().array() < 0.0).any())
      throw ConfigError(std::string(name) + " must be positive semidefinite");
    return;
  }
  const Matrix q = w.to_dense();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
    throw ConfigError(std::string(name) + " must be positive semidefinite");
}

}  // namespace

void CostModel::validate(int state_dim, int control_dim) const {
  if (state.dim() != state_dim || terminal.dim() != state_dim)
    throw ConfigError("cost state weights do not match the state dimension");
  if (goal.size() != state_dim)
    throw ConfigError("goal state does not match the state dimension");
  if (control.rows() != control_dim || control.cols() != control_dim)
    throw ConfigError("control weight does not match the control dimension");
  if (!control.isApprox(control.transpose()))
    throw ConfigError("control weight must be symmetric");
  if (Eigen::LLT<Matrix>(control).info() != Eigen::Success)
    throw ConfigError("control weight must be positive definite");
  check_psd(state, "state weight");
  check_psd(terminal, "terminal weight");
}

double CostModel::stage(const Vector& x, const Vector& u) const {
  const Vector e = x - goal;
  return 0.5 * state.quadratic(e) + 0.5 * u.dot(control * u);
}

double CostModel::final(const Vector& x) const {
  return 0.5 * terminal.quadratic(x - goal);
}

double CostModel::total(const Trajectory& traj) const {
  double j = 0.0;
  for (int t = 0; t < traj.horizon(); ++t)
    j += stage(traj.states[t], traj.controls[t]);
  return j + final(traj.states.back());
}

CostTerms reduce_cost(const CostModel& cost, const Trajectory& nominal,
                      const pod::ReducedBasis* basis) {
  const int T = nominal.horizon();
  if (static_cast<int>(nominal.states.size()) != T + 1)
    throw DimensionError("reduce_cost: nominal must hold T+1 states");
  if (basis && basis->full_dim() != cost.state.dim())
    throw DimensionError("reduce_cost: basis does not match the cost");

  CostTerms terms;
  terms.luu = cost.control;
  const Matrix stage_hess =
      basis ? cost.state.project(basis->modes()) : cost.state.to_dense();
  const Matrix final_hess =
      basis ? cost.terminal.project(basis->modes()) : cost.terminal.to_dense();

  for (int t = 0; t <= T; ++t) {
    const StateWeight& w = t < T ? cost.state : cost.terminal;
    const Vector grad = w.apply(nominal.states[t] - cost.goal);
    terms.lx.push_back(basis ? Vector(basis->modes().transpose() * grad) : grad);
    terms.lxx.push_back(t < T ? stage_hess : final_hess);
  }
  for (int t = 0; t < T; ++t) terms.lu.push_back(cost.control * nominal.controls[t]);
  return terms;
}

}  // namespace roilqr::lqr
