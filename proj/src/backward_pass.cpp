#include <algorithm>
#include <sstream>

#include <Eigen/Cholesky>

#include "roilqr/errors.hpp"
#include "roilqr/lqr.hpp"

namespace roilqr::lqr {

GainSchedule backward_pass(const sysid::LtvModel& ltv, const CostTerms& terms,
                           Regularizer& reg) {
  const int T = ltv.horizon();
  if (terms.horizon() != T || static_cast<int>(terms.lx.size()) != T + 1)
    throw DimensionError("backward_pass: cost terms and model horizons differ");
  const int d = terms.state_dim();
  if (T > 0 && ltv.state_dim() != d)
    throw DimensionError("backward_pass: cost terms and model use different bases");

  GainSchedule gs;
  gs.k.resize(T);
  gs.K.resize(T);
  gs.v.resize(T + 1);
  gs.V.resize(T + 1);
  gs.v[T] = terms.lx[T];
  gs.V[T] = terms.lxx[T];

  bool clean = true;
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& A = ltv.A[t];
    const Matrix& B = ltv.B[t];
    const Vector& v_next = gs.v[t + 1];
    const Matrix& V_next = gs.V[t + 1];

    const Vector q_a = terms.lx[t] + A.transpose() * v_next;
    const Vector q_u = terms.lu[t] + B.transpose() * v_next;
    const Matrix q_aa = terms.lxx[t] + A.transpose() * V_next * A;

    for (;;) {
      Matrix V_reg = V_next;
      V_reg.diagonal().array() += reg.mu;
      const Matrix q_ua = B.transpose() * V_reg * A;
      Matrix q_uu = terms.luu + B.transpose() * V_reg * B;
      q_uu = 0.5 * (q_uu + q_uu.transpose());

      Eigen::LLT<Matrix> llt(q_uu);
      if (llt.info() != Eigen::Success) {
        clean = false;
        reg.mu = std::max(reg.mu * reg.increase, std::max(reg.mu_min, 1e-12));
        if (reg.mu > reg.mu_max) {
          std::ostringstream msg;
          msg << "backward pass: Q_uu not positive definite at t=" << t
              << " with mu at its maximum " << reg.mu_max;
          throw IndefiniteError(msg.str());
        }
        continue;
      }

      const Vector k = llt.solve(q_u);
      const Matrix K = llt.solve(q_ua);

      gs.v[t] = q_a - K.transpose() * q_u - q_ua.transpose() * k +
                K.transpose() * q_uu * k;
      Matrix V = q_aa + K.transpose() * q_uu * K - K.transpose() * q_ua -
                 q_ua.transpose() * K;
      gs.V[t] = 0.5 * (V + V.transpose());

      gs.sum_k_qu += k.dot(q_u);
      gs.sum_k_quu_k += k.dot(q_uu * k);
      gs.k[t] = k;
      gs.K[t] = K;
      break;
    }
  }

  if (clean) reg.mu = std::max(reg.mu / reg.decrease, reg.mu_min);
  return gs;
}

Vector simulate_feedback(const sysid::LtvModel& ltv, const GainSchedule& gains) {
  const int T = ltv.horizon();
  const int nu = ltv.control_dim();
  Vector du(static_cast<Eigen::Index>(T) * nu);
  Vector da = Vector::Zero(ltv.state_dim());
  for (int t = 0; t < T; ++t) {
    const Vector u = -gains.k[t] - gains.K[t] * da;
    du.segment(static_cast<Eigen::Index>(t) * nu, nu) = u;
    da = ltv.A[t] * da + ltv.B[t] * u;
  }
  return du;
}

}  // namespace roilqr::lqr
