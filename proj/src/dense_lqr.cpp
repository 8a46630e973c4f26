#include <Eigen/Cholesky>

#include "roilqr/errors.hpp"
#include "roilqr/lqr.hpp"

namespace roilqr::lqr {

DenseQp build_dense_qp(const sysid::LtvModel& ltv, const CostTerms& terms) {
  const int T = ltv.horizon();
  const int d = terms.state_dim();
  const int nu = static_cast<int>(terms.luu.rows());
  if (terms.horizon() != T)
    throw DimensionError("build_dense_qp: horizons differ");
  const Eigen::Index n = static_cast<Eigen::Index>(T) * nu;

  DenseQp qp;
  qp.S = Matrix::Zero(static_cast<Eigen::Index>(T + 1) * d, n);
  qp.H = Matrix::Zero(n, n);
  qp.g = Vector::Zero(n);

  Matrix St = Matrix::Zero(d, n);  // response of d_alpha_t; d_alpha_0 = 0
  for (int t = 0; t <= T; ++t) {
    qp.S.middleRows(static_cast<Eigen::Index>(t) * d, d) = St;
    qp.H.noalias() += St.transpose() * terms.lxx[t] * St;
    qp.g.noalias() += St.transpose() * terms.lx[t];
    if (t < T) {
      const Eigen::Index c = static_cast<Eigen::Index>(t) * nu;
      qp.H.block(c, c, nu, nu) += terms.luu;
      qp.g.segment(c, nu) += terms.lu[t];
      Matrix next = ltv.A[t] * St;
      next.middleCols(c, nu) += ltv.B[t];
      St = std::move(next);
    }
  }
  qp.H = 0.5 * (qp.H + qp.H.transpose());
  return qp;
}

Vector solve_dense_qp(const DenseQp& qp) {
  Eigen::LLT<Matrix> llt(qp.H);
  if (llt.info() != Eigen::Success)
    throw IndefiniteError("dense LQR: stacked Hessian is not positive definite");
  return -llt.solve(qp.g);
}

Vector lqr_solve_dense(const sysid::LtvModel& ltv, const CostTerms& terms) {
  return solve_dense_qp(build_dense_qp(ltv, terms));
}

double perturbed_objective(const sysid::LtvModel& ltv, const CostTerms& terms,
                           const Vector& stacked_du) {
  const int T = ltv.horizon();
  const int nu = static_cast<int>(terms.luu.rows());
  if (stacked_du.size() != static_cast<Eigen::Index>(T) * nu)
    throw DimensionError("perturbed_objective: control sequence length");
  Vector da = Vector::Zero(terms.state_dim());
  double j = 0.0;
  for (int t = 0; t < T; ++t) {
    const Vector u = stacked_du.segment(static_cast<Eigen::Index>(t) * nu, nu);
    j += terms.lx[t].dot(da) + 0.5 * da.dot(terms.lxx[t] * da) +
         terms.lu[t].dot(u) + 0.5 * u.dot(terms.luu * u);
    da = ltv.A[t] * da + ltv.B[t] * u;
  }
  j += terms.lx[T].dot(da) + 0.5 * da.dot(terms.lxx[T] * da);
  return j;
}

}  // namespace roilqr::lqr
