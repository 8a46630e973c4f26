#include "roilqr/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <omp.h>

#include "roilqr/errors.hpp"

namespace roilqr::sysid {

LtvModel galerkin_project(const LtvModel& full, const pod::ReducedBasis& basis) {
  const Matrix& phi = basis.modes();
  LtvModel reduced;
  reduced.full_order = false;
  reduced.A.reserve(full.A.size());
  reduced.B.reserve(full.B.size());
  for (std::size_t t = 0; t < full.A.size(); ++t) {
    if (full.A[t].rows() != phi.rows())
      throw DimensionError("galerkin_project: basis does not match the model");
    reduced.A.push_back(phi.transpose() * full.A[t] * phi);
    reduced.B.push_back(phi.transpose() * full.B[t]);
  }
  return reduced;
}

int default_rollouts(int state_dim, int control_dim) {
  return 2 * (state_dim + control_dim);
}

namespace {

double max_abs(const std::vector<Vector>& vs) {
  double m = 0.0;
  for (const auto& v : vs)
    if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

RegressionData generate_rollout_data(const Dynamics& model,
                                     const Trajectory& nominal,
                                     const pod::ReducedBasis* basis,
                                     const PerturbationConfig& config) {
  const int T = nominal.horizon();
  const int nx = model.state_dim();
  const int nu = model.control_dim();
  if (static_cast<int>(nominal.states.size()) != T + 1)
    throw DimensionError("nominal trajectory must hold T+1 states");
  for (const auto& x : nominal.states)
    if (x.size() != nx)
      throw DimensionError("nominal state dimension does not match model");
  for (const auto& u : nominal.controls)
    if (u.size() != nu)
      throw DimensionError("nominal control dimension does not match model");
  if (basis && basis->full_dim() != nx)
    throw DimensionError("basis dimension does not match model");

  const int d = basis ? basis->rank() : nx;
  const int samples =
      config.rollouts > 0 ? config.rollouts : default_rollouts(d, nu);
  if (samples < d + nu + 1) {
    std::ostringstream msg;
    msg << "need at least d + n_u + 1 = " << d + nu + 1
        << " rollouts for identification, got " << samples;
    throw ConfigError(msg.str());
  }
  const double sx = config.state_std > 0.0
                        ? config.state_std
                        : 1e-3 * std::max(1.0, max_abs(nominal.states));
  const double su = config.control_std > 0.0
                        ? config.control_std
                        : 1e-2 * std::max(1.0, max_abs(nominal.controls));

  RegressionData data;
  data.state_dim = d;
  data.control_dim = nu;
  data.full_order = basis == nullptr;
  data.X.assign(T, Matrix(d + nu, samples));
  data.Y.assign(T, Matrix(d, samples));

  // Draws happen serially in a fixed order so the data is independent of the
  // thread count.
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < samples; ++j)
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < d; ++i) data.X[t](i, j) = sx * normal(rng);
      for (int i = 0; i < nu; ++i) data.X[t](d + i, j) = su * normal(rng);
    }

  const long total = static_cast<long>(samples) * T;
  long first_failure = total;
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (long idx = 0; idx < total; ++idx) {
    const int j = static_cast<int>(idx / std::max(T, 1));
    const int t = static_cast<int>(idx % std::max(T, 1));
    try {
      const Vector da = data.X[t].col(j).head(d);
      const Vector du = data.X[t].col(j).tail(nu);
      const Vector dx = basis ? basis->lift(da) : da;
      Vector y;
      if (config.central_difference) {
        const Vector fp =
            model.step(nominal.states[t] + dx, nominal.controls[t] + du);
        const Vector fm =
            model.step(nominal.states[t] - dx, nominal.controls[t] - du);
        y = 0.5 * (fp - fm);
      } else {
        y = model.step(nominal.states[t] + dx, nominal.controls[t] + du) -
            nominal.states[t + 1];
      }
      data.Y[t].col(j) = basis ? basis->project(y) : y;
    } catch (...) {
#pragma omp critical(sysid_failure)
      if (idx < first_failure) {
        first_failure = idx;
        failure = std::current_exception();
      }
    }
  }

  if (failure) {
    const int j = static_cast<int>(first_failure / T);
    const int t = static_cast<int>(first_failure % T);
    try {
      std::rethrow_exception(failure);
    } catch (const DivergenceError& e) {
      std::ostringstream msg;
      msg << "identification rollout " << j << " diverged at timestep " << t
          << ": " << e.what();
      throw DivergenceError(msg.str(), t, j);
    }
  }
  return data;
}

LtvModel fit_ltv(const RegressionData& data, double condition_limit) {
  const int T = static_cast<int>(data.X.size());
  const int d = data.state_dim;
  const int nu = data.control_dim;
  if (data.Y.size() != data.X.size())
    throw DimensionError("fit_ltv: X and Y timestep counts differ");

  LtvModel ltv;
  ltv.full_order = data.full_order;
  ltv.A.assign(T, Matrix());
  ltv.B.assign(T, Matrix());
  std::vector<std::string> errors(T);

#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < T; ++t) {
    const Matrix& X = data.X[t];
    const Matrix& Y = data.Y[t];
    if (X.rows() != d + nu || Y.rows() != d || X.cols() != Y.cols()) {
      errors[t] = "inconsistent regression matrix shapes";
      continue;
    }
    const Matrix gram = X * X.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > condition_limit) {
      std::ostringstream msg;
      msg << "timestep " << t << ": cond(X X^T) = "
          << (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity())
          << " exceeds " << condition_limit
          << "; use more rollouts or larger perturbations";
      errors[t] = msg.str();
      continue;
    }
    const Matrix theta_t = X.transpose().householderQr().solve(Y.transpose());
    ltv.A[t] = theta_t.topRows(d).transpose();
    ltv.B[t] = theta_t.bottomRows(nu).transpose();
  }

  for (const auto& e : errors)
    if (!e.empty()) throw RankDeficiencyError("fit_ltv: " + e);
  return ltv;
}

LtvModel fit_full_order_ltv(const Dynamics& model, const Trajectory& nominal,
                            const PerturbationConfig& config) {
  return fit_ltv(generate_rollout_data(model, nominal, nullptr, config),
                 config.condition_limit);
}

void dump_regression_csv(const RegressionData& data, std::ostream& out) {
  out << std::setprecision(17);
  auto block = [&out](const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out << ',';
        out << m(i, j);
      }
      out << '\n';
    }
  };
  for (std::size_t t = 0; t < data.X.size(); ++t) {
    out << "# t=" << t << " X\n";
    block(data.X[t]);
    out << "# t=" << t << " Y\n";
    block(data.Y[t]);
  }
}

}  // namespace roilqr::sysid
