#pragma once

// Independent reference implementations used only by the tests. Nothing
// here calls into the library's numerics.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "roilqr/dynamics.hpp"
#include "roilqr/lqr.hpp"
#include "roilqr/sysid.hpp"

namespace oracle {

using roilqr::Matrix;
using roilqr::Vector;

// Straight-line explicit Burgers substeps, boundary nodes pinned first.
inline std::vector<double> burgers(std::vector<double> u, double left, double right,
                                   double nu, double dt, double dx, int substeps) {
  const std::size_t n = u.size();
  for (int s = 0; s < substeps; ++s) {
    u[0] = left;
    u[n - 1] = right;
    std::vector<double> next(n);
    next[0] = left;
    next[n - 1] = right;
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const double ux = (u[j + 1] - u[j - 1]) / (2 * dx);
      const double uxx = (u[j + 1] - 2 * u[j] + u[j - 1]) / (dx * dx);
      next[j] = u[j] + dt * (nu * uxx - u[j] * ux);
    }
    u = next;
  }
  return u;
}

struct Field {
  int n;
  std::vector<std::vector<double>> v;  // v[row][col]
  double at(int i, int j) const { return v[((i % n) + n) % n][((j % n) + n) % n]; }
};

inline Field to_field(const Vector& x, int n) {
  Field f{n, std::vector<std::vector<double>>(n, std::vector<double>(n))};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f.v[i][j] = x[i * n + j];
  return f;
}

inline Vector from_field(const Field& f) {
  Vector x(f.n * f.n);
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) x[i * f.n + j] = f.v[i][j];
  return x;
}

inline double lap(const Field& f, int i, int j, double dx) {
  return (f.at(i - 1, j) + f.at(i + 1, j) + f.at(i, j - 1) + f.at(i, j + 1) -
          4 * f.at(i, j)) / (dx * dx);
}

// dF/dphi with (temp, h) = u[0], u[1] on +1 labels and u[2], u[3] on -1.
inline double slope(double phi, int label, const Vector& u) {
  const double temp = label > 0 ? u[0] : u[2];
  const double h = label > 0 ? u[1] : u[3];
  return 4 * std::pow(phi, 3) + 2 * temp * phi + h;
}

inline Vector allen_cahn(const Vector& x, const std::vector<std::int8_t>& labels, int n,
                         const Vector& u, double M, double gamma, double dt, double dx,
                         int substeps) {
  Field f = to_field(x, n);
  for (int s = 0; s < substeps; ++s) {
    Field g = f;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g.v[i][j] = f.v[i][j] - dt * M * (slope(f.v[i][j], labels[i * n + j], u) -
                                          gamma * lap(f, i, j, dx));
    f = g;
  }
  return from_field(f);
}

inline Vector cahn_hilliard(const Vector& x, const std::vector<std::int8_t>& labels, int n,
                            const Vector& u, double M, double gamma, double dt, double dx,
                            int substeps) {
  Field f = to_field(x, n);
  for (int s = 0; s < substeps; ++s) {
    Field mu = f;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        mu.v[i][j] = slope(f.v[i][j], labels[i * n + j], u) - gamma * lap(f, i, j, dx);
    Field g = f;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g.v[i][j] = f.v[i][j] + dt * M * lap(mu, i, j, dx);
    f = g;
  }
  return from_field(f);
}

// Left singular vectors and squared singular values via a dense SVD.
struct Svd {
  Matrix U;
  Vector lambda;
};
inline Svd svd(const Matrix& X) {
  Eigen::JacobiSVD<Matrix> s(X, Eigen::ComputeThinU);
  return {s.matrixU(), s.singularValues().array().square()};
}

inline Matrix random_orthonormal(int n, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Matrix A(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) A(i, j) = N(rng);
  Eigen::HouseholderQR<Matrix> qr(A);
  return qr.householderQ() * Matrix::Identity(n, k);
}

inline Matrix random_matrix(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  Matrix A(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) A(i, j) = N(rng);
  return A;
}

inline Matrix random_spd(int n, std::mt19937_64& rng, double shift) {
  const Matrix G = random_matrix(n, n, rng);
  return G * G.transpose() / n + shift * Matrix::Identity(n, n);
}

struct LqInstance {
  roilqr::sysid::LtvModel ltv;
  roilqr::lqr::CostTerms terms;
};

inline LqInstance random_lq(int T, int d, int nu, std::mt19937_64& rng) {
  LqInstance inst;
  for (int t = 0; t < T; ++t) {
    inst.ltv.A.push_back(random_matrix(d, d, rng, 0.5));
    inst.ltv.B.push_back(random_matrix(d, nu, rng));
  }
  for (int t = 0; t <= T; ++t) {
    inst.terms.lx.push_back(random_matrix(d, 1, rng));
    inst.terms.lxx.push_back(random_spd(d, rng, 0.0));
  }
  for (int t = 0; t < T; ++t) inst.terms.lu.push_back(random_matrix(nu, 1, rng));
  inst.terms.luu = random_spd(nu, rng, 0.5);
  return inst;
}

// Objective of the perturbed LQ problem by direct simulation.
inline double lq_objective(const LqInstance& p, const Vector& dU) {
  const int T = p.ltv.horizon();
  const int nu = static_cast<int>(p.terms.luu.rows());
  Vector x = Vector::Zero(p.terms.lx[0].size());
  double J = 0;
  for (int t = 0; t < T; ++t) {
    const Vector u = dU.segment(t * nu, nu);
    J += p.terms.lx[t].dot(x) + 0.5 * x.dot(p.terms.lxx[t] * x) + p.terms.lu[t].dot(u) +
         0.5 * u.dot(p.terms.luu * u);
    x = p.ltv.A[t] * x + p.ltv.B[t] * u;
  }
  return J + p.terms.lx[T].dot(x) + 0.5 * x.dot(p.terms.lxx[T] * x);
}

// Minimizer of a quadratic recovered purely from function values:
// H_ij = J(e_i + e_j) - J(e_i) - J(e_j) + J(0), g_i = J(e_i) - H_ii / 2 - J(0).
inline Vector quadratic_minimizer(const std::function<double(const Vector&)>& J, int n,
                                  Matrix* hessian = nullptr) {
  const double j0 = J(Vector::Zero(n));
  Vector ji(n);
  for (int i = 0; i < n; ++i) ji[i] = J(Vector::Unit(n, i));
  Matrix H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      H(i, j) = H(j, i) = J(Vector::Unit(n, i) + Vector::Unit(n, j)) - ji[i] - ji[j] + j0;
    }
  Vector g(n);
  for (int i = 0; i < n; ++i) g[i] = ji[i] - 0.5 * H(i, i) - j0;
  if (hessian) *hessian = H;
  return -H.ldlt().solve(g);
}

// x_{t+1} = A x + B u.
class LinearPlant final : public roilqr::Dynamics {
 public:
  LinearPlant(Matrix A, Matrix B) : A_(std::move(A)), B_(std::move(B)) {}
  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int control_dim() const override { return static_cast<int>(B_.cols()); }
  Vector step(const Vector& x, const Vector& u) const override { return A_ * x + B_ * u; }
  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }

 private:
  Matrix A_, B_;
};

// Linear plant whose dynamics leave span(Phi) invariant and whose inputs act
// inside it, so a trajectory started in span(Phi) never leaves it.
struct InvariantPlant {
  Matrix phi;
  std::shared_ptr<LinearPlant> plant;
};

inline InvariantPlant invariant_plant(int n, int l, int nu, std::mt19937_64& rng) {
  InvariantPlant p;
  const Matrix Q = random_orthonormal(n, n, rng);
  p.phi = Q.leftCols(l);
  const Matrix perp = Q.rightCols(n - l);
  const Matrix A = p.phi * random_matrix(l, l, rng, 0.4) * p.phi.transpose() +
                   perp * random_matrix(n - l, n - l, rng, 0.4) * perp.transpose();
  const Matrix B = p.phi * random_matrix(l, nu, rng);
  p.plant = std::make_shared<LinearPlant>(A, B);
  return p;
}

}  // namespace oracle
