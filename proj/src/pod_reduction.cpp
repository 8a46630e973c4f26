#include "roilqr/pod.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "roilqr/errors.hpp"

namespace roilqr::pod {

ReducedBasis::ReducedBasis(Matrix modes, Vector eigenvalues,
                           double captured_energy, double tail_energy)
    : modes_(std::move(modes)),
      eigenvalues_(std::move(eigenvalues)),
      captured_energy_(captured_energy),
      tail_energy_(tail_energy) {}

ReducedBasis ReducedBasis::identity(int n) {
  return ReducedBasis(Matrix::Identity(n, n), Vector::Ones(n), 1.0);
}

double ReducedBasis::tail_energy() const {
  if (tail_energy_ >= 0.0) return tail_energy_;
  const auto l = static_cast<Eigen::Index>(rank());
  if (eigenvalues_.size() <= l) return 0.0;
  return eigenvalues_.tail(eigenvalues_.size() - l).sum();
}

Vector ReducedBasis::project(const Vector& state) const {
  if (state.size() != modes_.rows())
    throw DimensionError("project: state dimension does not match basis");
  return modes_.transpose() * state;
}

Vector ReducedBasis::lift(const Vector& coords) const {
  if (coords.size() != modes_.cols())
    throw DimensionError("lift: coordinate count does not match basis");
  return modes_ * coords;
}

double ReducedBasis::projection_residual(const Trajectory& traj) const {
  double eps = 0.0;
  for (const auto& x : traj.states)
    eps = std::max(eps, (x - lift(project(x))).norm());
  return eps;
}

Matrix snapshot_matrix(const Trajectory& traj) {
  if (traj.states.empty()) return Matrix();
  Matrix X(traj.states.front().size(), traj.states.size());
  for (std::size_t t = 0; t < traj.states.size(); ++t)
    X.col(static_cast<Eigen::Index>(t)) = traj.states[t];
  return X;
}

ReducedBasis method_of_snapshots(const Matrix& snapshots,
                                 const PodOptions& options) {
  if (!(options.energy_cutoff > 0.0 && options.energy_cutoff <= 1.0))
    throw ConfigError("energy cutoff must lie in (0, 1]");
  if (snapshots.cols() < 1 || snapshots.rows() < 1)
    throw DegenerateInputError("snapshot matrix is empty");

  Matrix X = snapshots;
  if (options.center) X.colwise() -= X.rowwise().mean();
  if (X.norm() == 0.0)
    throw DegenerateInputError("snapshot matrix is identically zero");

  const Matrix gram = X.transpose() * X;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the snapshot Gram matrix failed");

  // Eigen returns ascending order.
  const Eigen::Index m = gram.rows();
  Vector lambda = eig.eigenvalues().reverse().cwiseMax(0.0);
  Matrix V = eig.eigenvectors().rowwise().reverse();

  const double floor = options.rank_tolerance * lambda[0];
  Eigen::Index rank = 0;
  while (rank < m && lambda[rank] > floor) ++rank;

  const double total = lambda.head(rank).sum();
  Eigen::Index keep = rank;
  double captured = 1.0;
  if (options.energy_cutoff < 1.0) {
    double cum = 0.0;
    for (Eigen::Index i = 0; i < rank; ++i) {
      cum += lambda[i];
      if (cum / total >= options.energy_cutoff) {
        keep = i + 1;
        break;
      }
    }
    captured = std::min(1.0, lambda.head(keep).sum() / total);
  }

  Matrix U = X * V.leftCols(keep) *
             lambda.head(keep).cwiseSqrt().cwiseInverse().asDiagonal();

  // The Gram route loses orthogonality for small eigenvalues; one Householder
  // pass restores it without rotating well-resolved modes.
  Eigen::HouseholderQR<Matrix> qr(U);
  Matrix Q = qr.householderQ() * Matrix::Identity(U.rows(), keep);
  const Matrix R = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < keep; ++j) {
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
    Eigen::Index imax = 0;
    Q.col(j).cwiseAbs().maxCoeff(&imax);
    if (Q(imax, j) < 0.0) Q.col(j) *= -1.0;
  }

  // Differences of Gram eigenvalues carry eps * lambda_0 absolute error, so
  // the tail is measured on the residual itself.
  const double tail = (X - Q * (Q.transpose() * X)).squaredNorm();
  return ReducedBasis(std::move(Q), std::move(lambda), captured, tail);
}

std::vector<Vector> project_states(const ReducedBasis& basis,
                                   const std::vector<Vector>& states) {
  std::vector<Vector> coords;
  coords.reserve(states.size());
  for (const auto& x : states) coords.push_back(basis.project(x));
  return coords;
}

void write_basis_csv(const ReducedBasis& basis, std::ostream& out) {
  const Matrix& phi = basis.modes();
  out << "# " << phi.rows() << ',' << phi.cols() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      if (j) out << ',';
      out << phi(i, j);
    }
    out << '\n';
  }
}

ReducedBasis read_basis_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw ConfigError("basis CSV: missing '# n_x,l' header");
  long rows = 0, cols = 0;
  char comma = 0;
  std::istringstream header(line.substr(2));
  if (!(header >> rows >> comma >> cols) || comma != ',' || rows < 1 || cols < 1)
    throw ConfigError("basis CSV: malformed header");
  Matrix phi(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line))
      throw ConfigError("basis CSV: fewer rows than declared");
    std::istringstream row(line);
    for (long j = 0; j < cols; ++j) {
      std::string cell;
      if (!std::getline(row, cell, ','))
        throw ConfigError("basis CSV: short row " + std::to_string(i));
      phi(i, j) = std::stod(cell);
    }
  }
  return ReducedBasis(std::move(phi), Vector(), 1.0);
}

void write_basis_binary(const ReducedBasis& basis, std::ostream& out) {
  const Matrix& phi = basis.modes();
  const std::int32_t dims[2] = {static_cast<std::int32_t>(phi.rows()),
                                static_cast<std::int32_t>(phi.cols())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      rm = phi;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

ReducedBasis read_basis_binary(std::istream& in) {
  std::int32_t dims[2] = {0, 0};
  if (!in.read(reinterpret_cast<char*>(dims), sizeof(dims)) || dims[0] < 1 ||
      dims[1] < 1)
    throw ConfigError("basis binary: malformed header");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
      dims[0], dims[1]);
  if (!in.read(reinterpret_cast<char*>(rm.data()),
               static_cast<std::streamsize>(rm.size() * sizeof(double))))
    throw ConfigError("basis binary: truncated payload");
  return ReducedBasis(Matrix(rm), Vector(), 1.0);
}

}  // namespace roilqr::pod
