#pragma once

#include <iosfwd>
#include <string>

#include "roilqr/dynamics.hpp"

namespace roilqr::pod {

struct PodOptions {
  double energy_cutoff = 0.99999;
  /// Eigenvalues of X^T X below rank_tolerance * lambda_1 are discarded.
  double rank_tolerance = 1e-12;
  /// Subtract the snapshot mean before decomposing. Off by default.
  bool center = false;
};

/// Orthonormal POD modes with the spectrum they were cut from.
///
/// `eigenvalues()` holds the nonincreasing eigenvalues of X^T X (the squared
/// singular values of X), all of them, so that the discarded tail energy can
/// be reported exactly. Only the first `rank()` columns are kept as modes.
class ReducedBasis {
 public:
  ReducedBasis() = default;
  /// A negative `tail_energy` means unknown; the eigenvalue tail is used.
  ReducedBasis(Matrix modes, Vector eigenvalues, double captured_energy,
               double tail_energy = -1.0);

  /// Phi = I_n; used by the full-order path.
  static ReducedBasis identity(int n);

  const Matrix& modes() const { return modes_; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  Vector singular_values() const { return eigenvalues_.cwiseSqrt(); }
  double captured_energy() const { return captured_energy_; }
  /// ||X - Phi Phi^T X||_F^2 of the snapshots the basis was built from,
  /// i.e. the sum of the discarded eigenvalues.
  double tail_energy() const;

  int rank() const { return static_cast<int>(modes_.cols()); }
  int full_dim() const { return static_cast<int>(modes_.rows()); }

  /// Phi^T x.
  Vector project(const Vector& state) const;
  /// Phi a.
  Vector lift(const Vector& coords) const;
  /// max_t || x_t - Phi Phi^T x_t ||_2
  double projection_residual(const Trajectory& traj) const;

 private:
  Matrix modes_;
  Vector eigenvalues_;
  double captured_energy_ = 1.0;
  double tail_energy_ = -1.0;
};

/// Columns x_0 ... x_T.
Matrix snapshot_matrix(const Trajectory& traj);

/// Method of snapshots: eigendecompose the small Gram matrix X^T X, recover
/// modes as X V Lambda^{-1/2}, keep the smallest count reaching the energy
/// cutoff. Each mode's largest-magnitude entry is made positive.
ReducedBasis method_of_snapshots(const Matrix& snapshots,
                                 const PodOptions& options = {});

/// Reduced coordinates alpha_t = Phi^T x_t for every state.
std::vector<Vector> project_states(const ReducedBasis& basis,
                                   const std::vector<Vector>& states);

/// Row-major CSV with a "# n_x,l" header line followed by the modes.
void write_basis_csv(const ReducedBasis& basis, std::ostream& out);
ReducedBasis read_basis_csv(std::istream& in);

/// Raw little-endian layout: int32 n_x, int32 l, then n_x*l doubles
/// row-major.
void write_basis_binary(const ReducedBasis& basis, std::ostream& out);
ReducedBasis read_basis_binary(std::istream& in);

}  // namespace roilqr::pod
