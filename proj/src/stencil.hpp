#pragma once

// Per-point update formulas shared by the serial and OpenMP kernels.

#include <cstdint>
#include <span>

#include "roilqr/kernels.hpp"

namespace roilqr::kernels::detail {

struct BurgersCoeffs {
  double advect;   // dt / (2 dx)
  double diffuse;  // nu dt / dx^2
};

inline BurgersCoeffs burgers_coeffs(double viscosity, double dt, double dx) {
  return {dt / (2.0 * dx), viscosity * dt / (dx * dx)};
}

inline double burgers_point(double um, double u, double up, BurgersCoeffs c) {
  return u - c.advect * u * (up - um) + c.diffuse * (up - 2.0 * u + um);
}

/// Reads `in[j]` with the Dirichlet boundary values substituted.
inline double pinned(std::span<const double> in, int j, double left,
                     double right) {
  const int last = static_cast<int>(in.size()) - 1;
  if (j == 0) return left;
  if (j == last) return right;
  return in[j];
}

inline double laplacian(std::span<const double> f, int n, int i, int j,
                        double inv_dx2) {
  const int up = (i + n - 1) % n;
  const int down = (i + 1) % n;
  const int left = (j + n - 1) % n;
  const int right = (j + 1) % n;
  const double centre = f[i * n + j];
  return (f[up * n + j] + f[down * n + j] + f[i * n + left] +
          f[i * n + right] - 4.0 * centre) *
         inv_dx2;
}

/// dF/dphi for F = phi^4 + temp phi^2 + h phi, with (temp, h) picked by label.
inline double free_energy_slope(double phi, std::int8_t label,
                                PhaseControl c) {
  const double temp = label > 0 ? c.temp_plus : c.temp_minus;
  const double h = label > 0 ? c.h_plus : c.h_minus;
  return 4.0 * phi * phi * phi + 2.0 * temp * phi + h;
}

inline double allen_cahn_point(std::span<const double> in,
                               std::span<const std::int8_t> mask, int n,
                               int i, int j, PhaseControl c, double mobility,
                               double gamma, double dt, double inv_dx2) {
  const int k = i * n + j;
  const double lap = laplacian(in, n, i, j, inv_dx2);
  const double slope = free_energy_slope(in[k], mask[k], c);
  return in[k] - dt * mobility * (slope - gamma * lap);
}

inline double chemical_potential(std::span<const double> in,
                                 std::span<const std::int8_t> mask, int n,
                                 int i, int j, PhaseControl c, double gamma,
                                 double inv_dx2) {
  const int k = i * n + j;
  return free_energy_slope(in[k], mask[k], c) -
         gamma * laplacian(in, n, i, j, inv_dx2);
}

}  // namespace roilqr::kernels::detail
