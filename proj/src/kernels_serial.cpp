#include <cmath>

#include "roilqr/kernels.hpp"
#include "stencil.hpp"

namespace roilqr::kernels::serial {

bool burgers_substep(std::span<const double> in, std::span<double> out,
                     double viscosity, double dt, double dx, double left,
                     double right) {
  const int n = static_cast<int>(in.size());
  const auto c = detail::burgers_coeffs(viscosity, dt, dx);
  bool finite = std::isfinite(left) && std::isfinite(right);
  out[0] = left;
  out[n - 1] = right;
  for (int j = 1; j < n - 1; ++j) {
    out[j] = detail::burgers_point(detail::pinned(in, j - 1, left, right),
                                   in[j],
                                   detail::pinned(in, j + 1, left, right), c);
    finite = finite && std::isfinite(out[j]);
  }
  return finite;
}

bool allen_cahn_substep(std::span<const double> in, std::span<double> out,
                        std::span<const std::int8_t> mask, int n,
                        PhaseControl control, double mobility, double gamma,
                        double dt, double dx) {
  const double inv_dx2 = 1.0 / (dx * dx);
  bool finite = true;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = detail::allen_cahn_point(in, mask, n, i, j, control,
                                                mobility, gamma, dt, inv_dx2);
      out[i * n + j] = v;
      finite = finite && std::isfinite(v);
    }
  }
  return finite;
}

bool cahn_hilliard_substep(std::span<const double> in, std::span<double> out,
                           std::span<double> chem,
                           std::span<const std::int8_t> mask, int n,
                           PhaseControl control, double mobility, double gamma,
                           double dt, double dx) {
  const double inv_dx2 = 1.0 / (dx * dx);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      chem[i * n + j] = detail::chemical_potential(in, mask, n, i, j, control,
                                                   gamma, inv_dx2);
  bool finite = true;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int k = i * n + j;
      const double v =
          in[k] + dt * mobility * detail::laplacian(chem, n, i, j, inv_dx2);
      out[k] = v;
      finite = finite && std::isfinite(v);
    }
  }
  return finite;
}

}  // namespace roilqr::kernels::serial
