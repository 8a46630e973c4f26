#pragma once

#include <cstdint>
#include <span>

// Single explicit substeps of the three finite-difference schemes.
//
// Two implementations share every signature: the OpenMP kernels in
// roilqr::kernels and the plain loops in roilqr::kernels::serial. The serial
// ones are the reference the parallel ones are tested against; both evaluate
// the same expressions in the same order, so their results are bit-identical.
//
// Every kernel writes the successor into `out` (which must not alias `in`)
// and returns false if any written value is non-finite.

namespace roilqr::kernels {

/// Grids smaller than this run the OpenMP kernels single-threaded.
inline constexpr int kParallelMinPoints = 4096;

struct PhaseControl {
  double temp_plus, h_plus, temp_minus, h_minus;
};

bool burgers_substep(std::span<const double> in, std::span<double> out,
                     double viscosity, double dt, double dx, double left,
                     double right);

bool allen_cahn_substep(std::span<const double> in, std::span<double> out,
                        std::span<const std::int8_t> mask, int n,
                        PhaseControl control, double mobility, double gamma,
                        double dt, double dx);

/// `chem` is scratch space of the same size as `in`.
bool cahn_hilliard_substep(std::span<const double> in, std::span<double> out,
                           std::span<double> chem,
                           std::span<const std::int8_t> mask, int n,
                           PhaseControl control, double mobility, double gamma,
                           double dt, double dx);

namespace serial {

bool burgers_substep(std::span<const double> in, std::span<double> out,
                     double viscosity, double dt, double dx, double left,
                     double right);

bool allen_cahn_substep(std::span<const double> in, std::span<double> out,
                        std::span<const std::int8_t> mask, int n,
                        PhaseControl control, double mobility, double gamma,
                        double dt, double dx);

bool cahn_hilliard_substep(std::span<const double> in, std::span<double> out,
                           std::span<double> chem,
                           std::span<const std::int8_t> mask, int n,
                           PhaseControl control, double mobility, double gamma,
                           double dt, double dx);

}  // namespace serial
}  // namespace roilqr::kernels
