#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "roilqr/errors.hpp"
#include "roilqr/kernels.hpp"
#include "roilqr/pde.hpp"

using namespace roilqr;
using namespace roilqr::pde;

namespace {

Vector sine_profile(int n) {
  Vector u(n);
  const double dx = 2.0 / (n - 1);
  for (int i = 0; i < n; ++i) u[i] = std::sin(std::numbers::pi * (-1.0 + i * dx));
  return u;
}

Vector random_field(int size, std::uint64_t seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  Vector v(size);
  for (auto& x : v) x = U(rng);
  return v;
}

Vector random_labels_control(std::uint64_t seed) { return random_field(4, seed, 1.0); }

PhaseTargetMask random_mask(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int8_t> labels(n * n);
  for (auto& l : labels) l = (rng() & 1) ? 1 : -1;
  return PhaseTargetMask(labels);
}

double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Burgers, ZeroIsFixedPoint) {
  BurgersModel m(Grid::interval(50), {});
  EXPECT_EQ(m.step(Vector::Zero(50), Vector::Zero(2)), Vector::Zero(50));
}

TEST(Burgers, ConstantFieldWithMatchingBoundaries) {
  BurgersModel m(Grid::interval(40), {});
  const Vector u = Vector::Constant(40, 0.7);
  EXPECT_LT(max_abs_diff(m.step(u, Vector::Constant(2, 0.7)), u), 1e-15);
}

TEST(Burgers, MatchesScalarReference) {
  const auto grid = Grid::interval(100);
  PdeParams p;
  p.viscosity = 0.01;
  BurgersModel m(grid, p);
  const auto& rp = m.params();
  const Vector u0 = sine_profile(100);
  const Vector u = m.step(u0, Vector::Zero(2));
  const auto ref = oracle::burgers(std::vector<double>(u0.data(), u0.data() + 100), 0.0, 0.0,
                                   rp.viscosity, rp.dt, grid.spacing, rp.substeps);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(u[i], ref[i], 1e-12);
}

TEST(Burgers, DissipatesEnergyWithZeroBoundaries) {
  PdeParams p;
  p.viscosity = 0.05;
  BurgersModel m(Grid::interval(80), p);
  Vector u = sine_profile(80);
  u[0] = u[79] = 0.0;
  double energy = u.squaredNorm();
  for (int t = 0; t < 20; ++t) {
    u = m.step(u, Vector::Zero(2));
    EXPECT_LE(u.squaredNorm(), energy);
    energy = u.squaredNorm();
  }
}

TEST(Burgers, RejectsUnstableTimeStep) {
  PdeParams p;
  p.viscosity = 0.01;
  const auto grid = Grid::interval(100);
  p.dt = 2.0 * burgers_dt_limit(grid, p);
  EXPECT_THROW(BurgersModel(grid, p), ConfigError);
  p.dt = -1.0;
  EXPECT_NO_THROW(BurgersModel(grid, p));
}

TEST(Burgers, RejectsBadParameters) {
  PdeParams p;
  p.viscosity = 0.0;
  EXPECT_THROW(BurgersModel(Grid::interval(20), p), ConfigError);
  EXPECT_THROW(BurgersModel(Grid::interval(3), {}), ConfigError);
  p = {};
  p.substeps = 0;
  EXPECT_THROW(BurgersModel(Grid::interval(20), p), ConfigError);
}

TEST(Burgers, WrongSizesThrow) {
  BurgersModel m(Grid::interval(20), {});
  EXPECT_THROW(m.step(Vector::Zero(19), Vector::Zero(2)), DimensionError);
  EXPECT_THROW(m.step(Vector::Zero(20), Vector::Zero(3)), DimensionError);
}

TEST(AllenCahn, ZeroFieldStaysZeroWithoutField) {
  AllenCahnModel m(Grid::lattice(10), {}, PhaseTargetMask::half_plane(10));
  Vector u(4);
  u << 3.0, 0.0, -1.5, 0.0;
  EXPECT_EQ(m.step(Vector::Zero(100), u), Vector::Zero(100));
}

TEST(AllenCahn, PurePhaseIsEquilibriumAtTempMinusTwo) {
  AllenCahnModel m(Grid::lattice(10), {}, PhaseTargetMask::uniform(100, 1));
  Vector u(4);
  u << -2.0, 0.0, -2.0, 0.0;
  const Vector one = Vector::Ones(100);
  EXPECT_LT(max_abs_diff(m.step(one, u), one), 1e-15);
}

TEST(AllenCahn, MatchesPointwiseOracle) {
  const int n = 8;
  const auto mask = random_mask(n, 3);
  PdeParams p;
  p.dt = 0.01;
  p.substeps = 5;
  AllenCahnModel m(Grid::lattice(n), p, mask);
  const Vector x = random_field(n * n, 11);
  const Vector u = random_labels_control(12);
  const auto& rp = m.params();
  const Vector ref = oracle::allen_cahn(x, mask.labels(), n, u, rp.mobility, rp.gradient_coeff,
                                        rp.dt, 1.0, rp.substeps);
  EXPECT_LT(max_abs_diff(m.step(x, u), ref), 1e-12);
}

TEST(CahnHilliard, ZeroFieldStaysZeroWithoutField) {
  CahnHilliardModel m(Grid::lattice(10), {}, PhaseTargetMask::half_plane(10));
  Vector u(4);
  u << 1.0, 0.0, -1.0, 0.0;
  EXPECT_EQ(m.step(Vector::Zero(100), u), Vector::Zero(100));
}

TEST(CahnHilliard, MatchesStencilOracle) {
  const int n = 8;
  const auto mask = random_mask(n, 5);
  PdeParams p;
  p.dt = 0.002;
  p.substeps = 5;
  CahnHilliardModel m(Grid::lattice(n), p, mask);
  const Vector x = random_field(n * n, 21);
  const Vector u = random_labels_control(22);
  const auto& rp = m.params();
  const Vector ref = oracle::cahn_hilliard(x, mask.labels(), n, u, rp.mobility,
                                           rp.gradient_coeff, rp.dt, 1.0, rp.substeps);
  EXPECT_LT(max_abs_diff(m.step(x, u), ref), 1e-12);
}

TEST(CahnHilliard, ConservesMass) {
  const int n = 16;
  PdeParams p;
  p.dt = 0.002;
  CahnHilliardModel m(Grid::lattice(n), p, random_mask(n, 7));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Vector x = random_field(n * n, 100 + seed);
    for (int t = 0; t < 5; ++t) {
      const Vector u = random_field(4, 200 + seed * 10 + t, 3.0);
      const Vector y = m.step(x, u);
      EXPECT_LE(std::abs(y.sum() - x.sum()), 1e-10 * n * n);
      x = y;
    }
  }
}

TEST(Phase, RejectsUnstableAndMismatchedSetups) {
  PdeParams p;
  p.dt = 1.0;
  EXPECT_THROW(AllenCahnModel(Grid::lattice(10), p, PhaseTargetMask::half_plane(10)), ConfigError);
  EXPECT_THROW(CahnHilliardModel(Grid::lattice(10), p, PhaseTargetMask::half_plane(10)), ConfigError);
  EXPECT_THROW(AllenCahnModel(Grid::lattice(10), {}, PhaseTargetMask::half_plane(8)),
               std::exception);
  EXPECT_THROW(AllenCahnModel(Grid::interval(10), {}, PhaseTargetMask::uniform(10)), ConfigError);
  EXPECT_THROW(PhaseTargetMask(std::vector<std::int8_t>{1, 0, -1}), ConfigError);
}

TEST(Masks, HalfPlaneAndDisk) {
  const auto h = PhaseTargetMask::half_plane(4);
  EXPECT_EQ(h.labels()[0], 1);
  EXPECT_EQ(h.labels()[3], -1);
  EXPECT_DOUBLE_EQ(h.as_state().sum(), 0.0);
  const auto d = PhaseTargetMask::centered_disk(9, 2.0);
  EXPECT_EQ(d.labels()[4 * 9 + 4], 1);
  EXPECT_EQ(d.labels()[0], -1);
}

// Locality: one substep moves information at most one stencil radius.
TEST(Locality, StencilRadius) {
  PdeParams p;
  p.substeps = 1;
  p.dt = 1e-4;
  {
    BurgersModel m(Grid::interval(30), p);
    Vector a = sine_profile(30), b = a;
    b[15] += 1e-3;
    const Vector d = m.step(a, Vector::Zero(2)) - m.step(b, Vector::Zero(2));
    for (int i = 0; i < 30; ++i)
      if (std::abs(i - 15) > 1) EXPECT_EQ(d[i], 0.0) << i;
  }
  const int n = 12;
  auto check2d = [&](const Dynamics& m, int radius) {
    Vector a = random_field(n * n, 9), b = a;
    const int c = 6 * n + 6;
    b[c] += 1e-3;
    const Vector u = random_field(4, 10);
    const Vector d = m.step(a, u) - m.step(b, u);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::abs(i - 6) + std::abs(j - 6) > radius) EXPECT_EQ(d[i * n + j], 0.0);
  };
  check2d(AllenCahnModel(Grid::lattice(n), p, random_mask(n, 1)), 1);
  check2d(CahnHilliardModel(Grid::lattice(n), p, random_mask(n, 1)), 2);
}

TEST(Kernels, SerialAndParallelAreBitIdentical) {
  // Above the threshold so the OpenMP path really runs.
  const int n1 = 6000;
  PdeParams pb;
  pb.substeps = 3;
  BurgersModel bp(Grid::interval(n1), pb, Backend::Parallel);
  BurgersModel bs(Grid::interval(n1), pb, Backend::Serial);
  const Vector u = sine_profile(n1);
  Vector c(2);
  c << 0.3, -0.2;
  EXPECT_EQ(bp.step(u, c), bs.step(u, c));

  const int n = 80;
  ASSERT_GE(n * n, kernels::kParallelMinPoints);
  const auto mask = random_mask(n, 2);
  PdeParams pp;
  pp.dt = 0.002;
  pp.substeps = 3;
  const Vector x = random_field(n * n, 4);
  const Vector uc = random_field(4, 5);
  EXPECT_EQ(AllenCahnModel(Grid::lattice(n), pp, mask, Backend::Parallel).step(x, uc),
            AllenCahnModel(Grid::lattice(n), pp, mask, Backend::Serial).step(x, uc));
  EXPECT_EQ(CahnHilliardModel(Grid::lattice(n), pp, mask, Backend::Parallel).step(x, uc),
            CahnHilliardModel(Grid::lattice(n), pp, mask, Backend::Serial).step(x, uc));
}

TEST(Kernels, ReportNonFiniteOutput) {
  std::vector<double> in = {0.0, 1e300, -1e300, 0.0}, out(4);
  EXPECT_FALSE(kernels::serial::burgers_substep(in, out, 0.1, 1.0, 0.1, 0.0, 0.0));
  EXPECT_FALSE(kernels::burgers_substep(in, out, 0.1, 1.0, 0.1, 0.0, 0.0));
}

TEST(Rollout, EmptyHorizon) {
  BurgersModel m(Grid::interval(10), {});
  const auto tr = rollout(m, sine_profile(10), {});
  EXPECT_EQ(tr.states.size(), 1u);
  EXPECT_EQ(tr.horizon(), 0);
}

TEST(Rollout, ZeroStaysZero) {
  BurgersModel m(Grid::interval(100), {});
  const auto tr = rollout(m, Vector::Zero(100), std::vector<Vector>(20, Vector::Zero(2)));
  ASSERT_EQ(tr.states.size(), 21u);
  for (const auto& x : tr.states) EXPECT_EQ(x, Vector::Zero(100));
}

TEST(Rollout, EqualsChainedSteps) {
  BurgersModel m(Grid::interval(100), {});
  std::vector<Vector> us(5, Vector::Zero(2));
  const auto tr = rollout(m, sine_profile(100), us);
  Vector x = sine_profile(100);
  for (int t = 0; t < 5; ++t) {
    x = m.step(x, us[t]);
    EXPECT_EQ(tr.states[t + 1], x);
  }
}

TEST(Rollout, DivergenceNamesTheStep) {
  PdeParams p;
  p.dt = 0.05;
  p.substeps = 50;
  AllenCahnModel m(Grid::lattice(4), p, PhaseTargetMask::uniform(16));
  std::vector<Vector> us(3, Vector::Zero(4));
  us[2] << 0, -1e6, 0, -1e6;
  try {
    rollout(m, Vector::Zero(16), us);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.step(), 2);
  }
}

TEST(Determinism, RepeatedStepsAreBitIdentical) {
  CahnHilliardModel m(Grid::lattice(12), {}, random_mask(12, 8));
  const Vector x = random_field(144, 1), u = random_field(4, 2);
  EXPECT_EQ(m.step(x, u), m.step(x, u));
}
