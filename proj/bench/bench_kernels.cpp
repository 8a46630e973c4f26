// Serial reference kernels against the OpenMP ones, plus the identification
// step at one thread versus all of them.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>
#include <random>
#include <vector>

#include "roilqr/harness.hpp"
#include "roilqr/kernels.hpp"
#include "roilqr/pod.hpp"
#include "roilqr/sysid.hpp"

using namespace roilqr;

namespace {

std::vector<double> field(std::size_t n, double amp) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<std::int8_t> half_plane(int n) {
  std::vector<std::int8_t> m(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i * n + j] = j < n / 2 ? 1 : -1;
  return m;
}

template <bool Parallel>
void BM_Burgers(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto in = field(n, 1.0);
  std::vector<double> out(n);
  const double dx = 2.0 / (n - 1), dt = 0.1 * dx * dx / 0.1;
  for (auto _ : state) {
    const bool ok = Parallel ? kernels::burgers_substep(in, out, 0.1, dt, dx, 0.0, 0.0)
                             : kernels::serial::burgers_substep(in, out, 0.1, dt, dx, 0.0, 0.0);
    benchmark::DoNotOptimize(ok);
    std::swap(in, out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

template <bool Parallel>
void BM_AllenCahn(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto in = field(static_cast<std::size_t>(n) * n, 0.5);
  std::vector<double> out(in.size());
  const auto mask = half_plane(n);
  const kernels::PhaseControl c{-1.0, 0.0, -1.0, 0.0};
  for (auto _ : state) {
    const bool ok =
        Parallel ? kernels::allen_cahn_substep(in, out, mask, n, c, 1.0, 0.5, 0.01, 1.0)
                 : kernels::serial::allen_cahn_substep(in, out, mask, n, c, 1.0, 0.5, 0.01, 1.0);
    benchmark::DoNotOptimize(ok);
    std::swap(in, out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(in.size()));
}

template <bool Parallel>
void BM_CahnHilliard(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto in = field(static_cast<std::size_t>(n) * n, 0.5);
  std::vector<double> out(in.size()), chem(in.size());
  const auto mask = half_plane(n);
  const kernels::PhaseControl c{-1.0, 0.0, -1.0, 0.0};
  for (auto _ : state) {
    const bool ok = Parallel ? kernels::cahn_hilliard_substep(in, out, chem, mask, n, c, 1.0,
                                                              0.5, 0.005, 1.0)
                             : kernels::serial::cahn_hilliard_substep(in, out, chem, mask, n, c,
                                                                      1.0, 0.5, 0.005, 1.0);
    benchmark::DoNotOptimize(ok);
    std::swap(in, out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(in.size()));
}

// Reduced identification on the Burgers preset's initial rollout.
void BM_Sysid(benchmark::State& state) {
  const int threads = state.range(0) == 0 ? omp_get_max_threads() : 1;
  const auto cfg = harness::preset("burgers");
  const auto prob = harness::build_problem(cfg, 0.0, 0);
  const auto nominal = rollout(*prob.model, prob.x0, prob.initial_controls);
  const auto basis = pod::method_of_snapshots(pod::snapshot_matrix(nominal));
  sysid::PerturbationConfig pc;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  for (auto _ : state) {
    auto data = sysid::generate_rollout_data(*prob.model, nominal, &basis, pc);
    benchmark::DoNotOptimize(data.X.data());
  }
  omp_set_num_threads(saved);
  state.counters["threads"] = threads;
}

}  // namespace

BENCHMARK(BM_Burgers<false>)->Name("burgers/serial")->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Burgers<true>)->Name("burgers/openmp")->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_AllenCahn<false>)->Name("allen_cahn/serial")->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_AllenCahn<true>)->Name("allen_cahn/openmp")->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_CahnHilliard<false>)->Name("cahn_hilliard/serial")->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_CahnHilliard<true>)->Name("cahn_hilliard/openmp")->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_Sysid)->Name("sysid/one_thread")->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sysid)->Name("sysid/all_threads")->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
