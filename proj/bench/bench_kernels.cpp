// Serial vs OpenMP timings of the hot kernels.

#include <benchmark/benchmark.h>

#include "adq/experiments.hpp"
#include "adq/invariants.hpp"

using namespace adq;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_QuantizeCorner(benchmark::State& state) {
  Symbol S = model_corner_quarter(1.5);
  RVector y(2);
  y << -2.0, -2.0;
  const ConfigPoint w{S.space->cell_id("R12"), y};
  const auto R = LatticeRegion::open_box({24, 24});
  for (auto _ : state) benchmark::DoNotOptimize(quantize(S, w, 0.5, R, exec_of(state)));
}
BENCHMARK(BM_QuantizeCorner)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ChernEven2D(benchmark::State& state) {
  Symbol S = model_qwz(1.0);
  Mesh m;
  m.factors = {torus_factor(32), torus_factor(32)};
  FieldFn P = [S](const RVector& k) { return fermi_projection(eval_symbol(S, {0, RVector(0)}, k)); };
  for (auto _ : state) benchmark::DoNotOptimize(chern_even(m, P, false, exec_of(state)));
}
BENCHMARK(BM_ChernEven2D)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ChernEven4D(benchmark::State& state) {
  Symbol S = model_qwz(1.0);
  Mesh m;
  for (int i = 0; i < 4; ++i) m.factors.push_back(torus_factor(12));
  FieldFn P = [S](const RVector& k) {
    RVector a(2), b(2);
    a << k[0], k[1];
    b << k[2], k[3];
    return kron(fermi_projection(eval_symbol(S, {0, RVector(0)}, a)),
                fermi_projection(eval_symbol(S, {0, RVector(0)}, b)));
  };
  for (auto _ : state) benchmark::DoNotOptimize(chern_even(m, P, false, exec_of(state)));
}
BENCHMARK(BM_ChernEven4D)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GapCertificate(benchmark::State& state) {
  Symbol S = model_corner_quarter(1.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(gap_on(S, S.space->cells_up_to(1), 32, 21, exec_of(state)));
}
BENCHMARK(BM_GapCertificate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CornerZeroModes(benchmark::State& state) {
  Symbol S = model_corner_quarter(1.5);
  const CornerLattice lat = corner_lattice(S, 16, 2, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(zero_mode_index(lat.H, corner::chiral(), 1e-3, lat.chi));
}
BENCHMARK(BM_CornerZeroModes)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
